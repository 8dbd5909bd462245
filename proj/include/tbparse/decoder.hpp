#pragma once

#include <string>
#include <vector>

#include "tbparse/model.hpp"

namespace tbparse {

/// Highest-scoring legal transition. Ties go to the earlier move in
/// SHIFT < LEFT_ARC < RIGHT_ARC < SWAP, then to the lower label index.
transitions::Transition best_transition(const transitions::MoveSet& legal, const nn::Vector& transition_scores,
                                        const nn::Vector& label_scores, int label_count);

/// Greedy parse; heads and labels of the returned copy are replaced. Forms are
/// transliterated with the model's map only for lookup.
Sentence parse_sentence(const ParserModel& model, const Sentence& sentence, int tb_row);
Sentence parse_sentence(const ParserModel& model, const Sentence& sentence, const std::string& treebank);

/// Parses sentences concurrently; the result does not depend on `threads`.
Treebank parse_treebank(const ParserModel& model, const Treebank& input, const std::string& treebank, int threads = 1);

/// Percentage of tokens with correct head and universal relation (same tokenization).
double attachment_las(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted);

}  // namespace tbparse
