#pragma once
// Synthetic treebanks: a small probabilistic dependency grammar for training
// experiments, and unconstrained random annotations for format/eval checks.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tbparse/conllu.hpp"
#include "tbparse/rng.hpp"

namespace tbparse::synth {

/// Heads indexed 1..n (index 0 is -1); uniform random recursive tree, usually non-projective.
std::vector<int> random_tree(int n, Rng& rng);
/// Random projective tree built from recursively split intervals.
std::vector<int> random_projective_tree(int n, Rng& rng);

struct GrammarOptions {
  int words_per_class = 30;
  double nonprojective_rate = 0.1;  // chance that a subject's adjective moves behind the verb
  int max_length = 25;
};

struct Grammar {
  GrammarOptions options;
  std::map<std::string, std::vector<std::string>> lexicon;  // UPOS -> forms
};

Grammar make_grammar(std::uint64_t seed, const GrammarOptions& options = {});
Sentence sample_sentence(const Grammar& g, Rng& rng);
Treebank sample_treebank(const Grammar& g, std::size_t sentences, Rng& rng, const std::string& id);

struct RandomTreebankOptions {
  std::size_t sentences = 10;
  int max_length = 12;
  double multiword_rate = 0.1;
  bool comments = true;
};

/// Arbitrary but valid annotation: random trees, labels, tags, features and multiword tokens.
Treebank random_treebank(Rng& rng, const RandomTreebankOptions& options = {});

}  // namespace tbparse::synth
