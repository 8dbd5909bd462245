#pragma once
// CoNLL-2018 style evaluation of a system treebank against gold.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tbparse/conllu.hpp"

namespace tbparse::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relations whose dependents count as function words for MLAS.
const std::vector<std::string>& functional_relations();
/// Features compared by MLAS.
const std::vector<std::string>& mlas_features();

struct Span {
  int begin = 0;  // code-point offsets into the whitespace-free text
  int end = 0;
  bool operator==(const Span&) const = default;
};

struct Word {
  const Token* token = nullptr;
  Span span;
  bool multiword = false;
  int head = -1;  // index of the head word on the same side, -1 for the root
};

struct Side {
  std::vector<Word> words;
  std::vector<Span> tokens;     // surface tokens (multiword tokens count once)
  std::vector<Span> sentences;
  std::u32string text;
};

struct TokenAlignment {
  Side gold;
  Side system;
  std::vector<int> system_to_gold;  // -1 when unaligned
  std::vector<int> gold_to_system;
  std::size_t aligned() const;
};

/// Throws EvalError when the whitespace-free texts differ. Both treebanks must
/// outlive the alignment.
TokenAlignment align_tokens(const Treebank& system, const Treebank& gold);

struct Score {
  std::size_t correct = 0;
  std::size_t system = 0;
  std::size_t gold = 0;
  double precision() const;  // percent; 0 when nothing was predicted
  double recall() const;
  double f1() const;
};

Score score_las(const TokenAlignment& a);
Score score_mlas(const TokenAlignment& a);
enum class Column { Upos, Ufeats };
Score score_tags(const TokenAlignment& a, Column column);

struct SegmentationScores {
  Score tokens;
  Score sentences;
  Score words;
};
SegmentationScores score_segmentation(const TokenAlignment& a);
SegmentationScores score_segmentation(const Treebank& system, const Treebank& gold);

struct EvalReport {
  std::vector<std::pair<std::string, Score>> metrics;  // fixed order
  const Score& at(const std::string& name) const;
};

EvalReport evaluate(const Treebank& system, const Treebank& gold);
/// "Metric | Precision | Recall | F1" table with two decimals.
std::string format_report(const EvalReport& r);
/// "metric.precision=..." lines.
std::string format_report_kv(const EvalReport& r);

}  // namespace tbparse::eval
