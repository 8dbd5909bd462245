#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tbparse {

/// Error raised while reading CoNLL-U; carries the 1-based line number.
class ConlluError : public std::runtime_error {
 public:
  ConlluError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using Feature = std::pair<std::string, std::string>;
/// Attribute=value pairs, kept in canonical (case-insensitive attribute) order.
using Features = std::vector<Feature>;

struct Token {
  int id = 0;
  std::string form = "_";
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  Features feats;
  std::optional<int> head;
  std::optional<std::string> deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Token&) const = default;
};

struct MultiwordSpan {
  int start = 0;
  int end = 0;
  std::string surface_form;
  std::string misc = "_";

  bool operator==(const MultiwordSpan&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<MultiwordSpan> mwt_spans;
  std::vector<std::string> comments;  // verbatim, including the leading '#'

  std::size_t size() const noexcept { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Treebank {
  std::string id;
  std::vector<Sentence> sentences;

  bool operator==(const Treebank&) const = default;
};

Treebank parse_conllu(std::string_view text, std::string id = {});
std::string write_conllu(const Treebank& tb);
std::string write_sentence(const Sentence& s);

Treebank read_conllu_file(const std::string& path, std::string id = {});
void write_conllu_file(const std::string& path, const Treebank& tb);

/// Copies the Unicode-lowercased form into the lemma column.
Sentence lemma_fallback(Sentence s);

Features parse_features(std::string_view column);
std::string format_features(const Features& feats);
void canonicalize(Features& feats);

/// Universal part of a dependency relation ("nmod:poss" -> "nmod").
std::string_view universal_relation(std::string_view deprel);

/// Returns an explanation when the head relation is not a single-rooted tree
/// (unset heads, cycles, zero or several root attachments); nullopt when valid.
std::optional<std::string> tree_violation(const Sentence& s);
inline bool is_tree(const Sentence& s) { return !tree_violation(s).has_value(); }

}  // namespace tbparse
