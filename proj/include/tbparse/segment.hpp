#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tbparse {

/// Prefix tree over code points.
class TrieLexicon {
 public:
  TrieLexicon();
  /// Returns false for empty words and duplicates.
  bool insert(std::string_view word);
  bool contains(std::string_view word) const;
  /// Length in code points of the longest entry that prefixes cps[pos..]; 0 if none.
  std::size_t longest_prefix(const std::u32string& cps, std::size_t pos) const;
  /// Longest entry that prefixes text, or "" if none.
  std::string longest_prefix(std::string_view text) const;
  std::size_t size() const noexcept { return entries_; }
  std::size_t skipped_empty() const noexcept { return skipped_empty_; }
  void note_skipped_empty() { ++skipped_empty_; }

 private:
  struct Node {
    std::map<char32_t, int> next;
    bool terminal = false;
  };
  std::vector<Node> nodes_;
  std::size_t entries_ = 0;
  std::size_t skipped_empty_ = 0;
};

/// Duplicates collapse; empty words are skipped and counted in skipped_empty().
TrieLexicon build_trie(const std::vector<std::string>& words);

/// One word per line (UTF-8); surrounding whitespace is ignored.
std::vector<std::string> read_word_list(const std::string& path);

/// Greedy forward maximum matching; unmatched positions become one-code-point
/// tokens. The tokens concatenate to text.
std::vector<std::string> max_match(std::string_view text, const TrieLexicon& lex);

}  // namespace tbparse
