#include "tbparse/segment.hpp"

#include <fstream>
#include <stdexcept>

#include "tbparse/unicode.hpp"

namespace tbparse {

TrieLexicon::TrieLexicon() : nodes_(1) {}

bool TrieLexicon::insert(std::string_view word) {
  if (word.empty()) return false;
  int node = 0;
  for (char32_t cp : unicode::decode(word)) {
    auto it = nodes_[static_cast<std::size_t>(node)].next.find(cp);
    if (it == nodes_[static_cast<std::size_t>(node)].next.end()) {
      const int fresh = static_cast<int>(nodes_.size());
      nodes_[static_cast<std::size_t>(node)].next.emplace(cp, fresh);
      nodes_.emplace_back();
      node = fresh;
    } else {
      node = it->second;
    }
  }
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.terminal) return false;
  n.terminal = true;
  ++entries_;
  return true;
}

bool TrieLexicon::contains(std::string_view word) const {
  const auto cps = unicode::decode(word);
  return !cps.empty() && longest_prefix(cps, 0) == cps.size();
}

std::size_t TrieLexicon::longest_prefix(const std::u32string& cps, std::size_t pos) const {
  std::size_t best = 0;
  int node = 0;
  for (std::size_t i = pos; i < cps.size(); ++i) {
    const auto& next = nodes_[static_cast<std::size_t>(node)].next;
    const auto it = next.find(cps[i]);
    if (it == next.end()) break;
    node = it->second;
    if (nodes_[static_cast<std::size_t>(node)].terminal) best = i - pos + 1;
  }
  return best;
}

std::string TrieLexicon::longest_prefix(std::string_view text) const {
  const auto cps = unicode::decode(text);
  return unicode::encode(std::u32string_view(cps).substr(0, longest_prefix(cps, 0)));
}

TrieLexicon build_trie(const std::vector<std::string>& words) {
  TrieLexicon lex;
  for (const auto& w : words) {
    if (w.empty()) {
      lex.note_skipped_empty();
      continue;
    }
    lex.insert(w);
  }
  return lex;
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      words.emplace_back();
      continue;
    }
    const auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  return words;
}

std::vector<std::string> max_match(std::string_view text, const TrieLexicon& lex) {
  // Byte offsets are kept so that tokens are exact substrings of the input,
  // including any invalid UTF-8 bytes.
  std::vector<std::string> out;
  std::vector<std::size_t> offset;
  const auto cps = unicode::decode(text, &offset);
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t len = lex.longest_prefix(cps, i);
    if (len == 0) len = 1;
    out.emplace_back(text.substr(offset[i], offset[i + len] - offset[i]));
    i += len;
  }
  return out;
}

}  // namespace tbparse
