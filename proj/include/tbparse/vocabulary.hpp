#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tbparse/conllu.hpp"

namespace tbparse {

/// String-to-index table with training frequencies. When built with an OOV
/// entry, index 0 is reserved for it and unknown keys map there.
class Lexicon {
 public:
  static constexpr int kOov = 0;
  explicit Lexicon(bool with_oov = true);

  int add(std::string_view key, int count = 1);
  std::optional<int> find(std::string_view key) const;
  /// find() or the OOV index; throws when the lexicon has no OOV entry.
  int index(std::string_view key) const;

  const std::string& key(int i) const { return keys_.at(static_cast<std::size_t>(i)); }
  int frequency(int i) const { return freq_.at(static_cast<std::size_t>(i)); }
  int size() const noexcept { return static_cast<int>(keys_.size()); }
  bool has_oov() const noexcept { return with_oov_; }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<int>& frequencies() const noexcept { return freq_; }

  static Lexicon from_entries(bool with_oov, std::vector<std::string> keys, std::vector<int> freq);

 private:
  bool with_oov_;
  std::vector<std::string> keys_;
  std::vector<int> freq_;
  std::unordered_map<std::string, int> index_;
};

struct Vocabulary {
  Lexicon words;
  Lexicon chars;
  Lexicon upos;
  Lexicon labels{false};
  Lexicon treebanks{false};
  Lexicon feats;
};

using TransliterationMap = std::map<char32_t, char32_t>;
using ProxyMap = std::map<std::string, std::string>;

std::string transliterate(std::string_view form, const TransliterationMap& map);
/// Copy of s whose forms are transliterated; this is the lookup view, the
/// original sentence keeps its forms for output.
Sentence transliterate(Sentence s, const TransliterationMap& map);

/// Reads "src<TAB or space>dst" lines of single code points; '#' starts a comment.
TransliterationMap load_transliteration(const std::string& path);
TransliterationMap parse_transliteration(std::string_view text);

/// Key used for the optional morphological-feature embedding.
std::string feature_bundle(const Token& t);

/// Vocabulary over the union of the given sentences; keys appear in first-seen order.
void add_to_vocabulary(Vocabulary& vocab, const std::vector<Sentence>& sentences, const TransliterationMap& translit);

/// Word vectors in word2vec text format.
struct PretrainedTable {
  int dim = 0;
  bool frozen = false;
  std::vector<std::string> words;
  Eigen::MatrixXd vectors;  // words.size() x dim

  std::optional<int> find(std::string_view word) const;
  std::size_t size() const noexcept { return words.size(); }
  /// Appends entries of other that are not present yet (first table wins).
  void merge(const PretrainedTable& other);
  void rebuild_index();

 private:
  std::unordered_map<std::string, int> index_;
};

struct PretrainedLoad {
  PretrainedTable table;
  std::size_t skipped_rows = 0;
};

/// Loads "word v1 .. vdim" lines after an optional "<count> <dim>" header.
/// dim == 0 takes the dimension from the header or the first row. Rows of a
/// different dimension are skipped and counted.
PretrainedLoad load_pretrained(const std::string& path, int dim = 0);
PretrainedLoad parse_pretrained(std::string_view text, int dim = 0);

}  // namespace tbparse
