#include "tbparse/vocabulary.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tbparse/unicode.hpp"

namespace tbparse {

Lexicon::Lexicon(bool with_oov) : with_oov_(with_oov) {
  if (with_oov_) {
    keys_.push_back("<oov>");
    freq_.push_back(0);
  }
}

int Lexicon::add(std::string_view key, int count) {
  std::string k(key);
  if (auto it = index_.find(k); it != index_.end()) {
    freq_[static_cast<std::size_t>(it->second)] += count;
    return it->second;
  }
  const int idx = static_cast<int>(keys_.size());
  keys_.push_back(k);
  freq_.push_back(count);
  index_.emplace(std::move(k), idx);
  return idx;
}

std::optional<int> Lexicon::find(std::string_view key) const {
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Lexicon::index(std::string_view key) const {
  if (const auto i = find(key)) return *i;
  if (!with_oov_) throw std::out_of_range("unknown entry '" + std::string(key) + "'");
  return kOov;
}

Lexicon Lexicon::from_entries(bool with_oov, std::vector<std::string> keys, std::vector<int> freq) {
  if (keys.size() != freq.size()) throw std::invalid_argument("lexicon: keys/frequencies size mismatch");
  Lexicon lex(false);
  lex.with_oov_ = with_oov;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!(with_oov && i == 0)) lex.index_.emplace(keys[i], static_cast<int>(i));
  }
  lex.keys_ = std::move(keys);
  lex.freq_ = std::move(freq);
  return lex;
}

std::string transliterate(std::string_view form, const TransliterationMap& map) {
  if (map.empty()) return std::string(form);
  std::u32string cps = unicode::decode(form);
  for (char32_t& cp : cps) {
    if (const auto it = map.find(cp); it != map.end()) cp = it->second;
  }
  return unicode::encode(cps);
}

Sentence transliterate(Sentence s, const TransliterationMap& map) {
  for (Token& t : s.tokens) t.form = transliterate(t.form, map);
  return s;
}

TransliterationMap parse_transliteration(std::string_view text) {
  TransliterationMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string src, dst;
    if (!(fields >> src)) continue;
    if (!(fields >> dst)) throw std::runtime_error("transliteration line " + std::to_string(line_no) + ": missing target");
    const auto a = unicode::decode(src);
    const auto b = unicode::decode(dst);
    if (a.size() != 1 || b.size() != 1) {
      throw std::runtime_error("transliteration line " + std::to_string(line_no) + ": expected single code points");
    }
    map[a[0]] = b[0];
  }
  return map;
}

TransliterationMap load_transliteration(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_transliteration(buf.str());
}

std::string feature_bundle(const Token& t) { return format_features(t.feats); }

void add_to_vocabulary(Vocabulary& vocab, const std::vector<Sentence>& sentences, const TransliterationMap& translit) {
  for (const Sentence& s : sentences) {
    for (const Token& t : s.tokens) {
      const std::string key = transliterate(t.form, translit);
      vocab.words.add(key);
      for (const auto& ch : unicode::code_points(key)) vocab.chars.add(ch);
      vocab.upos.add(t.upos);
      vocab.feats.add(feature_bundle(t));
      if (t.deprel) vocab.labels.add(*t.deprel);
    }
  }
}

std::optional<int> PretrainedTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void PretrainedTable::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < words.size(); ++i) index_.emplace(words[i], static_cast<int>(i));
}

void PretrainedTable::merge(const PretrainedTable& other) {
  if (other.words.empty()) return;
  if (words.empty()) {
    const bool keep_frozen = frozen;
    *this = other;
    frozen = keep_frozen || other.frozen;
    rebuild_index();
    return;
  }
  if (other.dim != dim) {
    throw std::invalid_argument("cannot merge embeddings of dimension " + std::to_string(other.dim) + " into " +
                                std::to_string(dim));
  }
  std::vector<int> fresh;
  for (std::size_t i = 0; i < other.words.size(); ++i) {
    if (!find(other.words[i])) fresh.push_back(static_cast<int>(i));
  }
  const auto old_rows = vectors.rows();
  vectors.conservativeResize(old_rows + static_cast<Eigen::Index>(fresh.size()), dim);
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    vectors.row(old_rows + static_cast<Eigen::Index>(k)) = other.vectors.row(fresh[k]);
    words.push_back(other.words[static_cast<std::size_t>(fresh[k])]);
  }
  frozen = frozen || other.frozen;
  rebuild_index();
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_long(std::string_view s, long& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

PretrainedLoad parse_pretrained(std::string_view text, int dim) {
  PretrainedLoad result;
  std::vector<std::string> words;
  std::vector<double> values;
  bool first = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const auto f = fields_of(line);
    if (f.empty()) continue;
    if (first) {
      first = false;
      long count = 0, header_dim = 0;
      if (f.size() == 2 && parse_long(f[0], count) && parse_long(f[1], header_dim)) {
        if (dim == 0) dim = static_cast<int>(header_dim);
        continue;
      }
      if (dim == 0) dim = static_cast<int>(f.size()) - 1;
    }
    if (static_cast<int>(f.size()) - 1 != dim || dim <= 0) {
      ++result.skipped_rows;
      continue;
    }
    std::vector<double> row(static_cast<std::size_t>(dim));
    bool ok = true;
    for (int k = 0; k < dim && ok; ++k) ok = parse_double(f[static_cast<std::size_t>(k) + 1], row[static_cast<std::size_t>(k)]);
    if (!ok) {
      ++result.skipped_rows;
      continue;
    }
    words.emplace_back(f[0]);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (words.empty()) throw std::runtime_error("embedding file has no usable rows");
  PretrainedTable& t = result.table;
  t.dim = dim;
  t.words = std::move(words);
  t.vectors.resize(static_cast<Eigen::Index>(t.words.size()), dim);
  for (std::size_t r = 0; r < t.words.size(); ++r) {
    for (int c = 0; c < dim; ++c) t.vectors(static_cast<Eigen::Index>(r), c) = values[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
  }
  // Duplicate words: the first occurrence wins.
  t.rebuild_index();
  return result;
}

PretrainedLoad load_pretrained(const std::string& path, int dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pretrained(buf.str(), dim);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace tbparse
