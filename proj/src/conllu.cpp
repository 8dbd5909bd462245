#include "tbparse/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tbparse/unicode.hpp"

namespace tbparse {

ConlluError::ConlluError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<int> to_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

struct SentenceBuilder {
  Sentence sentence;
  std::vector<std::size_t> head_lines;  // line of each token, for late head checks
  std::vector<std::size_t> mwt_lines;
  std::size_t first_line = 0;

  bool empty() const { return sentence.tokens.empty() && sentence.mwt_spans.empty() && sentence.comments.empty(); }
};

void finish(SentenceBuilder& b, std::vector<Sentence>& out) {
  if (b.empty()) return;
  Sentence& s = b.sentence;
  if (s.tokens.empty()) throw ConlluError(b.first_line, "sentence has comments but no tokens");
  const int n = static_cast<int>(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const Token& t = s.tokens[i];
    if (t.head && (*t.head < 0 || *t.head > n)) {
      throw ConlluError(b.head_lines[i], "head " + std::to_string(*t.head) + " out of range [0, " +
                                             std::to_string(n) + "]");
    }
  }
  int covered_until = 0;
  for (std::size_t i = 0; i < s.mwt_spans.size(); ++i) {
    const MultiwordSpan& m = s.mwt_spans[i];
    if (m.end > n) throw ConlluError(b.mwt_lines[i], "multiword range refers to missing token " + std::to_string(m.end));
    if (m.start <= covered_until) throw ConlluError(b.mwt_lines[i], "overlapping multiword token ranges");
    covered_until = m.end;
  }
  out.push_back(std::move(s));
  b = SentenceBuilder{};
}

}  // namespace

void canonicalize(Features& feats) {
  std::stable_sort(feats.begin(), feats.end(), [](const Feature& a, const Feature& b) {
    return ascii_lower(a.first) < ascii_lower(b.first);
  });
}

Features parse_features(std::string_view column) {
  Features feats;
  if (column == "_" || column.empty()) return feats;
  for (std::string_view item : split(column, '|')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw std::invalid_argument("malformed feature '" + std::string(item) + "'");
    }
    feats.emplace_back(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
  }
  canonicalize(feats);
  return feats;
}

std::string format_features(const Features& feats) {
  if (feats.empty()) return "_";
  std::string out;
  for (const auto& [attr, value] : feats) {
    if (!out.empty()) out += '|';
    out += attr;
    out += '=';
    out += value;
  }
  return out;
}

Treebank parse_conllu(std::string_view text, std::string id) {
  Treebank tb;
  tb.id = std::move(id);
  SentenceBuilder current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish(current, tb.sentences);
      continue;
    }
    if (current.empty()) current.first_line = line_no;
    if (line.front() == '#') {
      if (!current.sentence.tokens.empty() || !current.sentence.mwt_spans.empty()) {
        throw ConlluError(line_no, "comment line inside token block");
      }
      current.sentence.comments.emplace_back(line);
      continue;
    }

    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ConlluError(line_no, "expected 10 tab-separated fields, found " + std::to_string(cols.size()));
    }
    const std::string_view id_col = cols[0];
    if (id_col.find('.') != std::string_view::npos) {
      throw ConlluError(line_no, "empty nodes (id '" + std::string(id_col) + "') are not supported");
    }
    const int expected = static_cast<int>(current.sentence.tokens.size()) + 1;
    if (const auto dash = id_col.find('-'); dash != std::string_view::npos) {
      const auto a = to_int(id_col.substr(0, dash));
      const auto b = to_int(id_col.substr(dash + 1));
      if (!a || !b || *a < 1 || *b < *a) throw ConlluError(line_no, "malformed multiword range '" + std::string(id_col) + "'");
      if (*a != expected) throw ConlluError(line_no, "multiword range must start at the next token id " + std::to_string(expected));
      current.sentence.mwt_spans.push_back({*a, *b, std::string(cols[1]), std::string(cols[9])});
      current.mwt_lines.push_back(line_no);
      continue;
    }

    const auto tid = to_int(id_col);
    if (!tid) throw ConlluError(line_no, "malformed token id '" + std::string(id_col) + "'");
    if (*tid != expected) {
      throw ConlluError(line_no, "non-consecutive token id " + std::to_string(*tid) + ", expected " + std::to_string(expected));
    }
    Token t;
    t.id = *tid;
    t.form = std::string(cols[1]);
    t.lemma = std::string(cols[2]);
    t.upos = std::string(cols[3]);
    t.xpos = std::string(cols[4]);
    try {
      t.feats = parse_features(cols[5]);
    } catch (const std::invalid_argument& e) {
      throw ConlluError(line_no, e.what());
    }
    if (cols[6] != "_") {
      const auto h = to_int(cols[6]);
      if (!h) throw ConlluError(line_no, "malformed head '" + std::string(cols[6]) + "'");
      if (*h == t.id) throw ConlluError(line_no, "token " + std::to_string(t.id) + " is its own head");
      if (*h < 0) throw ConlluError(line_no, "head " + std::to_string(*h) + " out of range");
      t.head = *h;
    }
    if (cols[7] != "_") t.deprel = std::string(cols[7]);
    t.deps = std::string(cols[8]);
    t.misc = std::string(cols[9]);
    current.sentence.tokens.push_back(std::move(t));
    current.head_lines.push_back(line_no);
  }
  ++line_no;
  finish(current, tb.sentences);
  return tb;
}

std::string write_sentence(const Sentence& s) {
  std::string out;
  for (const auto& c : s.comments) {
    out += c;
    out += '\n';
  }
  std::size_t next_mwt = 0;
  for (const Token& t : s.tokens) {
    while (next_mwt < s.mwt_spans.size() && s.mwt_spans[next_mwt].start == t.id) {
      const auto& m = s.mwt_spans[next_mwt++];
      out += std::to_string(m.start) + '-' + std::to_string(m.end) + '\t' + m.surface_form +
             "\t_\t_\t_\t_\t_\t_\t_\t" + (m.misc.empty() ? "_" : m.misc) + '\n';
    }
    auto field = [](const std::string& v) -> const std::string& {
      static const std::string underscore = "_";
      return v.empty() ? underscore : v;
    };
    out += std::to_string(t.id);
    out += '\t' + field(t.form);
    out += '\t' + field(t.lemma);
    out += '\t' + field(t.upos);
    out += '\t' + field(t.xpos);
    out += '\t' + format_features(t.feats);
    out += '\t' + (t.head ? std::to_string(*t.head) : std::string("_"));
    out += '\t' + (t.deprel && !t.deprel->empty() ? *t.deprel : std::string("_"));
    out += '\t' + field(t.deps);
    out += '\t' + field(t.misc);
    out += '\n';
  }
  out += '\n';
  return out;
}

std::string write_conllu(const Treebank& tb) {
  std::string out;
  for (const auto& s : tb.sentences) out += write_sentence(s);
  return out;
}

Treebank read_conllu_file(const std::string& path, std::string id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_conllu(buf.str(), std::move(id));
  } catch (const ConlluError& e) {
    throw ConlluError(e.line(), path + ": " + std::string(e.what()));
  }
}

void write_conllu_file(const std::string& path, const Treebank& tb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << write_conllu(tb);
}

Sentence lemma_fallback(Sentence s) {
  for (Token& t : s.tokens) t.lemma = unicode::to_lower(t.form);
  return s;
}

std::string_view universal_relation(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

std::optional<std::string> tree_violation(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (const Token& t : s.tokens) {
    if (!t.head) return "token " + std::to_string(t.id) + " has no head";
    if (*t.head < 0 || *t.head > n || *t.head == t.id) return "token " + std::to_string(t.id) + " has an invalid head";
    if (*t.head == 0) ++roots;
  }
  if (roots != 1) return std::to_string(roots) + " tokens attached to the root";
  // Walk up from every token; a path longer than n revisits a node.
  for (const Token& t : s.tokens) {
    int node = t.id;
    for (int steps = 0; node != 0; ++steps) {
      if (steps > n) return "cycle through token " + std::to_string(t.id);
      node = *s.tokens[node - 1].head;
    }
  }
  return std::nullopt;
}

}  // namespace tbparse
