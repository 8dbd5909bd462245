#include "tbparse/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tbparse/unicode.hpp"

namespace tbparse::eval {

const std::vector<std::string>& functional_relations() {
  static const std::vector<std::string> rels{"aux", "cop", "mark", "det", "clf", "case", "cc"};
  return rels;
}

const std::vector<std::string>& mlas_features() {
  static const std::vector<std::string> feats{"PronType", "NumType", "Poss",     "Reflex",   "Foreign", "Abbr",
                                              "Gender",   "Animacy", "Number",   "Case",     "Definite", "Degree",
                                              "VerbForm", "Mood",    "Tense",    "Aspect",   "Voice",   "Evident",
                                              "Polarity", "Person",  "Polite",   "Clusivity"};
  return feats;
}

namespace {

std::u32string strip_spaces(std::string_view form) {
  std::u32string out;
  for (char32_t cp : unicode::decode(form)) {
    if (!unicode::is_space(cp)) out.push_back(cp);
  }
  return out;
}

Side build_side(const Treebank& tb) {
  Side side;
  for (const Sentence& s : tb.sentences) {
    const std::size_t first_word = side.words.size();
    const int sentence_begin = static_cast<int>(side.text.size());
    std::size_t span_idx = 0;
    std::size_t i = 0;
    while (i < s.tokens.size()) {
      const int id = s.tokens[i].id;
      while (span_idx < s.mwt_spans.size() && s.mwt_spans[span_idx].end < id) ++span_idx;
      if (span_idx < s.mwt_spans.size() && s.mwt_spans[span_idx].start == id) {
        const MultiwordSpan& mwt = s.mwt_spans[span_idx];
        const auto chars = strip_spaces(mwt.surface_form);
        const Span span{static_cast<int>(side.text.size()), static_cast<int>(side.text.size() + chars.size())};
        side.text += chars;
        side.tokens.push_back(span);
        for (; i < s.tokens.size() && s.tokens[i].id <= mwt.end; ++i) side.words.push_back({&s.tokens[i], span, true, -1});
        continue;
      }
      const auto chars = strip_spaces(s.tokens[i].form);
      const Span span{static_cast<int>(side.text.size()), static_cast<int>(side.text.size() + chars.size())};
      side.text += chars;
      side.tokens.push_back(span);
      side.words.push_back({&s.tokens[i], span, false, -1});
      ++i;
    }
    for (std::size_t w = first_word; w < side.words.size(); ++w) {
      const Token& t = *side.words[w].token;
      const int h = t.head.value_or(0);
      if (h > 0 && static_cast<std::size_t>(h) <= s.tokens.size()) side.words[w].head = static_cast<int>(first_word) + h - 1;
    }
    if (side.words.size() > first_word) side.sentences.push_back({sentence_begin, static_cast<int>(side.text.size())});
  }
  return side;
}

std::string casefold(const Word& w) { return unicode::to_lower(w.token->form); }

bool beyond_end(const std::vector<Word>& words, std::size_t i, int end) {
  if (i >= words.size()) return true;
  if (words[i].multiword) return words[i].span.begin >= end;
  return words[i].span.end > end;
}

int extend_end(const Word& w, int end) { return w.multiword && w.span.end > end ? w.span.end : end; }

}  // namespace

std::size_t TokenAlignment::aligned() const {
  return static_cast<std::size_t>(std::count_if(system_to_gold.begin(), system_to_gold.end(), [](int g) { return g >= 0; }));
}

TokenAlignment align_tokens(const Treebank& system, const Treebank& gold) {
  TokenAlignment a{build_side(gold), build_side(system), {}, {}};
  if (a.gold.text != a.system.text) {
    std::size_t k = 0;
    while (k < a.gold.text.size() && k < a.system.text.size() && a.gold.text[k] == a.system.text[k]) ++k;
    throw EvalError("system and gold texts differ at character " + std::to_string(k));
  }
  const auto& G = a.gold.words;
  const auto& S = a.system.words;
  a.gold_to_system.assign(G.size(), -1);
  a.system_to_gold.assign(S.size(), -1);
  const auto link = [&](std::size_t g, std::size_t s) {
    a.gold_to_system[g] = static_cast<int>(s);
    a.system_to_gold[s] = static_cast<int>(g);
  };
  std::size_t gi = 0, si = 0;
  while (gi < G.size() && si < S.size()) {
    if (G[gi].multiword || S[si].multiword) {
      // Minimal region covering overlapping multiword tokens; words inside are
      // matched by a longest common subsequence of lowercased forms.
      int end;
      if (G[gi].multiword) {
        end = G[gi].span.end;
        if (!S[si].multiword && S[si].span.begin < G[gi].span.begin) ++si;
      } else {
        end = S[si].span.end;
        if (!G[gi].multiword && G[gi].span.begin < S[si].span.begin) ++gi;
      }
      const std::size_t gs = gi, ss = si;
      while (!beyond_end(G, gi, end) || !beyond_end(S, si, end)) {
        if (gi < G.size() && (si >= S.size() || G[gi].span.begin <= S[si].span.begin)) {
          end = extend_end(G[gi], end);
          ++gi;
        } else {
          end = extend_end(S[si], end);
          ++si;
        }
      }
      if (gi > gs && si > ss) {
        const std::size_t ng = gi - gs, ns = si - ss;
        std::vector<std::vector<int>> lcs(ng + 1, std::vector<int>(ns + 1, 0));
        for (std::size_t g = ng; g-- > 0;) {
          for (std::size_t s = ns; s-- > 0;) {
            int v = casefold(G[gs + g]) == casefold(S[ss + s]) ? 1 + lcs[g + 1][s + 1] : 0;
            v = std::max({v, lcs[g + 1][s], lcs[g][s + 1]});
            lcs[g][s] = v;
          }
        }
        std::size_t g = 0, s = 0;
        while (g < ng && s < ns) {
          if (casefold(G[gs + g]) == casefold(S[ss + s])) {
            link(gs + g, ss + s);
            ++g;
            ++s;
          } else if (lcs[g][s] == lcs[g + 1][s]) {
            ++g;
          } else {
            ++s;
          }
        }
      }
    } else if (G[gi].span == S[si].span) {
      link(gi, si);
      ++gi;
      ++si;
    } else if (G[gi].span.begin <= S[si].span.begin) {
      ++gi;
    } else {
      ++si;
    }
  }
  return a;
}

double Score::precision() const { return system == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(system); }
double Score::recall() const { return gold == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(gold); }
double Score::f1() const {
  const std::size_t denom = system + gold;
  return denom == 0 ? 0.0 : 200.0 * static_cast<double>(correct) / static_cast<double>(denom);
}

namespace {

std::string relation(const Word& w) { return std::string(universal_relation(w.token->deprel.value_or("_"))); }

bool is_functional(const std::string& rel) {
  const auto& f = functional_relations();
  return std::find(f.begin(), f.end(), rel) != f.end();
}

bool is_content(const Word& w) {
  const std::string rel = relation(w);
  return !is_functional(rel) && rel != "punct";
}

bool las_correct(const TokenAlignment& a, std::size_t g, int s) {
  const Word& gw = a.gold.words[g];
  const Word& sw = a.system.words[static_cast<std::size_t>(s)];
  if (relation(gw) != relation(sw)) return false;
  if (gw.head < 0 || sw.head < 0) return gw.head < 0 && sw.head < 0;
  return a.system_to_gold[static_cast<std::size_t>(sw.head)] == gw.head;
}

Features selected_features(const Token& t) {
  Features out;
  const auto& keep = mlas_features();
  for (const auto& f : t.feats) {
    if (std::find(keep.begin(), keep.end(), f.first) != keep.end()) out.push_back(f);
  }
  canonicalize(out);
  return out;
}

Features all_features(const Token& t) {
  Features f = t.feats;
  canonicalize(f);
  return f;
}

using ChildKey = std::tuple<std::string, std::string, Features>;

std::vector<std::vector<ChildKey>> functional_children(const Side& side) {
  std::vector<std::vector<ChildKey>> out(side.words.size());
  for (const Word& w : side.words) {
    const std::string rel = relation(w);
    if (w.head >= 0 && is_functional(rel)) {
      out[static_cast<std::size_t>(w.head)].emplace_back(rel, w.token->upos, selected_features(*w.token));
    }
  }
  return out;
}

}  // namespace

Score score_las(const TokenAlignment& a) {
  Score sc{0, a.system.words.size(), a.gold.words.size()};
  for (std::size_t g = 0; g < a.gold.words.size(); ++g) {
    const int s = a.gold_to_system[g];
    if (s >= 0 && las_correct(a, g, s)) ++sc.correct;
  }
  return sc;
}

Score score_mlas(const TokenAlignment& a) {
  Score sc;
  for (const Word& w : a.system.words) sc.system += is_content(w) ? 1 : 0;
  for (const Word& w : a.gold.words) sc.gold += is_content(w) ? 1 : 0;
  const auto gold_children = functional_children(a.gold);
  const auto system_children = functional_children(a.system);
  for (std::size_t g = 0; g < a.gold.words.size(); ++g) {
    const int s = a.gold_to_system[g];
    const Word& gw = a.gold.words[g];
    if (s < 0 || !is_content(gw) || !las_correct(a, g, s)) continue;
    const Word& sw = a.system.words[static_cast<std::size_t>(s)];
    if (gw.token->upos != sw.token->upos) continue;
    if (selected_features(*gw.token) != selected_features(*sw.token)) continue;
    if (gold_children[g] != system_children[static_cast<std::size_t>(s)]) continue;
    ++sc.correct;
  }
  return sc;
}

Score score_tags(const TokenAlignment& a, Column column) {
  Score sc{0, a.system.words.size(), a.gold.words.size()};
  for (std::size_t g = 0; g < a.gold.words.size(); ++g) {
    const int s = a.gold_to_system[g];
    if (s < 0) continue;
    const Token& gt = *a.gold.words[g].token;
    const Token& st = *a.system.words[static_cast<std::size_t>(s)].token;
    const bool ok = column == Column::Upos ? gt.upos == st.upos : all_features(gt) == all_features(st);
    if (ok) ++sc.correct;
  }
  return sc;
}

namespace {

Score span_score(const std::vector<Span>& system, const std::vector<Span>& gold) {
  Score sc{0, system.size(), gold.size()};
  std::size_t i = 0, j = 0;
  while (i < system.size() && j < gold.size()) {
    if (system[i] == gold[j]) {
      ++sc.correct;
      ++i;
      ++j;
    } else if (system[i].begin < gold[j].begin || (system[i].begin == gold[j].begin && system[i].end < gold[j].end)) {
      ++i;
    } else {
      ++j;
    }
  }
  return sc;
}

}  // namespace

SegmentationScores score_segmentation(const TokenAlignment& a) {
  return {span_score(a.system.tokens, a.gold.tokens), span_score(a.system.sentences, a.gold.sentences),
          Score{a.aligned(), a.system.words.size(), a.gold.words.size()}};
}

SegmentationScores score_segmentation(const Treebank& system, const Treebank& gold) {
  return score_segmentation(align_tokens(system, gold));
}

const Score& EvalReport::at(const std::string& name) const {
  for (const auto& [n, s] : metrics) {
    if (n == name) return s;
  }
  throw std::out_of_range("no metric '" + name + "'");
}

EvalReport evaluate(const Treebank& system, const Treebank& gold) {
  const TokenAlignment a = align_tokens(system, gold);
  const SegmentationScores seg = score_segmentation(a);
  EvalReport r;
  r.metrics = {{"Tokens", seg.tokens},
               {"Sentences", seg.sentences},
               {"Words", seg.words},
               {"UPOS", score_tags(a, Column::Upos)},
               {"UFeats", score_tags(a, Column::Ufeats)},
               {"LAS", score_las(a)},
               {"MLAS", score_mlas(a)}};
  return r;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  char line[128];
  out << "Metric     | Precision |    Recall |  F1 Score\n";
  out << "-----------+-----------+-----------+-----------\n";
  for (const auto& [name, s] : r.metrics) {
    std::snprintf(line, sizeof line, "%-11s|%10.2f |%10.2f |%10.2f\n", name.c_str(), s.precision(), s.recall(), s.f1());
    out << line;
  }
  return out.str();
}

std::string format_report_kv(const EvalReport& r) {
  std::ostringstream out;
  char line[160];
  for (const auto& [name, s] : r.metrics) {
    std::string key = unicode::to_lower(name);
    std::snprintf(line, sizeof line, "%s.precision=%.2f\n%s.recall=%.2f\n%s.f1=%.2f\n", key.c_str(), s.precision(),
                  key.c_str(), s.recall(), key.c_str(), s.f1());
    out << line;
  }
  return out.str();
}

}  // namespace tbparse::eval
