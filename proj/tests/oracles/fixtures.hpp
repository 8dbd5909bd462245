#pragma once
// Hand-built data shared by unit tests and the acceptance run.

#include <string>
#include <unordered_set>
#include <vector>

#include "tbparse/align.hpp"
#include "tbparse/conllu.hpp"
#include "tbparse/rng.hpp"
#include "tbparse/unicode.hpp"

namespace fixtures {

using namespace tbparse;

struct W {
  std::string form, upos, feats;
  int head;
  std::string deprel;
};

inline Sentence sent(const std::vector<W>& words) {
  Sentence s;
  int id = 1;
  for (const auto& w : words) {
    Token t;
    t.id = id++;
    t.form = w.form;
    t.upos = w.upos;
    t.feats = parse_features(w.feats);
    t.head = w.head;
    t.deprel = w.deprel;
    s.tokens.push_back(t);
  }
  return s;
}

inline Treebank bank(std::vector<Sentence> s) { return Treebank{"t", std::move(s)}; }

/// Gold side of the three-sentence evaluation example.
inline Treebank three_gold() {
  return bank({sent({{"The", "DET", "_", 2, "det"},
                     {"cat", "NOUN", "Number=Sing", 3, "nsubj"},
                     {"sleeps", "VERB", "VerbForm=Fin", 0, "root"},
                     {".", "PUNCT", "_", 3, "punct"}}),
               sent({{"Dogs", "NOUN", "Number=Plur", 2, "nsubj"},
                     {"bark", "VERB", "VerbForm=Fin", 0, "root"},
                     {"loudly", "ADV", "_", 2, "advmod"}}),
               sent({{"A", "DET", "_", 2, "det"},
                     {"bird", "NOUN", "Number=Sing", 3, "nsubj"},
                     {"sang", "VERB", "VerbForm=Fin", 0, "root"}})});
}

/// System side: sentence 2 mislabels "loudly", sentence 3 merges "A" and "bird".
///
/// Hand count: 9 system words, 10 gold words, 8 aligned.
///   Words/Tokens/UPOS F1 = 2*8/(9+10) = 84.21, Sentences = 100.
///   LAS: 7 correct -> P 77.78, R 70.00, F1 73.68.
///   MLAS: content words cat sleeps Dogs bark loudly bird|Abird sang (7 per side),
///         correct cat sleeps Dogs bark sang -> F1 71.43.
inline Treebank three_system() {
  const auto gold = three_gold();
  return bank({gold.sentences[0],
               sent({{"Dogs", "NOUN", "Number=Plur", 2, "nsubj"},
                     {"bark", "VERB", "VerbForm=Fin", 0, "root"},
                     {"loudly", "ADV", "_", 2, "obl"}}),
               sent({{"Abird", "NOUN", "Number=Sing", 2, "nsubj"},
                     {"sang", "VERB", "VerbForm=Fin", 0, "root"}})});
}

/// Random string over ASCII, Thai, Latin-1 and astral code points; optionally
/// sprinkled with stray continuation bytes.
inline std::string random_text(Rng& rng, std::size_t max_len, bool allow_invalid) {
  static const std::vector<std::string> alphabet{"a", "b", "c", "ก", "ข", "ค", "é", "😀", " "};
  std::string s;
  const std::size_t n = uniform_index(rng, max_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (allow_invalid && uniform01(rng) < 0.1) {
      s.push_back(static_cast<char>(0x80 + uniform_index(rng, 0x80)));
    } else {
      s += alphabet[uniform_index(rng, alphabet.size())];
    }
  }
  return s;
}

/// Reference greedy matcher over code points with a plain set lookup.
inline std::vector<std::string> oracle_max_match(const std::string& text,
                                                 const std::unordered_set<std::string>& words) {
  const auto cps = unicode::decode(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t best = 1;
    for (std::size_t len = cps.size() - i; len >= 1; --len) {
      if (words.count(unicode::encode(cps.substr(i, len)))) {
        best = len;
        break;
      }
    }
    out.push_back(unicode::encode(cps.substr(i, best)));
    i += best;
  }
  return out;
}

/// 1-1 beads whose source boundaries sit exactly at `ends`.
inline std::vector<AlignmentBead> beads_with_ends(const std::vector<int>& ends, int total) {
  std::vector<AlignmentBead> out;
  int prev = 0;
  for (int e : ends) {
    out.push_back({BeadKind::OneOne, prev, e, prev, e, 0.0});
    prev = e;
  }
  out.push_back({BeadKind::OneOne, prev, total, prev, total, 0.0});
  return out;
}

/// Four alignments over five source sentences: boundary 1 in all four, 2 in
/// three, 3 in two, 4 in none.
inline std::vector<std::vector<AlignmentBead>> four_corpora() {
  return {beads_with_ends({1, 2, 3}, 5), beads_with_ends({1, 2, 3}, 5), beads_with_ends({1, 2}, 5),
          beads_with_ends({1}, 5)};
}

}  // namespace fixtures
