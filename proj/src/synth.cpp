#include "tbparse/synth.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace tbparse::synth {

std::vector<int> random_tree(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 1);
  deterministic_shuffle(order.begin(), order.end(), rng);
  std::vector<int> head(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    head[static_cast<std::size_t>(order[k])] = k == 0 ? 0 : order[uniform_index(rng, k)];
  }
  return head;
}

std::vector<int> random_projective_tree(int n, Rng& rng) {
  std::vector<int> head(static_cast<std::size_t>(n) + 1, -1);
  std::function<int(int, int)> build = [&](int lo, int hi) {
    const int r = lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    if (lo < r) head[static_cast<std::size_t>(build(lo, r - 1))] = r;
    if (r < hi) head[static_cast<std::size_t>(build(r + 1, hi))] = r;
    return r;
  };
  if (n > 0) head[static_cast<std::size_t>(build(1, n))] = 0;
  return head;
}

namespace {

const std::vector<std::string> kOnsets{"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "ð", "þ"};
const std::vector<std::string> kVowels{"a", "e", "i", "o", "u", "á", "í", "ý", "ú", "ö"};

std::string syllable(Rng& rng) {
  return kOnsets[uniform_index(rng, kOnsets.size())] + kVowels[uniform_index(rng, kVowels.size())];
}

// Zipf-like choice: rank r has weight 1/(r+1).
const std::string& pick_word(const std::vector<std::string>& words, Rng& rng) {
  double total = 0.0;
  for (std::size_t r = 0; r < words.size(); ++r) total += 1.0 / static_cast<double>(r + 1);
  double x = uniform01(rng) * total;
  for (std::size_t r = 0; r < words.size(); ++r) {
    x -= 1.0 / static_cast<double>(r + 1);
    if (x < 0.0) return words[r];
  }
  return words.back();
}

struct Node {
  std::string upos;
  std::string form;
  std::string deprel;
  Features feats;
  std::vector<Node> left;   // outermost first
  std::vector<Node> right;  // innermost first
  bool extraposed = false;
};

struct Builder {
  const Grammar& g;
  Rng& rng;
  int budget;

  bool chance(double p) { return uniform01(rng) < p && budget > 0; }

  Node leaf(const std::string& upos, const std::string& rel) {
    --budget;
    Node n{upos, pick_word(g.lexicon.at(upos), rng), rel, {}, {}, {}, false};
    return n;
  }

  Node noun(const std::string& rel, int depth) {
    Node n = leaf("NOUN", rel);
    const bool plural = uniform01(rng) < 0.4;
    n.feats = {{"Number", plural ? "Plur" : "Sing"}};
    if (chance(0.6)) {
      Node det = leaf("DET", "det");
      det.feats = {{"Number", plural ? "Plur" : "Sing"}};
      n.left.push_back(std::move(det));
    }
    if (chance(0.35)) {
      Node adj = leaf("ADJ", "amod");
      adj.feats = {{"Degree", "Pos"}};
      n.left.push_back(std::move(adj));
    }
    if (depth < 2 && chance(0.2)) {
      Node mod = noun("nmod", depth + 1);
      mod.left.insert(mod.left.begin(), leaf("ADP", "case"));
      n.right.push_back(std::move(mod));
    }
    return n;
  }

  Node clause() {
    Node v = leaf("VERB", "root");
    v.feats = {{"Tense", uniform01(rng) < 0.5 ? "Past" : "Pres"}};
    if (chance(0.9)) v.left.push_back(noun("nsubj", 0));
    if (chance(0.3)) {
      Node aux = leaf("AUX", "aux");
      aux.feats = {{"VerbForm", "Fin"}};
      v.left.push_back(std::move(aux));
    }
    if (chance(0.65)) v.right.push_back(noun("obj", 0));
    if (chance(0.3)) {
      Node obl = noun("obl", 1);
      obl.left.insert(obl.left.begin(), leaf("ADP", "case"));
      v.right.push_back(std::move(obl));
    }
    if (chance(0.3)) v.right.push_back(leaf("ADV", "advmod"));
    // The subject's adjective may move behind the verb, crossing the root arc.
    if (!v.left.empty() && v.left.front().deprel == "nsubj" && uniform01(rng) < g.options.nonprojective_rate) {
      auto& subj = v.left.front().left;
      const auto it = std::find_if(subj.begin(), subj.end(), [](const Node& n) { return n.deprel == "amod"; });
      if (it != subj.end()) it->extraposed = true;
    }
    if (chance(0.8)) v.right.push_back(leaf("PUNCT", "punct"));
    return v;
  }
};

}  // namespace

Grammar make_grammar(std::uint64_t seed, const GrammarOptions& options) {
  Rng rng = derive_rng(seed, 0x6a);
  Grammar g;
  g.options = options;
  const std::vector<std::pair<std::string, int>> classes{{"NOUN", 2}, {"VERB", 2}, {"ADJ", 2}, {"ADV", 2},
                                                         {"DET", 1}, {"ADP", 1}, {"AUX", 1}};
  std::map<std::string, bool> used;
  for (const auto& [upos, syllables] : classes) {
    auto& words = g.lexicon[upos];
    const int count = (upos == "DET" || upos == "ADP" || upos == "AUX") ? std::max(3, options.words_per_class / 6)
                                                                         : options.words_per_class;
    while (static_cast<int>(words.size()) < count) {
      std::string w;
      for (int s = 0; s < syllables + static_cast<int>(uniform_index(rng, 2)); ++s) w += syllable(rng);
      if (used[w]) continue;
      used[w] = true;
      words.push_back(w);
    }
  }
  g.lexicon["PUNCT"] = {"."};
  return g;
}

Sentence sample_sentence(const Grammar& g, Rng& rng) {
  Builder b{g, rng, g.options.max_length};
  const Node root = b.clause();
  // In-order walk; extraposed adjectives are emitted right after the root verb.
  std::vector<const Node*> order;
  std::vector<const Node*> parent_of;
  std::vector<const Node*> moved;
  std::vector<const Node*> moved_parent;
  std::function<void(const Node&, const Node*)> walk = [&](const Node& n, const Node* parent) {
    for (const Node& c : n.left) {
      if (c.extraposed) {
        moved.push_back(&c);
        moved_parent.push_back(&n);
      } else {
        walk(c, &n);
      }
    }
    order.push_back(&n);
    parent_of.push_back(parent);
    if (parent == nullptr) {
      for (std::size_t k = 0; k < moved.size(); ++k) {
        order.push_back(moved[k]);
        parent_of.push_back(moved_parent[k]);
      }
    }
    for (const Node& c : n.right) walk(c, &n);
  };
  walk(root, nullptr);
  std::map<const Node*, int> id;
  for (std::size_t i = 0; i < order.size(); ++i) id[order[i]] = static_cast<int>(i) + 1;
  Sentence s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Node& n = *order[i];
    Token t;
    t.id = static_cast<int>(i) + 1;
    t.form = n.form;
    t.lemma = n.form;
    t.upos = n.upos;
    t.feats = n.feats;
    t.head = parent_of[i] ? id.at(parent_of[i]) : 0;
    t.deprel = n.deprel;
    s.tokens.push_back(std::move(t));
  }
  std::string text;
  for (const auto& t : s.tokens) text += (text.empty() ? "" : " ") + t.form;
  s.comments.push_back("# text = " + text);
  return s;
}

Treebank sample_treebank(const Grammar& g, std::size_t sentences, Rng& rng, const std::string& id) {
  Treebank tb;
  tb.id = id;
  for (std::size_t i = 0; i < sentences; ++i) {
    Sentence s = sample_sentence(g, rng);
    s.comments.insert(s.comments.begin(), "# sent_id = " + id + "-" + std::to_string(i + 1));
    tb.sentences.push_back(std::move(s));
  }
  return tb;
}

Treebank random_treebank(Rng& rng, const RandomTreebankOptions& o) {
  static const std::vector<std::string> upos{"NOUN", "VERB", "ADJ", "ADP", "DET", "PRON", "AUX", "PUNCT", "ADV"};
  static const std::vector<std::string> rels{"nsubj", "obj", "amod", "case", "det",   "aux",
                                             "punct", "nmod", "obl", "advmod", "nmod:poss", "cc"};
  static const std::vector<std::string> feat_names{"Case", "Number", "Gender", "Tense", "Foo"};
  static const std::vector<std::string> feat_values{"Nom", "Acc", "Sing", "Plur", "Masc", "Past", "Bar"};
  Treebank tb;
  tb.id = "random";
  for (std::size_t si = 0; si < o.sentences; ++si) {
    const int n = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(o.max_length)));
    const auto head = random_tree(n, rng);
    Sentence s;
    for (int i = 1; i <= n; ++i) {
      Token t;
      t.id = i;
      std::string form;
      const int len = 1 + static_cast<int>(uniform_index(rng, 3));
      for (int k = 0; k < len; ++k) form += syllable(rng);
      t.form = form;
      t.lemma = form;
      t.upos = upos[uniform_index(rng, upos.size())];
      const int nf = static_cast<int>(uniform_index(rng, 3));
      for (int k = 0; k < nf; ++k) {
        const std::string& name = feat_names[uniform_index(rng, feat_names.size())];
        if (std::none_of(t.feats.begin(), t.feats.end(), [&](const Feature& f) { return f.first == name; })) {
          t.feats.emplace_back(name, feat_values[uniform_index(rng, feat_values.size())]);
        }
      }
      canonicalize(t.feats);
      t.head = head[static_cast<std::size_t>(i)];
      t.deprel = t.head == 0 ? "root" : rels[uniform_index(rng, rels.size())];
      s.tokens.push_back(std::move(t));
    }
    for (int i = 1; i + 1 <= n; ++i) {
      if (uniform01(rng) < o.multiword_rate) {
        const auto& a = s.tokens[static_cast<std::size_t>(i - 1)].form;
        const auto& b = s.tokens[static_cast<std::size_t>(i)].form;
        s.mwt_spans.push_back({i, i + 1, a + b, "_"});
        ++i;
      }
    }
    if (o.comments) {
      s.comments.push_back("# sent_id = " + std::to_string(si + 1));
      std::string text;
      std::size_t span = 0;
      for (int i = 1; i <= n; ++i) {
        if (span < s.mwt_spans.size() && s.mwt_spans[span].start == i) {
          text += (text.empty() ? "" : " ") + s.mwt_spans[span].surface_form;
          i = s.mwt_spans[span].end;
          ++span;
        } else {
          text += (text.empty() ? "" : " ") + s.tokens[static_cast<std::size_t>(i - 1)].form;
        }
      }
      s.comments.push_back("# text = " + text);
    }
    tb.sentences.push_back(std::move(s));
  }
  return tb;
}

}  // namespace tbparse::synth
