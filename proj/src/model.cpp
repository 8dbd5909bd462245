#include "tbparse/model.hpp"

#include "tbparse/unicode.hpp"

namespace tbparse {

using nn::Expr;
using nn::Graph;
using transitions::Configuration;

namespace {

void require_positive(int v, const char* field) {
  if (v <= 0) throw std::invalid_argument(std::string("hyperparameter ") + field + " must be positive");
}

void require_probability(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string("hyperparameter ") + field + " must be in [0,1]");
}

// Inverted dropout: kept entries are scaled by 1/(1-p).
Expr dropout(Graph& g, Expr x, double p, Rng& rng) {
  if (p <= 0.0) return x;
  nn::Vector mask(x.size());
  const double keep = 1.0 / (1.0 - p);
  for (nn::Index i = 0; i < mask.size(); ++i) mask(i) = uniform01(rng) < p ? 0.0 : keep;
  return nn::cmult(x, g.constant(std::move(mask)));
}

}  // namespace

void Hyperparams::validate() const {
  if (use_chars) {
    require_positive(char_emb_dim, "char_emb_dim");
    require_positive(char_bilstm_layers, "char_bilstm_layers");
    require_positive(char_bilstm_out, "char_bilstm_out");
    if (char_bilstm_out % 2 != 0) throw std::invalid_argument("hyperparameter char_bilstm_out must be even");
  }
  require_positive(word_emb_dim, "word_emb_dim");
  require_positive(pos_emb_dim, "pos_emb_dim");
  require_positive(tb_emb_dim, "tb_emb_dim");
  require_positive(word_bilstm_layers, "word_bilstm_layers");
  require_positive(word_bilstm_hidden, "word_bilstm_hidden");
  require_positive(mlp_hidden, "mlp_hidden");
  require_positive(epochs, "epochs");
  require_positive(sentence_cap, "sentence_cap");
  if (feats_emb_dim < 0) throw std::invalid_argument("hyperparameter feats_emb_dim must be >= 0");
  require_probability(word_dropout, "word_dropout");
  require_probability(char_dropout, "char_dropout");
  require_probability(p_agg, "p_agg");
  if (word_dropout >= 1.0 || char_dropout >= 1.0) throw std::invalid_argument("dropout rate must be below 1");
  if (!(alpha_oov >= 0.0)) throw std::invalid_argument("hyperparameter alpha_oov must be >= 0");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("hyperparameter learning_rate must be positive");
}

bool Hyperparams::operator==(const Hyperparams& o) const {
  return char_emb_dim == o.char_emb_dim && char_bilstm_layers == o.char_bilstm_layers &&
         char_bilstm_out == o.char_bilstm_out && word_emb_dim == o.word_emb_dim && pos_emb_dim == o.pos_emb_dim &&
         tb_emb_dim == o.tb_emb_dim && word_bilstm_layers == o.word_bilstm_layers &&
         word_bilstm_hidden == o.word_bilstm_hidden && mlp_hidden == o.mlp_hidden && feats_emb_dim == o.feats_emb_dim &&
         word_dropout == o.word_dropout && alpha_oov == o.alpha_oov && char_dropout == o.char_dropout &&
         p_agg == o.p_agg && epochs == o.epochs && sentence_cap == o.sentence_cap && use_chars == o.use_chars &&
         treebank_embedding == o.treebank_embedding && adam.learning_rate == o.adam.learning_rate &&
         adam.beta1 == o.adam.beta1 && adam.beta2 == o.adam.beta2 && adam.epsilon == o.adam.epsilon;
}

int ParserModel::input_dim() const {
  int d = hyper.word_emb_dim + hyper.pos_emb_dim;
  if (hyper.use_chars) d += hyper.char_bilstm_out;
  if (uses_treebank) d += hyper.tb_emb_dim;
  if (hyper.feats_emb_dim > 0) d += hyper.feats_emb_dim;
  return d;
}

ParserModel assemble_model(Hyperparams hyper, Vocabulary vocab, Lexicon pretrained_words, int pretrained_dim,
                           bool frozen_words, bool uses_treebank, Rng& rng) {
  if (frozen_words) {
    if (pretrained_words.size() == 0) throw std::invalid_argument("frozen word embeddings need a pretrained table");
    hyper.word_emb_dim = pretrained_dim;
  }
  hyper.validate();
  if (vocab.labels.size() == 0) throw std::invalid_argument("training data has no dependency labels");
  if (uses_treebank && vocab.treebanks.size() == 0) throw std::invalid_argument("no treebanks in vocabulary");

  ParserModel m;
  m.hyper = hyper;
  m.vocab = std::move(vocab);
  m.pretrained_words = std::move(pretrained_words);
  m.frozen_words = frozen_words;
  m.uses_treebank = uses_treebank;

  auto& P = m.params;
  auto& L = m.layout;
  const int wd = hyper.word_emb_dim;
  if (m.pretrained_words.size() > 0) {
    L.pretrained = P.add("pretrained", m.pretrained_words.size(), pretrained_dim, nn::Init::Zero, rng, false);
  }
  if (frozen_words) {
    L.word_oov = P.add("word_oov", wd, 1, nn::Init::Glorot, rng);
  } else {
    L.word_emb = P.add("word_emb", m.vocab.words.size(), wd, nn::Init::Glorot, rng);
  }
  if (hyper.feats_emb_dim > 0) {
    L.feats_emb = P.add("feats_emb", m.vocab.feats.size(), hyper.feats_emb_dim, nn::Init::Glorot, rng);
  }
  L.pos_emb = P.add("pos_emb", m.vocab.upos.size(), hyper.pos_emb_dim, nn::Init::Glorot, rng);
  if (hyper.use_chars) {
    L.char_emb = P.add("char_emb", m.vocab.chars.size(), hyper.char_emb_dim, nn::Init::Glorot, rng);
    L.char_lstm = nn::add_bilstm(P, "char_lstm",
                                 nn::BiLstmSpec{hyper.char_bilstm_layers, hyper.char_emb_dim, hyper.char_bilstm_out / 2},
                                 rng);
  }
  if (uses_treebank) {
    L.tb_emb = P.add("tb_emb", m.vocab.treebanks.size(), hyper.tb_emb_dim, nn::Init::Glorot, rng);
  }
  const int in = m.input_dim();
  L.root_input = P.add("root_input", in, 1, nn::Init::Glorot, rng);
  L.word_lstm = nn::add_bilstm(P, "word_lstm", nn::BiLstmSpec{hyper.word_bilstm_layers, in, hyper.word_bilstm_hidden}, rng);
  const int ctx = m.context_dim();
  L.pad = P.add("pad", ctx, 1, nn::Init::Glorot, rng);
  L.transition_mlp = nn::add_mlp(P, "transition_mlp", 5 * ctx, hyper.mlp_hidden, 4, rng);
  L.label_mlp = nn::add_mlp(P, "label_mlp", 5 * ctx, hyper.mlp_hidden, 2 * m.vocab.labels.size(), rng);
  return m;
}

ParserModel create_model(const Hyperparams& hyper, Vocabulary vocab, const PretrainedTable* pretrained,
                         std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0x1417);
  const bool frozen = pretrained != nullptr && pretrained->frozen;
  Lexicon words(false);
  int dim = 0;
  if (pretrained != nullptr && pretrained->size() > 0) {
    if (!frozen && pretrained->dim != hyper.word_emb_dim) {
      throw std::invalid_argument("pretrained dimension " + std::to_string(pretrained->dim) +
                                  " does not match word_emb_dim " + std::to_string(hyper.word_emb_dim));
    }
    for (const auto& w : pretrained->words) words.add(w, 0);
    dim = pretrained->dim;
  }
  bool uses_tb = false;
  switch (hyper.treebank_embedding) {
    case TreebankEmbedding::On: uses_tb = true; break;
    case TreebankEmbedding::Off: uses_tb = false; break;
    case TreebankEmbedding::Auto: uses_tb = vocab.treebanks.size() > 1; break;
  }
  ParserModel m = assemble_model(hyper, std::move(vocab), std::move(words), dim, frozen, uses_tb, rng);
  if (m.layout.pretrained) {
    // Duplicate words in the file keep their first vector, matching PretrainedTable::find.
    nn::Matrix& table = m.params[*m.layout.pretrained].value;
    for (int r = 0; r < m.pretrained_words.size(); ++r) {
      table.row(r) = pretrained->vectors.row(*pretrained->find(m.pretrained_words.key(r)));
    }
    if (m.layout.word_emb) {
      nn::Matrix& emb = m.params[*m.layout.word_emb].value;
      for (int w = 1; w < m.vocab.words.size(); ++w) {
        if (const auto r = m.pretrained_words.find(m.vocab.words.key(w))) emb.row(w) = table.row(*r);
      }
    }
  }
  return m;
}

double oov_replacement_probability(int frequency, double alpha) {
  if (frequency <= 0) return 1.0;
  return alpha / (alpha + frequency);
}

int resolve_treebank(const ParserModel& model, const std::string& id) {
  if (!model.uses_treebank) return -1;
  if (const auto i = model.vocab.treebanks.find(id)) return *i;
  if (const auto it = model.proxies.find(id); it != model.proxies.end()) {
    if (const auto i = model.vocab.treebanks.find(it->second)) return *i;
  }
  throw UnknownTreebank(id);
}

namespace {

Expr word_input(Graph& g, const ParserModel& m, const std::string& key, Mode mode, Rng* rng, InputTrace* trace) {
  const auto& L = m.layout;
  auto oov = [&]() {
    if (trace) trace->word_oov = true;
    return m.frozen_words ? g.parameter(m.params[*L.word_oov]) : g.lookup(m.params[*L.word_emb], Lexicon::kOov);
  };
  if (m.frozen_words) {
    const auto r = m.pretrained_words.find(key);
    if (!r) return oov();
    if (mode == Mode::Train) {
      const auto w = m.vocab.words.find(key);
      const int freq = w ? m.vocab.words.frequency(*w) : 0;
      if (uniform01(*rng) < oov_replacement_probability(freq, m.hyper.alpha_oov)) return oov();
    }
    if (trace) trace->pretrained_lookup = true;
    return g.lookup(m.params[*L.pretrained], *r);
  }
  const auto w = m.vocab.words.find(key);
  if (mode == Mode::Train) {
    const int freq = w ? m.vocab.words.frequency(*w) : 0;
    if (!w || uniform01(*rng) < oov_replacement_probability(freq, m.hyper.alpha_oov)) return oov();
    return g.lookup(m.params[*L.word_emb], *w);
  }
  if (w) return g.lookup(m.params[*L.word_emb], *w);
  if (L.pretrained) {
    if (const auto r = m.pretrained_words.find(key)) {
      if (trace) trace->pretrained_lookup = true;
      return g.lookup(m.params[*L.pretrained], *r);
    }
  }
  return oov();
}

}  // namespace

Expr compose_input(Graph& g, const ParserModel& m, const Token& token, int tb_row, Mode mode, Rng* rng,
                   InputTrace* trace) {
  if (mode == Mode::Train && rng == nullptr) throw std::invalid_argument("compose_input: training mode needs an rng");
  const auto& L = m.layout;
  std::vector<Expr> parts;
  parts.reserve(5);

  Expr word = word_input(g, m, token.form, mode, rng, trace);
  if (mode == Mode::Train) word = dropout(g, word, m.hyper.word_dropout, *rng);
  parts.push_back(word);

  if (L.feats_emb) parts.push_back(g.lookup(m.params[*L.feats_emb], m.vocab.feats.index(feature_bundle(token))));
  parts.push_back(g.lookup(m.params[L.pos_emb], m.vocab.upos.index(token.upos)));

  if (L.char_emb) {
    const nn::Parameter& table = m.params[*L.char_emb];
    std::vector<Expr> chars;
    for (const auto& ch : unicode::code_points(token.form)) chars.push_back(g.lookup(table, m.vocab.chars.index(ch)));
    if (chars.empty()) chars.push_back(g.lookup(table, Lexicon::kOov));
    Expr c = nn::bilstm_final(m.params, L.char_lstm, chars);
    if (mode == Mode::Train) c = dropout(g, c, m.hyper.char_dropout, *rng);
    parts.push_back(c);
  }

  if (L.tb_emb) {
    if (tb_row < 0 || tb_row >= m.vocab.treebanks.size()) throw std::out_of_range("treebank row out of range");
    parts.push_back(g.lookup(m.params[*L.tb_emb], tb_row));
    if (trace) trace->treebank_row = tb_row;
  }
  return nn::concat(parts);
}

std::vector<Expr> encode_sentence(Graph& g, const ParserModel& m, const Sentence& lookup_view, int tb_row, Mode mode,
                                  Rng* rng) {
  std::vector<Expr> inputs;
  inputs.reserve(lookup_view.size() + 1);
  inputs.push_back(g.parameter(m.params[m.layout.root_input]));
  for (const Token& t : lookup_view.tokens) inputs.push_back(compose_input(g, m, t, tb_row, mode, rng));
  return nn::bilstm_run(m.params, m.layout.word_lstm, inputs);
}

std::array<int, 5> feature_tokens(const Configuration& c) {
  std::array<int, 5> f{c.s(2), c.s(1), c.s(0), c.b(0), -1};
  const int b0 = c.b(0);
  if (b0 > 0) {
    for (int d = 1; d <= c.n; ++d) {
      if (c.head[static_cast<std::size_t>(d)] == b0) {
        f[4] = d;
        break;
      }
    }
  }
  return f;
}

std::array<Expr, 5> extract_features(Graph& g, const ParserModel& m, const Configuration& c,
                                     const std::vector<Expr>& ctx) {
  const auto ids = feature_tokens(c);
  std::optional<Expr> pad;
  std::array<Expr, 5> out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= 0) {
      out[k] = ctx.at(static_cast<std::size_t>(ids[k]));
    } else {
      if (!pad) pad = g.parameter(m.params[m.layout.pad]);
      out[k] = *pad;
    }
  }
  return out;
}

ConfigScores score_config(Graph& g, const ParserModel& m, const Configuration& c, const std::vector<Expr>& ctx) {
  const auto f = extract_features(g, m, c, ctx);
  const Expr x = nn::concat(f);
  return ConfigScores{nn::mlp_score(m.params, m.layout.transition_mlp, x), nn::mlp_score(m.params, m.layout.label_mlp, x)};
}

}  // namespace tbparse
