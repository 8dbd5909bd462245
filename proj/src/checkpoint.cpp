#include "tbparse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tbparse/unicode.hpp"

namespace tbparse {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using nlohmann::json;

namespace {

constexpr const char* kMagic = "TBPARSE-MODEL 1";

const char* tb_mode_name(TreebankEmbedding m) {
  switch (m) {
    case TreebankEmbedding::On: return "on";
    case TreebankEmbedding::Off: return "off";
    case TreebankEmbedding::Auto: break;
  }
  return "auto";
}

TreebankEmbedding tb_mode(const std::string& s) {
  if (s == "on") return TreebankEmbedding::On;
  if (s == "off") return TreebankEmbedding::Off;
  if (s == "auto") return TreebankEmbedding::Auto;
  throw CheckpointError("unknown treebank_embedding mode '" + s + "'");
}

json hyper_json(const Hyperparams& h) {
  return json{{"char_emb_dim", h.char_emb_dim},
              {"char_bilstm_layers", h.char_bilstm_layers},
              {"char_bilstm_out", h.char_bilstm_out},
              {"word_emb_dim", h.word_emb_dim},
              {"pos_emb_dim", h.pos_emb_dim},
              {"tb_emb_dim", h.tb_emb_dim},
              {"word_bilstm_layers", h.word_bilstm_layers},
              {"word_bilstm_hidden", h.word_bilstm_hidden},
              {"mlp_hidden", h.mlp_hidden},
              {"feats_emb_dim", h.feats_emb_dim},
              {"word_dropout", h.word_dropout},
              {"alpha_oov", h.alpha_oov},
              {"char_dropout", h.char_dropout},
              {"p_agg", h.p_agg},
              {"epochs", h.epochs},
              {"sentence_cap", h.sentence_cap},
              {"use_chars", h.use_chars},
              {"treebank_embedding", tb_mode_name(h.treebank_embedding)},
              {"learning_rate", h.adam.learning_rate},
              {"beta1", h.adam.beta1},
              {"beta2", h.adam.beta2},
              {"epsilon", h.adam.epsilon}};
}

Hyperparams hyper_from(const json& j) {
  Hyperparams h;
  h.char_emb_dim = j.at("char_emb_dim");
  h.char_bilstm_layers = j.at("char_bilstm_layers");
  h.char_bilstm_out = j.at("char_bilstm_out");
  h.word_emb_dim = j.at("word_emb_dim");
  h.pos_emb_dim = j.at("pos_emb_dim");
  h.tb_emb_dim = j.at("tb_emb_dim");
  h.word_bilstm_layers = j.at("word_bilstm_layers");
  h.word_bilstm_hidden = j.at("word_bilstm_hidden");
  h.mlp_hidden = j.at("mlp_hidden");
  h.feats_emb_dim = j.at("feats_emb_dim");
  h.word_dropout = j.at("word_dropout");
  h.alpha_oov = j.at("alpha_oov");
  h.char_dropout = j.at("char_dropout");
  h.p_agg = j.at("p_agg");
  h.epochs = j.at("epochs");
  h.sentence_cap = j.at("sentence_cap");
  h.use_chars = j.at("use_chars");
  h.treebank_embedding = tb_mode(j.at("treebank_embedding"));
  h.adam.learning_rate = j.at("learning_rate");
  h.adam.beta1 = j.at("beta1");
  h.adam.beta2 = j.at("beta2");
  h.adam.epsilon = j.at("epsilon");
  return h;
}

json lexicon_json(const Lexicon& l) {
  return json{{"oov", l.has_oov()}, {"keys", l.keys()}, {"freq", l.frequencies()}};
}

Lexicon lexicon_from(const json& j) {
  return Lexicon::from_entries(j.at("oov").get<bool>(), j.at("keys").get<std::vector<std::string>>(),
                               j.at("freq").get<std::vector<int>>());
}

}  // namespace

void save_model(const ParserModel& m, std::ostream& out) {
  json meta;
  meta["hyper"] = hyper_json(m.hyper);
  meta["vocab"] = json{{"words", lexicon_json(m.vocab.words)},       {"chars", lexicon_json(m.vocab.chars)},
                       {"upos", lexicon_json(m.vocab.upos)},         {"labels", lexicon_json(m.vocab.labels)},
                       {"treebanks", lexicon_json(m.vocab.treebanks)}, {"feats", lexicon_json(m.vocab.feats)}};
  meta["pretrained_words"] = m.pretrained_words.keys();
  meta["pretrained_dim"] = m.layout.pretrained ? m.params[*m.layout.pretrained].value.cols() : 0;
  meta["frozen_words"] = m.frozen_words;
  meta["uses_treebank"] = m.uses_treebank;
  meta["proxies"] = m.proxies;
  json tr = json::array();
  for (const auto& [a, b] : m.translit) tr.push_back(json::array({unicode::encode(a), unicode::encode(b)}));
  meta["translit"] = tr;
  json table = json::array();
  for (const auto& p : m.params.items()) {
    table.push_back(json{{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}, {"trainable", p.trainable}});
  }
  meta["params"] = table;
  const std::string header = meta.dump();
  out << kMagic << '\n' << header.size() << '\n' << header;
  std::vector<double> row;
  for (const auto& p : m.params.items()) {
    // Eigen stores column-major; the file is row-major.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = p.value;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("failed to write model");
}

void save_model(const ParserModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
  save_model(model, out);
  out.flush();
  if (!out) throw CheckpointError("failed to write '" + path + "'");
}

ParserModel load_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) throw CheckpointError("not a model file");
  std::string len_line;
  if (!std::getline(in, len_line)) throw CheckpointError("truncated model header");
  std::size_t len = 0;
  try {
    len = std::stoull(len_line);
  } catch (const std::exception&) {
    throw CheckpointError("bad header length");
  }
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) throw CheckpointError("truncated model header");
  try {
    const json meta = json::parse(header);
    Hyperparams hyper = hyper_from(meta.at("hyper"));
    const json& v = meta.at("vocab");
    Vocabulary vocab{lexicon_from(v.at("words")),  lexicon_from(v.at("chars")),     lexicon_from(v.at("upos")),
                     lexicon_from(v.at("labels")), lexicon_from(v.at("treebanks")), lexicon_from(v.at("feats"))};
    const auto pwords = meta.at("pretrained_words").get<std::vector<std::string>>();
    Lexicon pretrained = Lexicon::from_entries(false, pwords, std::vector<int>(pwords.size(), 0));
    Rng rng(0);
    ParserModel m = assemble_model(hyper, std::move(vocab), std::move(pretrained), meta.at("pretrained_dim").get<int>(),
                                   meta.at("frozen_words").get<bool>(), meta.at("uses_treebank").get<bool>(), rng);
    m.proxies = meta.at("proxies").get<ProxyMap>();
    for (const auto& pair : meta.at("translit")) {
      const auto a = unicode::decode(pair.at(0).get<std::string>());
      const auto b = unicode::decode(pair.at(1).get<std::string>());
      if (a.size() != 1 || b.size() != 1) throw CheckpointError("bad transliteration entry");
      m.translit[a[0]] = b[0];
    }
    const json& table = meta.at("params");
    if (table.size() != m.params.size()) throw CheckpointError("parameter table does not match the model layout");
    for (std::size_t i = 0; i < table.size(); ++i) {
      nn::Parameter& p = m.params[i];
      const json& e = table[i];
      if (e.at("name").get<std::string>() != p.name || e.at("rows").get<long>() != p.value.rows() ||
          e.at("cols").get<long>() != p.value.cols()) {
        throw CheckpointError("parameter '" + p.name + "' does not match the model layout");
      }
      p.trainable = e.at("trainable").get<bool>();
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(p.value.rows(), p.value.cols());
      if (!in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)))) {
        throw CheckpointError("truncated parameter data for '" + p.name + "'");
      }
      p.value = rm;
    }
    return m;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed model header: ") + e.what());
  }
}

ParserModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  try {
    return load_model(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace tbparse
