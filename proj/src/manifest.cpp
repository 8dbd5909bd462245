#include "tbparse/manifest.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tbparse {

ManifestError::ManifestError(int line, const std::string& what)
    : std::runtime_error("manifest line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "yes" || v == "1") return out = true, true;
  if (v == "false" || v == "no" || v == "0") return out = false, true;
  return false;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return out;
}

}  // namespace

void set_hyperparameter(Hyperparams& h, const std::string& key, const std::string& v) {
  const std::map<std::string, int*> ints{{"char_emb_dim", &h.char_emb_dim},
                                         {"char_bilstm_layers", &h.char_bilstm_layers},
                                         {"char_bilstm_out", &h.char_bilstm_out},
                                         {"word_emb_dim", &h.word_emb_dim},
                                         {"pos_emb_dim", &h.pos_emb_dim},
                                         {"tb_emb_dim", &h.tb_emb_dim},
                                         {"word_bilstm_layers", &h.word_bilstm_layers},
                                         {"word_bilstm_hidden", &h.word_bilstm_hidden},
                                         {"mlp_hidden", &h.mlp_hidden},
                                         {"feats_emb_dim", &h.feats_emb_dim},
                                         {"epochs", &h.epochs},
                                         {"sentence_cap", &h.sentence_cap},
                                         {"cap", &h.sentence_cap}};
  const std::map<std::string, double*> reals{{"word_dropout", &h.word_dropout},   {"alpha_oov", &h.alpha_oov},
                                             {"char_dropout", &h.char_dropout},   {"p_agg", &h.p_agg},
                                             {"learning_rate", &h.adam.learning_rate}, {"beta1", &h.adam.beta1},
                                             {"beta2", &h.adam.beta2},            {"epsilon", &h.adam.epsilon}};
  if (const auto it = ints.find(key); it != ints.end()) {
    *it->second = to_int(key, v);
  } else if (const auto jt = reals.find(key); jt != reals.end()) {
    *jt->second = to_double(key, v);
  } else if (key == "use_chars") {
    if (!parse_bool(v, h.use_chars)) throw std::invalid_argument("use_chars: expected true or false");
  } else if (key == "treebank_embedding") {
    if (v == "auto") h.treebank_embedding = TreebankEmbedding::Auto;
    else if (v == "on") h.treebank_embedding = TreebankEmbedding::On;
    else if (v == "off") h.treebank_embedding = TreebankEmbedding::Off;
    else throw std::invalid_argument("treebank_embedding: expected auto, on or off");
  } else {
    throw std::invalid_argument("unknown hyperparameter '" + key + "'");
  }
}

std::string describe(const Hyperparams& h) {
  std::ostringstream o;
  o << "char_emb_dim = " << h.char_emb_dim << "\nchar_bilstm_layers = " << h.char_bilstm_layers
    << "\nchar_bilstm_out = " << h.char_bilstm_out << "\nword_emb_dim = " << h.word_emb_dim
    << "\npos_emb_dim = " << h.pos_emb_dim << "\ntb_emb_dim = " << h.tb_emb_dim
    << "\nword_bilstm_layers = " << h.word_bilstm_layers << "\nword_bilstm_hidden = " << h.word_bilstm_hidden
    << "\nmlp_hidden = " << h.mlp_hidden << "\nfeats_emb_dim = " << h.feats_emb_dim
    << "\nword_dropout = " << h.word_dropout << "\nalpha_oov = " << h.alpha_oov << "\nchar_dropout = " << h.char_dropout
    << "\np_agg = " << h.p_agg << "\nepochs = " << h.epochs << "\nsentence_cap = " << h.sentence_cap
    << "\nuse_chars = " << (h.use_chars ? "true" : "false") << "\ntreebank_embedding = "
    << (h.treebank_embedding == TreebankEmbedding::Auto ? "auto"
                                                        : h.treebank_embedding == TreebankEmbedding::On ? "on" : "off")
    << "\nlearning_rate = " << h.adam.learning_rate << "\nbeta1 = " << h.adam.beta1 << "\nbeta2 = " << h.adam.beta2
    << "\nepsilon = " << h.adam.epsilon << '\n';
  return o.str();
}

Manifest parse_manifest(const std::string& text, const std::string& base_dir) {
  Manifest m;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string content = trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ManifestError(line, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (value.empty()) throw ManifestError(line, "missing value for '" + key + "'");
    TreebankEntry* tb = m.treebanks.empty() ? nullptr : &m.treebanks.back();
    const auto need_tb = [&]() -> TreebankEntry& {
      if (!tb) throw ManifestError(line, "'" + key + "' must follow a 'treebank = <id>' line");
      return *tb;
    };
    if (key == "treebank") {
      for (const auto& t : m.treebanks) {
        if (t.id == value) throw ManifestError(line, "duplicate treebank '" + value + "'");
      }
      m.treebanks.push_back({value, "", "", "", false});
    } else if (key == "train") {
      need_tb().train = resolve(value, base_dir);
    } else if (key == "dev") {
      need_tb().dev = resolve(value, base_dir);
    } else if (key == "pretrained") {
      need_tb().pretrained = resolve(value, base_dir);
    } else if (key == "frozen") {
      if (!parse_bool(value, need_tb().frozen)) throw ManifestError(line, "frozen: expected true or false");
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
      if (ec != std::errc{} || p != value.data() + value.size()) throw ManifestError(line, "seed: expected an integer");
      m.seed = s;
    } else if (key == "translit") {
      m.translit = resolve(value, base_dir);
    } else if (key == "proxy") {
      const auto arrow = value.find("->");
      if (arrow == std::string::npos) throw ManifestError(line, "proxy: expected '<test id> -> <training id>'");
      const std::string from = trim(value.substr(0, arrow));
      const std::string to = trim(value.substr(arrow + 2));
      if (from.empty() || to.empty()) throw ManifestError(line, "proxy: empty treebank id");
      m.proxies[from] = to;
    } else if (key.starts_with("hyper.") || key == "epochs" || key == "cap") {
      const std::string name = key.starts_with("hyper.") ? key.substr(6) : key;
      Hyperparams probe;
      try {
        set_hyperparameter(probe, name, value);
      } catch (const std::invalid_argument& e) {
        throw ManifestError(line, e.what());
      }
      m.hyper.emplace_back(name, value);
    } else {
      throw ManifestError(line, "unknown key '" + key + "'");
    }
  }
  if (m.treebanks.empty()) throw ManifestError(line, "no treebank stanzas");
  for (const auto& t : m.treebanks) {
    if (t.train.empty()) throw ManifestError(line, "treebank '" + t.id + "' has no train file");
  }
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace tbparse
