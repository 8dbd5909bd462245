#pragma once
// BiLSTM feature extractor and MLP scorers of the parser.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbparse/conllu.hpp"
#include "tbparse/graph.hpp"
#include "tbparse/layers.hpp"
#include "tbparse/optimizer.hpp"
#include "tbparse/transitions.hpp"
#include "tbparse/vocabulary.hpp"

namespace tbparse {

enum class TreebankEmbedding { Auto, On, Off };

struct Hyperparams {
  int char_emb_dim = 500;
  int char_bilstm_layers = 1;
  int char_bilstm_out = 200;
  int word_emb_dim = 100;
  int pos_emb_dim = 20;
  int tb_emb_dim = 12;
  int word_bilstm_layers = 2;
  int word_bilstm_hidden = 250;  // per direction
  int mlp_hidden = 100;
  int feats_emb_dim = 0;         // 0 disables
  double word_dropout = 0.33;
  double alpha_oov = 0.25;
  double char_dropout = 0.33;
  double p_agg = 0.1;
  int epochs = 30;
  int sentence_cap = 15000;
  bool use_chars = true;
  TreebankEmbedding treebank_embedding = TreebankEmbedding::Auto;
  nn::AdamConfig adam;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const Hyperparams& o) const;
};

class UnknownTreebank : public std::runtime_error {
 public:
  explicit UnknownTreebank(const std::string& id)
      : std::runtime_error("unknown treebank '" + id + "' and no proxy mapping"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

struct ModelLayout {
  std::optional<std::size_t> word_emb;    // rows follow vocab.words; row 0 is the OOV vector
  std::optional<std::size_t> word_oov;    // frozen mode: trainable OOV vector
  std::optional<std::size_t> pretrained;  // rows follow pretrained_words, never trained
  std::size_t pos_emb = 0;
  std::optional<std::size_t> char_emb;
  nn::BiLstm char_lstm;
  std::optional<std::size_t> tb_emb;
  std::optional<std::size_t> feats_emb;
  std::size_t root_input = 0;
  std::size_t pad = 0;
  nn::BiLstm word_lstm;
  nn::Mlp transition_mlp;
  nn::Mlp label_mlp;
};

struct ParserModel {
  Hyperparams hyper;  // word_emb_dim is the effective dimension
  Vocabulary vocab;
  Lexicon pretrained_words{false};
  bool frozen_words = false;
  bool uses_treebank = false;
  ProxyMap proxies;
  TransliterationMap translit;
  nn::ParameterSet params;
  ModelLayout layout;

  int input_dim() const;
  int context_dim() const { return 2 * hyper.word_bilstm_hidden; }
  int label_count() const { return vocab.labels.size(); }
};

/// Builds the parameter skeleton; values are Glorot/zero initialised from rng.
/// Used both for fresh models and for loading checkpoints.
ParserModel assemble_model(Hyperparams hyper, Vocabulary vocab, Lexicon pretrained_words, int pretrained_dim,
                           bool frozen_words, bool uses_treebank, Rng& rng);

/// Fresh model. In frozen mode the word dimension is the pretrained dimension;
/// otherwise pretrained vectors initialise the matching rows of the word table.
ParserModel create_model(const Hyperparams& hyper, Vocabulary vocab, const PretrainedTable* pretrained,
                         std::uint64_t seed);

enum class Mode { Train, Test };

/// Which inputs compose_input actually consumed.
struct InputTrace {
  bool word_oov = false;
  bool pretrained_lookup = false;
  int treebank_row = -1;
};

double oov_replacement_probability(int frequency, double alpha);

/// Treebank embedding row for id (through the proxy map if needed), or -1 for
/// models without treebank embeddings.
int resolve_treebank(const ParserModel& model, const std::string& id);

/// x = e(w) [e(feats)] e(p) BiLSTM(chars) [e(tb)]. `token.form` must be the
/// lookup key (already transliterated). rng is required in Train mode.
nn::Expr compose_input(nn::Graph& g, const ParserModel& model, const Token& token, int tb_row, Mode mode,
                       Rng* rng, InputTrace* trace = nullptr);

/// Context vectors for the root (index 0) and every token.
std::vector<nn::Expr> encode_sentence(nn::Graph& g, const ParserModel& model, const Sentence& lookup_view,
                                      int tb_row, Mode mode, Rng* rng);

/// Token ids of the feature slots [s2, s1, s0, b0, leftmost dependent of b0]; -1 when missing.
std::array<int, 5> feature_tokens(const transitions::Configuration& c);

std::array<nn::Expr, 5> extract_features(nn::Graph& g, const ParserModel& model, const transitions::Configuration& c,
                                         const std::vector<nn::Expr>& ctx);

struct ConfigScores {
  nn::Expr transitions;  // [SHIFT, LEFT_ARC, RIGHT_ARC, SWAP]
  nn::Expr labels;       // [left labels..., right labels...]
};

ConfigScores score_config(nn::Graph& g, const ParserModel& model, const transitions::Configuration& c,
                          const std::vector<nn::Expr>& ctx);

/// Position of a labeled arc's score inside ConfigScores::labels.
inline int label_slot(transitions::Move m, int label, int label_count) {
  return (m == transitions::Move::RightArc ? label_count : 0) + label;
}

}  // namespace tbparse
