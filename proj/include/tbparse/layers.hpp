#pragma once

#include <span>
#include <string>
#include <vector>

#include "tbparse/graph.hpp"

namespace tbparse::nn {

/// One LSTM direction. Gate rows are laid out [input; forget; output; candidate].
struct LstmLayer {
  std::size_t wx = 0;    // 4h x in
  std::size_t wh = 0;    // 4h x h
  std::size_t bias = 0;  // 4h x 1, zero-initialised (forget bias included)
  int input_dim = 0;
  int hidden_dim = 0;
};

struct BiLstmSpec {
  int layers = 1;
  int input_dim = 0;
  int hidden_dim = 0;  // per direction

  int output_dim() const { return 2 * hidden_dim; }
};

struct BiLstm {
  BiLstmSpec spec;
  std::vector<LstmLayer> forward;
  std::vector<LstmLayer> backward;
};

struct Mlp {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
};

LstmLayer add_lstm(ParameterSet& params, const std::string& prefix, int input_dim, int hidden_dim, Rng& rng);
BiLstm add_bilstm(ParameterSet& params, const std::string& prefix, const BiLstmSpec& spec, Rng& rng);
Mlp add_mlp(ParameterSet& params, const std::string& prefix, int input_dim, int hidden_dim, int output_dim, Rng& rng);

/// Runs one direction over the sequence; returns the hidden state at every step.
std::vector<Expr> lstm_run(const ParameterSet& params, const LstmLayer& layer, std::span<const Expr> inputs,
                           bool reverse);

/// Stacked BiLSTM; each output is [forward; backward] of the top layer.
std::vector<Expr> bilstm_run(const ParameterSet& params, const BiLstm& net, std::span<const Expr> inputs);

/// Single-layer summary of a sequence: [last forward state; last backward state].
Expr bilstm_final(const ParameterSet& params, const BiLstm& net, std::span<const Expr> inputs);

/// tanh hidden layer followed by a linear output layer.
Expr mlp_score(const ParameterSet& params, const Mlp& mlp, Expr input);

}  // namespace tbparse::nn
