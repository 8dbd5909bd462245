#include "tbparse/layers.hpp"

namespace tbparse::nn {

LstmLayer add_lstm(ParameterSet& params, const std::string& prefix, int input_dim, int hidden_dim, Rng& rng) {
  LstmLayer l;
  l.input_dim = input_dim;
  l.hidden_dim = hidden_dim;
  l.wx = params.add(prefix + ".wx", 4 * hidden_dim, input_dim, Init::Glorot, rng);
  l.wh = params.add(prefix + ".wh", 4 * hidden_dim, hidden_dim, Init::Glorot, rng);
  l.bias = params.add(prefix + ".b", 4 * hidden_dim, 1, Init::Zero, rng);
  return l;
}

BiLstm add_bilstm(ParameterSet& params, const std::string& prefix, const BiLstmSpec& spec, Rng& rng) {
  if (spec.layers < 1 || spec.input_dim < 1 || spec.hidden_dim < 1) {
    throw std::invalid_argument("BiLSTM '" + prefix + "' needs positive layers and dimensions");
  }
  BiLstm net;
  net.spec = spec;
  int in = spec.input_dim;
  for (int k = 0; k < spec.layers; ++k) {
    const std::string layer = prefix + ".l" + std::to_string(k);
    net.forward.push_back(add_lstm(params, layer + ".fwd", in, spec.hidden_dim, rng));
    net.backward.push_back(add_lstm(params, layer + ".bwd", in, spec.hidden_dim, rng));
    in = spec.output_dim();
  }
  return net;
}

Mlp add_mlp(ParameterSet& params, const std::string& prefix, int input_dim, int hidden_dim, int output_dim,
            Rng& rng) {
  Mlp m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.output_dim = output_dim;
  m.w1 = params.add(prefix + ".w1", hidden_dim, input_dim, Init::Glorot, rng);
  m.b1 = params.add(prefix + ".b1", hidden_dim, 1, Init::Zero, rng);
  m.w2 = params.add(prefix + ".w2", output_dim, hidden_dim, Init::Glorot, rng);
  m.b2 = params.add(prefix + ".b2", output_dim, 1, Init::Zero, rng);
  return m;
}

std::vector<Expr> lstm_run(const ParameterSet& params, const LstmLayer& layer, std::span<const Expr> inputs,
                           bool reverse) {
  std::vector<Expr> out(inputs.size());
  if (inputs.empty()) return out;
  Graph& g = *inputs.front().graph;
  const Parameter& wx = params[layer.wx];
  const Parameter& wh = params[layer.wh];
  const Parameter& b = params[layer.bias];
  const Index h = layer.hidden_dim;
  Expr hidden = g.constant(Vector::Zero(h));
  Expr cell = g.constant(Vector::Zero(h));
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t i = reverse ? inputs.size() - 1 - step : step;
    if (inputs[i].size() != layer.input_dim) {
      throw std::invalid_argument("LSTM input has " + std::to_string(inputs[i].size()) + " entries, expected " +
                                  std::to_string(layer.input_dim));
    }
    const AffineTerm terms[] = {{&wx, inputs[i]}, {&wh, hidden}};
    Expr gates = affine(terms, &b);
    Expr in_gate = logistic(slice(gates, 0, h));
    Expr forget_gate = logistic(slice(gates, h, h));
    Expr out_gate = logistic(slice(gates, 2 * h, h));
    Expr candidate = tanh(slice(gates, 3 * h, h));
    cell = cmult(forget_gate, cell) + cmult(in_gate, candidate);
    hidden = cmult(out_gate, tanh(cell));
    out[i] = hidden;
  }
  return out;
}

std::vector<Expr> bilstm_run(const ParameterSet& params, const BiLstm& net, std::span<const Expr> inputs) {
  std::vector<Expr> current(inputs.begin(), inputs.end());
  if (current.empty()) return current;
  for (std::size_t k = 0; k < net.forward.size(); ++k) {
    const auto fwd = lstm_run(params, net.forward[k], current, false);
    const auto bwd = lstm_run(params, net.backward[k], current, true);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = concat({fwd[i], bwd[i]});
  }
  return current;
}

Expr bilstm_final(const ParameterSet& params, const BiLstm& net, std::span<const Expr> inputs) {
  if (inputs.empty()) throw std::invalid_argument("bilstm_final: empty sequence");
  std::vector<Expr> current(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k + 1 < net.forward.size(); ++k) {
    const auto fwd = lstm_run(params, net.forward[k], current, false);
    const auto bwd = lstm_run(params, net.backward[k], current, true);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = concat({fwd[i], bwd[i]});
  }
  const auto fwd = lstm_run(params, net.forward.back(), current, false);
  const auto bwd = lstm_run(params, net.backward.back(), current, true);
  return concat({fwd.back(), bwd.front()});
}

Expr mlp_score(const ParameterSet& params, const Mlp& mlp, Expr input) {
  if (input.size() != mlp.input_dim) {
    throw std::invalid_argument("MLP input has " + std::to_string(input.size()) + " entries, expected " +
                                std::to_string(mlp.input_dim));
  }
  Expr hidden = tanh(affine(params[mlp.w1], input, params[mlp.b1]));
  return affine(params[mlp.w2], hidden, params[mlp.b2]);
}

}  // namespace tbparse::nn
