#include "tbparse/optimizer.hpp"

#include <cmath>

namespace tbparse::nn {

void Adam::step(ParameterSet& params) {
  for (const Parameter& p : params.items()) {
    if (p.trainable && !p.grad.allFinite()) throw NonFiniteGradient(p.name);
  }
  if (m_.size() != params.size()) {
    m_.resize(params.size());
    v_.resize(params.size());
  }
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (!p.trainable) continue;
    if (m_[i].size() == 0) {
      m_[i] = Matrix::Zero(p.value.rows(), p.value.cols());
      v_[i] = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= config_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace tbparse::nn
