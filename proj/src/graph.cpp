#include "tbparse/graph.hpp"

#include <algorithm>
#include <cmath>

namespace tbparse::nn {

double glorot_bound(Index fan_in, Index fan_out) {
  if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("glorot_bound: dimensions must be positive");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::size_t ParameterSet::add(std::string name, Index rows, Index cols, Init init, Rng& rng, bool trainable) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("parameter '" + name + "' has non-positive dimension " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  Matrix value = Matrix::Zero(rows, cols);
  if (init == Init::Glorot) {
    // Vectors count as (n x 1); embedding tables as (entries x dim).
    const double bound = glorot_bound(cols, rows);
    // Row-major fill order keeps the draw sequence independent of storage order.
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) value(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }
  return add(std::move(name), std::move(value), trainable);
}

std::size_t ParameterSet::add(std::string name, Matrix value, bool trainable) {
  if (index_.count(name) != 0) throw std::invalid_argument("duplicate parameter '" + name + "'");
  const std::size_t idx = params_.size();
  index_.emplace(name, idx);
  Matrix grad = Matrix::Zero(value.rows(), value.cols());
  params_.push_back(Parameter{std::move(name), std::move(value), std::move(grad), trainable});
  return idx;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParameterSet::index_of(const Parameter* p) const {
  if (params_.empty() || p < params_.data() || p >= params_.data() + params_.size()) {
    throw std::invalid_argument("parameter does not belong to this set");
  }
  return static_cast<std::size_t>(p - params_.data());
}

Parameter& ParameterSet::at(std::string_view name) { return params_[index_of(name)]; }
const Parameter& ParameterSet::at(std::string_view name) const { return params_[index_of(name)]; }

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

const Vector& Expr::value() const { return graph->value(id); }

void Graph::check_open() const {
  if (consumed_) throw std::logic_error("graph already consumed by backward(); build a new graph");
}

Expr Graph::add_node(Vector value, bool needs_grad, Backprop backprop) {
  check_open();
  nodes_.push_back(Node{std::move(value), Vector(), needs_grad, std::move(backprop)});
  return Expr{this, nodes_.size() - 1};
}

void Graph::accumulate(std::size_t id, const Vector& g) { accumulate_expr(id, g); }

Matrix& Graph::param_grad(const Parameter* p) {
  if (sink_ == nullptr) throw std::logic_error("param_grad outside backward()");
  return (*sink_)[sink_->index_of(p)].grad;
}

Expr Graph::constant(Vector v) { return add_node(std::move(v), false, nullptr); }

Expr Graph::parameter(const Parameter& p) {
  if (p.value.cols() != 1) throw std::invalid_argument("parameter '" + p.name + "' is not a column vector");
  const Parameter* ptr = &p;
  return add_node(p.value.col(0), true, [ptr](Graph& g, const Vector& grad) { g.param_grad(ptr).col(0) += grad; });
}

Expr Graph::lookup(const Parameter& table, Index row) {
  if (row < 0 || row >= table.value.rows()) {
    throw std::out_of_range("row " + std::to_string(row) + " out of range for '" + table.name + "'");
  }
  const Parameter* ptr = &table;
  return add_node(table.value.row(row).transpose(), true,
                  [ptr, row](Graph& g, const Vector& grad) { g.param_grad(ptr).row(row) += grad.transpose(); });
}

void Graph::backward(Expr loss, ParameterSet& params) {
  check_open();
  if (loss.graph != this) throw std::invalid_argument("loss belongs to another graph");
  if (nodes_[loss.id].value.size() != 1) throw std::invalid_argument("loss must be a scalar");
  consumed_ = true;
  sink_ = &params;
  nodes_[loss.id].grad = Vector::Ones(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this, n.grad);
  }
  sink_ = nullptr;
}

void backward(Expr loss, ParameterSet& params) {
  params.zero_grad();
  loss.graph->backward(loss, params);
}

namespace {

void same_graph(Expr a, Expr b) {
  if (a.graph != b.graph) throw std::invalid_argument("expressions from different graphs");
}

void same_size(Expr a, Expr b, const char* op) {
  same_graph(a, b);
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

}  // namespace

Expr affine(std::span<const AffineTerm> terms, const Parameter* bias) {
  if (terms.empty()) throw std::invalid_argument("affine: no terms");
  Graph& g = *terms.front().input.graph;
  const Index rows = terms.front().weight->value.rows();
  Vector out = bias ? Vector(bias->value.col(0)) : Vector::Zero(rows);
  if (bias && (bias->value.rows() != rows || bias->value.cols() != 1)) {
    throw std::invalid_argument("affine: bias '" + bias->name + "' shape mismatch");
  }
  std::vector<std::pair<const Parameter*, std::size_t>> saved;
  saved.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.input.graph != &g) throw std::invalid_argument("affine: expressions from different graphs");
    const Matrix& w = t.weight->value;
    if (w.rows() != rows || w.cols() != t.input.size()) {
      throw std::invalid_argument("affine: '" + t.weight->name + "' is " + std::to_string(w.rows()) + "x" +
                                  std::to_string(w.cols()) + " but input has " + std::to_string(t.input.size()) +
                                  " entries");
    }
    out.noalias() += w * t.input.value();
    saved.emplace_back(t.weight, t.input.id);
  }
  return g.add_node(std::move(out), true, [saved = std::move(saved), bias](Graph& g, const Vector& grad) {
    for (const auto& [w, x] : saved) {
      g.param_grad(w).noalias() += grad * g.value(x).transpose();
      if (g.needs_grad(x)) g.accumulate_expr(x, w->value.transpose() * grad);
    }
    if (bias) g.param_grad(bias).col(0) += grad;
  });
}

Expr affine(const Parameter& w, Expr x, const Parameter& b) {
  const AffineTerm t{&w, x};
  return affine(std::span<const AffineTerm>(&t, 1), &b);
}

Expr affine(const Parameter& w, Expr x) {
  const AffineTerm t{&w, x};
  return affine(std::span<const AffineTerm>(&t, 1), nullptr);
}

Expr operator+(Expr a, Expr b) {
  same_size(a, b, "add");
  Graph& g = *a.graph;
  return g.add_node(a.value() + b.value(), g.needs_grad(a.id) || g.needs_grad(b.id),
                    [a = a.id, b = b.id](Graph& g, const Vector& grad) {
                      g.accumulate(a, grad);
                      g.accumulate(b, grad);
                    });
}

Expr operator-(Expr a, Expr b) {
  same_size(a, b, "subtract");
  Graph& g = *a.graph;
  return g.add_node(a.value() - b.value(), g.needs_grad(a.id) || g.needs_grad(b.id),
                    [a = a.id, b = b.id](Graph& g, const Vector& grad) {
                      g.accumulate(a, grad);
                      g.accumulate_expr(b, -grad);
                    });
}

Expr operator*(double k, Expr a) {
  Graph& g = *a.graph;
  return g.add_node(k * a.value(), g.needs_grad(a.id),
                    [k, a = a.id](Graph& g, const Vector& grad) { g.accumulate_expr(a, k * grad); });
}

Expr cmult(Expr a, Expr b) {
  same_size(a, b, "cmult");
  Graph& g = *a.graph;
  return g.add_node(a.value().cwiseProduct(b.value()), g.needs_grad(a.id) || g.needs_grad(b.id),
                    [a = a.id, b = b.id](Graph& g, const Vector& grad) {
                      if (g.needs_grad(a)) g.accumulate_expr(a, grad.cwiseProduct(g.value(b)));
                      if (g.needs_grad(b)) g.accumulate_expr(b, grad.cwiseProduct(g.value(a)));
                    });
}

Expr tanh(Expr a) {
  Graph& g = *a.graph;
  Vector y = a.value().array().tanh();
  const std::size_t self = g.node_count();
  return g.add_node(std::move(y), g.needs_grad(a.id), [a = a.id, self](Graph& g, const Vector& grad) {
    const Vector& y = g.value(self);
    g.accumulate_expr(a, grad.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Expr logistic(Expr a) {
  Graph& g = *a.graph;
  Vector y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  const std::size_t self = g.node_count();
  return g.add_node(std::move(y), g.needs_grad(a.id), [a = a.id, self](Graph& g, const Vector& grad) {
    const Vector& y = g.value(self);
    g.accumulate_expr(a, grad.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Expr rectify(Expr a) {
  Graph& g = *a.graph;
  Vector y = a.value().cwiseMax(0.0);
  return g.add_node(std::move(y), g.needs_grad(a.id), [a = a.id](Graph& g, const Vector& grad) {
    const Vector& x = g.value(a);
    g.accumulate_expr(a, (x.array() > 0.0).select(grad, 0.0));
  });
}

Expr concat(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  Graph& g = *parts.front().graph;
  Index total = 0;
  bool needs = false;
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Expr& p : parts) {
    if (p.graph != &g) throw std::invalid_argument("concat: expressions from different graphs");
    total += p.size();
    needs = needs || g.needs_grad(p.id);
    ids.push_back(p.id);
  }
  Vector out(total);
  Index offset = 0;
  for (const Expr& p : parts) {
    out.segment(offset, p.size()) = p.value();
    offset += p.size();
  }
  return g.add_node(std::move(out), needs, [ids = std::move(ids)](Graph& g, const Vector& grad) {
    Index offset = 0;
    for (std::size_t id : ids) {
      const Index n = g.value(id).size();
      if (g.needs_grad(id)) g.accumulate_expr(id, grad.segment(offset, n));
      offset += n;
    }
  });
}

Expr concat(std::initializer_list<Expr> parts) { return concat(std::span<const Expr>(parts.begin(), parts.size())); }

Expr slice(Expr a, Index start, Index length) {
  if (start < 0 || length < 0 || start + length > a.size()) throw std::out_of_range("slice out of range");
  Graph& g = *a.graph;
  return g.add_node(a.value().segment(start, length), g.needs_grad(a.id),
                    [a = a.id, start, length](Graph& g, const Vector& grad) {
                      Vector full = Vector::Zero(g.value(a).size());
                      full.segment(start, length) = grad;
                      g.accumulate(a, full);
                    });
}

Expr pick(Expr a, Index i) { return slice(a, i, 1); }

Expr sum(Expr a) {
  Graph& g = *a.graph;
  Vector out(1);
  out(0) = a.value().sum();
  return g.add_node(std::move(out), g.needs_grad(a.id), [a = a.id](Graph& g, const Vector& grad) {
    g.accumulate_expr(a, Vector::Constant(g.value(a).size(), grad(0)));
  });
}

Expr dot(Expr a, Expr b) {
  same_size(a, b, "dot");
  Graph& g = *a.graph;
  Vector out(1);
  out(0) = a.value().dot(b.value());
  return g.add_node(std::move(out), g.needs_grad(a.id) || g.needs_grad(b.id),
                    [a = a.id, b = b.id](Graph& g, const Vector& grad) {
                      if (g.needs_grad(a)) g.accumulate_expr(a, grad(0) * g.value(b));
                      if (g.needs_grad(b)) g.accumulate_expr(b, grad(0) * g.value(a));
                    });
}

Expr sum(std::span<const Expr> terms) {
  if (terms.empty()) throw std::invalid_argument("sum: no terms");
  Graph& g = *terms.front().graph;
  Vector out = terms.front().value();
  bool needs = g.needs_grad(terms.front().id);
  std::vector<std::size_t> ids{terms.front().id};
  for (std::size_t i = 1; i < terms.size(); ++i) {
    same_size(terms.front(), terms[i], "sum");
    out += terms[i].value();
    needs = needs || g.needs_grad(terms[i].id);
    ids.push_back(terms[i].id);
  }
  return g.add_node(std::move(out), needs, [ids = std::move(ids)](Graph& g, const Vector& grad) {
    for (std::size_t id : ids) g.accumulate(id, grad);
  });
}

GradCheckResult grad_check(ParameterSet& params, const std::function<Expr(Graph&)>& loss_fn,
                           const GradCheckOptions& opts) {
  if (opts.order != 2 && opts.order != 4) throw std::invalid_argument("grad_check: order must be 2 or 4");
  {
    Graph g;
    Expr loss = loss_fn(g);
    backward(loss, params);
  }
  struct Coord {
    std::size_t param;
    Index r, c;
  };
  std::vector<Coord> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Parameter& par = params[p];
    if (!par.trainable) continue;
    for (Index c = 0; c < par.value.cols(); ++c) {
      for (Index r = 0; r < par.value.rows(); ++r) coords.push_back({p, r, c});
    }
  }
  if (opts.max_coordinates > 0 && coords.size() > opts.max_coordinates) {
    Rng rng(opts.seed);
    deterministic_shuffle(coords.begin(), coords.end(), rng);
    coords.resize(opts.max_coordinates);
  }
  std::vector<double> analytic;
  analytic.reserve(coords.size());
  for (const auto& co : coords) analytic.push_back(params[co.param].grad(co.r, co.c));

  auto eval = [&]() {
    Graph g;
    return loss_fn(g).scalar();
  };
  GradCheckResult result;
  result.coordinates = coords.size();
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto& co = coords[k];
    double& x = params[co.param].value(co.r, co.c);
    const double saved = x;
    auto at = [&](double offset) {
      x = saved + offset;
      const double v = eval();
      x = saved;
      return v;
    };
    const double h = opts.eps;
    const double numeric = opts.order == 4
                               ? (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h)
                               : (at(h) - at(-h)) / (2.0 * h);
    const double a = analytic[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = params[co.param].name;
    }
  }
  return result;
}

}  // namespace tbparse::nn
