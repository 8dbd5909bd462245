#pragma once

// Reverse-mode differentiation over dense Eigen vectors.
//
// A Graph records one forward computation. Every Expr is a handle to a node
// holding a column vector; matrix parameters only enter through affine() and
// lookup(). Gradients flow into Parameter::grad when backward() is called with
// the ParameterSet that owns the parameters.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tbparse/rng.hpp"

namespace tbparse::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Init { Glorot, Zero };

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
};

/// Glorot/Xavier uniform bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(Index fan_in, Index fan_out);

/// Owns all parameters of a model. Parameters are addressed by index so that
/// copies of the set (checkpoints) remain consistent with layer descriptors.
class ParameterSet {
 public:
  std::size_t add(std::string name, Index rows, Index cols, Init init, Rng& rng, bool trainable = true);
  std::size_t add(std::string name, Matrix value, bool trainable = true);

  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const { return index_.find(name) != index_.end(); }
  std::size_t index_of(std::string_view name) const;
  /// Index of a parameter owned by this set; throws for foreign parameters.
  std::size_t index_of(const Parameter* p) const;

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;
  std::span<Parameter> items() noexcept { return params_; }
  std::span<const Parameter> items() const noexcept { return params_; }

  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class Graph;

/// Handle to a node of a Graph.
struct Expr {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Vector& value() const;
  Index size() const { return value().size(); }
  double scalar() const { return value()(0); }
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(Vector v);
  Expr parameter(const Parameter& p);
  Expr lookup(const Parameter& table, Index row);

  const Vector& value(std::size_t id) const { return nodes_.at(id).value; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Accumulates d loss / d param into params. The graph is consumed; calling
  /// backward a second time throws std::logic_error.
  void backward(Expr loss, ParameterSet& params);

  // Node construction used by the free-function operators.
  using Backprop = std::function<void(Graph&, const Vector& grad)>;
  Expr add_node(Vector value, bool needs_grad, Backprop backprop);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  void accumulate(std::size_t id, const Vector& g);
  template <typename Derived>
  void accumulate_expr(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Vector::Zero(n.value.size());
    n.grad += g;
  }
  Matrix& param_grad(const Parameter* p);

 private:
  struct Node {
    Vector value;
    Vector grad;
    bool needs_grad = false;
    Backprop backprop;
  };
  void check_open() const;

  std::vector<Node> nodes_;
  ParameterSet* sink_ = nullptr;
  bool consumed_ = false;
};

struct AffineTerm {
  const Parameter* weight;
  Expr input;
};

/// sum_k W_k x_k + b (bias optional).
Expr affine(std::span<const AffineTerm> terms, const Parameter* bias);
Expr affine(const Parameter& w, Expr x, const Parameter& b);
Expr affine(const Parameter& w, Expr x);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(double k, Expr a);
Expr cmult(Expr a, Expr b);
Expr tanh(Expr a);
Expr logistic(Expr a);
Expr rectify(Expr a);
Expr concat(std::span<const Expr> parts);
Expr concat(std::initializer_list<Expr> parts);
Expr slice(Expr a, Index start, Index length);
Expr pick(Expr a, Index i);
Expr sum(Expr a);
Expr dot(Expr a, Expr b);
Expr sum(std::span<const Expr> terms);

/// Zeroes every gradient, then backpropagates loss: unreachable parameters end at zero.
void backward(Expr loss, ParameterSet& params);

struct GradCheckOptions {
  double eps = 1e-5;
  int order = 2;                    // 2: (f(x+e) - f(x-e)) / 2e; 4: five-point central stencil
  std::size_t max_coordinates = 0;  // 0: every trainable coordinate
  std::uint64_t seed = 0;           // coordinate sampling when max_coordinates > 0
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
};

/// Compares analytic gradients with central finite differences of the given order.
/// Relative error per coordinate: |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(ParameterSet& params, const std::function<Expr(Graph&)>& loss_fn,
                           const GradCheckOptions& opts = {});

}  // namespace tbparse::nn
