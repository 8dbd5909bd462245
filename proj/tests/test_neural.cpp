#include <doctest.h>

#include <cmath>

#include "tbparse/graph.hpp"
#include "tbparse/layers.hpp"
#include "tbparse/optimizer.hpp"

using namespace tbparse;
using namespace tbparse::nn;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vector random_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 2.0 * uniform01(rng) - 1.0;
  return v;
}

}  // namespace

TEST_CASE("glorot bound and determinism") {
  CHECK(glorot_bound(1, 2) == doctest::Approx(std::sqrt(2.0)));
  Rng rng(1);
  ParameterSet p;
  p.add("w", 2, 1, Init::Glorot, rng);
  CHECK(p[0].value.cwiseAbs().maxCoeff() <= std::sqrt(2.0));

  Rng a(9), b(9);
  ParameterSet pa, pb;
  pa.add("w", 30, 20, Init::Glorot, a);
  pb.add("w", 30, 20, Init::Glorot, b);
  CHECK((pa[0].value.array() == pb[0].value.array()).all());
  CHECK_THROWS_AS(pa.add("z", 0, 3, Init::Glorot, a), std::invalid_argument);
}

TEST_CASE("glorot variance matches 2/(fan_in+fan_out)") {
  Rng rng(5);
  ParameterSet p;
  p.add("w", 100, 100, Init::Glorot, rng);
  const Matrix& w = p[0].value;
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size());
  CHECK(std::abs(var - 0.01) / 0.01 < 0.05);
}

TEST_CASE("biases start at zero") {
  Rng rng(2);
  ParameterSet p;
  const auto lstm = add_lstm(p, "l", 3, 4, rng);
  CHECK(p[lstm.bias].value.isZero());
  const auto mlp = add_mlp(p, "m", 3, 5, 2, rng);
  CHECK(p[mlp.b1].value.isZero());
  CHECK(p[mlp.b2].value.isZero());
}

TEST_CASE("bilstm on an empty sequence") {
  Rng rng(3);
  ParameterSet p;
  const auto net = add_bilstm(p, "b", BiLstmSpec{2, 3, 4}, rng);
  Graph g;
  CHECK(bilstm_run(p, net, std::vector<Expr>{}).empty());
}

TEST_CASE("bilstm with zero weights outputs zeros") {
  Rng rng(3);
  ParameterSet p;
  const auto net = add_bilstm(p, "b", BiLstmSpec{2, 3, 4}, rng);
  for (auto& par : p.items()) par.value.setZero();
  Graph g;
  std::vector<Expr> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(g.constant(random_vector(3, rng)));
  const auto out = bilstm_run(p, net, xs);
  REQUIRE(out.size() == 5);
  for (const auto& h : out) {
    CHECK(h.size() == 8);
    CHECK(h.value().isZero());
  }
}

TEST_CASE("single lstm step matches the hand-computed cell") {
  Rng rng(4);
  ParameterSet p;
  const auto net = add_bilstm(p, "b", BiLstmSpec{1, 1, 1}, rng);
  // Gate order [input, forget, output, candidate].
  for (const auto& layer : {net.forward[0], net.backward[0]}) {
    p[layer.wx].value = vec({0.5, -0.3, 0.8, 0.2});
    p[layer.wh].value = vec({0.9, 0.9, 0.9, 0.9});
  }
  Graph g;
  const std::vector<Expr> xs{g.constant(vec({1.0}))};
  const auto out = bilstm_run(p, net, xs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].value()(0) == doctest::Approx(0.0843450158709585).epsilon(1e-12));
  CHECK(out[0].value()(1) == doctest::Approx(0.0843450158709585).epsilon(1e-12));
}

TEST_CASE("bilstm output is [forward; backward]") {
  Rng rng(8);
  ParameterSet p;
  const auto net = add_bilstm(p, "b", BiLstmSpec{1, 2, 3}, rng);
  Graph g;
  std::vector<Expr> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(g.constant(random_vector(2, rng)));
  const auto out = bilstm_run(p, net, xs);
  const auto fwd = lstm_run(p, net.forward[0], xs, false);
  const auto bwd = lstm_run(p, net.backward[0], xs, true);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    CHECK(out[t].value().head(3).isApprox(fwd[t].value()));
    CHECK(out[t].value().tail(3).isApprox(bwd[t].value()));
  }
  const Expr fin = bilstm_final(p, net, xs);
  CHECK(fin.value().head(3).isApprox(fwd.back().value()));
  CHECK(fin.value().tail(3).isApprox(bwd.front().value()));
}

TEST_CASE("bilstm rejects inputs of the wrong size") {
  Rng rng(8);
  ParameterSet p;
  const auto net = add_bilstm(p, "b", BiLstmSpec{1, 2, 3}, rng);
  Graph g;
  const std::vector<Expr> xs{g.constant(random_vector(5, rng))};
  CHECK_THROWS(bilstm_run(p, net, xs));
}

TEST_CASE("mlp scores") {
  Rng rng(6);
  ParameterSet p;
  const auto zero = add_mlp(p, "z", 4, 100, 7, rng);
  p[zero.w1].value.setZero();
  p[zero.w2].value.setZero();
  Graph g;
  const Expr s = mlp_score(p, zero, g.constant(random_vector(4, rng)));
  CHECK(s.size() == 7);
  CHECK(s.value().isZero());

  const auto one = add_mlp(p, "o", 1, 1, 1, rng);
  p[one.w1].value(0, 0) = 0.7;
  p[one.b1].value(0, 0) = 0.1;
  p[one.w2].value(0, 0) = -1.3;
  p[one.b2].value(0, 0) = 0.4;
  CHECK(mlp_score(p, one, g.constant(vec({2.0}))).scalar() == doctest::Approx(-0.7766927297383263).epsilon(1e-12));
  CHECK_THROWS(mlp_score(p, one, g.constant(vec({1.0, 2.0}))));
}

TEST_CASE("backward on simple losses") {
  Rng rng(1);
  ParameterSet p;
  const auto a = p.add("a", vec({3.0, -1.0, 2.0}));
  const auto b = p.add("b", vec({1.0, 2.0}));
  const auto unused = p.add("unused", vec({5.0}));
  {
    Graph g;
    backward(sum(g.parameter(p[a])), p);
    CHECK(p[a].grad.isApprox(Matrix::Ones(3, 1)));
    CHECK(p[unused].grad.isZero());
  }
  {
    Graph g;
    const Expr x = g.parameter(p[b]);
    backward(dot(x, x), p);
    CHECK(p[b].grad.isApprox(vec({2.0, 4.0})));
    CHECK(p[a].grad.isZero());
  }
  {
    Graph g;
    const Expr loss = sum(g.parameter(p[a]));
    g.backward(loss, p);
    CHECK_THROWS_AS(g.backward(loss, p), std::logic_error);
  }
}

TEST_CASE("frozen parameters still receive gradients") {
  ParameterSet p;
  const auto f = p.add("f", vec({1.0, 1.0}), false);
  Graph g;
  backward(sum(g.parameter(p[f])), p);
  CHECK(p[f].grad.isApprox(Matrix::Ones(2, 1)));
}

TEST_CASE("adam") {
  SUBCASE("first step moves by the learning rate") {
    ParameterSet p;
    p.add("x", vec({0.0}));
    p[0].grad(0, 0) = 1.0;
    Adam opt;
    opt.step(p);
    CHECK(std::abs(-p[0].value(0, 0) - 1e-3) / 1e-3 < 1e-6);
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    ParameterSet p;
    p.add("x", vec({0.25, -4.0}));
    const Matrix before = p[0].value;
    Adam opt;
    for (int i = 0; i < 3; ++i) opt.step(p);
    CHECK((p[0].value.array() == before.array()).all());
  }
  SUBCASE("frozen parameters are bit-identical after ten steps") {
    Rng rng(3);
    ParameterSet p;
    p.add("table", 20, 5, Init::Glorot, rng, false);
    p.add("w", 3, 3, Init::Glorot, rng);
    const Matrix before = p[0].value;
    Adam opt;
    for (int i = 0; i < 10; ++i) {
      p[0].grad.setConstant(0.5);
      p[1].grad.setConstant(0.5);
      opt.step(p);
    }
    CHECK((p[0].value.array() == before.array()).all());
  }
  SUBCASE("non-finite gradients abort the step") {
    ParameterSet p;
    p.add("good", vec({1.0}));
    p.add("bad", vec({1.0}));
    p[0].grad(0, 0) = 1.0;
    p[1].grad(0, 0) = std::nan("");
    Adam opt;
    try {
      opt.step(p);
      FAIL("expected NonFiniteGradient");
    } catch (const NonFiniteGradient& e) {
      CHECK(e.parameter() == "bad");
    }
    CHECK(p[0].value(0, 0) == 1.0);
  }
  SUBCASE("identical runs are bit-identical") {
    auto run = [] {
      Rng rng(12);
      ParameterSet p;
      p.add("w", 4, 4, Init::Glorot, rng);
      Adam opt;
      for (int i = 0; i < 5; ++i) {
        for (Index k = 0; k < p[0].grad.size(); ++k) p[0].grad.data()[k] = std::sin(static_cast<double>(k + i));
        opt.step(p);
      }
      return p[0].value;
    };
    CHECK((run().array() == run().array()).all());
  }
}

TEST_CASE("grad check: linear model") {
  Rng rng(21);
  ParameterSet p;
  const auto w = p.add("w", 3, 4, Init::Glorot, rng);
  const auto b = p.add("b", 3, 1, Init::Glorot, rng);
  const Vector x = random_vector(4, rng);
  const Vector c = random_vector(3, rng);
  const auto r = grad_check(p, [&](Graph& g) { return dot(g.constant(c), affine(p[w], g.constant(x), p[b])); });
  CHECK(r.coordinates == 15);
  CHECK(r.max_relative_error < 1e-9);

  GradCheckOptions five;
  five.order = 4;
  five.eps = 1e-2;
  CHECK(grad_check(p, [&](Graph& g) { return dot(g.constant(c), affine(p[w], g.constant(x), p[b])); }, five)
            .max_relative_error < 1e-9);
  five.order = 3;
  CHECK_THROWS_AS(grad_check(p, [&](Graph& g) { return sum(g.parameter(p[b])); }, five), std::invalid_argument);
}

TEST_CASE("grad check detects a wrong gradient") {
  // tanh with its derivative deliberately replaced by 1.
  ParameterSet p;
  const auto a = p.add("a", vec({0.3, -0.8}));
  const auto r = grad_check(p, [&](Graph& g) {
    const Expr x = g.parameter(p[a]);
    const Expr y = g.add_node(x.value().array().tanh().matrix(), true,
                              [x](Graph& gr, const Vector& grad) { gr.accumulate(x.id, grad); });
    return sum(y);
  });
  CHECK(r.max_relative_error > 0.05);
  CHECK(r.worst_parameter == "a");
}

TEST_CASE("grad check: one-layer bilstm and mlp") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ParameterSet p;
    const auto net = add_bilstm(p, "b", BiLstmSpec{1, 3, 4}, rng);
    const auto mlp = add_mlp(p, "m", 8, 6, 3, rng);
    for (auto& par : p.items()) {
      if (par.name.ends_with(".b") || par.name.ends_with(".b1") || par.name.ends_with(".b2")) {
        par.value = random_vector(par.value.rows(), rng) * 0.5;
      }
    }
    std::vector<Vector> xs;
    for (int i = 0; i < 4; ++i) xs.push_back(random_vector(3, rng));
    const Vector c = random_vector(3, rng);
    const auto r = grad_check(p, [&](Graph& g) {
      std::vector<Expr> in;
      for (const auto& x : xs) in.push_back(g.constant(x));
      const auto h = bilstm_run(p, net, in);
      std::vector<Expr> terms;
      for (const auto& e : h) terms.push_back(dot(g.constant(c), mlp_score(p, mlp, e)));
      return sum(terms);
    });
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("grad check: every differentiable operation on random shapes") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed + 100);
    const Index n = 1 + static_cast<Index>(uniform_index(rng, 6));
    const Index m = 1 + static_cast<Index>(uniform_index(rng, 6));
    ParameterSet p;
    const auto a = p.add("a", n, 1, Init::Glorot, rng);
    const auto b = p.add("b", n, 1, Init::Glorot, rng);
    const auto w = p.add("w", m, n, Init::Glorot, rng);
    const auto v = p.add("v", m, n, Init::Glorot, rng);
    const auto bias = p.add("bias", m, 1, Init::Glorot, rng);
    const auto table = p.add("table", 4, n, Init::Glorot, rng);
    // Keep rectify away from its kink.
    for (Index i = 0; i < n; ++i) {
      double& x = p[b].value(i, 0);
      if (std::abs(x) < 0.05) x = 0.1;
    }
    const Vector c = random_vector(2 * n + m + 1, rng);
    const Index row = static_cast<Index>(uniform_index(rng, 4));
    const Index s0 = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    const auto r = grad_check(p, [&](Graph& g) {
      const Expr x = g.parameter(p[a]);
      const Expr y = g.parameter(p[b]);
      const Expr e = g.lookup(p[table], row);
      const std::vector<AffineTerm> terms{{&p[w], tanh(x)}, {&p[v], logistic(e)}};
      const Expr z = affine(terms, &p[bias]);
      const Expr mixed = cmult(x, rectify(y)) + 0.5 * (e - y);
      const Expr cat = concat({mixed, z, slice(mixed, s0, 1), e});
      const Expr joined = slice(cat, 0, 2 * n + m + 1);
      return dot(g.constant(c), joined) + pick(z, 0) + sum(std::vector<Expr>{sum(x), dot(x, y)});
    });
    CHECK_MESSAGE(r.max_relative_error < 1e-4, "seed " << seed << " worst " << r.worst_parameter);
  }
}
