#include <doctest.h>

#include <set>

#include "oracles/parser_harness.hpp"
#include "oracles/ward_oracle.hpp"
#include "tbparse/cluster.hpp"

using namespace tbparse;
using Groups = std::vector<std::vector<std::string>>;

namespace {

std::vector<std::string> names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("tb" + std::to_string(i));
  return out;
}

// Leaf sets of every merge, following the id convention (leaves 0..n-1, merge k is n+k).
std::vector<std::vector<int>> merge_sets(const Dendrogram& d) {
  const int n = static_cast<int>(d.labels.size());
  std::vector<std::vector<int>> members;
  for (int i = 0; i < n; ++i) members.push_back({i});
  std::vector<std::vector<int>> out;
  for (const auto& m : d.merges) {
    std::vector<int> u = members.at(static_cast<std::size_t>(m.a));
    const auto& b = members.at(static_cast<std::size_t>(m.b));
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    members.push_back(u);
    out.push_back(u);
  }
  return out;
}

}  // namespace

TEST_CASE("two points merge at half the squared distance") {
  Eigen::MatrixXd p(2, 3);
  p << 0, 0, 0, 1, 2, 2;
  const auto d = ward_cluster(names(2), p);
  REQUIRE(d.merges.size() == 1);
  CHECK(d.merges[0].distance == doctest::Approx(4.5));
  CHECK(d.merges[0].a == 0);
  CHECK(d.merges[0].b == 1);
  CHECK(d.merges[0].size == 2);
}

TEST_CASE("tight pairs merge first") {
  Eigen::MatrixXd p(4, 2);
  p << 0, 0, 10, 10, 0.1, 0, 10, 10.2;
  const auto d = ward_cluster({"a", "c", "b", "d"}, p);
  CHECK(d.labels == std::vector<std::string>{"a", "b", "c", "d"});
  const auto sets = merge_sets(d);
  CHECK(sets[0] == std::vector<int>{0, 1});
  CHECK(sets[1] == std::vector<int>{2, 3});
  CHECK(d.merges[2].a == 4);
  CHECK(d.merges[2].b == 5);
  CHECK(cut_groups(d, 2) == Groups{{"a", "b"}, {"c", "d"}});
  CHECK(cut_groups(d, 1) == Groups{{"a", "b", "c", "d"}});
  CHECK(cut_groups(d, 4) == Groups{{"a"}, {"b"}, {"c"}, {"d"}});
  CHECK_THROWS_AS(cut_groups(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(cut_groups(d, 5), std::invalid_argument);
}

TEST_CASE("equal costs merge the pair with the smallest labels") {
  Eigen::MatrixXd p(4, 1);
  p << 0, 1, 10, 11;
  const auto d = ward_cluster({"z", "y", "b", "a"}, p);
  // Sorted leaves: a=11, b=10, y=1, z=0; both pairs cost 0.5.
  CHECK(merge_sets(d)[0] == std::vector<int>{0, 1});
}

TEST_CASE("input validation") {
  Eigen::MatrixXd one(1, 2);
  one << 1, 2;
  CHECK_THROWS_AS(ward_cluster(names(1), one), std::invalid_argument);
  Eigen::MatrixXd three(3, 2);
  three.setZero();
  CHECK_THROWS_AS(ward_cluster(names(2), three), std::invalid_argument);
}

TEST_CASE("ward agrees with brute force on small random sets") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 5));
    const int dim = 1 + static_cast<int>(uniform_index(rng, 4));
    Eigen::MatrixXd p(n, dim);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) p(i, j) = 4.0 * uniform01(rng) - 2.0;
    }
    // names() sorts in index order for n <= 10, so leaf i is row i.
    const auto d = ward_cluster(names(n), p);
    const auto brute = oracle::brute_ward(p);
    REQUIRE(d.merges.size() == brute.size());
    const auto sets = merge_sets(d);
    std::vector<oracle::WardStep> ours;
    for (std::size_t k = 0; k < brute.size(); ++k) {
      CHECK(sets[k] == brute[k].merged);
      CHECK(std::abs(d.merges[k].distance - brute[k].cost) < 1e-9);
      CHECK(d.merges[k].size == static_cast<int>(sets[k].size()));
      if (k > 0) CHECK(d.merges[k].distance >= d.merges[k - 1].distance - 1e-12);
      ours.push_back({sets[k], d.merges[k].distance});
    }
    CHECK((oracle::cophenetic(n, ours) - oracle::cophenetic(n, brute)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("cut_groups partitions the leaves") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 9));
    Eigen::MatrixXd p = Eigen::MatrixXd::Random(n, 3);
    for (int i = 0; i < n; ++i) p(i, 0) += uniform01(rng);
    const auto d = ward_cluster(names(n), p);
    for (int k = 1; k <= n; ++k) {
      const auto groups = cut_groups(d, k);
      CHECK(groups.size() == static_cast<std::size_t>(k));
      std::multiset<std::string> all;
      for (const auto& g : groups) all.insert(g.begin(), g.end());
      CHECK(all == std::multiset<std::string>(d.labels.begin(), d.labels.end()));
    }
  }
}

TEST_CASE("treebank vectors") {
  const auto s = harness::grammar_sentences(1, 3);
  Hyperparams h = harness::tiny_hyper();
  h.tb_emb_dim = 12;
  const auto m = harness::model_for({s, s, s}, h, 1);
  const auto v = treebank_vectors(m);
  REQUIRE(v.size() == 3);
  for (const auto& [id, vec] : v) CHECK(vec.size() == 12);
  const auto& table = m.params.at("tb_emb").value;
  CHECK(v.at("a") == table.row(0).transpose());
  CHECK(v.at("b") != v.at("a"));
  CHECK_THROWS(treebank_vectors(harness::model_for({s}, h, 1)));
}

TEST_CASE("formatting") {
  Eigen::MatrixXd p(2, 1);
  p << 0, 2;
  const auto d = ward_cluster({"x", "y"}, p);
  CHECK(format_dendrogram(d) ==
        "# leaves\n0\tx\n1\ty\n# merges: step\ta\tb\tdistance\tsize\n0\t0\t1\t2\t2\n");
  CHECK(format_groups({{"a", "b"}, {"c"}}) == "a b\nc\n");
}
