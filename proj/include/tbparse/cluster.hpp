#pragma once
// Ward hierarchical clustering of treebank embeddings.
//
// Merge distances are the increase in within-cluster sum of squares, so two
// points a, b merge at ||a - b||^2 / 2.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbparse {

struct ParserModel;

struct Merge {
  int a = 0;  // cluster ids: leaves are 0..n-1, merge k creates id n+k
  int b = 0;
  double distance = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> labels;  // leaf labels, sorted
  std::vector<Merge> merges;
};

/// Rows of the treebank-embedding table keyed by treebank id.
std::map<std::string, Eigen::VectorXd> treebank_vectors(const ParserModel& model);

/// Points are the rows of `points`; labels name them. Leaves are ordered by
/// label, and ties between equal merge costs go to the pair whose smallest
/// labels come first.
template <typename Derived>
Dendrogram ward_cluster(const std::vector<std::string>& labels, const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<int>(labels.size());
  if (n < 2) throw std::invalid_argument("ward_cluster needs at least two points");
  if (points.rows() != n) throw std::invalid_argument("ward_cluster: one row per label required");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return labels[x] < labels[y]; });

  Dendrogram d;
  for (int i : order) d.labels.push_back(labels[static_cast<std::size_t>(i)]);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dist(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dist(i, j) = (points.row(order[i]) - points.row(order[j])).squaredNorm() / Scalar(2);
  }

  // Slot i holds the active cluster whose smallest leaf is i.
  std::vector<int> id(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::iota(id.begin(), id.end(), 0);
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (active[j] && dist(i, j) < best) best = dist(i, j), bi = i, bj = j;
      }
    }
    const int ni = size[bi], nj = size[bj];
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const int nk = size[k];
      const Scalar v = (Scalar(ni + nk) * dist(k, bi) + Scalar(nj + nk) * dist(k, bj) - Scalar(nk) * dist(bi, bj)) /
                       Scalar(ni + nj + nk);
      dist(k, bi) = dist(bi, k) = v;
    }
    d.merges.push_back({std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), static_cast<double>(best), ni + nj});
    id[bi] = n + step;
    size[bi] = ni + nj;
    active[bj] = false;
  }
  return d;
}

/// Groups left after undoing the last k-1 merges; each group lists labels in
/// sorted order and groups are ordered by their first label.
std::vector<std::vector<std::string>> cut_groups(const Dendrogram& d, int k);

/// Leaf table followed by the merge table.
std::string format_dendrogram(const Dendrogram& d);
/// One group per line, labels separated by spaces.
std::string format_groups(const std::vector<std::vector<std::string>>& groups);

}  // namespace tbparse
