#include "tbparse/cluster.hpp"

#include <cstdio>
#include <sstream>

#include "tbparse/model.hpp"

namespace tbparse {

std::map<std::string, Eigen::VectorXd> treebank_vectors(const ParserModel& model) {
  if (!model.layout.tb_emb) throw std::invalid_argument("model has no treebank embeddings");
  const nn::Matrix& table = model.params[*model.layout.tb_emb].value;
  std::map<std::string, Eigen::VectorXd> out;
  for (int i = 0; i < model.vocab.treebanks.size(); ++i) out.emplace(model.vocab.treebanks.key(i), table.row(i).transpose());
  return out;
}

std::vector<std::vector<std::string>> cut_groups(const Dendrogram& d, int k) {
  const int n = static_cast<int>(d.labels.size());
  if (k < 1 || k > n) throw std::invalid_argument("cut_groups: k must be in [1, " + std::to_string(n) + "]");
  // Union-find over the first n-k merges.
  std::vector<int> parent(static_cast<std::size_t>(2 * n), -1);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  for (int s = 0; s < n - k; ++s) {
    const Merge& m = d.merges.at(static_cast<std::size_t>(s));
    parent[static_cast<std::size_t>(find(m.a))] = n + s;
    parent[static_cast<std::size_t>(find(m.b))] = n + s;
  }
  std::map<int, std::vector<std::string>> groups;
  for (int leaf = 0; leaf < n; ++leaf) groups[find(leaf)].push_back(d.labels[static_cast<std::size_t>(leaf)]);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

std::string format_dendrogram(const Dendrogram& d) {
  std::ostringstream out;
  out << "# leaves\n";
  for (std::size_t i = 0; i < d.labels.size(); ++i) out << i << '\t' << d.labels[i] << '\n';
  out << "# merges: step\ta\tb\tdistance\tsize\n";
  char buf[64];
  for (std::size_t s = 0; s < d.merges.size(); ++s) {
    const Merge& m = d.merges[s];
    std::snprintf(buf, sizeof buf, "%.9g", m.distance);
    out << s << '\t' << m.a << '\t' << m.b << '\t' << buf << '\t' << m.size << '\n';
  }
  return out.str();
}

std::string format_groups(const std::vector<std::vector<std::string>>& groups) {
  std::ostringstream out;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.size(); ++i) out << (i ? " " : "") << g[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace tbparse
