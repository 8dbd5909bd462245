#include "tbparse/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tbparse/unicode.hpp"

namespace tbparse {

const char* bead_name(BeadKind k) {
  switch (k) {
    case BeadKind::OneOne: return "1-1";
    case BeadKind::OneZero: return "1-0";
    case BeadKind::ZeroOne: return "0-1";
    case BeadKind::TwoOne: return "2-1";
    case BeadKind::OneTwo: return "1-2";
    case BeadKind::TwoTwo: return "2-2";
  }
  return "?";
}

int bead_src(BeadKind k) {
  switch (k) {
    case BeadKind::ZeroOne: return 0;
    case BeadKind::TwoOne:
    case BeadKind::TwoTwo: return 2;
    default: return 1;
  }
}

int bead_tgt(BeadKind k) {
  switch (k) {
    case BeadKind::OneZero: return 0;
    case BeadKind::OneTwo:
    case BeadKind::TwoTwo: return 2;
    default: return 1;
  }
}

double bead_cost(BeadKind kind, int l1, int l2, const GaleChurchParams& p) {
  // Costs saturate instead of becoming infinite so that sums stay comparable.
  constexpr double kMaxMatchCost = 1e6;
  const double mean = (l1 + l2 / p.ratio) / 2.0;
  double match = 0.0;
  if (mean > 0.0) {
    const double z = (p.ratio * l1 - l2) / std::sqrt(p.variance * mean);
    const double tail = std::erfc(std::abs(z) / std::sqrt(2.0));
    match = tail > 0.0 ? std::min(-std::log(tail), kMaxMatchCost) : kMaxMatchCost;
  }
  return -std::log(p.prior_of(kind)) + match;
}

std::vector<AlignmentBead> gale_church_align(std::span<const int> src, std::span<const int> tgt,
                                             const GaleChurchParams& p) {
  for (int l : src) {
    if (l < 0) throw std::invalid_argument("negative sentence length");
  }
  for (int l : tgt) {
    if (l < 0) throw std::invalid_argument("negative sentence length");
  }
  const int n = static_cast<int>(src.size());
  const int m = static_cast<int>(tgt.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto at = [m](int i, int j) { return static_cast<std::size_t>(i) * static_cast<std::size_t>(m + 1) + static_cast<std::size_t>(j); };
  std::vector<double> best(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(m + 1), kInf);
  std::vector<int> back(best.size(), -1);
  std::vector<int> src_prefix(static_cast<std::size_t>(n) + 1, 0), tgt_prefix(static_cast<std::size_t>(m) + 1, 0);
  for (int i = 0; i < n; ++i) src_prefix[static_cast<std::size_t>(i) + 1] = src_prefix[static_cast<std::size_t>(i)] + src[static_cast<std::size_t>(i)];
  for (int j = 0; j < m; ++j) tgt_prefix[static_cast<std::size_t>(j) + 1] = tgt_prefix[static_cast<std::size_t>(j)] + tgt[static_cast<std::size_t>(j)];
  best[at(0, 0)] = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      for (BeadKind k : kAllBeads) {
        if (!p.allows(k)) continue;
        const int di = bead_src(k), dj = bead_tgt(k);
        if (di > i || dj > j) continue;
        const double prev = best[at(i - di, j - dj)];
        if (prev == kInf) continue;
        const int l1 = src_prefix[static_cast<std::size_t>(i)] - src_prefix[static_cast<std::size_t>(i - di)];
        const int l2 = tgt_prefix[static_cast<std::size_t>(j)] - tgt_prefix[static_cast<std::size_t>(j - dj)];
        const double c = prev + bead_cost(k, l1, l2, p);
        if (c < best[at(i, j)]) {
          best[at(i, j)] = c;
          back[at(i, j)] = static_cast<int>(k);
        }
      }
    }
  }
  if (best[at(n, m)] == kInf) throw std::invalid_argument("no alignment covers both sides with the enabled bead kinds");
  std::vector<AlignmentBead> beads;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    const auto k = static_cast<BeadKind>(back[at(i, j)]);
    const int di = bead_src(k), dj = bead_tgt(k);
    AlignmentBead b{k, i - di, i, j - dj, j, 0.0};
    b.cost = bead_cost(k, src_prefix[static_cast<std::size_t>(i)] - src_prefix[static_cast<std::size_t>(i - di)],
                       tgt_prefix[static_cast<std::size_t>(j)] - tgt_prefix[static_cast<std::size_t>(j - dj)], p);
    beads.push_back(b);
    i -= di;
    j -= dj;
  }
  std::reverse(beads.begin(), beads.end());
  return beads;
}

double total_cost(std::span<const AlignmentBead> beads) {
  double c = 0.0;
  for (const auto& b : beads) c += b.cost;
  return c;
}

std::vector<int> source_boundaries(std::span<const AlignmentBead> beads) {
  std::set<int> cuts;
  const int end = beads.empty() ? 0 : beads.back().src_end;
  for (const auto& b : beads) {
    if (b.src_end > 0 && b.src_end < end) cuts.insert(b.src_end);
  }
  return {cuts.begin(), cuts.end()};
}

std::vector<int> vote_boundaries(std::span<const int> candidates, const std::vector<std::vector<AlignmentBead>>& alignments,
                                 int threshold) {
  std::vector<std::set<int>> cuts;
  for (const auto& a : alignments) {
    const auto b = source_boundaries(a);
    cuts.emplace_back(b.begin(), b.end());
  }
  std::vector<int> accepted;
  for (int c : candidates) {
    int votes = 0;
    for (const auto& s : cuts) votes += s.count(c) ? 1 : 0;
    if (votes >= threshold) accepted.push_back(c);
  }
  return accepted;
}

std::string format_beads(std::span<const AlignmentBead> beads) {
  std::ostringstream out;
  char cost[32];
  for (const auto& b : beads) {
    std::snprintf(cost, sizeof cost, "%.6f", b.cost);
    out << bead_name(b.kind) << '\t' << b.src_begin << '-' << b.src_end << '\t' << b.tgt_begin << '-' << b.tgt_end << '\t'
        << cost << '\n';
  }
  return out.str();
}

std::vector<int> line_lengths(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(static_cast<int>(unicode::decode(line).size()));
  }
  return out;
}

}  // namespace tbparse
