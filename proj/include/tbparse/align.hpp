#pragma once
// Length-based sentence alignment (Gale & Church) and cross-corpus boundary voting.

#include <array>
#include <span>
#include <string>
#include <vector>

namespace tbparse {

enum class BeadKind { OneOne, OneZero, ZeroOne, TwoOne, OneTwo, TwoTwo };

inline constexpr std::array<BeadKind, 6> kAllBeads{BeadKind::OneOne, BeadKind::OneZero, BeadKind::ZeroOne,
                                                   BeadKind::TwoOne, BeadKind::OneTwo, BeadKind::TwoTwo};

const char* bead_name(BeadKind k);
int bead_src(BeadKind k);
int bead_tgt(BeadKind k);

struct AlignmentBead {
  BeadKind kind = BeadKind::OneOne;
  int src_begin = 0, src_end = 0;  // half-open sentence ranges
  int tgt_begin = 0, tgt_end = 0;
  double cost = 0.0;
  bool operator==(const AlignmentBead&) const = default;
};

struct GaleChurchParams {
  double ratio = 1.0;      // expected target characters per source character
  double variance = 6.8;
  std::array<double, 6> prior{0.89, 0.0099 / 2, 0.0099 / 2, 0.089 / 2, 0.089 / 2, 0.011};  // indexed by BeadKind
  std::array<bool, 6> enabled{true, true, true, true, true, true};

  double prior_of(BeadKind k) const { return prior[static_cast<std::size_t>(k)]; }
  bool allows(BeadKind k) const { return enabled[static_cast<std::size_t>(k)]; }
};

/// -log prior(kind) - log P(|delta|) for summed lengths l1 (source) and l2 (target).
double bead_cost(BeadKind kind, int l1, int l2, const GaleChurchParams& params = {});

/// Minimum-cost monotone bead sequence covering both sides. Throws
/// std::invalid_argument for negative lengths or when no cover exists.
std::vector<AlignmentBead> gale_church_align(std::span<const int> src, std::span<const int> tgt,
                                             const GaleChurchParams& params = {});

double total_cost(std::span<const AlignmentBead> beads);

/// Source-side positions (sentence indices) where a bead ends, excluding 0 and the end.
std::vector<int> source_boundaries(std::span<const AlignmentBead> beads);

/// Candidates placed at a bead boundary by at least `threshold` alignments.
std::vector<int> vote_boundaries(std::span<const int> candidates,
                                 const std::vector<std::vector<AlignmentBead>>& alignments, int threshold);

/// Tab-separated "kind  src_begin-src_end  tgt_begin-tgt_end  cost" lines.
std::string format_beads(std::span<const AlignmentBead> beads);

/// Code-point lengths of the lines of a sentence-per-line file.
std::vector<int> line_lengths(const std::string& path);

}  // namespace tbparse
