#pragma once

// Arc-hybrid transition system with SWAP.
//
// The artificial root 0 sits at the bottom of the stack. LEFT_ARC attaches s0
// to b0, RIGHT_ARC attaches s0 to s1, SWAP moves s0 behind b0. Training uses a
// static oracle for SWAP (forced whenever the projective order demands it) and
// a dynamic, cost-based oracle for the other transitions.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbparse::transitions {

enum class Move : std::uint8_t { Shift = 0, LeftArc = 1, RightArc = 2, Swap = 3 };
inline constexpr std::array<Move, 4> kAllMoves{Move::Shift, Move::LeftArc, Move::RightArc, Move::Swap};
inline constexpr int kNoLabel = -1;
inline constexpr int kInfiniteCost = std::numeric_limits<int>::max() / 4;

const char* name(Move m);
constexpr bool is_arc(Move m) { return m == Move::LeftArc || m == Move::RightArc; }

struct Transition {
  Move move = Move::Shift;
  int label = kNoLabel;  // set iff move is an arc transition

  bool operator==(const Transition&) const = default;
};

/// Small set of moves indexed by Move.
class MoveSet {
 public:
  void insert(Move m) { bits_ |= bit(m); }
  void erase(Move m) { bits_ &= static_cast<std::uint8_t>(~bit(m)); }
  bool contains(Move m) const { return (bits_ & bit(m)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<Move> moves() const;
  bool operator==(const MoveSet&) const = default;

 private:
  static std::uint8_t bit(Move m) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(m)); }
  std::uint8_t bits_ = 0;
};

class IllegalTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class OracleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Arc {
  int head;
  int dependent;
  int label;
  bool operator==(const Arc&) const = default;
};

struct Configuration {
  std::vector<int> stack;   // bottom -> top, stack[0] == 0
  std::vector<int> buffer;  // front first
  std::vector<int> head;    // size n+1, -1 while unattached
  std::vector<int> label;   // size n+1
  int n = 0;
  int swaps = 0;

  int s(std::size_t k) const { return stack.size() > k ? stack[stack.size() - 1 - k] : -1; }
  int b(std::size_t k) const { return buffer.size() > k ? buffer[k] : -1; }
  std::vector<Arc> arcs() const;
  bool operator==(const Configuration&) const = default;
};

struct GoldTree {
  std::vector<int> head;        // size n+1, head[0] unused (-1)
  std::vector<int> label;       // size n+1
  std::vector<int> proj_order;  // size n+1, proj_order[0] = 0, else a permutation of 1..n

  int n() const { return static_cast<int>(head.size()) - 1; }
};

/// Position of each token in the in-order traversal of the tree: left children
/// (in surface order), the node, then right children. Index 0 is the root (0).
/// Throws std::invalid_argument for cycles or malformed heads.
std::vector<int> projective_order(std::span<const int> heads);

/// heads/labels indexed 1..n (index 0 ignored). Throws if not a single-rooted tree.
GoldTree make_gold(std::vector<int> heads, std::vector<int> labels);
bool is_projective(std::span<const int> heads);

Configuration initial_config(int n);
bool is_terminal(const Configuration& c);

/// Maximum length of any legal transition sequence for an n-token sentence.
long max_transitions(int n);

/// Test-time legality (no gold): SWAP only for s0 < b0 by surface index while the
/// swap budget n(n-1)/2 lasts.
MoveSet legal_moves(const Configuration& c);

/// Training-time legality: {SWAP} when the projective order mandates it, otherwise
/// the test-time set without SWAP.
MoveSet legal_moves(const Configuration& c, const GoldTree& gold);

bool swap_mandated(const Configuration& c, const GoldTree& gold);

/// Applies t; throws IllegalTransition unless t is legal at test time.
Configuration apply(Configuration c, const Transition& t);
void apply_in_place(Configuration& c, const Transition& t);

/// Transition consistent with the gold tree from a gold-reachable configuration.
Transition static_oracle(const Configuration& c, const GoldTree& gold);

/// Number of gold arcs lost by applying `move` (unlabeled). SWAP costs 0 when
/// mandated and kInfiniteCost otherwise.
int dynamic_cost(const Configuration& c, Move move, const GoldTree& gold);

/// dynamic_cost plus one when the arc created is gold but the label is wrong.
int transition_cost(const Configuration& c, const Transition& t, const GoldTree& gold);

/// Gold arcs (unlabeled) already built correctly or still individually reachable.
int reachable_gold_arcs(const Configuration& c, const GoldTree& gold);

/// Attaches any unattached token to the token governed by the root (or makes
/// the first unattached token the root when none exists). Heads indexed 1..n.
void repair_tree(std::vector<int>& head, std::vector<int>& label, int root_label, int fallback_label);

}  // namespace tbparse::transitions
