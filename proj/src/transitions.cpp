#include "tbparse/transitions.hpp"

#include <algorithm>

namespace tbparse::transitions {

const char* name(Move m) {
  switch (m) {
    case Move::Shift:
      return "SHIFT";
    case Move::LeftArc:
      return "LEFT_ARC";
    case Move::RightArc:
      return "RIGHT_ARC";
    case Move::Swap:
      return "SWAP";
  }
  return "?";
}

std::size_t MoveSet::size() const {
  std::size_t k = 0;
  for (Move m : kAllMoves) k += contains(m) ? 1 : 0;
  return k;
}

std::vector<Move> MoveSet::moves() const {
  std::vector<Move> out;
  for (Move m : kAllMoves) {
    if (contains(m)) out.push_back(m);
  }
  return out;
}

std::vector<Arc> Configuration::arcs() const {
  std::vector<Arc> out;
  for (int d = 1; d <= n; ++d) {
    if (head[d] >= 0) out.push_back({head[d], d, label[d]});
  }
  return out;
}

std::vector<int> projective_order(std::span<const int> heads) {
  const int n = static_cast<int>(heads.size()) - 1;
  if (n < 0) throw std::invalid_argument("projective_order: empty head array");
  std::vector<std::vector<int>> children(n + 1);
  for (int d = 1; d <= n; ++d) {
    if (heads[d] < 0 || heads[d] > n || heads[d] == d) {
      throw std::invalid_argument("projective_order: invalid head for token " + std::to_string(d));
    }
    children[heads[d]].push_back(d);  // surface order, since d increases
  }
  std::vector<int> order(n + 1, 0);
  int next = 1;
  int visited = 0;
  // Iterative in-order walk: frame = (node, index of next child to visit, emitted?).
  struct Frame {
    int node;
    std::size_t child;
    bool emitted;
  };
  std::vector<Frame> stack{{0, 0, false}};
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& kids = children[f.node];
    if (!f.emitted && (f.child == kids.size() || kids[f.child] > f.node)) {
      f.emitted = true;
      if (f.node != 0) order[f.node] = next++;
      ++visited;
      continue;
    }
    if (f.child < kids.size()) {
      const int kid = kids[f.child++];
      stack.push_back({kid, 0, false});
      continue;
    }
    stack.pop_back();
  }
  if (visited != n + 1) throw std::invalid_argument("projective_order: head relation contains a cycle");
  return order;
}

bool is_projective(std::span<const int> heads) {
  const auto order = projective_order(heads);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i] != static_cast<int>(i)) return false;
  }
  return true;
}

GoldTree make_gold(std::vector<int> heads, std::vector<int> labels) {
  const int n = static_cast<int>(heads.size()) - 1;
  if (n < 1) throw std::invalid_argument("make_gold: empty sentence");
  if (labels.size() != heads.size()) throw std::invalid_argument("make_gold: label array size mismatch");
  int roots = 0;
  for (int d = 1; d <= n; ++d) roots += heads[d] == 0 ? 1 : 0;
  if (roots != 1) throw std::invalid_argument("make_gold: expected exactly one root, found " + std::to_string(roots));
  heads[0] = -1;
  GoldTree g;
  g.proj_order = projective_order(heads);
  g.head = std::move(heads);
  g.label = std::move(labels);
  return g;
}

Configuration initial_config(int n) {
  if (n < 1) throw std::invalid_argument("initial_config: sentence must have at least one token");
  Configuration c;
  c.n = n;
  c.stack = {0};
  c.buffer.resize(n);
  for (int i = 0; i < n; ++i) c.buffer[i] = i + 1;
  c.head.assign(n + 1, -1);
  c.label.assign(n + 1, kNoLabel);
  return c;
}

bool is_terminal(const Configuration& c) { return c.buffer.empty() && c.stack.size() == 1 && c.stack[0] == 0; }

long max_transitions(int n) { return 2L * n + static_cast<long>(n) * (n - 1); }

MoveSet legal_moves(const Configuration& c) {
  MoveSet set;
  const int s0 = c.s(0);
  const bool has_buffer = !c.buffer.empty();
  if (has_buffer) set.insert(Move::Shift);
  if (s0 > 0 && has_buffer) set.insert(Move::LeftArc);
  if (c.stack.size() >= 2 && s0 > 0 && (c.s(1) != 0 || !has_buffer)) set.insert(Move::RightArc);
  const long budget = static_cast<long>(c.n) * (c.n - 1) / 2;
  if (s0 > 0 && has_buffer && s0 < c.b(0) && c.swaps < budget) set.insert(Move::Swap);
  return set;
}

bool swap_mandated(const Configuration& c, const GoldTree& gold) {
  const int s0 = c.s(0);
  return s0 > 0 && !c.buffer.empty() && gold.proj_order[s0] > gold.proj_order[c.b(0)];
}

MoveSet legal_moves(const Configuration& c, const GoldTree& gold) {
  if (swap_mandated(c, gold)) {
    MoveSet only;
    only.insert(Move::Swap);
    return only;
  }
  MoveSet set = legal_moves(c);
  set.erase(Move::Swap);
  return set;
}

void apply_in_place(Configuration& c, const Transition& t) {
  if (!legal_moves(c).contains(t.move)) {
    throw IllegalTransition(std::string("illegal transition ") + name(t.move));
  }
  if (is_arc(t.move) != (t.label != kNoLabel)) {
    throw IllegalTransition(std::string(name(t.move)) + (is_arc(t.move) ? " needs a label" : " takes no label"));
  }
  switch (t.move) {
    case Move::Shift:
      c.stack.push_back(c.buffer.front());
      c.buffer.erase(c.buffer.begin());
      break;
    case Move::LeftArc: {
      const int d = c.stack.back();
      c.stack.pop_back();
      c.head[d] = c.buffer.front();
      c.label[d] = t.label;
      break;
    }
    case Move::RightArc: {
      const int d = c.stack.back();
      c.stack.pop_back();
      c.head[d] = c.stack.back();
      c.label[d] = t.label;
      break;
    }
    case Move::Swap: {
      const int d = c.stack.back();
      c.stack.pop_back();
      c.buffer.insert(c.buffer.begin() + 1, d);
      ++c.swaps;
      break;
    }
  }
}

Configuration apply(Configuration c, const Transition& t) {
  apply_in_place(c, t);
  return c;
}

namespace {

bool has_all_dependents(const Configuration& c, const GoldTree& gold, int token) {
  for (int d = 1; d <= c.n; ++d) {
    if (gold.head[d] == token && c.head[d] < 0) return false;
  }
  return true;
}

}  // namespace

Transition static_oracle(const Configuration& c, const GoldTree& gold) {
  if (swap_mandated(c, gold)) {
    if (!legal_moves(c).contains(Move::Swap)) throw OracleError("mandated SWAP is structurally illegal");
    return {Move::Swap, kNoLabel};
  }
  const int s0 = c.s(0);
  if (s0 > 0 && has_all_dependents(c, gold, s0)) {
    if (!c.buffer.empty() && gold.head[s0] == c.b(0)) return {Move::LeftArc, gold.label[s0]};
    if (c.stack.size() >= 2 && gold.head[s0] == c.s(1) && legal_moves(c).contains(Move::RightArc)) {
      return {Move::RightArc, gold.label[s0]};
    }
  }
  if (!c.buffer.empty()) return {Move::Shift, kNoLabel};
  throw OracleError("no transition consistent with the gold tree");
}

int reachable_gold_arcs(const Configuration& start, const GoldTree& gold) {
  Configuration c = start;
  while (swap_mandated(c, gold)) apply_in_place(c, {Move::Swap, kNoLabel});

  const int n = c.n;
  std::vector<int> stack_pos(n + 1, -1);
  std::vector<char> in_buffer(n + 1, 0);
  for (std::size_t i = 0; i < c.stack.size(); ++i) stack_pos[c.stack[i]] = static_cast<int>(i);
  for (int t : c.buffer) in_buffer[t] = 1;
  int min_rest = std::numeric_limits<int>::max();
  for (std::size_t i = 1; i < c.buffer.size(); ++i) min_rest = std::min(min_rest, gold.proj_order[c.buffer[i]]);

  int count = 0;
  for (int d = 1; d <= n; ++d) {
    if (c.head[d] >= 0) {
      count += c.head[d] == gold.head[d] ? 1 : 0;
      continue;
    }
    const int h = gold.head[d];
    if (h != 0 && stack_pos[h] < 0 && !in_buffer[h]) continue;  // head already consumed
    if (in_buffer[d] || in_buffer[h]) {
      ++count;
      continue;
    }
    // Both on the stack (the root always is).
    const int i = stack_pos[d];
    const int j = stack_pos[h];
    if (j == i - 1) {
      ++count;
    } else if (j < i) {
      // d must travel back to the buffer, which needs a later front below it.
      count += min_rest < gold.proj_order[d] ? 1 : 0;
    } else {
      count += min_rest < gold.proj_order[h] ? 1 : 0;
    }
  }
  return count;
}

int dynamic_cost(const Configuration& c, Move move, const GoldTree& gold) {
  if (move == Move::Swap) return swap_mandated(c, gold) ? 0 : kInfiniteCost;
  const int label = is_arc(move) ? 0 : kNoLabel;
  const Configuration next = apply(c, {move, label});
  return reachable_gold_arcs(c, gold) - reachable_gold_arcs(next, gold);
}

int transition_cost(const Configuration& c, const Transition& t, const GoldTree& gold) {
  int cost = dynamic_cost(c, t.move, gold);
  if (cost >= kInfiniteCost) return cost;
  if (t.move == Move::LeftArc || t.move == Move::RightArc) {
    const int d = c.s(0);
    const int h = t.move == Move::LeftArc ? c.b(0) : c.s(1);
    if (gold.head[d] == h && gold.label[d] != t.label) ++cost;
  }
  return cost;
}

void repair_tree(std::vector<int>& head, std::vector<int>& label, int root_label, int fallback_label) {
  const int n = static_cast<int>(head.size()) - 1;
  int root = -1;
  for (int d = 1; d <= n; ++d) {
    if (head[d] == 0) {
      if (root < 0) {
        root = d;
      } else {
        head[d] = root;
        label[d] = fallback_label;
      }
    }
  }
  for (int d = 1; d <= n; ++d) {
    if (head[d] >= 0) continue;
    if (root < 0) {
      root = d;
      head[d] = 0;
      label[d] = root_label;
    } else {
      head[d] = root;
      label[d] = fallback_label;
    }
  }
  if (root < 0 && n > 0) {
    root = 1;
    head[1] = 0;
    label[1] = root_label;
  }
  // Break cycles that cannot reach the root by re-attaching to the root token.
  for (int d = 1; d <= n; ++d) {
    int node = d;
    for (int steps = 0; node != 0 && steps <= n; ++steps) node = head[node];
    if (node != 0) {
      head[d] = root;
      label[d] = fallback_label;
    }
  }
}

}  // namespace tbparse::transitions
