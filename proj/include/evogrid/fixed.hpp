#ifndef EVOGRID_FIXED_HPP
#define EVOGRID_FIXED_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evogrid/grid.hpp"
#include "evogrid/imitation.hpp"
#include "evogrid/rng.hpp"
#include "evogrid/seg.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

enum class FixedKind { FixedC, FixedD };

// Nodes whose strategies are pinned. Pinned nodes still earn payoffs and can
// be imitated; they just never update.
class FixedSet {
 public:
  FixedSet(FixedKind kind, const TorusDims& dims, const std::vector<NodeId>& members)
      : kind_(kind), dims_(dims), mask_(dims.cells(), 0) {
    for (NodeId n : members) {
      int k = to_index(n, dims);
      if (!mask_[k]) {
        mask_[k] = 1;
        members_.push_back(k);
      }
    }
    std::sort(members_.begin(), members_.end());
  }

  FixedKind kind() const { return kind_; }
  Strategy strategy() const { return kind_ == FixedKind::FixedC ? Strategy::C : Strategy::D; }
  const TorusDims& dims() const { return dims_; }
  const std::vector<int32_t>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  bool contains_flat(int k) const { return mask_[k] != 0; }
  bool contains(NodeId n) const { return contains_flat(to_index(n, dims_)); }
  const uint8_t* mask() const { return mask_.data(); }

  // Pins the set's strategy onto a grid.
  void stamp(StrategyGrid& g) const {
    for (int k : members_) g.set_flat(k, strategy());
  }

  bool consistent_with(const StrategyGrid& g) const {
    for (int k : members_)
      if (g.at_flat(k) != strategy()) return false;
    return true;
  }

 private:
  FixedKind kind_;
  TorusDims dims_;
  std::vector<int32_t> members_;
  std::vector<uint8_t> mask_;
};

// N1 x M1 rectangle of constant cooperators, the control structure of the
// cooperation-consensus theorem: N1 in [2, N-3] or N1 = N, same for columns,
// on a grid of at least 5x5.
struct FixedRect {
  NodeId origin{1, 1};
  int n1 = 2;
  int m1 = 2;

  void validate(const TorusDims& d) const {
    if (d.rows < 5 || d.cols < 5)
      throw std::invalid_argument("fixed rectangle requires N >= 5 and M >= 5");
    auto ok = [](int len, int total) { return (len >= 2 && len <= total - 3) || len == total; };
    if (!ok(n1, d.rows) || !ok(m1, d.cols))
      throw std::invalid_argument("rectangle extents must lie in [2, N-3] union {N}");
  }

  std::vector<NodeId> members(const TorusDims& d) const {
    std::vector<NodeId> out;
    out.reserve(static_cast<std::size_t>(n1) * m1);
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < m1; ++b)
        out.push_back(canonical({origin.i + a, origin.j + b}, d));
    return out;
  }

  FixedSet to_fixed_set(const TorusDims& d) const {
    validate(d);
    return FixedSet(FixedKind::FixedC, d, members(d));
  }
};

// SEG step in which the fixed set never updates. Same RNG contract as
// step_seg for the free nodes.
inline StrategyGrid step_constrained(const StrategyGrid& state, const PayoffMatrix& m,
                                     const ImitationRule& rule, RngStream& rng,
                                     const FixedSet& fixed) {
  if (fixed.dims() != state.dims())
    throw std::invalid_argument("fixed set dims mismatch");
  if (!fixed.consistent_with(state))
    throw std::invalid_argument("fixed set strategy mismatch with state");
  SegEngine engine(state.dims(), m, rule);
  StrategyGrid out;
  engine.step(state, out, rng, fixed.mask());
  return out;
}

}  // namespace evogrid

#endif
