#ifndef EVOGRID_CEG_HPP
#define EVOGRID_CEG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evogrid/fixed.hpp"
#include "evogrid/grid.hpp"
#include "evogrid/payoff.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

// One chosen neighbor per node. Entries are validated at insertion, so a
// constructed field is always adjacency-correct.
class ControlField {
 public:
  ControlField() = default;
  explicit ControlField(const TorusDims& d) : dims_(d), target_(d.cells(), -1) {
    // Default choice: the "up" neighbor.
    NeighborTable nb(d);
    for (int k = 0; k < d.cells(); ++k) target_[k] = nb[k][0];
  }

  const TorusDims& dims() const { return dims_; }

  void set(NodeId node, NodeId chosen) {
    if (torus_distance(node, chosen, dims_) != 1)
      throw std::invalid_argument("control entry must be a neighbor of its node");
    target_[to_index(node, dims_)] = to_index(chosen, dims_);
  }

  void set_flat(int node, int chosen, const NeighborTable& nb) {
    bool adjacent = false;
    for (int q = 0; q < 4; ++q) adjacent |= (nb[node][q] == chosen);
    if (!adjacent) throw std::invalid_argument("control entry must be a neighbor of its node");
    target_[node] = chosen;
  }

  NodeId at(NodeId node) const { return from_index(target_[to_index(node, dims_)], dims_); }
  int target_flat(int k) const { return target_[k]; }

  bool operator==(const ControlField& o) const = default;

 private:
  TorusDims dims_;
  std::vector<int32_t> target_;
};

// Deterministic synchronous step: each node compares against its chosen
// neighbor and adopts that neighbor's current strategy iff it strictly
// out-earns the node. Fixed nodes, when given, never update.
inline StrategyGrid step_ceg(const StrategyGrid& state, const PayoffMatrix& m,
                             const ControlField& controls, const FixedSet* fixed = nullptr) {
  if (controls.dims() != state.dims())
    throw std::invalid_argument("control field dims mismatch");
  const TorusDims& d = state.dims();
  const NeighborTable nbrs(d);
  const PayoffClassTable table(m);
  const int n = d.cells();
  std::vector<int> cls(n);
  for (int k = 0; k < n; ++k) {
    int kc = 0;
    for (int q = 0; q < 4; ++q)
      if (state.at_flat(nbrs[k][q]) == Strategy::C) ++kc;
    cls[k] = payoff_class(state.at_flat(k), kc);
  }
  StrategyGrid out = state;
  for (int k = 0; k < n; ++k) {
    if (fixed && fixed->contains_flat(k)) continue;
    const int t = controls.target_flat(k);
    if (table.greater(cls[t], cls[k])) out.set_flat(k, state.at_flat(t));
  }
  return out;
}

// The greedy control law: a node facing at least one defector compares
// against its highest-paid defecting neighbor, otherwise against its
// lowest-paid neighbor. Ties break toward the smallest row-major index.
inline ControlField greedy_control(const StrategyGrid& state, const PayoffMatrix& m) {
  const TorusDims& d = state.dims();
  const NeighborTable nbrs(d);
  const PayoffClassTable table(m);
  const int n = d.cells();
  std::vector<int> cls(n);
  for (int k = 0; k < n; ++k) {
    int kc = 0;
    for (int q = 0; q < 4; ++q)
      if (state.at_flat(nbrs[k][q]) == Strategy::C) ++kc;
    cls[k] = payoff_class(state.at_flat(k), kc);
  }
  ControlField cf(d);
  for (int k = 0; k < n; ++k) {
    int best = -1;
    bool any_defector = false;
    for (int q = 0; q < 4; ++q)
      any_defector |= (state.at_flat(nbrs[k][q]) == Strategy::D);
    for (int q = 0; q < 4; ++q) {
      const int nb = nbrs[k][q];
      if (any_defector) {
        if (state.at_flat(nb) != Strategy::D) continue;
        if (best < 0 || table.greater(cls[nb], cls[best]) ||
            (table.equal(cls[nb], cls[best]) && nb < best))
          best = nb;
      } else {
        if (best < 0 || table.greater(cls[best], cls[nb]) ||
            (table.equal(cls[nb], cls[best]) && nb < best))
          best = nb;
      }
    }
    cf.set_flat(k, best, nbrs);
  }
  return cf;
}

// Keeps every node in place: first same-strategy neighbor in canonical order,
// falling back to the lowest-paid neighbor for isolated nodes (which only
// matters outside the regions the controllers argue about).
inline ControlField same_strategy_control(const StrategyGrid& state, const PayoffMatrix& m) {
  const TorusDims& d = state.dims();
  const NeighborTable nbrs(d);
  const PayoffClassTable table(m);
  const int n = d.cells();
  std::vector<int> cls(n);
  for (int k = 0; k < n; ++k) {
    int kc = 0;
    for (int q = 0; q < 4; ++q)
      if (state.at_flat(nbrs[k][q]) == Strategy::C) ++kc;
    cls[k] = payoff_class(state.at_flat(k), kc);
  }
  ControlField cf(d);
  for (int k = 0; k < n; ++k) {
    int pick = -1;
    for (int q = 0; q < 4 && pick < 0; ++q)
      if (state.at_flat(nbrs[k][q]) == state.at_flat(k)) pick = nbrs[k][q];
    if (pick < 0) {
      for (int q = 0; q < 4; ++q) {
        const int nb = nbrs[k][q];
        if (pick < 0 || table.greater(cls[pick], cls[nb]) ||
            (table.equal(cls[nb], cls[pick]) && nb < pick))
          pick = nb;
      }
    }
    cf.set_flat(k, pick, nbrs);
  }
  return cf;
}

// ---- traces -----------------------------------------------------------------

enum class Phase { Step1, Step2, Step3, Step4, Step5, Flood };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Step1: return "step1";
    case Phase::Step2: return "step2";
    case Phase::Step3: return "step3";
    case Phase::Step4: return "step4";
    case Phase::Step5: return "step5-expansion";
    default: return "flood";
  }
}

struct TraceEntry {
  long step = 0;  // 1-based: state after this many CEG steps
  ControlField controls;
  StrategyGrid after;
  int n_c = 0;
  Phase phase = Phase::Step1;
};

// Stop-time markers; -1 when the phase never ran.
struct StopTimes {
  long t1 = -1, t2 = -1, t3 = -1, t4 = -1, t5 = -1;
};

struct ControlTrace {
  StrategyGrid initial;
  std::vector<TraceEntry> entries;
  StopTimes stops;

  long length() const { return static_cast<long>(entries.size()); }
  const StrategyGrid& final_state() const {
    return entries.empty() ? initial : entries.back().after;
  }
};

// A controller-detected violation of an intermediate assertion from the
// constructive proofs. Never caught internally: it is a falsification signal.
class TraceIntegrityError : public std::runtime_error {
 public:
  explicit TraceIntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evogrid

#endif
