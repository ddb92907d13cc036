#ifndef EVOGRID_SEG_HPP
#define EVOGRID_SEG_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "evogrid/grid.hpp"
#include "evogrid/imitation.hpp"
#include "evogrid/payoff.hpp"
#include "evogrid/rng.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

enum class TerminalClass { AllC, AllD, MixedOmegaStar, Timeout };

inline const char* to_string(TerminalClass t) {
  switch (t) {
    case TerminalClass::AllC: return "AllC";
    case TerminalClass::AllD: return "AllD";
    case TerminalClass::MixedOmegaStar: return "MixedOmegaStar";
    default: return "Timeout";
  }
}

struct RunRecord {
  uint64_t seed = 0;
  uint64_t initial_hash = 0;
  long steps = 0;  // first absorbing time, or steps executed on timeout
  TerminalClass terminal = TerminalClass::Timeout;
  int n_c_final = 0;
};

// Possible next strategies of a single node (positive-probability outcomes).
struct SupportSet {
  bool c = false;
  bool d = false;
  bool contains(Strategy s) const { return s == Strategy::C ? c : d; }
  int size() const { return (c ? 1 : 0) + (d ? 1 : 0); }
  bool only(Strategy s) const { return contains(s) && size() == 1; }
};

// Synchronous update engine. One instance per (dims, matrix, rule); stateless
// across calls apart from read-only tables, so one engine may serve many
// concurrent runs as long as each run brings its own RngStream.
class SegEngine {
 public:
  SegEngine(const TorusDims& dims, const PayoffMatrix& m, const ImitationRule& rule)
      : dims_(dims), nbrs_(dims), table_(m), rule_(rule) {
    for (int a = 0; a < kPayoffClasses; ++a)
      for (int b = 0; b < kPayoffClasses; ++b)
        phi_[b][a] = table_.greater(b, a)
                         ? switch_probability(rule, m, table_.value[b] - table_.value[a])
                         : 0.0;
  }

  const TorusDims& dims() const { return dims_; }
  const NeighborTable& neighbor_table() const { return nbrs_; }
  const PayoffClassTable& table() const { return table_; }
  const ImitationRule& rule() const { return rule_; }

  // RNG contract, per node in row-major order: one neighbor draw, then one
  // uniform variate only when the sampled neighbor strictly out-earns the
  // node and the rule is stochastic. Nodes under fixed_mask consume nothing.
  void step(const StrategyGrid& in, StrategyGrid& out, RngStream& rng,
            const uint8_t* fixed_mask = nullptr) const {
    const int n = dims_.cells();
    int cls[kMaxCells];
    classes(in, cls);
    if (out.dims() != dims_) out = StrategyGrid(dims_, Strategy::C);
    for (int k = 0; k < n; ++k) {
      const Strategy own = in.at_flat(k);
      if (fixed_mask && fixed_mask[k]) {
        out.set_flat(k, own);
        continue;
      }
      const int nb = nbrs_[k][rng.below4()];
      Strategy next = own;
      if (table_.greater(cls[nb], cls[k])) {
        if (!rule_.stochastic()) {
          next = in.at_flat(nb);
        } else {
          if (rng.uniform01() < phi_[cls[nb]][cls[k]]) next = in.at_flat(nb);
        }
      }
      out.set_flat(k, next);
    }
  }

  // Omega* membership: every adjacent differing pair has exactly equal payoff.
  bool absorbing(const StrategyGrid& s) const {
    const int n = dims_.cells();
    int cls[kMaxCells];
    classes(s, cls);
    for (int k = 0; k < n; ++k) {
      for (int q : {1, 3}) {  // down, right: each undirected edge once
        const int nb = nbrs_[k][q];
        if (s.at_flat(k) != s.at_flat(nb) && !table_.equal(cls[k], cls[nb])) return false;
      }
    }
    return true;
  }

  SupportSet support(const StrategyGrid& s, NodeId node) const {
    int cls[kMaxCells];
    classes(s, cls);
    return support_flat(s, to_index(node, dims_), cls);
  }

  SupportSet support_flat(const StrategyGrid& s, int k, const int* cls) const {
    SupportSet out;
    const Strategy own = s.at_flat(k);
    if (!rule_.stochastic()) {
      for (int q = 0; q < 4; ++q) {
        const int nb = nbrs_[k][q];
        const Strategy outcome = table_.greater(cls[nb], cls[k]) ? s.at_flat(nb) : own;
        (outcome == Strategy::C ? out.c : out.d) = true;
      }
    } else {
      (own == Strategy::C ? out.c : out.d) = true;
      for (int q = 0; q < 4; ++q) {
        const int nb = nbrs_[k][q];
        if (table_.greater(cls[nb], cls[k]))
          (s.at_flat(nb) == Strategy::C ? out.c : out.d) = true;
      }
    }
    return out;
  }

  void classes(const StrategyGrid& s, int* cls) const {
    const int n = dims_.cells();
    for (int k = 0; k < n; ++k) {
      int kc = 0;
      for (int q = 0; q < 4; ++q)
        if (s.at_flat(nbrs_[k][q]) == Strategy::C) ++kc;
      cls[k] = payoff_class(s.at_flat(k), kc);
    }
  }

  static constexpr int kMaxCells = 4096;

 private:
  TorusDims dims_;
  NeighborTable nbrs_;
  PayoffClassTable table_;
  ImitationRule rule_;
  double phi_[kPayoffClasses][kPayoffClasses];
};

// ---- spec-level operations -------------------------------------------------

inline StrategyGrid step_seg(const StrategyGrid& state, const PayoffMatrix& m,
                             const ImitationRule& rule, RngStream& rng) {
  SegEngine engine(state.dims(), m, rule);
  StrategyGrid out;
  engine.step(state, out, rng);
  return out;
}

inline bool is_absorbing(const StrategyGrid& state, const PayoffMatrix& m) {
  SegEngine engine(state.dims(), m, make_rule(RuleKind::Deterministic, m));
  return engine.absorbing(state);
}

inline SupportSet support(const StrategyGrid& state, const PayoffMatrix& m,
                          const ImitationRule& rule, NodeId node) {
  SegEngine engine(state.dims(), m, rule);
  return engine.support(state, node);
}

inline StrategyGrid random_initial(const TorusDims& dims, RngStream& rng) {
  StrategyGrid g(dims, Strategy::C);
  for (int k = 0; k < dims.cells(); ++k)
    g.set_flat(k, rng.bit() ? Strategy::D : Strategy::C);
  return g;
}

inline TerminalClass classify_terminal(const StrategyGrid& s, const SegEngine& engine) {
  if (!engine.absorbing(s)) return TerminalClass::Timeout;
  const int nc = s.n_cooperators();
  if (nc == s.cells()) return TerminalClass::AllC;
  if (nc == 0) return TerminalClass::AllD;
  return TerminalClass::MixedOmegaStar;
}

using SnapshotCallback = std::function<void(long step, const StrategyGrid&)>;

// Iterates the SEG, checking absorption each step. Timeout is an outcome,
// not an error. The optional callback sees every visited state including the
// initial one; the optional fixed mask freezes those cells (N_C/N_D play).
inline RunRecord run_until_absorbing(const StrategyGrid& initial, const PayoffMatrix& m,
                                     const ImitationRule& rule, RngStream& rng, long max_steps,
                                     const SnapshotCallback& on_state = nullptr,
                                     const uint8_t* fixed_mask = nullptr) {
  if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  SegEngine engine(initial.dims(), m, rule);
  RunRecord rec;
  rec.seed = rng.seed();
  rec.initial_hash = initial.hash();
  StrategyGrid cur = initial;
  StrategyGrid next;
  long t = 0;
  if (on_state) on_state(0, cur);
  while (true) {
    if (engine.absorbing(cur)) {
      rec.steps = t;
      rec.terminal = classify_terminal(cur, engine);
      break;
    }
    if (t >= max_steps) {
      rec.steps = t;
      rec.terminal = TerminalClass::Timeout;
      break;
    }
    engine.step(cur, next, rng, fixed_mask);
    std::swap(cur, next);
    ++t;
    if (on_state) on_state(t, cur);
  }
  rec.n_c_final = cur.n_cooperators();
  return rec;
}

}  // namespace evogrid

#endif
