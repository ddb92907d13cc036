#ifndef EVOGRID_ORACLE_HPP
#define EVOGRID_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "evogrid/fixed.hpp"
#include "evogrid/grid.hpp"
#include "evogrid/imitation.hpp"
#include "evogrid/payoff.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

// Brute-force ground truth on tiny grids: the full positive-probability
// one-step transition relation, with exact probabilities ignored.
using StateIndex = uint32_t;

constexpr int kOracleCellCap = 16;  // 2^16 states

StateIndex encode_state(const StrategyGrid& g);
StrategyGrid decode_state(StateIndex s, const TorusDims& d);

// Per-node supports combine as a Cartesian product, so each state's successor
// set is a subcube of {C,D}^(NM): bits in free_mask range over both values,
// the rest are pinned by value. Absorbing states are exactly the self-loop-only
// states (free_mask == 0 and value == state).
struct SupportGraph {
  TorusDims dims{3, 3};
  int cells = 9;
  uint32_t n_states = 512;
  std::vector<uint32_t> value;      // determined successor bits (free bits zeroed)
  std::vector<uint32_t> free_mask;  // bits whose per-node support has both strategies
  uint32_t fixed_mask = 0;          // pinned cells, when built for a constrained game
  uint32_t fixed_value = 0;

  bool consistent(StateIndex s) const { return (s & fixed_mask) == fixed_value; }
  bool is_absorbing(StateIndex s) const { return free_mask[s] == 0 && value[s] == s; }
  bool successor_contains(StateIndex s, StateIndex t) const {
    return (t & ~free_mask[s]) == value[s];
  }
  uint64_t successor_count(StateIndex s) const {
    return uint64_t(1) << __builtin_popcount(free_mask[s]);
  }
  template <typename F>
  void for_each_successor(StateIndex s, F f) const {
    const uint32_t free = free_mask[s];
    uint32_t sub = free;
    while (true) {
      f(static_cast<StateIndex>(value[s] | sub));
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
  }
  template <typename F>
  void for_each_consistent(F f) const {
    const uint32_t hole = ~fixed_mask & (n_states - 1);
    uint32_t sub = hole;
    while (true) {
      f(static_cast<StateIndex>(fixed_value | sub));
      if (sub == 0) break;
      sub = (sub - 1) & hole;
    }
  }
};

SupportGraph build_support_graph(const TorusDims& dims, const PayoffMatrix& m,
                                 const ImitationRule& rule, const FixedSet* fixed = nullptr);

// can_reach[s] = 1 iff some state of `target` is reachable from s (in zero or
// more steps) through the support relation.
std::vector<uint8_t> reach_backward(const SupportGraph& g, const std::vector<uint8_t>& target);

struct ConvergenceCertificate {
  bool converges = false;
  // When false: one recurrent class from which the absorbing set is
  // unreachable (a terminal strongly connected component).
  std::vector<StateIndex> witness;
};

// Almost-sure finite-time absorption for every start state is equivalent, on
// a finite chain, to the absorbing set being support-reachable from every
// state.
ConvergenceCertificate certify_as_convergence(const SupportGraph& g);

struct TerminalPartition {
  std::vector<StateIndex> all_c;
  std::vector<StateIndex> all_d;
  std::vector<StateIndex> mixed;
};

TerminalPartition classify_terminals(const SupportGraph& g);

// P(reach `target`) = 1 from s iff no state outside can-reach(target) is
// reachable from s. Verifies that for every consistent state passing `start`.
bool certify_almost_sure_consensus(const SupportGraph& g, StateIndex target,
                                   const std::vector<uint8_t>& start);

// Every state containing an all-C 2x2 block reaches total cooperation with
// probability 1.
bool verify_thm3_basin(const SupportGraph& g);

bool has_c_square(StateIndex s, const TorusDims& d);

}  // namespace evogrid

#endif
