#ifndef EVOGRID_CONTROLLERS_HPP
#define EVOGRID_CONTROLLERS_HPP

#include <optional>

#include "evogrid/ceg.hpp"
#include "evogrid/fixed.hpp"

namespace evogrid {

// Greedy phase: repeat step_ceg under greedy_control until a fixed point.
// n_C strictly decreases on every recorded step.
ControlTrace run_step1(const StrategyGrid& state, const PayoffMatrix& m);

// From a greedy fixed point under the prisoner's-dilemma ordering, applies
// the two- and three-cooperation-neighbor gadgets (with the documented skip
// guard for the two-neighbor phase) until Omega* is reached. Total CEG steps
// are bounded by 2(NM-1) counting the interleaved greedy re-runs.
ControlTrace run_gadgets_thm1(const StrategyGrid& at_fixed_point, const PayoffMatrix& m);

// run_step1 followed by run_gadgets_thm1, with the combined step bound checked.
ControlTrace run_controller_thm1(const StrategyGrid& state, const PayoffMatrix& m);

// Snowdrift-ordering controller: greedy phase, then the one-, two- and
// three-cooperation-neighbor gadget phases, reaching Omega* within 2(NM-1).
ControlTrace run_controller_thm2(const StrategyGrid& state, const PayoffMatrix& m);

// Stag-hunt flood: grows the invariant all-C region outward from an all-C
// 2x2 block until total cooperation.
ControlTrace run_flood_thm3(const StrategyGrid& state, const PayoffMatrix& m);

// Constant-cooperator rectangle controller: drives free nodes to defection
// (reaching S*, cooperators exactly on the rectangle) within
// 2(NM - N1 M1 - 1) steps, then expands the rectangle to total cooperation in
// ceil((N-N1)/2) + ceil((M-M1)/2) further steps.
ControlTrace run_controller_thm4(const StrategyGrid& state, const PayoffMatrix& m,
                                 const FixedRect& rect);

namespace detail {

// Deterministic row-major/frame-order scan for a free cooperator with the
// given number of cooperating neighbors and a defecting neighbor of strictly
// different payoff. The frame points d at a cooperating neighbor (free one,
// under a fixed set) and e at such a defecting neighbor, orthogonally.
struct Violation {
  NodeId node;
  Frame frame;
};
std::optional<Violation> find_violation(const StrategyGrid& state, const PayoffMatrix& m,
                                        int coop_neighbors, const FixedSet* fixed);

// Applies one two-cooperation-neighbor gadget at an explicit location and
// returns both intermediate states (grid after the prescribed step, grid
// after the follow-up greedy step). Exposed for gadget-level tests.
struct GadgetStates {
  StrategyGrid mid;
  StrategyGrid end;
};
GadgetStates apply_step2_gadget_thm1(const StrategyGrid& at_fixed_point, const PayoffMatrix& m,
                                     NodeId node, const Frame& frame);

}  // namespace detail

}  // namespace evogrid

#endif
