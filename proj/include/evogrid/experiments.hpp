#ifndef EVOGRID_EXPERIMENTS_HPP
#define EVOGRID_EXPERIMENTS_HPP

#include <cstdint>
#include <vector>

#include "evogrid/fixed.hpp"
#include "evogrid/oracle.hpp"
#include "evogrid/seg.hpp"

namespace evogrid {

struct MaccSummary {
  int runs = 0;
  int reached = 0;  // runs ending at the desired consensus within budget
  double success_fraction = 0.0;
  double mean_steps = 0.0;  // over successful runs
  long max_steps = 0;       // over successful runs
  std::vector<RunRecord> records;
};

// Fixed-defection consensus experiment: constrained runs from random initial
// states, reporting the fraction that reach total defection.
MaccSummary macc_defection(const TorusDims& dims, const PayoffMatrix& m,
                           const ImitationRule& rule, const std::vector<uint64_t>& seeds,
                           long max_steps, const FixedSet& fixed_d, int workers = 0);

// Fixed-cooperation rectangle experiment: constrained runs from random free
// initials, reporting the fraction that reach total cooperation.
MaccSummary macc_cooperation(const TorusDims& dims, const PayoffMatrix& m,
                             const ImitationRule& rule, const std::vector<uint64_t>& seeds,
                             long max_steps, const FixedRect& rect, int workers = 0);

// Unreachability certificate for small pinned-cooperator sets: from the
// all-defection free initial state, total cooperation has no positive-
// probability path. `frozen` reports the stronger outcome that the initial
// state is its own unique successor.
struct Prop2Certificate {
  bool s_c_unreachable = false;
  bool frozen = false;
  uint64_t reachable_states = 0;
};

Prop2Certificate prop2_unreachability(const TorusDims& dims, const PayoffMatrix& m,
                                      const ImitationRule& rule, const FixedSet& fixed_c);

// Exhaustive forward reachability from one state over the support graph.
std::vector<uint8_t> reachable_from(const SupportGraph& g, StateIndex start);

}  // namespace evogrid

#endif
