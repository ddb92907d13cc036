#include "evogrid/experiments.hpp"

#include <stdexcept>

#include "evogrid/parallel.hpp"

namespace evogrid {

namespace {

MaccSummary summarize(std::vector<RunRecord>&& records, TerminalClass want) {
  MaccSummary s;
  s.runs = static_cast<int>(records.size());
  double total = 0.0;
  for (const RunRecord& r : records) {
    if (r.terminal == want) {
      ++s.reached;
      total += static_cast<double>(r.steps);
      s.max_steps = std::max(s.max_steps, r.steps);
    }
  }
  s.success_fraction = s.runs ? static_cast<double>(s.reached) / s.runs : 0.0;
  s.mean_steps = s.reached ? total / s.reached : 0.0;
  s.records = std::move(records);
  return s;
}

}  // namespace

MaccSummary macc_defection(const TorusDims& dims, const PayoffMatrix& m,
                           const ImitationRule& rule, const std::vector<uint64_t>& seeds,
                           long max_steps, const FixedSet& fixed_d, int workers) {
  const ConditionReport cond = check_conditions(m);
  if (!(cond.thm1_ok || cond.thm2_ok) || !cond.cor1_ok)
    throw std::invalid_argument(
        "defection consensus requires the PD or snowdrift convergence conditions plus cor1");
  if (fixed_d.kind() != FixedKind::FixedD || fixed_d.empty())
    throw std::invalid_argument("a non-empty fixed-defection set is required");
  if (workers <= 0) workers = default_workers();

  std::vector<RunRecord> records(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), workers, [&](int i) {
    RngStream rng(seeds[i]);
    StrategyGrid init = random_initial(dims, rng);
    fixed_d.stamp(init);
    records[i] = run_until_absorbing(init, m, rule, rng, max_steps, nullptr, fixed_d.mask());
  });
  return summarize(std::move(records), TerminalClass::AllD);
}

MaccSummary macc_cooperation(const TorusDims& dims, const PayoffMatrix& m,
                             const ImitationRule& rule, const std::vector<uint64_t>& seeds,
                             long max_steps, const FixedRect& rect, int workers) {
  const ConditionReport cond = check_conditions(m);
  if (!(cond.thm4_i_ok || cond.thm4_ii_ok) || !cond.cor1_ok)
    throw std::invalid_argument(
        "cooperation consensus requires condition i) or ii) plus cor1");
  rect.validate(dims);
  const FixedSet fixed = rect.to_fixed_set(dims);
  if (workers <= 0) workers = default_workers();

  std::vector<RunRecord> records(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), workers, [&](int i) {
    RngStream rng(seeds[i]);
    StrategyGrid init = random_initial(dims, rng);
    fixed.stamp(init);
    records[i] = run_until_absorbing(init, m, rule, rng, max_steps, nullptr, fixed.mask());
  });
  return summarize(std::move(records), TerminalClass::AllC);
}

std::vector<uint8_t> reachable_from(const SupportGraph& g, StateIndex start) {
  std::vector<uint8_t> seen(g.n_states, 0);
  std::vector<StateIndex> queue;
  seen[start] = 1;
  queue.push_back(start);
  while (!queue.empty()) {
    const StateIndex s = queue.back();
    queue.pop_back();
    g.for_each_successor(s, [&](StateIndex t) {
      if (!seen[t]) {
        seen[t] = 1;
        queue.push_back(t);
      }
    });
  }
  return seen;
}

Prop2Certificate prop2_unreachability(const TorusDims& dims, const PayoffMatrix& m,
                                      const ImitationRule& rule, const FixedSet& fixed_c) {
  if (dims.rows < 4 || dims.cols < 4)
    throw std::invalid_argument("unreachability statement requires N >= 4 and M >= 4");
  if (!check_conditions(m).thm1_ok)
    throw std::invalid_argument("PD ordering required");
  if (fixed_c.kind() != FixedKind::FixedC || fixed_c.size() > 3)
    throw std::invalid_argument("at most three pinned cooperators");

  const SupportGraph g = build_support_graph(dims, m, rule, &fixed_c);

  // All free nodes defect; pinned nodes cooperate (bit 0).
  StateIndex init = static_cast<StateIndex>(g.n_states - 1);
  for (int k : fixed_c.members()) init &= ~(StateIndex(1) << k);

  const std::vector<uint8_t> seen = reachable_from(g, init);
  Prop2Certificate cert;
  cert.s_c_unreachable = !seen[0];
  cert.frozen = g.free_mask[init] == 0 && g.value[init] == init;
  for (uint8_t b : seen) cert.reachable_states += b;
  return cert;
}

}  // namespace evogrid
