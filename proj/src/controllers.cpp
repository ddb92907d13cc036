#include "evogrid/controllers.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace evogrid {
namespace {

// Payoff classes by name, for the proof-fact assertions. Comparisons always
// go through the exact value table, so classes that happen to share a value
// compare equal.
constexpr int kC0 = 0, kC1 = 1, kC2 = 2, kC3 = 3;
constexpr int kD1 = 6, kD2 = 7, kD3 = 8;

struct Ctx {
  const PayoffMatrix& m;
  TorusDims dims;
  NeighborTable nbrs;
  PayoffClassTable table;
  const FixedSet* fixed;
  StrategyGrid state;
  ControlTrace trace;
  long hard_cap;

  Ctx(const StrategyGrid& s, const PayoffMatrix& mm, const FixedSet* fx, long cap)
      : m(mm), dims(s.dims()), nbrs(s.dims()), table(mm), fixed(fx), state(s), hard_cap(cap) {
    trace.initial = s;
  }

  Strategy strat(NodeId n) const { return state.at(n); }
  bool is_c(NodeId n) const { return state.at(n) == Strategy::C; }
  bool is_fixed(NodeId n) const { return fixed && fixed->contains(n); }

  int coop_nb_flat(int k) const {
    int c = 0;
    for (int q = 0; q < 4; ++q)
      if (state.at_flat(nbrs[k][q]) == Strategy::C) ++c;
    return c;
  }
  int coop_nb(NodeId n) const { return coop_nb_flat(to_index(n, dims)); }

  int cls(NodeId n) const {
    int k = to_index(n, dims);
    return payoff_class(state.at_flat(k), coop_nb_flat(k));
  }

  // Sign of P(a) - P(b), exact.
  int cmpP(NodeId a, NodeId b) const { return table.compare(cls(a), cls(b)); }
  // Sign of P(a) - value[c], exact.
  int cmpV(NodeId a, int c) const { return table.compare(cls(a), c); }

  [[noreturn]] void integrity(const std::string& msg) const {
    throw TraceIntegrityError("after " + std::to_string(trace.entries.size()) +
                              " CEG steps: " + msg);
  }
  void req(bool ok, const char* msg) const {
    if (!ok) integrity(msg);
  }

  void record(const ControlField& cf, StrategyGrid&& next, Phase ph) {
    state = std::move(next);
    trace.entries.push_back({trace.length() + 1, cf, state, state.n_cooperators(), ph});
    if (hard_cap >= 0 && trace.length() > hard_cap)
      integrity("controller exceeded its step bound of " + std::to_string(hard_cap));
  }

  // Prescribed gadget step: applies cf and requires the state diff to be
  // exactly the given flips.
  void apply_exact(const ControlField& cf, Phase ph,
                   const std::vector<std::pair<NodeId, Strategy>>& flips) {
    StrategyGrid next = step_ceg(state, m, cf, fixed);
    std::map<int, Strategy> expect;
    for (const auto& [node, s] : flips) expect[to_index(node, dims)] = s;
    for (int k = 0; k < dims.cells(); ++k) {
      auto it = expect.find(k);
      if (it != expect.end()) {
        req(state.at_flat(k) != it->second && next.at_flat(k) == it->second,
            "prescribed control must flip its target node");
      } else {
        req(next.at_flat(k) == state.at_flat(k),
            "prescribed control changed a node outside the gadget");
      }
    }
    record(cf, std::move(next), ph);
  }

  void apply_greedy(Phase ph) {
    ControlField cf = greedy_control(state, m);
    StrategyGrid next = step_ceg(state, m, cf, fixed);
    for (int k = 0; k < dims.cells(); ++k)
      req(!(state.at_flat(k) == Strategy::D && next.at_flat(k) == Strategy::C),
          "a defector flipped under greedy control (mresult_1_2)");
    record(cf, std::move(next), ph);
  }

  bool absorbing() const {
    for (int k = 0; k < dims.cells(); ++k) {
      const int ck = payoff_class(state.at_flat(k), coop_nb_flat(k));
      for (int q : {1, 3}) {
        const int nb = nbrs[k][q];
        const int cn = payoff_class(state.at_flat(nb), coop_nb_flat(nb));
        if (state.at_flat(k) != state.at_flat(nb) && table.compare(ck, cn) != 0) return false;
      }
    }
    return true;
  }
};

// Greedy phase: every recorded step strictly lowers n_C; at the fixed point
// the standing facts of Step 1 are re-checked (free nodes only).
void greedy_until_fixed(Ctx& ctx) {
  while (true) {
    ControlField cf = greedy_control(ctx.state, ctx.m);
    StrategyGrid next = step_ceg(ctx.state, ctx.m, cf, ctx.fixed);
    if (next == ctx.state) break;
    for (int k = 0; k < ctx.dims.cells(); ++k)
      ctx.req(!(ctx.state.at_flat(k) == Strategy::D && next.at_flat(k) == Strategy::C),
              "a defector flipped under greedy control (mresult_1_2)");
    const int before = ctx.state.n_cooperators();
    ctx.record(cf, std::move(next), Phase::Step1);
    ctx.req(ctx.state.n_cooperators() < before,
            "greedy step failed to strictly decrease n_C (mresult_2)");
  }
}

void check_fixed_point_facts(Ctx& ctx) {
  for (int k = 0; k < ctx.dims.cells(); ++k) {
    if (ctx.fixed && ctx.fixed->contains_flat(k)) continue;
    const int kc = ctx.coop_nb_flat(k);
    const int ck = payoff_class(ctx.state.at_flat(k), kc);
    if (ctx.state.at_flat(k) == Strategy::C) {
      ctx.req(kc >= 1, "isolated cooperator at a greedy fixed point");
      for (int q = 0; q < 4; ++q) {
        const int nb = ctx.nbrs[k][q];
        if (ctx.state.at_flat(nb) != Strategy::D) continue;
        const int cn = payoff_class(Strategy::D, ctx.coop_nb_flat(nb));
        ctx.req(ctx.table.compare(ck, cn) >= 0,
                "cooperator under-earns a defecting neighbor at a fixed point (mresult_1_3b)");
      }
    } else {
      ctx.req(kc <= 3, "isolated defector at a greedy fixed point");
    }
  }
}

// ---- violation scan ----------------------------------------------------------

// Orthogonal axes of a given axis (canonical order).
inline std::pair<int, int> ortho_axes(int axis) {
  return axis <= 1 ? std::pair<int, int>{2, 3} : std::pair<int, int>{0, 1};
}

std::optional<detail::Violation> find_violation_impl(const Ctx& ctx, int kc_required) {
  const auto& off = axis_offsets();
  for (int k = 0; k < ctx.dims.cells(); ++k) {
    if (ctx.fixed && ctx.fixed->contains_flat(k)) continue;
    if (ctx.state.at_flat(k) != Strategy::C) continue;
    if (ctx.coop_nb_flat(k) != kc_required) continue;
    const NodeId n = from_index(k, ctx.dims);
    const int cn = ctx.cls(n);

    auto differing_defector = [&](int axis) {
      const NodeId nb = shifted(n, off[axis], 1, ctx.dims);
      return ctx.strat(nb) == Strategy::D && ctx.table.compare(cn, ctx.cls(nb)) != 0;
    };
    bool violating = false;
    for (int a = 0; a < 4; ++a) violating |= differing_defector(a);
    if (!violating) continue;

    if (kc_required == 1) {
      int d_axis = -1;
      for (int a = 0; a < 4; ++a)
        if (ctx.strat(shifted(n, off[a], 1, ctx.dims)) == Strategy::C) d_axis = a;
      return detail::Violation{n, Frame{off[d_axis], off[ortho_axes(d_axis).first]}};
    }
    if (kc_required == 2) {
      for (int e = 0; e < 4; ++e) {
        if (!differing_defector(e)) continue;
        auto [d1, d2] = ortho_axes(e);
        for (int d : {d1, d2}) {
          const NodeId cand = shifted(n, off[d], 1, ctx.dims);
          if (ctx.strat(cand) == Strategy::C && !ctx.is_fixed(cand))
            return detail::Violation{n, Frame{off[d], off[e]}};
        }
      }
      ctx.integrity("two-neighbor violation admits no gadget frame");
    }
    if (kc_required == 3) {
      int e_axis = -1;
      for (int a = 0; a < 4; ++a)
        if (ctx.strat(shifted(n, off[a], 1, ctx.dims)) == Strategy::D) e_axis = a;
      if (!differing_defector(e_axis)) continue;
      return detail::Violation{n, Frame{off[ortho_axes(e_axis).first], off[e_axis]}};
    }
  }
  return std::nullopt;
}

// ---- gadgets -----------------------------------------------------------------

// Two-cooperation-neighbor gadget of the PD controller. Canonical geometry:
// cooperators at n and n+d, defector of different payoff at n+e.
void gadget_two_nb_pd(Ctx& ctx, NodeId n, const Frame& f, Phase ph) {
  auto at = [&](int a, int b) { return f.at(n, a, b, ctx.dims); };
  const NodeId nd = at(1, 0), ne = at(0, 1), nde = at(1, 1);
  const int before = ctx.state.n_cooperators();

  ctx.req(ctx.is_c(n) && ctx.is_c(nd) && ctx.strat(ne) == Strategy::D && ctx.coop_nb(n) == 2,
          "two-neighbor gadget geometry");
  ctx.req(ctx.cmpV(n, kC2) == 0 && ctx.cmpP(n, ne) > 0, "mrb_3_1");
  ctx.req(ctx.cmpV(ne, kD1) == 0, "defector must earn p3+3p4 (one cooperating neighbor)");
  ctx.req(ctx.coop_nb(ne) == 1, "defector must have a single cooperating neighbor");
  ctx.req(ctx.strat(nde) == Strategy::D, "corner must defect");
  ctx.req(ctx.table.compare(ctx.cls(nde), ctx.cls(nd)) <= 0 && ctx.cmpV(nd, kC3) <= 0, "mrb_3_2");

  if (ctx.cmpP(nde, nd) == 0) {
    // Case I
    ctx.req(ctx.cmpV(nd, kC3) == 0, "case-I pivot must earn 3p1+p2");
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(ne, n);
    ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
    ctx.req(ctx.cmpV(nde, kC3) > 0, "mrb_7");
    ctx.req(ctx.cmpV(ne, kC3) <= 0 && ctx.cmpV(nd, kC3) <= 0, "mrb_7 majorization");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(nd) == Strategy::D,
            "mrb_8");
  } else {
    const int corner_kc = ctx.coop_nb(nde);
    if (corner_kc == 2) {
      ControlField cf = same_strategy_control(ctx.state, ctx.m);
      cf.set(ne, n);
      ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
      ctx.req(ctx.cmpV(nde, kD3) == 0, "mrb_a1");
      ctx.req(ctx.cmpV(ne, kC3) <= 0 && ctx.cmpV(nd, kC3) <= 0, "mrb_a1 majorization");
      ctx.apply_greedy(ph);
      ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                  ctx.strat(nd) == Strategy::D,
              "mrb_8 (case II)");
    } else {
      ctx.req(corner_kc == 1, "corner must have one or two cooperating neighbors");
      ControlField cf = same_strategy_control(ctx.state, ctx.m);
      cf.set(nde, nd);
      ctx.apply_exact(cf, ph, {{nde, Strategy::C}});
      ctx.req(ctx.cmpV(ne, kD2) == 0 && ctx.cmpV(n, kC2) == 0 && ctx.cmpV(nde, kC1) == 0,
              "mrb_a2 values");
      ctx.req(ctx.cmpP(ne, n) > 0 && ctx.cmpP(n, nde) > 0, "mrb_a2");
      ctx.apply_greedy(ph);
      ctx.req(ctx.strat(n) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                  ctx.strat(nde) == Strategy::D,
              "mrb_a3");
    }
  }
  ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mrb_6)");
}

// Shared Case II of the three-cooperation-neighbor gadget: convert both
// corners, then greedy. Pinned corners are already cooperators and stay put.
void three_nb_case_two(Ctx& ctx, NodeId n, Offset d, Offset e, Phase ph) {
  const Frame f{d, e};
  auto at = [&](int a, int b) { return f.at(n, a, b, ctx.dims); };
  const NodeId ne = at(0, 1);
  const NodeId piv[2] = {at(-1, 0), at(1, 0)};
  const NodeId cor[2] = {at(-1, 1), at(1, 1)};

  ControlField cf = same_strategy_control(ctx.state, ctx.m);
  std::vector<std::pair<NodeId, Strategy>> flips;
  for (int s = 0; s < 2; ++s) {
    if (ctx.strat(cor[s]) == Strategy::C) continue;
    ctx.req(ctx.cmpP(cor[s], piv[s]) < 0,
            "defecting corner must strictly under-earn its cooperating pivot");
    cf.set(cor[s], piv[s]);
    flips.push_back({cor[s], Strategy::C});
  }
  ctx.apply_exact(cf, ph, flips);
  ctx.req(ctx.is_c(cor[0]) && ctx.is_c(cor[1]), "mrb_14");
  ctx.req(ctx.cmpV(ne, kD3) >= 0, "mresult_2_1b");
  ctx.req(ctx.cmpP(ne, n) > 0 && ctx.cmpP(ne, cor[0]) > 0 && ctx.cmpP(ne, cor[1]) > 0,
          "mresult_2_1b majorization");
  ctx.apply_greedy(ph);
  ctx.req(ctx.strat(ne) == Strategy::D && ctx.strat(n) == Strategy::D, "mresult_2_1c");
  for (const NodeId& c : cor)
    ctx.req(ctx.is_fixed(c) ? ctx.strat(c) == Strategy::C : ctx.strat(c) == Strategy::D,
            "mresult_2_1c corners");
}

// Three-cooperation-neighbor gadget (Step 3 of the PD controller, reused as
// the final phase of the snowdrift controller).
void gadget_three_nb(Ctx& ctx, NodeId n, const Frame& f0, Phase ph) {
  const Offset e = f0.e;
  const int before = ctx.state.n_cooperators();
  const NodeId ne = Frame{f0.d, e}.at(n, 0, 1, ctx.dims);
  ctx.req(ctx.is_c(n) && ctx.coop_nb(n) == 3 && ctx.strat(ne) == Strategy::D,
          "three-neighbor gadget geometry");
  ctx.req(ctx.cmpV(n, kC3) == 0 && ctx.cmpP(n, ne) > 0, "mrb_9_2");

  // Case I: some corner defects with payoff exactly equal to its pivot.
  for (const Offset d : {f0.d, Offset{-f0.d.di, -f0.d.dj}}) {
    const Frame f{d, e};
    const NodeId corner = f.at(n, -1, 1, ctx.dims);
    const NodeId pivot = f.at(n, -1, 0, ctx.dims);
    if (ctx.strat(corner) != Strategy::D || ctx.cmpP(corner, pivot) != 0) continue;

    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(ne, n);
    ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
    ctx.req(ctx.cmpV(ne, kC2) <= 0, "mrb_10_1");
    ctx.req(ctx.cmpV(corner, kD2) >= 0 && ctx.cmpP(corner, ne) > 0, "mrb_10_2");
    ctx.req(ctx.cmpP(corner, pivot) > 0, "mrb_10_3");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(corner) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(pivot) == Strategy::D,
            "mrb_15");
    ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mrb_13)");
    return;
  }
  three_nb_case_two(ctx, n, f0.d, e, ph);
  ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mrb_13)");
}

// One-cooperation-neighbor gadget (Step 2 of the snowdrift controller,
// reused as Step 4 of the rectangle controller).
void gadget_one_nb(Ctx& ctx, NodeId n, const Frame& f, Phase ph) {
  auto at = [&](int a, int b) { return f.at(n, a, b, ctx.dims); };
  const NodeId nd = at(1, 0), nmd = at(-1, 0), ne = at(0, 1), nme = at(0, -1);
  const NodeId nde = at(1, 1);
  const int before = ctx.state.n_cooperators();

  ctx.req(ctx.is_c(n) && ctx.coop_nb(n) == 1 && ctx.is_c(nd), "one-neighbor gadget geometry");
  ctx.req(ctx.strat(ne) == Strategy::D && ctx.strat(nme) == Strategy::D &&
              ctx.strat(nmd) == Strategy::D,
          "mr2_1");
  ctx.req(ctx.cmpV(n, kC1) == 0 && ctx.cmpP(n, ne) > 0, "mr2_3");
  ctx.req(ctx.cmpV(ne, kD1) == 0 && ctx.cmpV(nme, kD1) == 0 && ctx.cmpV(nmd, kD1) == 0,
          "defecting neighbors must all earn p3+3p4");
  ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(at(1, -1)) == Strategy::D, "mr2_4");
  ctx.req(ctx.cmpV(nd, kC2) <= 0, "mr2_4 pivot bound");
  ctx.req(ctx.cmpP(nd, nde) >= 0, "mresult_1_3b at the pivot");

  if (ctx.cmpP(nde, nd) == 0) {
    // Case I
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(ne, n);
    ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
    ctx.req(ctx.cmpP(nde, nd) > 0, "mr2_5");
    ctx.req(ctx.cmpV(nde, kD2) >= 0 && ctx.cmpV(ne, kC1) == 0 && ctx.cmpP(nde, ne) > 0, "mr2_6");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(nd) == Strategy::D,
            "mr2_7");
  } else {
    ctx.req(ctx.coop_nb(nde) == 1, "case-II corner must have one cooperating neighbor");
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(nde, nd);
    ctx.apply_exact(cf, ph, {{nde, Strategy::C}});
    ctx.req(ctx.cmpV(ne, kD2) == 0 && ctx.cmpV(n, kC1) == 0 && ctx.cmpV(nde, kC1) == 0,
            "mr2_9 values");
    ctx.req(ctx.cmpP(ne, n) > 0, "mr2_9");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(n) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(nde) == Strategy::D,
            "mr2_10");
  }
  ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mr2_8)");
}

// Two-cooperation-neighbor gadget of the snowdrift controller (Step 3),
// reused as Step 3 of the rectangle controller where Case I cannot fire.
void gadget_two_nb_sd(Ctx& ctx, NodeId n, const Frame& f, Phase ph) {
  auto at = [&](int a, int b) { return f.at(n, a, b, ctx.dims); };
  const NodeId nd = at(1, 0), ne = at(0, 1), nde = at(1, 1);
  const int before = ctx.state.n_cooperators();

  ctx.req(ctx.is_c(n) && ctx.is_c(nd) && ctx.strat(ne) == Strategy::D && ctx.coop_nb(n) == 2,
          "two-neighbor gadget geometry");
  ctx.req(ctx.cmpV(n, kC2) == 0 && ctx.cmpP(n, ne) > 0, "mr2_12");
  ctx.req(ctx.coop_nb(ne) == 1 && ctx.cmpV(ne, kD1) == 0,
          "defector must have a single cooperating neighbor");
  ctx.req(ctx.strat(nde) == Strategy::D, "corner must defect");
  ctx.req(ctx.cmpP(nd, nde) >= 0, "mresult_1_3b at the pivot");

  if (ctx.cmpP(nde, nd) == 0) {
    // Case I
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(ne, n);
    ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
    ctx.req(ctx.cmpP(nde, nd) > 0, "strict gain after conversion");
    ctx.req(ctx.cmpV(nde, kD2) >= 0 && ctx.cmpP(nde, ne) > 0, "mr2_6 analogue");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(nd) == Strategy::D,
            "mr2_13 case I");
  } else {
    const int corner_kc = ctx.coop_nb(nde);
    ctx.req(corner_kc >= 1 && corner_kc <= 2, "corner must have one or two cooperating neighbors");
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(nde, nd);
    ctx.apply_exact(cf, ph, {{nde, Strategy::C}});
    ctx.req(ctx.cmpV(ne, kD2) == 0, "mr2_14 value");
    ctx.req(ctx.cmpP(ne, n) > 0 && ctx.cmpP(ne, nde) > 0, "mr2_14");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(n) == Strategy::D && ctx.strat(ne) == Strategy::D &&
                ctx.strat(nde) == Strategy::D,
            "mr2_15");
  }
  ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mr2_13)");
}

// Step 2 of the rectangle controller: free cooperator with three cooperating
// neighbors. Splits on whether a pinned neighbor sits orthogonally to the
// defector, as in the constructive proof.
void gadget_three_nb_rect(Ctx& ctx, NodeId n, const Frame& f0) {
  const Phase ph = Phase::Step2;
  const Offset e = f0.e;
  const int before = ctx.state.n_cooperators();
  const NodeId ne = Frame{f0.d, e}.at(n, 0, 1, ctx.dims);
  ctx.req(ctx.is_c(n) && !ctx.is_fixed(n) && ctx.coop_nb(n) == 3 &&
              ctx.strat(ne) == Strategy::D,
          "rectangle step-2 geometry");
  ctx.req(ctx.cmpP(n, ne) > 0, "mr3_2");

  int fixed_neighbors = 0;
  for (const Offset o : {f0.d, Offset{-f0.d.di, -f0.d.dj}, Offset{-e.di, -e.dj}})
    if (ctx.is_fixed(shifted(n, o, 1, ctx.dims))) ++fixed_neighbors;
  ctx.req(fixed_neighbors <= 1, "at most one pinned cooperating neighbor");

  // Pinned neighbor orthogonal to the defector, if any: orient d away from it.
  Offset d{0, 0};
  bool pinned_ortho = false;
  for (const Offset o : {f0.d, Offset{-f0.d.di, -f0.d.dj}}) {
    if (ctx.is_fixed(shifted(n, o, 1, ctx.dims))) {
      d = Offset{-o.di, -o.dj};
      pinned_ortho = true;
    }
  }

  if (!pinned_ortho) {
    three_nb_case_two(ctx, n, f0.d, e, ph);
    ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mr3_6)");
    return;
  }

  const Frame f{d, e};
  auto at = [&](int a, int b) { return f.at(n, a, b, ctx.dims); };
  const NodeId pinned = at(-1, 0), corner = at(-1, 1), nd = at(1, 0), nde = at(1, 1);

  if (ctx.strat(corner) == Strategy::C) {
    // mr3_4 path: convert the far corner, then greedy.
    ctx.req(ctx.cmpV(n, kC3) == 0 && ctx.cmpV(ne, kD2) == 0 && ctx.cmpP(n, ne) > 0, "mr3_4");
    ctx.req(ctx.strat(nde) == Strategy::D && ctx.strat(at(0, 2)) == Strategy::D,
            "mr3_4 remaining defectors");
    ctx.req(ctx.cmpP(nd, nde) > 0, "mr3_5");
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    cf.set(nde, nd);
    ctx.apply_exact(cf, ph, {{nde, Strategy::C}});
    ctx.req(ctx.cmpV(ne, kD3) == 0, "mr3_5_1 value");
    ctx.req(ctx.cmpP(ne, n) > 0 && ctx.cmpP(ne, corner) > 0 && ctx.cmpP(ne, nde) > 0,
            "mr3_5_1 majorization");
    ctx.apply_greedy(ph);
    ctx.req(ctx.strat(ne) == Strategy::D && ctx.strat(n) == Strategy::D &&
                ctx.strat(nde) == Strategy::D,
            "mr3_5_2");
  } else {
    ctx.req(ctx.cmpV(pinned, kC3) == 0, "pinned pivot must earn 3p1+p2");
    const int corner_vs_pinned = ctx.cmpP(corner, pinned);
    ctx.req(corner_vs_pinned != 0, "corner payoff equality is excluded by the consensus condition");
    if (corner_vs_pinned < 0) {
      three_nb_case_two(ctx, n, d, e, ph);
    } else {
      ctx.req(ctx.cmpV(corner, kD2) >= 0, "mr3_7 premise");
      const NodeId far1 = at(-2, 1), far2 = at(-1, 2);
      ctx.req(ctx.is_c(far1) || ctx.is_c(far2), "mr3_7");
      ctx.req(!ctx.is_fixed(far1) && !ctx.is_fixed(far2), "mr3_8 freeness");
      ControlField cf = same_strategy_control(ctx.state, ctx.m);
      cf.set(ne, n);
      ctx.apply_exact(cf, ph, {{ne, Strategy::C}});
      ctx.req(ctx.strat(corner) == Strategy::D && ctx.cmpV(corner, kD3) >= 0, "mr3_8");
      ctx.apply_greedy(ph);
      ctx.req(ctx.strat(ne) == Strategy::D && ctx.strat(far1) == Strategy::D &&
                  ctx.strat(far2) == Strategy::D,
              "mr3_9");
    }
  }
  ctx.req(ctx.state.n_cooperators() < before, "gadget failed to decrease n_C (mr3_6)");
}

void finalize_stops(ControlTrace& trace) {
  auto& st = trace.stops;
  long lead = 0;
  while (lead < trace.length() && trace.entries[lead].phase == Phase::Step1) ++lead;
  st.t1 = lead;
  for (const auto& ent : trace.entries) {
    switch (ent.phase) {
      case Phase::Step2: st.t2 = ent.step; break;
      case Phase::Step3: st.t3 = ent.step; break;
      case Phase::Step4: st.t4 = ent.step; break;
      case Phase::Step5: st.t5 = ent.step; break;
      default: break;
    }
  }
}

bool is_greedy_fixed_point(const StrategyGrid& s, const PayoffMatrix& m) {
  return step_ceg(s, m, greedy_control(s, m)) == s;
}

void gadget_loop_thm1(Ctx& ctx) {
  // Proof-stated skip guard, evaluated exactly: with p3+3p4 >= 2p1+2p2 no
  // two-neighbor violation can exist at a fixed point.
  const bool two_nb_possible = ctx.m.p3 + 3 * ctx.m.p4 < 2 * ctx.m.p1 + 2 * ctx.m.p2;
  while (true) {
    greedy_until_fixed(ctx);
    check_fixed_point_facts(ctx);
    if (ctx.absorbing()) return;
    if (two_nb_possible) {
      if (auto v = find_violation_impl(ctx, 2)) {
        gadget_two_nb_pd(ctx, v->node, v->frame, Phase::Step2);
        continue;
      }
    } else {
      ctx.req(!find_violation_impl(ctx, 2).has_value(),
              "skip guard excludes two-neighbor violations");
    }
    if (auto v = find_violation_impl(ctx, 3)) {
      gadget_three_nb(ctx, v->node, v->frame, Phase::Step3);
      continue;
    }
    ctx.integrity("state outside Omega* admits no gadget");
  }
}

}  // namespace

ControlTrace run_step1(const StrategyGrid& state, const PayoffMatrix& m) {
  const ConditionReport cond = check_conditions(m);
  if (!cond.thm1_ok && !cond.thm2_ok)
    throw std::invalid_argument("greedy phase requires the PD or snowdrift hypotheses");
  Ctx ctx(state, m, nullptr, state.cells());
  greedy_until_fixed(ctx);
  check_fixed_point_facts(ctx);
  ctx.trace.stops.t1 = ctx.trace.length();
  return std::move(ctx.trace);
}

ControlTrace run_gadgets_thm1(const StrategyGrid& at_fixed_point, const PayoffMatrix& m) {
  if (!check_conditions(m).thm1_ok)
    throw std::invalid_argument("PD ordering p3 > p1 > p4 > p2 required");
  if (!is_greedy_fixed_point(at_fixed_point, m))
    throw std::invalid_argument("input must be a greedy fixed point");
  const long cells = at_fixed_point.cells();
  Ctx ctx(at_fixed_point, m, nullptr, 2 * (cells - 1));
  gadget_loop_thm1(ctx);
  finalize_stops(ctx.trace);
  return std::move(ctx.trace);
}

ControlTrace run_controller_thm1(const StrategyGrid& state, const PayoffMatrix& m) {
  if (!check_conditions(m).thm1_ok)
    throw std::invalid_argument("PD ordering p3 > p1 > p4 > p2 required");
  const long cells = state.cells();
  Ctx ctx(state, m, nullptr, 2 * (cells - 1));
  gadget_loop_thm1(ctx);
  finalize_stops(ctx.trace);
  return std::move(ctx.trace);
}

ControlTrace run_controller_thm2(const StrategyGrid& state, const PayoffMatrix& m) {
  if (!check_conditions(m).thm2_ok)
    throw std::invalid_argument(
        "snowdrift ordering with p1+p2 < p3+p4 and 4p2 < p3+3p4 required");
  const long cells = state.cells();
  Ctx ctx(state, m, nullptr, 2 * (cells - 1));
  while (true) {
    greedy_until_fixed(ctx);
    check_fixed_point_facts(ctx);
    if (ctx.absorbing()) break;
    if (auto v = find_violation_impl(ctx, 1)) {
      gadget_one_nb(ctx, v->node, v->frame, Phase::Step2);
      continue;
    }
    if (auto v = find_violation_impl(ctx, 2)) {
      gadget_two_nb_sd(ctx, v->node, v->frame, Phase::Step3);
      continue;
    }
    if (auto v = find_violation_impl(ctx, 3)) {
      gadget_three_nb(ctx, v->node, v->frame, Phase::Step4);
      continue;
    }
    ctx.integrity("state outside Omega* admits no gadget");
  }
  finalize_stops(ctx.trace);
  return std::move(ctx.trace);
}

ControlTrace run_flood_thm3(const StrategyGrid& state, const PayoffMatrix& m) {
  if (!check_conditions(m).thm3_ok)
    throw std::invalid_argument("stag-hunt ordering with p1+p2 > 2p3 required");
  const TorusDims d = state.dims();

  std::vector<uint8_t> region(d.cells(), 0);
  bool found = false;
  for (int k = 0; k < d.cells() && !found; ++k) {
    const NodeId o = from_index(k, d);
    const NodeId block[4] = {o, canonical({o.i + 1, o.j}, d), canonical({o.i, o.j + 1}, d),
                             canonical({o.i + 1, o.j + 1}, d)};
    bool all = true;
    for (const NodeId& b : block) all &= state.at(b) == Strategy::C;
    if (all) {
      for (const NodeId& b : block) region[to_index(b, d)] = 1;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("no all-C 2x2 block in the initial state");

  const long cap = (d.rows + 1) / 2 + (d.cols + 1) / 2 + 2;
  Ctx ctx(state, m, nullptr, cap);
  const StrategyGrid target = StrategyGrid::all_c(d);
  while (ctx.state != target) {
    std::vector<int> frontier;
    for (int k = 0; k < d.cells(); ++k) {
      if (region[k]) continue;
      for (int q = 0; q < 4; ++q)
        if (region[ctx.nbrs[k][q]]) {
          frontier.push_back(k);
          break;
        }
    }
    ControlField cf = same_strategy_control(ctx.state, ctx.m);
    for (int k : frontier) {
      for (int q = 0; q < 4; ++q) {
        if (region[ctx.nbrs[k][q]]) {
          cf.set_flat(k, ctx.nbrs[k][q], ctx.nbrs);
          break;
        }
      }
    }
    StrategyGrid next = step_ceg(ctx.state, ctx.m, cf, nullptr);
    ctx.record(cf, std::move(next), Phase::Flood);
    for (int k : frontier) region[k] = 1;
    for (int k = 0; k < d.cells(); ++k)
      ctx.req(!region[k] || ctx.state.at_flat(k) == Strategy::C,
              "flood frontier failed to convert (SH_1)");
  }
  return std::move(ctx.trace);
}

ControlTrace run_controller_thm4(const StrategyGrid& state, const PayoffMatrix& m,
                                 const FixedRect& rect) {
  const ConditionReport cond = check_conditions(m);
  if (!(cond.thm4_i_ok || cond.thm4_ii_ok) || !cond.cor1_ok)
    throw std::invalid_argument("rectangle controller requires condition i) or ii) plus cor1");
  const TorusDims d = state.dims();
  rect.validate(d);
  const FixedSet fixed = rect.to_fixed_set(d);
  if (!fixed.consistent_with(state))
    throw std::invalid_argument("pinned rectangle must cooperate in the initial state");

  StrategyGrid s_star = StrategyGrid::all_d(d);
  fixed.stamp(s_star);
  const StrategyGrid all_c = StrategyGrid::all_c(d);

  const long n1 = rect.n1, m1 = rect.m1;
  const long phase_a_cap = 2 * (d.cells() - n1 * m1 - 1);
  const long expansion_cap = (d.rows - n1 + 1) / 2 + (d.cols - m1 + 1) / 2;
  Ctx ctx(state, m, &fixed, phase_a_cap + expansion_cap);
  long t4_steps = 0, t5_steps = 0;

  if (ctx.state != all_c) {
    while (true) {
      greedy_until_fixed(ctx);
      check_fixed_point_facts(ctx);
      if (ctx.state == s_star) break;
      if (auto v = find_violation_impl(ctx, 3)) {
        gadget_three_nb_rect(ctx, v->node, v->frame);
        continue;
      }
      if (auto v = find_violation_impl(ctx, 2)) {
        const int flat = to_index(v->frame.at(v->node, 1, 0, d), d);
        ctx.req(!fixed.contains_flat(flat), "mr3_10 pivot freeness");
        ctx.req(ctx.cmpV(v->frame.at(v->node, 1, 0, d), kC2) <= 0, "mr3_10_2");
        gadget_two_nb_sd(ctx, v->node, v->frame, Phase::Step3);
        continue;
      }
      if (auto v = find_violation_impl(ctx, 1)) {
        ctx.req(!fixed.contains(v->frame.at(v->node, 1, 0, d)),
                "a pinned single cooperating neighbor cannot survive the greedy phase");
        gadget_one_nb(ctx, v->node, v->frame, Phase::Step4);
        continue;
      }
      ctx.integrity("free cooperators remain but no gadget applies");
    }
    ctx.req(ctx.trace.length() <= phase_a_cap, "S* must be reached within 2(NM - N1 M1 - 1)");
    t4_steps = ctx.trace.length();

    // Step 5: grow the rectangle, rows first, two frontier rows per step
    // (one first when the leftover is odd), then columns.
    int r = rect.origin.i, h = rect.n1, c0 = rect.origin.j, w = rect.m1;
    auto rect_grid = [&](int rr, int hh, int cc, int ww) {
      StrategyGrid g = StrategyGrid::all_d(d);
      for (int a = 0; a < hh; ++a)
        for (int b = 0; b < ww; ++b)
          g.set(canonical({rr + a, cc + b}, d), Strategy::C);
      return g;
    };
    ctx.req(ctx.state == rect_grid(r, h, c0, w), "S* must match the pinned rectangle");

    auto expand = [&](bool rows, bool both_sides) {
      ControlField cf = same_strategy_control(ctx.state, ctx.m);
      if (rows) {
        for (int b = 0; b < w; ++b) {
          cf.set(canonical({r + h, c0 + b}, d), canonical({r + h - 1, c0 + b}, d));
          if (both_sides) cf.set(canonical({r - 1, c0 + b}, d), canonical({r, c0 + b}, d));
        }
        h += both_sides ? 2 : 1;
        if (both_sides) r -= 1;
      } else {
        for (int a = 0; a < h; ++a) {
          cf.set(canonical({r + a, c0 + w}, d), canonical({r + a, c0 + w - 1}, d));
          if (both_sides) cf.set(canonical({r + a, c0 - 1}, d), canonical({r + a, c0}, d));
        }
        w += both_sides ? 2 : 1;
        if (both_sides) c0 -= 1;
      }
      StrategyGrid next = step_ceg(ctx.state, ctx.m, cf, ctx.fixed);
      ctx.record(cf, std::move(next), Phase::Step5);
      ctx.req(ctx.state == rect_grid(r, h, c0, w),
              "expansion must convert exactly the frontier (mr3 step 5)");
    };

    if (h < d.rows) {
      if ((d.rows - h) % 2 == 1) expand(true, false);
      while (h < d.rows) expand(true, true);
    }
    t5_steps = ctx.trace.length();
    if (w < d.cols) {
      if ((d.cols - w) % 2 == 1) expand(false, false);
      while (w < d.cols) expand(false, true);
    }
  }
  ctx.req(ctx.state == all_c, "rectangle controller must end at total cooperation");
  finalize_stops(ctx.trace);
  // Paper markers: T_4 = steps to S*, T_5 = T_4 + row-expansion steps.
  ctx.trace.stops.t4 = t4_steps;
  ctx.trace.stops.t5 = t5_steps;
  return std::move(ctx.trace);
}

namespace detail {

std::optional<Violation> find_violation(const StrategyGrid& state, const PayoffMatrix& m,
                                        int coop_neighbors, const FixedSet* fixed) {
  Ctx ctx(state, m, fixed, -1);
  return find_violation_impl(ctx, coop_neighbors);
}

GadgetStates apply_step2_gadget_thm1(const StrategyGrid& at_fixed_point, const PayoffMatrix& m,
                                     NodeId node, const Frame& frame) {
  Ctx ctx(at_fixed_point, m, nullptr, -1);
  gadget_two_nb_pd(ctx, node, frame, Phase::Step2);
  GadgetStates out;
  out.mid = ctx.trace.entries.at(0).after;
  out.end = ctx.trace.entries.at(1).after;
  return out;
}

}  // namespace detail

}  // namespace evogrid
