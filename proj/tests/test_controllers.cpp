#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "evogrid/controllers.hpp"
#include "evogrid/oracle.hpp"
#include "evogrid/seg.hpp"

using namespace evogrid;

namespace {
const PayoffMatrix kPd = PayoffMatrix::from_strings("3", "0", "5", "1");
const PayoffMatrix kPdTight = PayoffMatrix::from_strings("3", "1.5", "4", "1.6");
const TorusDims kD3(3, 3);

// Replays the trace and checks n_C bookkeeping plus the decrease points:
// every greedy-phase step decreases n_C, every gadget pair decreases n_C
// across the pair. Expansion and flood phases are exempt.
void check_trace(const ControlTrace& trace, const PayoffMatrix& m, const FixedSet* fixed) {
  StrategyGrid cur = trace.initial;
  std::size_t i = 0;
  while (i < trace.entries.size()) {
    const TraceEntry& e = trace.entries[i];
    REQUIRE(step_ceg(cur, m, e.controls, fixed) == e.after);
    REQUIRE(e.after.n_cooperators() == e.n_c);
    if (e.phase == Phase::Step1) {
      CHECK(e.n_c < cur.n_cooperators());
      cur = e.after;
      ++i;
    } else if (e.phase == Phase::Step5 || e.phase == Phase::Flood) {
      cur = e.after;
      ++i;
    } else {
      REQUIRE(i + 1 < trace.entries.size());
      const TraceEntry& e2 = trace.entries[i + 1];
      REQUIRE(e2.phase == e.phase);
      REQUIRE(step_ceg(e.after, m, e2.controls, fixed) == e2.after);
      CHECK(e2.n_c < cur.n_cooperators());
      cur = e2.after;
      i += 2;
    }
  }
}
}  // namespace

TEST_CASE("greedy phase: trivial and one-step inputs") {
  CHECK(run_step1(StrategyGrid::all_d(kD3), kPd).length() == 0);

  StrategyGrid single = StrategyGrid::all_d(kD3);
  single.set({2, 2}, Strategy::C);
  const ControlTrace t = run_step1(single, kPd);
  CHECK(t.length() == 1);
  CHECK(t.final_state() == StrategyGrid::all_d(kD3));
  CHECK(t.stops.t1 == 1);

  CHECK_THROWS_AS(run_step1(StrategyGrid::all_d(kD3), stag_hunt(Rational(3, 10))),
                  std::invalid_argument);
}

TEST_CASE("greedy phase strictly shrinks cooperation on random grids") {
  const TorusDims d(10, 10);
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    RngStream rng(seed);
    const StrategyGrid g = random_initial(d, rng);
    const ControlTrace t = run_step1(g, kPd);
    check_trace(t, kPd, nullptr);
  }
}

TEST_CASE("PD gadget phase: preconditions") {
  CHECK(run_gadgets_thm1(StrategyGrid::all_d(kD3), kPd).length() == 0);
  // not a greedy fixed point
  StrategyGrid single = StrategyGrid::all_d(kD3);
  single.set({2, 2}, Strategy::C);
  CHECK_THROWS_AS(run_gadgets_thm1(single, kPd), std::invalid_argument);
  CHECK_THROWS_AS(run_gadgets_thm1(StrategyGrid::all_d(kD3), snowdrift_classic(Rational(19, 25))),
                  std::invalid_argument);
}

TEST_CASE("PD controller reaches Omega* within the bound on random grids") {
  const TorusDims d(10, 10);
  const long bound = 2 * (d.cells() - 1);
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    RngStream rng(seed);
    const StrategyGrid g = random_initial(d, rng);
    const ControlTrace lead = run_step1(g, kPd);
    const ControlTrace rest = run_gadgets_thm1(lead.final_state(), kPd);
    CHECK(lead.length() + rest.length() <= bound);
    CHECK(is_absorbing(rest.final_state(), kPd));
    check_trace(lead, kPd, nullptr);
    check_trace(rest, kPd, nullptr);
    // the consensus condition holds for (3,0,5,1), so terminals are uniform
    const int nc = rest.final_state().n_cooperators();
    CHECK((nc == 0 || nc == d.cells()));
  }
}

TEST_CASE("PD controller with an active two-neighbor phase") {
  // (3, 1.5, 4, 1.6): p3+3p4 = 8.8 < 9 = 2p1+2p2, so the skip guard is off.
  REQUIRE(kPdTight.p3 + 3 * kPdTight.p4 < 2 * kPdTight.p1 + 2 * kPdTight.p2);
  const TorusDims d(10, 10);
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    RngStream rng(seed);
    const StrategyGrid g = random_initial(d, rng);
    const ControlTrace t = run_controller_thm1(g, kPdTight);
    CHECK(t.length() <= 2 * (d.cells() - 1));
    CHECK(is_absorbing(t.final_state(), kPdTight));
    check_trace(t, kPdTight, nullptr);
  }

  // A lone 2x2 cooperator block is a greedy fixed point whose corners violate
  // with two cooperating neighbors each, so it must enter the two-neighbor
  // gadget immediately.
  StrategyGrid block = StrategyGrid::all_d(TorusDims(5, 5));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) block.set({2 + a, 2 + b}, Strategy::C);
  const ControlTrace t = run_gadgets_thm1(block, kPdTight);
  REQUIRE(t.length() >= 2);
  CHECK(t.entries[0].phase == Phase::Step2);
  CHECK(is_absorbing(t.final_state(), kPdTight));
  check_trace(t, kPdTight, nullptr);
}

TEST_CASE("PD controller is exhaustive on every 3x3 state") {
  const std::pair<PayoffMatrix, bool> setups[] = {{kPd, false}, {kPdTight, true}};
  for (const auto& [m, expects_step2] : setups) {
    bool step2_seen = false;
    for (uint32_t s = 0; s < 512; ++s) {
      const StrategyGrid g = decode_state(s, kD3);
      const ControlTrace t = run_controller_thm1(g, m);
      CHECK(t.length() <= 16);
      CHECK(is_absorbing(t.final_state(), m));
      check_trace(t, m, nullptr);
      const int nc = t.final_state().n_cooperators();
      CHECK((nc == 0 || nc == 9));  // both matrices satisfy cor1
      for (const TraceEntry& e : t.entries) step2_seen |= e.phase == Phase::Step2;
    }
    // the guard keeps (3,0,5,1) out of the two-neighbor phase entirely
    CHECK(step2_seen == expects_step2);
  }
}

TEST_CASE("snowdrift controller: every 3x3 state reaches Omega* within 16 steps") {
  const PayoffMatrix sd = snowdrift_classic(parse_rational("0.8"));
  REQUIRE(check_conditions(sd).thm2_ok);
  CHECK(run_controller_thm2(StrategyGrid::all_c(kD3), sd).length() == 0);
  for (uint32_t s = 0; s < 512; ++s) {
    const StrategyGrid g = decode_state(s, kD3);
    const ControlTrace t = run_controller_thm2(g, sd);
    CHECK(t.length() <= 16);
    CHECK(is_absorbing(t.final_state(), sd));
    check_trace(t, sd, nullptr);
  }
}

TEST_CASE("controllers handle non-square tori exhaustively") {
  // 3x4: 4096 states, bound 2(12-1) = 22; exercises frames along both axes
  const TorusDims d(3, 4);
  const PayoffMatrix sd = snowdrift_classic(parse_rational("0.8"));
  for (uint32_t s = 0; s < 4096; ++s) {
    const StrategyGrid g = decode_state(s, d);
    const ControlTrace t1 = run_controller_thm1(g, kPdTight);
    CHECK(t1.length() <= 22);
    CHECK(is_absorbing(t1.final_state(), kPdTight));
    const ControlTrace t2 = run_controller_thm2(g, sd);
    CHECK(t2.length() <= 22);
    CHECK(is_absorbing(t2.final_state(), sd));
  }
}

TEST_CASE("snowdrift controller on random 10x10 grids") {
  const PayoffMatrix sd = snowdrift_classic(parse_rational("0.76"));
  const TorusDims d(10, 10);
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    RngStream rng(seed);
    const StrategyGrid g = random_initial(d, rng);
    const ControlTrace t = run_controller_thm2(g, sd);
    CHECK(t.length() <= 2 * (d.cells() - 1));
    CHECK(is_absorbing(t.final_state(), sd));
    check_trace(t, sd, nullptr);
    const int nc = t.final_state().n_cooperators();
    CHECK((nc == 0 || nc == d.cells()));  // cor1 holds at c = 0.76
  }
}

TEST_CASE("stag-hunt flood controller") {
  const PayoffMatrix sh = stag_hunt(parse_rational("0.3"));
  CHECK(run_flood_thm3(StrategyGrid::all_c(kD3), sh).length() == 0);
  CHECK_THROWS_AS(run_flood_thm3(StrategyGrid::all_d(kD3), sh), std::invalid_argument);
  CHECK_THROWS_AS(run_flood_thm3(StrategyGrid::all_c(kD3), kPd), std::invalid_argument);

  // 3x3 with one block: total cooperation within 3 steps
  StrategyGrid g3 = StrategyGrid::all_d(kD3);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g3.set({1 + a, 1 + b}, Strategy::C);
  const ControlTrace t3 = run_flood_thm3(g3, sh);
  CHECK(t3.length() <= 3);
  CHECK(t3.final_state() == StrategyGrid::all_c(kD3));

  // 10x10, random elsewhere: bound ceil(N/2)+ceil(M/2)+2 = 12, typical 8
  const TorusDims d(10, 10);
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    RngStream rng(seed);
    StrategyGrid g = random_initial(d, rng);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) g.set({4 + a, 4 + b}, Strategy::C);
    const ControlTrace t = run_flood_thm3(g, sh);
    CHECK(t.length() <= 11);
    CHECK(t.final_state() == StrategyGrid::all_c(d));
    check_trace(t, sh, nullptr);
  }
}

TEST_CASE("rectangle controller: preconditions and the S*-only start") {
  const TorusDims d(7, 7);
  const FixedRect rect{{1, 1}, 2, 2};
  CHECK_THROWS_AS(run_controller_thm4(StrategyGrid::all_d(d), kPdTight, rect),
                  std::invalid_argument);  // rectangle cells must cooperate
  StrategyGrid bad_rect_state = StrategyGrid::all_d(d);
  FixedRect wide{{1, 1}, 6, 2};  // N1 = N-1 is outside [2, N-3] u {N}
  CHECK_THROWS_AS(wide.validate(d), std::invalid_argument);
  CHECK_THROWS_AS(run_controller_thm4(StrategyGrid::all_d(d), kPd, rect),
                  std::invalid_argument);  // thm4 conditions fail for (3,0,5,1)

  // from S* only the expansion phase runs
  StrategyGrid s_star = StrategyGrid::all_d(d);
  rect.to_fixed_set(d).stamp(s_star);
  const ControlTrace t = run_controller_thm4(s_star, kPdTight, rect);
  CHECK(t.stops.t4 == 0);
  for (const TraceEntry& e : t.entries) CHECK(e.phase == Phase::Step5);
  CHECK(t.length() == 3 + 3);  // ceil(5/2) + ceil(5/2)
  CHECK(t.final_state() == StrategyGrid::all_c(d));
}

TEST_CASE("rectangle controller drives random initials to total cooperation") {
  const TorusDims d(7, 7);
  const FixedRect rect{{2, 3}, 2, 2};
  const FixedSet fixed = rect.to_fixed_set(d);
  const long phase_a_bound = 2 * (d.cells() - 4 - 1);
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    RngStream rng(seed);
    StrategyGrid g = random_initial(d, rng);
    fixed.stamp(g);
    const ControlTrace t = run_controller_thm4(g, kPdTight, rect);
    CHECK(t.final_state() == StrategyGrid::all_c(d));
    CHECK(t.stops.t4 <= phase_a_bound);
    CHECK(t.length() - t.stops.t4 == 6);
    check_trace(t, kPdTight, &fixed);
  }
}

TEST_CASE("rectangle controller handles full-width bands and snowdrift payoffs") {
  // M1 = M: column expansion is vacuous
  const TorusDims d(8, 8);
  const FixedRect band{{3, 1}, 2, 8};
  const FixedSet fixed = band.to_fixed_set(d);
  const PayoffMatrix sd = snowdrift_classic(parse_rational("0.76"));
  REQUIRE(check_conditions(sd).thm4_ii_ok);
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    RngStream rng(seed);
    StrategyGrid g = random_initial(d, rng);
    fixed.stamp(g);
    const ControlTrace t = run_controller_thm4(g, sd, band);
    CHECK(t.final_state() == StrategyGrid::all_c(d));
    CHECK(t.stops.t4 <= 2 * (64 - 16 - 1));
    CHECK(t.length() - t.stops.t4 == 3);  // rows only
    check_trace(t, sd, &fixed);
  }
}

TEST_CASE("controllers hold up across randomly drawn theorem matrices") {
  // Random rational matrices (tenths in [-2, 5]) filtered by each theorem's
  // hypotheses; every 3x3 state plus a batch of random 6x7 states per matrix.
  RngStream rng(2025);
  auto draw = [&]() {
    return PayoffMatrix{Rational(static_cast<long long>(rng.below(71)) - 20, 10),
                        Rational(static_cast<long long>(rng.below(71)) - 20, 10),
                        Rational(static_cast<long long>(rng.below(71)) - 20, 10),
                        Rational(static_cast<long long>(rng.below(71)) - 20, 10)};
  };
  const TorusDims d67(6, 7);
  int pd_found = 0, sd_found = 0;
  for (int trial = 0; trial < 4000 && (pd_found < 8 || sd_found < 8); ++trial) {
    const PayoffMatrix m = draw();
    const ConditionReport cond = check_conditions(m);
    if (cond.thm1_ok && pd_found < 8) {
      ++pd_found;
      for (uint32_t s = 0; s < 512; ++s) {
        const ControlTrace t = run_controller_thm1(decode_state(s, kD3), m);
        CHECK(t.length() <= 16);
        CHECK(is_absorbing(t.final_state(), m));
      }
      for (int r = 0; r < 20; ++r) {
        RngStream grid_rng(rng.next_u64());
        const ControlTrace t = run_controller_thm1(random_initial(d67, grid_rng), m);
        CHECK(t.length() <= 2 * (42 - 1));
        CHECK(is_absorbing(t.final_state(), m));
      }
    } else if (cond.thm2_ok && sd_found < 8) {
      ++sd_found;
      for (uint32_t s = 0; s < 512; ++s) {
        const ControlTrace t = run_controller_thm2(decode_state(s, kD3), m);
        CHECK(t.length() <= 16);
        CHECK(is_absorbing(t.final_state(), m));
      }
      for (int r = 0; r < 20; ++r) {
        RngStream grid_rng(rng.next_u64());
        const ControlTrace t = run_controller_thm2(random_initial(d67, grid_rng), m);
        CHECK(t.length() <= 2 * (42 - 1));
        CHECK(is_absorbing(t.final_state(), m));
      }
    }
  }
  CHECK(pd_found == 8);
  CHECK(sd_found == 8);
}

TEST_CASE("rectangle controller: full-height bands and wrapped origins") {
  const PayoffMatrix sd = snowdrift_classic(parse_rational("0.76"));
  // N1 = N: row expansion is vacuous, columns only
  const TorusDims d8(8, 8);
  const FixedRect tall{{1, 1}, 8, 2};
  const FixedSet tall_set = tall.to_fixed_set(d8);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    StrategyGrid g = random_initial(d8, rng);
    tall_set.stamp(g);
    const ControlTrace t = run_controller_thm4(g, sd, tall);
    CHECK(t.final_state() == StrategyGrid::all_c(d8));
    CHECK(t.length() - t.stops.t4 == 3);  // ceil(6/2) column steps only
  }
  // origin near the far corner: the rectangle wraps across both seams
  const TorusDims d7(7, 7);
  const PayoffMatrix m = PayoffMatrix::from_strings("3", "1.5", "4", "1.6");
  const FixedRect wrapped{{7, 7}, 2, 2};
  const FixedSet wrapped_set = wrapped.to_fixed_set(d7);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    StrategyGrid g = random_initial(d7, rng);
    wrapped_set.stamp(g);
    const ControlTrace t = run_controller_thm4(g, m, wrapped);
    CHECK(t.final_state() == StrategyGrid::all_c(d7));
    CHECK(t.stops.t4 <= 2 * (49 - 4 - 1));
    check_trace(t, m, &wrapped_set);
  }
}

TEST_CASE("gadget machinery rejects a mismatched location") {
  // all-D grid has no two-neighbor configuration at (2,2)
  CHECK_THROWS_AS(
      detail::apply_step2_gadget_thm1(StrategyGrid::all_d(TorusDims(5, 5)), kPdTight, {2, 2},
                                      Frame{{1, 0}, {0, 1}}),
      TraceIntegrityError);
}
