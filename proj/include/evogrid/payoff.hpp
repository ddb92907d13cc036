#ifndef EVOGRID_PAYOFF_HPP
#define EVOGRID_PAYOFF_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "evogrid/grid.hpp"
#include "evogrid/rational.hpp"
#include "evogrid/torus.hpp"

namespace evogrid {

// Row player payoff of the symmetric 2x2 game:
//          C    D
//    C    p1   p2
//    D    p3   p4
struct PayoffMatrix {
  Rational p1, p2, p3, p4;

  bool operator==(const PayoffMatrix& o) const = default;

  static PayoffMatrix from_strings(const std::string& a, const std::string& b,
                                   const std::string& c, const std::string& d) {
    return PayoffMatrix{parse_rational(a), parse_rational(b), parse_rational(c), parse_rational(d)};
  }
};

enum class GameClass { PrisonersDilemma, Snowdrift, StagHunt, Other };

inline const char* to_string(GameClass g) {
  switch (g) {
    case GameClass::PrisonersDilemma: return "PrisonersDilemma";
    case GameClass::Snowdrift: return "Snowdrift";
    case GameClass::StagHunt: return "StagHunt";
    default: return "Other";
  }
}

inline GameClass classify(const PayoffMatrix& m) {
  if (m.p3 > m.p1 && m.p1 > m.p4 && m.p4 > m.p2) return GameClass::PrisonersDilemma;
  if (m.p3 > m.p1 && m.p1 > m.p2 && m.p2 > m.p4) return GameClass::Snowdrift;
  if (m.p1 > m.p3 && m.p3 > m.p4 && m.p4 > m.p2) return GameClass::StagHunt;
  return GameClass::Other;
}

// Flags for the convergence/control theorems, all decided in exact arithmetic.
struct ConditionReport {
  bool thm1_ok = false;    // p3 > p1 > p4 > p2
  bool thm2_ok = false;    // p3 > p1 > p2 > p4, p1+p2 < p3+p4, 4 p2 < p3+3 p4
  bool thm3_ok = false;    // p1 > p3 > p4 > p2, p1+p2 > 2 p3
  bool cor1_ok = false;    // {p1+3p2, 2p1+2p2, 3p1+p2} disjoint from {p3+3p4, 2p3+2p4}
  bool thm4_i_ok = false;  // thm1 ordering and 2p1+2p2 > p3+3p4
  bool thm4_ii_ok = false; // snowdrift ordering and 2p3+2p4 > 2p1+2p2 > p3+3p4 > 4p2
};

inline ConditionReport check_conditions(const PayoffMatrix& m) {
  ConditionReport r;
  const GameClass g = classify(m);
  const bool pd = g == GameClass::PrisonersDilemma;
  const bool sd = g == GameClass::Snowdrift;
  r.thm1_ok = pd;
  r.thm2_ok = sd && (m.p1 + m.p2 < m.p3 + m.p4) && (4 * m.p2 < m.p3 + 3 * m.p4);
  r.thm3_ok = g == GameClass::StagHunt && (m.p1 + m.p2 > 2 * m.p3);
  const std::array<Rational, 3> cvals = {m.p1 + 3 * m.p2, 2 * m.p1 + 2 * m.p2, 3 * m.p1 + m.p2};
  const std::array<Rational, 2> dvals = {m.p3 + 3 * m.p4, 2 * m.p3 + 2 * m.p4};
  r.cor1_ok = true;
  for (const auto& c : cvals)
    for (const auto& d : dvals)
      if (c == d) r.cor1_ok = false;
  r.thm4_i_ok = pd && (2 * m.p1 + 2 * m.p2 > m.p3 + 3 * m.p4);
  r.thm4_ii_ok = sd && (2 * m.p3 + 2 * m.p4 > 2 * m.p1 + 2 * m.p2) &&
                 (2 * m.p1 + 2 * m.p2 > m.p3 + 3 * m.p4) && (m.p3 + 3 * m.p4 > 4 * m.p2);
  return r;
}

// ---- classic parametric families ----------------------------------------

inline PayoffMatrix snowdrift_classic(const Rational& c) {
  if (!(c > 0 && c < 1)) throw std::domain_error("snowdrift_classic requires 0 < c < 1");
  return {1 - c / 2, 1 - c, Rational(1), Rational(0)};
}

inline PayoffMatrix hawk_dove(const Rational& b) {
  if (!(b > 0 && b < 1)) throw std::domain_error("hawk_dove requires 0 < b < 1");
  return {b / 2, Rational(0), b, (b - 1) / 2};
}

inline PayoffMatrix chicken(const Rational& b) {
  if (!(b > 0)) throw std::domain_error("chicken requires b > 0");
  return {b / 2, Rational(0), b, Rational(-1)};
}

inline PayoffMatrix stag_hunt(const Rational& r) {
  if (!(r > 0 && r < 1)) throw std::domain_error("stag_hunt requires 0 < r < 1");
  return {Rational(1), -r, r, Rational(0)};
}

// ---- payoff evaluation ----------------------------------------------------

// A node's payoff is determined by (strategy, number of cooperating
// neighbors); only ten values exist. Class index = strategy * 5 + k.
constexpr int kPayoffClasses = 10;

inline int payoff_class(Strategy s, int coop_neighbors) {
  return static_cast<int>(s) * 5 + coop_neighbors;
}

struct PayoffClassTable {
  std::array<Rational, kPayoffClasses> value;
  // cmp[a][b]: sign of value[a] - value[b], exact.
  std::array<std::array<int8_t, kPayoffClasses>, kPayoffClasses> cmp;

  explicit PayoffClassTable(const PayoffMatrix& m) {
    for (int k = 0; k <= 4; ++k) {
      value[k] = k * m.p1 + (4 - k) * m.p2;
      value[5 + k] = k * m.p3 + (4 - k) * m.p4;
    }
    for (int a = 0; a < kPayoffClasses; ++a)
      for (int b = 0; b < kPayoffClasses; ++b)
        cmp[a][b] = value[a] < value[b] ? -1 : (value[b] < value[a] ? 1 : 0);
  }

  int8_t compare(int a, int b) const { return cmp[a][b]; }
  bool greater(int a, int b) const { return cmp[a][b] > 0; }
  bool equal(int a, int b) const { return cmp[a][b] == 0; }
};

inline Rational node_payoff(const StrategyGrid& state, NodeId node, const PayoffMatrix& m) {
  const TorusDims& d = state.dims();
  int k = 0;
  for (NodeId nb : neighbors(node, d))
    if (state.at(nb) == Strategy::C) ++k;
  return state.at(node) == Strategy::C ? k * m.p1 + (4 - k) * m.p2 : k * m.p3 + (4 - k) * m.p4;
}

}  // namespace evogrid

#endif
