#ifndef EVOGRID_IMITATION_HPP
#define EVOGRID_IMITATION_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "evogrid/payoff.hpp"
#include "evogrid/rational.hpp"

namespace evogrid {

// Conditional switch rules. The switch probability phi(dP) applies only when
// the sampled neighbor's payoff strictly exceeds the node's; otherwise the
// node keeps its strategy with probability 1.
//
//   Deterministic: phi = 1.
//   Fermi:         phi(dP) = 1 / (1 + exp(-dP / kappa)), kappa > 0.
//   Proportional:  phi(dP) = dP / dmax, dmax = 4 (max p_i - min p_i).
enum class RuleKind { Deterministic, Fermi, Proportional };

inline const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::Deterministic: return "deterministic";
    case RuleKind::Fermi: return "fermi";
    default: return "proportional";
  }
}

struct ImitationRule {
  RuleKind kind = RuleKind::Deterministic;
  double kappa = 0.1;  // Fermi temperature
  // Guaranteed lower bound on phi over every payoff gap achievable under the
  // matrix the rule was built against. Exact.
  Rational delta = Rational(1);

  bool stochastic() const { return kind != RuleKind::Deterministic; }
};

// Builds a rule and certifies its lower bound by enumerating the finitely
// many achievable payoff differences of the matrix.
inline ImitationRule make_rule(RuleKind kind, const PayoffMatrix& m, double kappa = 0.1) {
  ImitationRule rule;
  rule.kind = kind;
  rule.kappa = kappa;
  if (kind == RuleKind::Fermi && !(kappa > 0))
    throw std::invalid_argument("fermi rule requires kappa > 0");

  const PayoffClassTable table(m);
  Rational min_gap(0), max_gap(0);
  bool any_gap = false;
  for (int a = 0; a < kPayoffClasses; ++a) {
    for (int b = 0; b < kPayoffClasses; ++b) {
      if (!table.greater(b, a)) continue;
      Rational gap = table.value[b] - table.value[a];
      if (!any_gap || gap < min_gap) min_gap = gap;
      if (!any_gap || gap > max_gap) max_gap = gap;
      any_gap = true;
    }
  }

  switch (kind) {
    case RuleKind::Deterministic:
      rule.delta = Rational(1);
      break;
    case RuleKind::Fermi:
      // dP > 0 puts phi strictly above 1/2 for any temperature.
      rule.delta = Rational(1, 2);
      break;
    case RuleKind::Proportional: {
      if (!any_gap) {
        rule.delta = Rational(1);  // no positive gap is ever seen
        break;
      }
      Rational lo = m.p1, hi = m.p1;
      for (const Rational& p : {m.p2, m.p3, m.p4}) {
        if (p < lo) lo = p;
        if (hi < p) hi = p;
      }
      const Rational dmax = 4 * (hi - lo);
      rule.delta = min_gap / dmax;
      // Every achievable gap satisfies delta <= phi <= 1 by construction;
      // verify anyway since (A1) is the standing assumption of every theorem.
      if (!(rule.delta > 0) || max_gap > dmax)
        throw std::logic_error("proportional rule violates (A1) bounds");
      break;
    }
  }
  return rule;
}

// Switch probability for an achievable positive gap. Only this evaluation
// uses floating point; the gap-positivity test never does.
inline double switch_probability(const ImitationRule& rule, const PayoffMatrix& m,
                                 const Rational& gap) {
  switch (rule.kind) {
    case RuleKind::Deterministic:
      return 1.0;
    case RuleKind::Fermi: {
      double g = boost::rational_cast<double>(gap);
      return 1.0 / (1.0 + std::exp(-g / rule.kappa));
    }
    default: {
      Rational lo = m.p1, hi = m.p1;
      for (const Rational& p : {m.p2, m.p3, m.p4}) {
        if (p < lo) lo = p;
        if (hi < p) hi = p;
      }
      const Rational dmax = 4 * (hi - lo);
      if (dmax.numerator() == 0) return 1.0;
      return boost::rational_cast<double>(gap / dmax);
    }
  }
}

}  // namespace evogrid

#endif
