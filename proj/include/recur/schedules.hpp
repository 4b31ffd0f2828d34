#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "recur/errors.hpp"

namespace recur {

// Which shape of target pair (a, b) drives the recursion. Dispatch is total
// over 0 <= a <= b <= infinity.
enum class TargetCase {
  FiniteFinite,      // 0 < a <= b < inf
  ZeroFinite,        // 0 = a < b < inf
  FiniteInfinite,    // 0 < a < b = inf
  ZeroZero,          // a = b = 0
  InfiniteInfinite,  // a = b = inf
  ZeroInfinite,      // 0 = a < b = inf
};

// One generated term. log_ell, log_gamma and log_gamma_ell are the master
// values: the linear fields are derived and may overflow to inf for the
// fast-growing cases, which is reported, never hidden. log_gamma_ell is built
// by adding case-exact non-negative increments, so the growth property
// (gamma_p ell_p + 1 <= gamma_{p+1} ell_{p+1}) is checkable with no tolerance
// at every scale: linearly while values fit, by log-order beyond that.
struct ScheduleTerm {
  int p = 0;           // 1-based index after any shift
  int original_p = 0;  // index in the unshifted sequence; fixes the leg label
  bool a_leg = false;  // original_p odd: gamma targets a; else gamma targets b
  double ell = 0.0;
  double gamma = 0.0;
  double gamma_ell = 0.0;
  double log_ell = 0.0;
  double log_gamma = 0.0;
  double log_gamma_ell = 0.0;
  // log(ell_{p+1} - ell_p), from a per-case closed form (no subtraction, so it
  // stays meaningful when the linear values saturate). NaN on the last term.
  double log_gap_next = std::numeric_limits<double>::quiet_NaN();
};

struct Schedule {
  double a = 0.0;  // targets; may be infinity
  double b = 0.0;
  TargetCase tag = TargetCase::FiniteFinite;
  int index_shift = 0;  // how many leading terms were dropped
  std::vector<ScheduleTerm> terms;
};

namespace detail {

// log(1 + e^{-h}) for h >= 0; underflows to 0 when e^{-h} is subnormal-zero.
inline double log1p_exp_neg(double h) { return std::log1p(std::exp(-h)); }

inline TargetCase classify_targets(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("schedule: target is NaN");
  if (a < 0.0 || b < 0.0) throw DomainError("schedule: targets must be non-negative");
  if (a > b) throw DomainError("schedule: a must not exceed b");
  const bool ia = std::isinf(a), ib = std::isinf(b);
  if (ia && ib) return TargetCase::InfiniteInfinite;
  if (ib) return a == 0.0 ? TargetCase::ZeroInfinite : TargetCase::FiniteInfinite;
  if (a == 0.0 && b == 0.0) return TargetCase::ZeroZero;
  if (a == 0.0) return TargetCase::ZeroFinite;
  return TargetCase::FiniteFinite;
}

}  // namespace detail

// Generates the first P terms for the target pair (a, b). Linear fields may
// saturate to inf for fast-growing cases; log-space masters never do.
inline Schedule make_schedule(double a, double b, int P) {
  if (P < 2) throw DomainError("schedule: need at least 2 terms");
  Schedule s;
  s.a = a;
  s.b = b;
  s.tag = detail::classify_targets(a, b);
  s.terms.resize(static_cast<std::size_t>(P));

  using detail::log1p_exp_neg;
  const double log_b = std::isinf(b) ? 0.0 : std::log(b);
  const double log_a = (a > 0.0 && !std::isinf(a)) ? std::log(a) : 0.0;

  if (s.tag == TargetCase::ZeroZero) {
    // Integer backbone: sqrt(ell_p) = p exactly, gamma_p ell_p = p exactly.
    for (int p = 1; p <= P; ++p) {
      ScheduleTerm& t = s.terms[static_cast<std::size_t>(p - 1)];
      t.p = t.original_p = p;
      t.a_leg = (p % 2 == 1);
      const double sp = static_cast<double>(p);
      t.ell = sp * sp;
      t.gamma = 1.0 / sp;
      t.gamma_ell = sp;
      t.log_ell = 2.0 * std::log(sp);
      t.log_gamma = -std::log(sp);
      t.log_gamma_ell = std::log(sp);
      if (p < P) t.log_gap_next = std::log(2.0 * sp + 1.0);
    }
    return s;
  }

  // Seeds. The two zero-a cases with finite or infinite b carry an auxiliary
  // index-0 length feeding the odd-index gamma formula.
  double L = 0.0;       // log ell_p
  double L_prev = 0.0;  // log ell_{p-1}; starts as the log ell_0 seed
  switch (s.tag) {
    case TargetCase::FiniteFinite:
      L = std::log(1.0 / (b * b) + 1.0);
      break;
    case TargetCase::ZeroFinite:
      L = L_prev = std::log(1.0 / (b * b) + 1.0);
      break;
    case TargetCase::FiniteInfinite:
      L = std::log(a + 1.0);
      break;
    case TargetCase::InfiniteInfinite:
      L = 0.0;
      break;
    case TargetCase::ZeroInfinite:
      L = L_prev = 0.0;
      break;
    case TargetCase::ZeroZero:
      break;  // handled above
  }

  double LA = 0.0;  // log(gamma_p ell_p), seeded at p = 1 below
  for (int p = 1; p <= P; ++p) {
    ScheduleTerm& t = s.terms[static_cast<std::size_t>(p - 1)];
    t.p = t.original_p = p;
    t.a_leg = (p % 2 == 1);
    const bool even = (p % 2 == 0);

    double LG = 0.0;  // log gamma_p
    switch (s.tag) {
      case TargetCase::FiniteFinite:
        LG = even ? log_b : log_a;
        break;
      case TargetCase::ZeroFinite:
        LG = even ? log_b : -0.5 * L_prev;
        break;
      case TargetCase::FiniteInfinite:
        LG = even ? L : log_a;
        break;
      case TargetCase::InfiniteInfinite:
        LG = L;
        break;
      case TargetCase::ZeroInfinite:
        LG = even ? L : -0.5 * L_prev;
        break;
      case TargetCase::ZeroZero:
        break;
    }

    if (p == 1) {
      LA = LG + L;
    }
    // else: LA was advanced at the end of the previous iteration.

    t.log_ell = L;
    t.log_gamma = LG;
    t.log_gamma_ell = LA;
    t.ell = std::exp(L);
    t.gamma = std::exp(LG);
    t.gamma_ell = std::exp(LA);

    if (p == P) break;

    // Closed-form log gap to the next term, and the next log ell.
    const double h = log1p_exp_neg(0.5 * L);  // log(1 + ell^{-1/2})
    double L_next = 0.0;
    double log_gap = 0.0;
    double LA_inc = 0.0;  // log of (gamma_{p+1} ell_{p+1}) / (gamma_p ell_p)
    switch (s.tag) {
      case TargetCase::FiniteFinite:
        if (even) {
          L_next = std::log(b / a) + L + h;
          if (a == b) {
            log_gap = 0.5 * L;
          } else {
            const double r = b / a;
            log_gap = L + std::log(r - 1.0) + std::log1p(r / (r - 1.0) * std::exp(-0.5 * L));
          }
          LA_inc = h;
        } else {
          L_next = L + h;
          log_gap = 0.5 * L;
          LA_inc = std::log(b / a) + h;
        }
        break;
      case TargetCase::ZeroFinite:
        if (even) {
          L_next = log_b + 1.5 * L + h;
          log_gap = 1.5 * L + log_b + std::log1p((1.0 - 1.0 / b) * std::exp(-0.5 * L));
          LA_inc = h;
        } else {
          L_next = L + h;
          log_gap = 0.5 * L;
          LA_inc = log_b + 0.5 * L_prev + h;
        }
        break;
      case TargetCase::FiniteInfinite:
        if (even) {
          L_next = 2.0 * L - log_a + h;
          log_gap = 2.0 * L - log_a +
                    std::log(1.0 + std::exp(-0.5 * L) - a * std::exp(-L));
          LA_inc = h;
        } else {
          L_next = L + h;
          log_gap = 0.5 * L;
          LA_inc = L - log_a + 2.0 * h;
        }
        break;
      case TargetCase::InfiniteInfinite:
        L_next = L + h;
        log_gap = 0.5 * L;
        LA_inc = 2.0 * h;
        break;
      case TargetCase::ZeroInfinite:
        if (even) {
          L_next = 2.5 * L + h;
          log_gap = 2.5 * L +
                    std::log(1.0 + std::exp(-0.5 * L) - std::exp(-1.5 * L));
          LA_inc = h;
        } else {
          L_next = L + h;
          log_gap = 0.5 * L;
          LA_inc = L + 0.5 * L_prev + 2.0 * h;
        }
        break;
      case TargetCase::ZeroZero:
        break;
    }
    if (!(LA_inc >= 0.0))
      throw DomainError("schedule: internal growth increment went negative");
    t.log_gap_next = log_gap;
    L_prev = L;
    L = L_next;
    LA += LA_inc;
  }
  return s;
}

namespace detail {

inline Schedule drop_prefix(const Schedule& s, int shift) {
  if (shift < 0) throw DomainError("schedule: negative shift");
  if (static_cast<std::size_t>(shift) + 2 > s.terms.size())
    throw DomainError("schedule: not enough generated terms to shift; request more");
  Schedule out;
  out.a = s.a;
  out.b = s.b;
  out.tag = s.tag;
  out.index_shift = s.index_shift + shift;
  out.terms.assign(s.terms.begin() + shift, s.terms.end());
  for (std::size_t i = 0; i < out.terms.size(); ++i)
    out.terms[i].p = static_cast<int>(i) + 1;
  return out;
}

}  // namespace detail

// Drops the shortest prefix after which the generated tail satisfies both
// displayed requirements: every remaining gap ell_{p+1} - ell_p >= k + t, and
// the first remaining term has e^{gamma_1 ell_1} >= 2k + t. Errors when the
// generated terms cannot certify this.
inline Schedule shift_indices(const Schedule& s, long long k, long long t) {
  if (k < 0 || t < 0) throw DomainError("schedule: k and t must be non-negative");
  const std::size_t P = s.terms.size();
  if (P < 2) throw DomainError("schedule: need at least 2 terms");
  const double need_gap = std::log(static_cast<double>(k + t));      // -inf when k+t=0
  const double need_first = std::log(static_cast<double>(2 * k + t));
  // suffix_min[i] = min over gaps starting at term index i
  std::vector<double> suffix_min(P, std::numeric_limits<double>::infinity());
  for (std::size_t i = P - 1; i-- > 0;)
    suffix_min[i] = std::min(s.terms[i].log_gap_next, suffix_min[i + 1]);
  for (std::size_t shift = 0; shift + 2 <= P; ++shift) {
    const bool gaps_ok = (k + t == 0) || suffix_min[shift] >= need_gap;
    // e^{gamma ell} >= 2k+t means gamma*ell >= log(2k+t).
    const bool first_ok =
        (2 * k + t == 0) || std::exp(s.terms[shift].log_gamma_ell) >= need_first;
    if (gaps_ok && first_ok) return detail::drop_prefix(s, static_cast<int>(shift));
  }
  throw DomainError("schedule: generated terms never satisfy the shift conditions; request more");
}

// Builder-facing variant: the point constructor needs the first checkpoint to
// be reachable, which takes e^{gamma_1 ell_1} >= 2k + t together with
// ell_1 >= k + 1 (so the first block-aligned window is feasible); growth of
// later insertion positions is enforced directly during construction.
inline Schedule shift_for_construction(const Schedule& s, long long k, long long t) {
  if (k < 0 || t < 0) throw DomainError("schedule: k and t must be non-negative");
  const std::size_t P = s.terms.size();
  if (P < 2) throw DomainError("schedule: need at least 2 terms");
  const double need_first = std::log(static_cast<double>(2 * k + t));
  const double need_ell = std::log(static_cast<double>(k + 1));
  for (std::size_t shift = 0; shift + 2 <= P; ++shift) {
    const bool first_ok =
        (2 * k + t == 0) || std::exp(s.terms[shift].log_gamma_ell) >= need_first;
    const bool ell_ok = s.terms[shift].log_ell >= need_ell;
    if (first_ok && ell_ok) return detail::drop_prefix(s, static_cast<int>(shift));
  }
  throw DomainError("schedule: generated terms never satisfy the construction conditions; request more");
}

struct PropertyCheck {
  std::string name;
  bool applicable = true;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (c.applicable && !c.passed) return false;
    return true;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// log(e^x + e^y) without overflow.
inline double log_add_exp(double x, double y) {
  if (std::isinf(x) && x < 0) return y;
  if (std::isinf(y) && y < 0) return x;
  const double hi = std::max(x, y), lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace detail

// Checks the growth-law properties on the generated terms. Asymptotic checks
// use rel_tol (default 5%) and small_tol (default 1e-3); the per-step growth
// inequality and monotonicity are checked with no tolerance at all. Beyond
// the resolution where binary64 can represent an increment (log ell around
// 1.4e3), equal consecutive masters are accepted and noted.
inline ValidationReport validate(const Schedule& s, double rel_tol = 0.05,
                                 double small_tol = 1e-3) {
  const std::size_t P = s.terms.size();
  if (P < 10) throw DomainError("validate: need at least 10 generated terms");
  ValidationReport rep;
  const auto& T = s.terms;
  auto add = [&rep](const std::string& name, bool applicable, bool passed,
                    const std::string& detail_text) {
    rep.checks.push_back({name, applicable, passed, detail_text});
  };

  // Finite masters everywhere.
  {
    bool ok = true;
    for (const auto& t : T)
      if (std::isnan(t.log_ell) || std::isnan(t.log_gamma) || std::isnan(t.log_gamma_ell))
        ok = false;
    add("masters_finite", true, ok, ok ? "all log-space values are finite" : "NaN master");
  }

  // Lengths non-decreasing, strictly where representable.
  {
    bool ok = true;
    int saturated = 0;
    std::string detail_text;
    for (std::size_t i = 0; i + 1 < P; ++i) {
      if (T[i + 1].log_ell < T[i].log_ell) {
        ok = false;
        detail_text = "decrease at p=" + std::to_string(T[i].p);
        break;
      }
      if (T[i + 1].log_ell == T[i].log_ell) {
        // A stall is legitimate only when the step increment is below the
        // resolution of the stored value (increment < a few ulp).
        const double lv = T[i].log_ell;
        const double inc = detail::log1p_exp_neg(0.5 * lv);
        const double ulp = std::nextafter(std::abs(lv), std::numeric_limits<double>::infinity()) - std::abs(lv);
        if (inc > 4.0 * ulp) {
          ok = false;
          detail_text = "stall below resolution limit at p=" + std::to_string(T[i].p);
          break;
        }
        ++saturated;  // increment below binary64 resolution; not a defect
      }
    }
    if (ok && saturated > 0)
      detail_text = std::to_string(saturated) + " steps below binary64 resolution";
    add("ell_increasing", true, ok, detail_text);
  }

  // (a) per-leg terminal behavior of gamma.
  {
    const std::size_t tail_from = (3 * P) / 4;
    for (int leg = 0; leg < 2; ++leg) {
      const bool want_a = (leg == 0);
      const double target = want_a ? s.a : s.b;
      std::vector<double> leg_log_gamma;
      for (std::size_t i = tail_from; i < P; ++i)
        if (T[i].a_leg == want_a) leg_log_gamma.push_back(T[i].log_gamma);
      const std::string name = want_a ? "limit_leg_a" : "limit_leg_b";
      if (leg_log_gamma.size() < 2) {
        add(name, true, false, "tail too short");
        continue;
      }
      bool ok = true;
      std::string detail_text;
      const double last = std::exp(leg_log_gamma.back());
      if (std::isinf(target)) {
        for (std::size_t i = 0; i + 1 < leg_log_gamma.size(); ++i)
          if (leg_log_gamma[i + 1] < leg_log_gamma[i]) ok = false;
        if (leg_log_gamma.back() < leg_log_gamma.front() + std::log(1.5)) ok = false;
        detail_text = "diverging, tail growth factor e^" +
                      detail::fmt(leg_log_gamma.back() - leg_log_gamma.front());
      } else if (target == 0.0) {
        for (std::size_t i = 0; i + 1 < leg_log_gamma.size(); ++i)
          if (leg_log_gamma[i + 1] > leg_log_gamma[i]) ok = false;
        if (!(last <= rel_tol)) ok = false;
        detail_text = "final " + detail::fmt(last);
      } else {
        if (!(std::abs(last - target) <= rel_tol * target)) ok = false;
        detail_text = "final " + detail::fmt(last) + " vs target " + detail::fmt(target);
      }
      add(name, true, ok, detail_text);
    }
  }

  // (b) gaps grow without bound. Raw gaps alternate between legs, so compare
  // the min of each adjacent pair, which must be non-decreasing and grow.
  {
    std::vector<double> pair_min;
    for (std::size_t i = 0; i + 2 < P; ++i)
      pair_min.push_back(std::min(T[i].log_gap_next, T[i + 1].log_gap_next));
    bool ok = true;
    std::string detail_text;
    const std::size_t from = std::min<std::size_t>(10, pair_min.size() - 1);
    for (std::size_t i = from; i + 1 < pair_min.size(); ++i)
      if (pair_min[i + 1] < pair_min[i]) {
        ok = false;
        detail_text = "pair minimum decreases at p=" + std::to_string(T[i].p);
        break;
      }
    if (ok && !(pair_min.back() >= pair_min[from] + std::log(2.0))) {
      ok = false;
      detail_text = "tail gap growth below factor 2";
    }
    add("gap_growth", true, ok, detail_text);
  }

  // (c) log(ell_p) - gamma_p ell_p falls monotonically and ends tiny.
  {
    bool ok = true;
    std::string detail_text;
    std::vector<double> v(P);
    for (std::size_t i = 0; i < P; ++i) v[i] = T[i].log_ell - std::exp(T[i].log_gamma_ell);
    for (std::size_t i = 10; i + 1 < P; ++i)
      if (v[i + 1] > v[i]) {
        ok = false;
        detail_text = "ratio rises at p=" + std::to_string(T[i].p);
        break;
      }
    if (ok && !(v.back() < std::log(small_tol))) {
      ok = false;
      detail_text = "final log ratio " + detail::fmt(v.back());
    }
    add("length_vs_exp", true, ok, detail_text);
  }

  // (d) tail bound on gamma_{p+1} ell_{p+1} / ell_p for finite b.
  {
    if (std::isinf(s.b)) {
      add("ratio_bound", false, true, "unbounded target");
    } else {
      const std::size_t from = (3 * P) / 4;
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = from; i + 1 < P; ++i)
        worst = std::max(worst, std::exp(T[i + 1].log_gamma_ell - T[i].log_ell));
      const bool ok = s.b == 0.0 ? (worst <= rel_tol) : (worst <= s.b * (1.0 + rel_tol));
      add("ratio_bound", true, ok,
          "tail max " + detail::fmt(worst) + " vs bound " +
              detail::fmt(s.b == 0.0 ? rel_tol : s.b * (1.0 + rel_tol)));
    }
  }

  // (e) per-step growth, no tolerance. Linear while the products are exactly
  // addable; by log-order beyond that.
  {
    bool ok = true;
    std::string detail_text;
    for (std::size_t i = 0; i + 1 < P; ++i) {
      const double la = T[i].log_gamma_ell, lb = T[i + 1].log_gamma_ell;
      if (std::max(la, lb) <= 60.0) {
        if (!(T[i].gamma_ell + 1.0 <= T[i + 1].gamma_ell)) {
          ok = false;
          detail_text = "step fails at p=" + std::to_string(T[i].p) + ": " +
                        detail::fmt(T[i].gamma_ell) + " + 1 > " + detail::fmt(T[i + 1].gamma_ell);
          break;
        }
      } else if (lb < la) {
        ok = false;
        detail_text = "log order fails at p=" + std::to_string(T[i].p);
        break;
      }
    }
    add("exact_growth_step", true, ok, detail_text);
  }

  // (f) (c*p + sum ell_j) / e^{gamma_p ell_p} -> 0 for c in {0, 10}.
  for (double c : {0.0, 10.0}) {
    bool ok = true;
    std::string detail_text;
    double log_sum = -std::numeric_limits<double>::infinity();
    std::vector<double> v(P);
    for (std::size_t i = 0; i < P; ++i) {
      log_sum = detail::log_add_exp(log_sum, T[i].log_ell);
      double log_num = log_sum;
      if (c > 0.0)
        log_num = detail::log_add_exp(log_num, std::log(c * static_cast<double>(i + 1)));
      v[i] = log_num - std::exp(T[i].log_gamma_ell);
    }
    for (std::size_t i = 10; i + 1 < P; ++i)
      if (v[i + 1] > v[i]) {
        ok = false;
        detail_text = "ratio rises at p=" + std::to_string(T[i].p);
        break;
      }
    if (ok && !(v.back() < std::log(small_tol))) {
      ok = false;
      detail_text = "final log ratio " + detail::fmt(v.back());
    }
    add(c == 0.0 ? "sum_vs_exp_c0" : "sum_vs_exp_c10", true, ok, detail_text);
  }

  return rep;
}

}  // namespace recur
