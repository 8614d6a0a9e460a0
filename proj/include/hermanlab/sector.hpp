#pragma once

// Translation pairs (T_{-u}, T_v), their prime renormalization, the
// anti-renormalization matrix M and the power-triple cascade T^{(n,a,b)}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hermanlab/csv.hpp"
#include "hermanlab/error.hpp"
#include "hermanlab/rotnum.hpp"

namespace hermanlab {

struct TranslationPair {
  double u = 0.0;
  double v = 0.0;
};

enum class Branch { IMinus, IPlus };

inline std::string_view branch_name(Branch b) {
  return b == Branch::IMinus ? "I-" : "I+";
}

/// 2x2 integer matrix acting on column vectors (-u, v)^T.
struct IntMatrix2 {
  std::int64_t m11 = 1, m12 = 0, m21 = 0, m22 = 1;

  static IntMatrix2 identity() { return {}; }
  static IntMatrix2 of(Branch b) {
    return b == Branch::IMinus ? IntMatrix2{1, 1, 0, 1} : IntMatrix2{1, 0, 1, 1};
  }

  std::int64_t det() const { return m11 * m22 - m12 * m21; }
  std::int64_t trace() const { return m11 + m22; }

  friend bool operator==(const IntMatrix2 &, const IntMatrix2 &) = default;
};

inline IntMatrix2 operator*(const IntMatrix2 &x, const IntMatrix2 &y) {
  using detail::checked_add;
  using detail::checked_mul;
  return {checked_add(checked_mul(x.m11, y.m11), checked_mul(x.m12, y.m21)),
          checked_add(checked_mul(x.m11, y.m12), checked_mul(x.m12, y.m22)),
          checked_add(checked_mul(x.m21, y.m11), checked_mul(x.m22, y.m21)),
          checked_add(checked_mul(x.m21, y.m12), checked_mul(x.m22, y.m22))};
}

struct PrimeStep {
  TranslationPair pair;
  Branch branch;
};

inline PrimeStep prime_renorm_pair(const TranslationPair &p) {
  if (!(p.u > 0.0 && p.v > 0.0))
    fail(ErrorKind::Domain, "translation lengths must be positive");
  if (std::abs(p.u - p.v) <= 1e-14 * std::max(p.u, p.v))
    fail(ErrorKind::Degenerate, "u == v: rotation number 1/2");
  if (p.u >= p.v)
    return {{p.u - p.v, p.v}, Branch::IMinus};
  return {{p.u, p.v - p.u}, Branch::IPlus};
}

inline double rotation_of_pair(const TranslationPair &p) {
  if (!(p.u > 0.0 && p.v > 0.0))
    fail(ErrorKind::Domain, "translation lengths must be positive");
  return p.v / (p.u + p.v);
}

/// Immutable data of the cascade attached to a periodic-type rotation number.
struct CascadeState {
  TranslationPair pair;       // (u, v) = (theta, 1 - theta)
  IntMatrix2 matrix;          // M, later steps multiplied on the left
  std::vector<Branch> steps;  // branch of each prime step in iteration order
  double t = 1.0;             // leading eigenvalue of M
  double w1 = 1.0, w2 = 1.0;  // right eigenvector for t
};

/// Iterates prime_renorm_pair on (theta, 1 - theta) until the pair returns to
/// its own direction.
inline CascadeState anti_renorm_matrix(double theta, int max_m = 64,
                                       double tol = 1e-9) {
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::Domain, "anti_renorm_matrix: theta must lie in (0,1)");
  CascadeState s;
  s.pair = {theta, 1.0 - theta};
  const double slope0 = s.pair.u / s.pair.v;
  TranslationPair p = s.pair;
  IntMatrix2 m = IntMatrix2::identity();
  for (int k = 1; k <= max_m; ++k) {
    auto step = prime_renorm_pair(p);
    p = step.pair;
    m = IntMatrix2::of(step.branch) * m;
    s.steps.push_back(step.branch);
    if (std::abs(p.u / p.v - slope0) < tol * slope0) {
      s.matrix = m;
      break;
    }
    if (k == max_m)
      fail(ErrorKind::PeriodNotFound,
           "no r_prm period within " + std::to_string(max_m) + " steps");
  }
  const IntMatrix2 &M = s.matrix;
  if (M.det() != 1)
    fail(ErrorKind::ConventionViolation, "branch composite must have det 1");
  const double tr = static_cast<double>(M.trace());
  s.t = (tr + std::sqrt(tr * tr - 4.0)) / 2.0;
  s.w1 = 1.0;
  s.w2 = (s.t - static_cast<double>(M.m11)) / static_cast<double>(M.m12);
  if (!(s.t > 1.0) || !(s.w2 > 0.0) || M.m11 <= 0 || M.m12 <= 0 || M.m21 <= 0 ||
      M.m22 <= 0)
    fail(ErrorKind::ConventionViolation, "M must be positive with positive eigenvector");
  // The geometric contraction must agree with the algebraic eigenvalue.
  if (std::abs(s.pair.u / p.u - s.t) > 1e-6 * s.t)
    fail(ErrorKind::ConventionViolation, "contraction does not match eigenvalue");
  return s;
}

// ---------------------------------------------------------------------------
// Power triples

struct PowerTriple {
  std::int64_t n = 0;
  std::int64_t a = 0;
  std::int64_t b = 0;

  bool is_zero() const { return a == 0 && b == 0; }
  friend bool operator==(const PowerTriple &, const PowerTriple &) = default;
};

namespace detail {

inline void check_triple(const PowerTriple &p) {
  if (p.a < 0 || p.b < 0)
    fail(ErrorKind::Domain, "power triple exponents must be nonnegative");
}

/// (n,a,b) -> (n-1, (a,b) M).
inline PowerTriple lower(const PowerTriple &p, const IntMatrix2 &M) {
  return {p.n - 1, checked_add(checked_mul(p.a, M.m11), checked_mul(p.b, M.m21)),
          checked_add(checked_mul(p.a, M.m12), checked_mul(p.b, M.m22))};
}

/// (a,b) M^{-1} when it is a nonnegative integer vector.
inline std::optional<PowerTriple> lift(const PowerTriple &p, const IntMatrix2 &M) {
  std::int64_t a = checked_add(checked_mul(p.a, M.m22), -checked_mul(p.b, M.m21));
  std::int64_t b = checked_add(checked_mul(p.b, M.m11), -checked_mul(p.a, M.m12));
  if (a < 0 || b < 0)
    return std::nullopt;
  return PowerTriple{p.n + 1, a, b};
}

inline PowerTriple lower_to(PowerTriple p, std::int64_t level, const IntMatrix2 &M) {
  while (p.n > level)
    p = lower(p, M);
  return p;
}

} // namespace detail

inline PowerTriple pt_normalize(const PowerTriple &p, const CascadeState &s) {
  detail::check_triple(p);
  if (p.is_zero())
    return {};
  PowerTriple cur = p;
  while (auto up = detail::lift(cur, s.matrix))
    cur = *up;
  return cur;
}

inline bool pt_is_canonical(const PowerTriple &p, const CascadeState &s) {
  return p == pt_normalize(p, s);
}

inline double iota(const PowerTriple &p, const CascadeState &s) {
  return std::pow(s.t, static_cast<double>(p.n)) *
         (static_cast<double>(p.a) * s.w1 + static_cast<double>(p.b) * s.w2);
}

/// Translation length of T^P: t^{-n} (b v - a u).
inline double translation_of(const PowerTriple &p, const CascadeState &s) {
  return std::pow(s.t, -static_cast<double>(p.n)) *
         (static_cast<double>(p.b) * s.pair.v - static_cast<double>(p.a) * s.pair.u);
}

inline double cascade_translate(const PowerTriple &p, double x, const CascadeState &s) {
  return x + translation_of(p, s);
}

/// b_P = T^{-P}(0).
inline double b_point(const PowerTriple &p, const CascadeState &s) {
  return -translation_of(p, s);
}

inline PowerTriple pt_add(const PowerTriple &p, const PowerTriple &q,
                          const CascadeState &s) {
  detail::check_triple(p);
  detail::check_triple(q);
  const std::int64_t lvl = std::min(p.n, q.n);
  auto x = detail::lower_to(p, lvl, s.matrix);
  auto y = detail::lower_to(q, lvl, s.matrix);
  return pt_normalize({lvl, detail::checked_add(x.a, y.a), detail::checked_add(x.b, y.b)}, s);
}

inline PowerTriple pt_scale(const PowerTriple &p, std::int64_t k, const CascadeState &s) {
  detail::check_triple(p);
  if (p.is_zero())
    return {};
  return pt_normalize({p.n + k, p.a, p.b}, s);
}

namespace detail {

inline constexpr int kMaxDominanceDepth = 200;

/// Common level at which one of p, q dominates the other componentwise.
inline std::pair<PowerTriple, PowerTriple>
dominance_level(const PowerTriple &p, const PowerTriple &q, const IntMatrix2 &M) {
  const std::int64_t lvl = std::min(p.n, q.n);
  auto x = lower_to(p, lvl, M);
  auto y = lower_to(q, lvl, M);
  for (int k = 0; k < kMaxDominanceDepth; ++k) {
    if ((x.a >= y.a && x.b >= y.b) || (x.a <= y.a && x.b <= y.b))
      return {x, y};
    x = lower(x, M);
    y = lower(y, M);
  }
  fail(ErrorKind::Overflow, "componentwise dominance not reached");
}

} // namespace detail

/// -1, 0, +1.
inline int pt_cmp(const PowerTriple &p, const PowerTriple &q, const CascadeState &s) {
  detail::check_triple(p);
  detail::check_triple(q);
  if (p.is_zero() || q.is_zero())
    return (p.is_zero() ? 0 : 1) - (q.is_zero() ? 0 : 1);
  auto [x, y] = detail::dominance_level(p, q, s.matrix);
  if (x.a == y.a && x.b == y.b)
    return 0;
  return (x.a >= y.a && x.b >= y.b) ? 1 : -1;
}

inline PowerTriple pt_sub(const PowerTriple &p, const PowerTriple &q,
                          const CascadeState &s) {
  detail::check_triple(p);
  detail::check_triple(q);
  if (q.is_zero())
    return pt_normalize(p, s);
  if (p.is_zero())
    fail(ErrorKind::Domain, "pt_sub requires P >= Q");
  auto [x, y] = detail::dominance_level(p, q, s.matrix);
  if (x.a < y.a || x.b < y.b)
    fail(ErrorKind::Domain, "pt_sub requires P >= Q");
  return pt_normalize({x.n, x.a - y.a, x.b - y.b}, s);
}

// ---------------------------------------------------------------------------
// Dominant points

struct CascadePoint {
  PowerTriple p;
  double iota = 0.0;
  double b = 0.0; // b_P
};

struct Window {
  double x_max = 100.0;
  double iota_max = 10.0;
  std::size_t budget = 2'000'000;
};

/// Smallest |a u - b v| over canonical nonzero (a, b) with a + b <= 200. The
/// level sweep stops once x_max t^n drops below it.
inline double min_canonical_gap(const CascadeState &s) {
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t a = 0; a <= 200; ++a)
    for (std::int64_t b = 0; a + b <= 200; ++b) {
      if (a == 0 && b == 0)
        continue;
      if (detail::lift({0, a, b}, s.matrix))
        continue;
      best = std::min(best, std::abs(static_cast<double>(a) * s.pair.u -
                                     static_cast<double>(b) * s.pair.v));
    }
  return best;
}

/// Every canonical nonzero triple with iota <= iota_max and |b_P| <= x_max,
/// sorted by iota.
inline std::vector<CascadePoint> enumerate_window(const CascadeState &s,
                                                  const Window &win) {
  if (!(win.x_max > 0.0 && win.iota_max > 0.0))
    fail(ErrorKind::Domain, "window bounds must be positive");
  const double gap = min_canonical_gap(s);
  const double wmin = std::min(s.w1, s.w2);
  const auto n_hi = static_cast<std::int64_t>(
      std::floor(std::log(win.iota_max / wmin) / std::log(s.t)));
  std::vector<CascadePoint> out;
  for (std::int64_t n = n_hi;; --n) {
    const double tn = std::pow(s.t, static_cast<double>(n));
    const double span = win.x_max * tn; // bound on |b v - a u|
    if (span < gap)
      break;
    const double cap = win.iota_max / tn; // bound on a w1 + b w2
    const auto a_max = static_cast<std::int64_t>(std::floor(cap / s.w1));
    for (std::int64_t a = 0; a <= a_max; ++a) {
      const double au = static_cast<double>(a) * s.pair.u;
      double lo = std::max(0.0, (au - span) / s.pair.v);
      double hi = std::min((cap - static_cast<double>(a) * s.w1) / s.w2,
                           (au + span) / s.pair.v);
      for (auto b = static_cast<std::int64_t>(std::ceil(lo - 1e-9));
           static_cast<double>(b) <= hi + 1e-9; ++b) {
        if (b < 0 || (a == 0 && b == 0))
          continue;
        PowerTriple p{n, a, b};
        if (detail::lift(p, s.matrix))
          continue;
        CascadePoint cp{p, iota(p, s), b_point(p, s)};
        if (cp.iota > win.iota_max || std::abs(cp.b) > win.x_max)
          continue;
        out.push_back(cp);
        if (out.size() > win.budget)
          fail(ErrorKind::Budget, "enumeration budget exceeded");
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CascadePoint &x, const CascadePoint &y) { return x.iota < y.iota; });
  return out;
}

/// Dominant points within the window, the zero triple first, then by iota.
inline std::vector<CascadePoint> dominant_points(const CascadeState &s,
                                                 const Window &win) {
  auto all = enumerate_window(s, win);
  std::vector<CascadePoint> out{CascadePoint{}};
  double best_pos = std::numeric_limits<double>::infinity();
  double best_neg = std::numeric_limits<double>::infinity();
  for (const auto &cp : all) {
    double &rec = cp.b > 0.0 ? best_pos : best_neg;
    if (std::abs(cp.b) < rec) {
      rec = std::abs(cp.b);
      out.push_back(cp);
    }
  }
  return out;
}

struct PushWitness {
  std::size_t i = 0;      // gap [b_{P_i}, b_{P_{i+1}}]
  std::size_t n = 0, m = 0; // target gap [b_{P_n}, b_{P_m}]
  PowerTriple q;
  bool crossed = false;   // b_{P_i} lands on b_{P_m}
  double error = 0.0;     // endpoint mismatch
};

/// Bounded search for Q > 0 and n < m <= i with T^Q mapping the gap
/// [b_{P_i}, b_{P_{i+1}}] onto [b_{P_n}, b_{P_m}]. `dom` excludes the zero
/// triple.
inline std::optional<PushWitness>
dominant_push_witness(const std::vector<CascadePoint> &dom, std::size_t i,
                      const CascadeState &s, double tol = 1e-9) {
  if (i + 1 >= dom.size())
    fail(ErrorKind::Domain, "gap index out of range");
  auto try_q = [&](const PowerTriple &from, const PowerTriple &to)
      -> std::optional<PowerTriple> {
    if (pt_cmp(from, to, s) <= 0)
      return std::nullopt;
    return pt_sub(from, to, s);
  };
  for (std::size_t m = 1; m <= i; ++m)
    for (std::size_t n = 0; n < m; ++n)
      for (bool crossed : {false, true}) {
        const auto &lo_t = crossed ? dom[m].p : dom[n].p;
        const auto &hi_t = crossed ? dom[n].p : dom[m].p;
        auto q1 = try_q(dom[i].p, lo_t);
        auto q2 = try_q(dom[i + 1].p, hi_t);
        if (!q1 || !q2 || !(*q1 == *q2))
          continue;
        const double e1 = std::abs(cascade_translate(*q1, dom[i].b, s) -
                                   b_point(lo_t, s));
        const double e2 = std::abs(cascade_translate(*q1, dom[i + 1].b, s) -
                                   b_point(hi_t, s));
        const double err = std::max(e1, e2);
        if (err < tol)
          return PushWitness{i, n, m, *q1, crossed, err};
      }
  return std::nullopt;
}

inline void write_dominant_csv(std::ostream &os, const std::vector<CascadePoint> &pts) {
  os << "n,a,b,iota,b_P\n";
  for (const auto &cp : pts)
    csv::row(os, csv::num(static_cast<long long>(cp.p.n)),
             csv::num(static_cast<long long>(cp.p.a)),
             csv::num(static_cast<long long>(cp.p.b)), csv::num(cp.iota),
             csv::num(cp.b));
}

} // namespace hermanlab
