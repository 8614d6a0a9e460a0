#pragma once

// The rational family F_c(z) = -c N(z) / D(z) with critical points 0, 1, oo
// of local degrees d0, d, dinf; orbits of 1, circle rotation numbers, and two
// parameter solvers for the Herman parameter c(theta).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hermanlab/csv.hpp"
#include "hermanlab/error.hpp"
#include "hermanlab/rotnum.hpp"

namespace hermanlab {

using cplx = std::complex<double>;

struct Criticality {
  int d0 = 2;
  int dinf = 2;

  int d() const { return d0 + dinf - 1; }
  bool symmetric() const { return d0 == dinf; }
};

inline constexpr double kZeroCapture = 1e-8;
inline constexpr double kInfCapture = 1e8;
/// |z| beyond which F is evaluated in the chart w = 1/z.
inline constexpr double kChartRadius = 2.0;

/// Parameters together with the coefficient tables of N, D and of the
/// reciprocal-chart polynomials.
struct MapParams {
  Criticality crit;
  cplx c{1.0, 0.0};
  std::vector<double> num;  // N(z) = sum num[j] z^j, j = 0..d
  std::vector<double> den;  // D(z) = sum den[j] z^j, j = 0..d0-1
  std::vector<double> rnum; // N~(w) = sum rnum[i] w^i,  N(z) = z^d N~(1/z)
  std::vector<double> rden; // D~(w) = sum rden[i] w^i,  D(z) = z^(d0-1) D~(1/z)

  MapParams() : MapParams(Criticality{}, cplx{1.0, 0.0}) {}

  MapParams(Criticality cr, cplx cc) : crit(cr), c(cc) {
    if (cr.d0 < 2 || cr.dinf < 2)
      fail(ErrorKind::Domain, "criticalities must be >= 2");
    if (cr.d0 > 32 || cr.dinf > 32)
      fail(ErrorKind::Domain, "criticalities must be <= 32");
    if (cc == cplx{0.0, 0.0} || !std::isfinite(cc.real()) || !std::isfinite(cc.imag()))
      fail(ErrorKind::Domain, "c must be finite and nonzero");
    const int d = cr.d();
    num.assign(d + 1, 0.0);
    den.assign(cr.d0, 0.0);
    double binom = 1.0; // C(d, j)
    for (int j = 0; j <= d; ++j) {
      const double term = (j % 2 == 0 ? 1.0 : -1.0) * binom;
      if (j < cr.d0)
        den[j] = term;
      else
        num[j] = term;
      binom = binom * (d - j) / (j + 1);
    }
    rnum.assign(d + 1, 0.0);
    for (int j = 0; j <= d; ++j)
      rnum[d - j] = num[j];
    rden.assign(cr.d0, 0.0);
    for (int j = 0; j < cr.d0; ++j)
      rden[cr.d0 - 1 - j] = den[j];
  }

  MapParams with_c(cplx cc) const {
    MapParams p = *this;
    if (cc == cplx{0.0, 0.0} || !std::isfinite(cc.real()) || !std::isfinite(cc.imag()))
      fail(ErrorKind::Domain, "c must be finite and nonzero");
    p.c = cc;
    return p;
  }
};

namespace detail {

/// p(z) and p'(z) by Horner.
inline std::pair<cplx, cplx> horner(const std::vector<double> &a, cplx z) {
  cplx p{0.0, 0.0}, dp{0.0, 0.0};
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
  return {p, dp};
}

inline cplx ipow(cplx z, int k) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < k; ++i)
    r *= z;
  return r;
}

} // namespace detail

/// F and F' at z. Non-throwing; a pole yields an infinite value.
struct FEval {
  cplx f;
  cplx df;
};

inline FEval eval_F_raw(const MapParams &m, cplx z) {
  if (std::abs(z) <= kChartRadius) {
    auto [n, dn] = detail::horner(m.num, z);
    auto [dd, ddd] = detail::horner(m.den, z);
    if (dd == cplx{0.0, 0.0})
      return {cplx{INFINITY, 0.0}, cplx{INFINITY, 0.0}};
    const cplx f = -m.c * n / dd;
    const cplx df = -m.c * (dn * dd - n * ddd) / (dd * dd);
    return {f, df};
  }
  // G(w) = -c N~(w) / (D~(w) w^k), F(z) = G(1/z), F'(z) = -w^2 G'(w).
  const cplx w = 1.0 / z;
  const int k = m.crit.dinf;
  auto [n, dn] = detail::horner(m.rnum, w);
  auto [dd, ddd] = detail::horner(m.rden, w);
  const cplx wk = detail::ipow(w, k);
  const cplx den = dd * wk;
  if (den == cplx{0.0, 0.0})
    return {cplx{INFINITY, 0.0}, cplx{INFINITY, 0.0}};
  const cplx dden = ddd * wk + dd * static_cast<double>(k) * detail::ipow(w, k - 1);
  const cplx g = -m.c * n / den;
  const cplx dg = -m.c * (dn * den - n * dden) / (den * den);
  return {g, -w * w * dg};
}

/// Value-only F in plain real arithmetic, for per-pixel loops. Same charts as
/// eval_F_raw; a pole gives an infinite result.
inline void eval_F_fast(const MapParams &m, double zr, double zi, double &outr,
                        double &outi) {
  const double r2 = zr * zr + zi * zi;
  double xr = zr, xi = zi;
  const std::vector<double> *pn = &m.num, *pd = &m.den;
  if (r2 > kChartRadius * kChartRadius) {
    xr = zr / r2;
    xi = -zi / r2;
    pn = &m.rnum;
    pd = &m.rden;
  }
  auto horner = [&](const std::vector<double> &a, double &pr, double &pi) {
    pr = 0.0;
    pi = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
      const double t = pr * xr - pi * xi + *it;
      pi = pr * xi + pi * xr;
      pr = t;
    }
  };
  double nr, ni, dr, di;
  horner(*pn, nr, ni);
  horner(*pd, dr, di);
  if (pn == &m.rnum) {
    // D~(w) w^dinf
    for (int k = 0; k < m.crit.dinf; ++k) {
      const double t = dr * xr - di * xi;
      di = dr * xi + di * xr;
      dr = t;
    }
  }
  const double dd = dr * dr + di * di;
  if (dd == 0.0) {
    outr = INFINITY;
    outi = 0.0;
    return;
  }
  const double qr = (nr * dr + ni * di) / dd;
  const double qi = (ni * dr - nr * di) / dd;
  outr = -(m.c.real() * qr - m.c.imag() * qi);
  outi = -(m.c.real() * qi + m.c.imag() * qr);
}

inline cplx eval_F(const MapParams &m, cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    fail(ErrorKind::Domain, "eval_F: z must be finite");
  auto r = eval_F_raw(m, z);
  if (!std::isfinite(r.f.real()) || !std::isfinite(r.f.imag()))
    fail(ErrorKind::Degenerate, "eval_F: pole");
  return r.f;
}

inline cplx eval_dF(const MapParams &m, cplx z) {
  auto r = eval_F_raw(m, z);
  if (!std::isfinite(r.df.real()) || !std::isfinite(r.df.imag()))
    fail(ErrorKind::Degenerate, "eval_dF: pole");
  return r.df;
}

/// psi(w) = 1 / F(1/w): the map in the chart at infinity, psi(0) = 0.
inline cplx eval_inf_chart(const MapParams &m, cplx w) {
  auto [n, dn] = detail::horner(m.rnum, w);
  auto [dd, ddd] = detail::horner(m.rden, w);
  (void)dn;
  (void)ddd;
  return -dd * detail::ipow(w, m.crit.dinf) / (m.c * n);
}

// ---------------------------------------------------------------------------
// Critical structure

namespace detail {

/// Coefficients of p(z0 + h) in powers of h.
inline std::vector<cplx> taylor_shift(const std::vector<cplx> &p, cplx z0) {
  std::vector<cplx> a = p;
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = n - 1; j > k; --j)
      a[j - 1] += z0 * a[j];
  return a;
}

/// First `order` coefficients of the power series a(h) / b(h), b(0) != 0.
inline std::vector<cplx> series_div(const std::vector<cplx> &a,
                                    const std::vector<cplx> &b, std::size_t order) {
  std::vector<cplx> q(order, cplx{});
  for (std::size_t k = 0; k < order; ++k) {
    cplx s = k < a.size() ? a[k] : cplx{};
    for (std::size_t j = 1; j <= k && j < b.size(); ++j)
      s -= b[j] * q[k - j];
    q[k] = s / b[0];
  }
  return q;
}

inline std::vector<cplx> to_cplx(const std::vector<double> &v) {
  return {v.begin(), v.end()};
}

/// Order of vanishing of f - f(0) given Taylor coefficients, relative to the
/// largest coefficient; `zero_max` receives the largest "vanishing" one.
inline int local_degree(const std::vector<cplx> &s, double tol, double &zero_max) {
  double scale = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k)
    scale = std::max(scale, std::abs(s[k]));
  zero_max = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (std::abs(s[k]) > tol * scale)
      return static_cast<int>(k);
    zero_max = std::max(zero_max, std::abs(s[k]));
  }
  return 0;
}

} // namespace detail

struct CriticalReport {
  int degree_zero = 0;
  int degree_one = 0;
  int degree_inf = 0;
  double max_vanishing = 0.0; // largest coefficient that should be zero
  bool ok = false;
};

/// Local degrees at 0, 1 and oo from the series of F (and of 1/F(1/w) at oo).
/// Throws ConventionViolation when they differ from (d0, d, dinf).
inline CriticalReport verify_critical_structure(const MapParams &m, double tol = 1e-10) {
  const int d = m.crit.d();
  const std::size_t order = static_cast<std::size_t>(d) + 2;
  auto numc = detail::to_cplx(m.num);
  for (auto &x : numc)
    x *= -m.c;
  auto denc = detail::to_cplx(m.den);
  CriticalReport r;
  double zm = 0.0;
  {
    auto s = detail::series_div(numc, denc, order);
    r.degree_zero = detail::local_degree(s, tol, zm);
    r.max_vanishing = std::max(r.max_vanishing, zm);
  }
  {
    auto s = detail::series_div(detail::taylor_shift(numc, 1.0),
                                detail::taylor_shift(denc, 1.0), order);
    r.degree_one = detail::local_degree(s, tol, zm);
    r.max_vanishing = std::max(r.max_vanishing, zm / std::abs(m.c));
  }
  {
    // psi(w) = -D~(w) w^dinf / (c N~(w))
    std::vector<cplx> a(static_cast<std::size_t>(m.crit.dinf), cplx{});
    for (double x : m.rden)
      a.push_back(-x);
    auto b = detail::to_cplx(m.rnum);
    for (auto &x : b)
      x *= m.c;
    auto s = detail::series_div(a, b, order + static_cast<std::size_t>(m.crit.dinf));
    r.degree_inf = detail::local_degree(s, tol, zm);
    r.max_vanishing = std::max(r.max_vanishing, zm);
  }
  r.ok = r.degree_zero == m.crit.d0 && r.degree_one == d &&
         r.degree_inf == m.crit.dinf && std::abs(eval_F(m, 1.0) - m.c) <= 1e-12 * std::abs(m.c);
  if (!r.ok)
    fail(ErrorKind::ConventionViolation,
         "critical structure mismatch: degrees (" + std::to_string(r.degree_zero) + "," +
             std::to_string(r.degree_one) + "," + std::to_string(r.degree_inf) + ")");
  return r;
}

/// Leading Taylor coefficient at the superattracting fixed point 0 (or at 0 of
/// the chart at oo): F(z) ~ a z^k.
inline cplx leading_coefficient(const MapParams &m, bool at_infinity) {
  if (!at_infinity)
    return -m.c * m.num[static_cast<std::size_t>(m.crit.d0)] / m.den[0];
  return -m.rden[0] / (m.c * m.rnum[0]);
}

// ---------------------------------------------------------------------------
// Orbits

enum class OrbitStatus { Bounded, AttractedToZero, AttractedToInfinity };

inline std::string_view status_name(OrbitStatus s) {
  switch (s) {
  case OrbitStatus::Bounded: return "bounded";
  case OrbitStatus::AttractedToZero: return "attracted_to_0";
  case OrbitStatus::AttractedToInfinity: return "attracted_to_inf";
  }
  return "?";
}

inline OrbitStatus capture_of(cplx z) {
  const double r = std::abs(z);
  if (r < kZeroCapture)
    return OrbitStatus::AttractedToZero;
  if (!(r <= kInfCapture))
    return OrbitStatus::AttractedToInfinity;
  return OrbitStatus::Bounded;
}

struct Orbit {
  MapParams params;
  std::vector<cplx> z; // z_0 = 1, ..., truncated at the first capture
  OrbitStatus status = OrbitStatus::Bounded;
};

/// z_0 = 1 and n - 1 further iterates, stopping at the first capture.
inline Orbit compute_orbit(const MapParams &m, std::size_t n, cplx z0 = 1.0) {
  if (n < 1)
    fail(ErrorKind::Domain, "orbit length must be positive");
  Orbit o{m, {}, OrbitStatus::Bounded};
  o.z.reserve(n);
  cplx z = z0;
  o.z.push_back(z);
  for (std::size_t k = 1; k < n; ++k) {
    z = eval_F_raw(m, z).f;
    auto st = capture_of(z);
    if (st != OrbitStatus::Bounded) {
      o.status = st;
      break;
    }
    o.z.push_back(z);
  }
  return o;
}

/// Times k >= 1 at which |z_k - anchor| is strictly smaller than at every
/// earlier k >= 1. Stops after an exact return (distance below `exact`).
inline std::vector<std::int64_t> closest_returns_orbit(const std::vector<cplx> &z,
                                                       cplx anchor = 1.0,
                                                       double exact = 0.0) {
  std::vector<std::int64_t> out;
  double best = INFINITY;
  for (std::size_t k = 1; k < z.size(); ++k) {
    const double d = std::abs(z[k] - anchor);
    if (d < best) {
      best = d;
      out.push_back(static_cast<std::int64_t>(k));
      if (d < exact)
        break;
    }
  }
  return out;
}

/// The first `levels` closest-return times of rotation by theta.
inline std::vector<std::int64_t> expected_returns(const RotationNumber &theta, int levels) {
  if (levels < 1)
    fail(ErrorKind::Domain, "levels must be positive");
  auto q = theta.denominators(levels + 2);
  auto r = closest_returns_rotation(theta.value, std::min<std::int64_t>(q.back(), 1'000'000));
  if (static_cast<int>(r.size()) < levels)
    fail(ErrorKind::Domain, "too many levels for this rotation number");
  r.resize(static_cast<std::size_t>(levels));
  return r;
}

struct ComboReport {
  bool ok = false;
  std::vector<std::int64_t> observed;
  std::vector<std::int64_t> expected;
};

inline ComboReport combinatorial_rotation_check(const std::vector<cplx> &z,
                                                const RotationNumber &theta, int levels) {
  ComboReport r;
  r.expected = expected_returns(theta, levels);
  const auto horizon = static_cast<std::size_t>(r.expected.back());
  if (z.size() <= horizon)
    fail(ErrorKind::InsufficientOrbit, "orbit shorter than the last expected return");
  std::vector<cplx> head(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(horizon) + 1);
  r.observed = closest_returns_orbit(head, z[0]);
  r.ok = r.observed == r.expected;
  return r;
}

inline ComboReport combinatorial_rotation_check(const MapParams &m,
                                                const RotationNumber &theta, int levels) {
  auto expected = expected_returns(theta, levels);
  auto o = compute_orbit(m, static_cast<std::size_t>(expected.back()) + 1);
  if (o.status != OrbitStatus::Bounded)
    fail(ErrorKind::OrbitEscaped,
         std::string("orbit of 1 left the annulus: ") + std::string(status_name(o.status)));
  return combinatorial_rotation_check(o.z, theta, levels);
}

/// Winding number about 0 of the closed polygon through z_j ordered by {j theta}.
inline double polygon_winding(const std::vector<cplx> &pts, double theta) {
  std::vector<std::size_t> idx(pts.size());
  for (std::size_t j = 0; j < idx.size(); ++j)
    idx[j] = j;
  auto frac = [&](std::size_t j) {
    long double x = static_cast<long double>(theta) * static_cast<long double>(j);
    return x - std::floor(x);
  };
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return frac(a) < frac(b); });
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k)
    s += std::arg(pts[idx[(k + 1) % idx.size()]] / pts[idx[k]]);
  return s / (2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Circle rotation numbers (d0 == dinf, |c| = 1)

struct RotationEstimate {
  double rho = 0.0;
  double error_bound = 0.0;
};

/// (h^N(x0) - x0) / N for a lift h of a circle homeomorphism.
template <class Lift>
RotationEstimate lift_rotation_number(Lift &&h, double x0, std::int64_t n) {
  if (n < 1)
    fail(ErrorKind::Domain, "iteration count must be positive");
  double x = x0;
  for (std::int64_t k = 0; k < n; ++k)
    x = h(x);
  return {(x - x0) / static_cast<double>(n), 1.0 / static_cast<double>(n)};
}

/// Continuous lift of x -> arg F_1(e^{2 pi i x}) / 2 pi. The displacement is
/// tabulated on a grid and used to pick the branch of each exact evaluation.
class CircleLift {
public:
  static constexpr int kGrid = 1 << 14;

  explicit CircleLift(Criticality crit) : map_(crit, cplx{1.0, 0.0}) {
    if (!crit.symmetric())
      fail(ErrorKind::Domain, "circle lift requires d0 == dinf");
    table_.resize(kGrid + 1);
    double prev = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
      double p = principal(static_cast<double>(i) / kGrid);
      if (i > 0)
        p += std::round(prev - p);
      table_[static_cast<std::size_t>(i)] = p;
      prev = p;
    }
    if (std::abs(table_.back() - table_.front()) > 1e-9)
      fail(ErrorKind::LiftDiscontinuity, "circle map does not have degree one");
  }

  /// x + phi(x), branch of phi continuous in x.
  double operator()(double x) const {
    const double fx = std::floor(x);
    const double t = x - fx;
    const double g = t * kGrid;
    const auto i = std::min(static_cast<int>(g), kGrid - 1);
    const double a = g - i;
    const double gv = table_[static_cast<std::size_t>(i)] * (1.0 - a) +
                      table_[static_cast<std::size_t>(i) + 1] * a;
    double p = principal(t);
    const double shift = std::round(gv - p);
    if (std::abs(gv - p - shift) > 0.25)
      fail(ErrorKind::LiftDiscontinuity, "branch tracking failed");
    return x + p + shift;
  }

  const std::vector<double> &table() const { return table_; }

private:
  double principal(double x) const {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * x);
    return std::arg(eval_F_raw(map_, z).f / z) / (2.0 * std::numbers::pi);
  }

  MapParams map_;
  std::vector<double> table_;
};

inline RotationEstimate circle_lift_rotation_number(const CircleLift &lift, double s,
                                                    std::int64_t n) {
  return lift_rotation_number([&](double x) { return lift(x) + s; }, 0.0, n);
}

inline RotationEstimate circle_lift_rotation_number(Criticality crit, double s,
                                                    std::int64_t n) {
  return circle_lift_rotation_number(CircleLift(crit), s, n);
}

struct BisectionConfig {
  std::int64_t iterations = 200'000; // lift iterations per rotation estimate
  int scan_points = 512;             // monotonicity scan of s -> rho(s)
  std::int64_t scan_iterations = 10'000;
  int max_steps = 60;
};

struct BisectionResult {
  cplx c;
  double s = 0.0;
  double rho = 0.0;   // rotation number at s, reduced mod 1
  int steps = 0;
};

/// c = exp(2 pi i s*) with rho(s*) = theta mod 1. rho is first scanned on a
/// grid of s; a decrease beyond the estimator error aborts.
inline BisectionResult find_c_bisection(Criticality crit, double theta, double tol,
                                        const BisectionConfig &cfg = {}) {
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::Domain, "theta must lie in (0,1)");
  if (!(tol > 0.0))
    fail(ErrorKind::Domain, "tolerance must be positive");
  const CircleLift lift(crit);
  auto rho = [&](double s, std::int64_t n) {
    return circle_lift_rotation_number(lift, s, n).rho;
  };
  // rho(s + 1) = rho(s) + 1, so theta + k is hit for exactly one integer k.
  const double rho0 = rho(0.0, cfg.scan_iterations);
  const double target = theta + std::ceil(rho0 - theta);
  const int ns = std::max(cfg.scan_points, 2);
  const double slack = 2.0 / static_cast<double>(cfg.scan_iterations);
  double lo = 0.0, hi = 1.0;
  double prev = rho0;
  bool bracketed = false;
  for (int i = 1; i <= ns; ++i) {
    const double s = static_cast<double>(i) / ns;
    const double r = (i == ns) ? rho0 + 1.0 : rho(s, cfg.scan_iterations);
    if (r < prev - slack)
      fail(ErrorKind::NonMonotone, "rho(s) decreases near s = " + csv::num(s));
    if (!bracketed && prev - slack <= target && target <= r + slack) {
      lo = static_cast<double>(i - 1) / ns;
      hi = s;
      bracketed = true;
    }
    prev = r;
  }
  if (!bracketed)
    fail(ErrorKind::NoBracket, "no s bracketing the target rotation number");
  // The coarse scan can misplace the bracket by its own error; widen by a cell.
  lo = std::max(0.0, lo - 1.0 / ns);
  hi = std::min(1.0, hi + 1.0 / ns);
  BisectionResult res;
  for (int k = 0; k < cfg.max_steps; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double r = rho(mid, cfg.iterations);
    res.s = mid;
    res.rho = r - std::floor(r);
    res.steps = k + 1;
    if (std::abs(r - target) < tol)
      break;
    if (r < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15)
      break;
  }
  res.c = std::polar(1.0, 2.0 * std::numbers::pi * res.s);
  return res;
}

// ---------------------------------------------------------------------------
// Centers F_c^q(1) = 1

struct NewtonResult {
  cplx c;
  double residual = 0.0;
  int steps = 0;
};

/// F_c^q(1) and its derivative in c.
inline std::pair<cplx, cplx> iterate_with_dc(const MapParams &m, std::int64_t q) {
  cplx z = 1.0, dz = 0.0;
  for (std::int64_t k = 0; k < q; ++k) {
    auto e = eval_F_raw(m, z);
    dz = e.f / m.c + e.df * dz;
    z = e.f;
    if (capture_of(z) != OrbitStatus::Bounded)
      fail(ErrorKind::NewtonDivergence, "orbit of 1 captured during Newton");
  }
  return {z, dz};
}

/// Newton on G(c) = F_c^q(1) - 1.
inline NewtonResult newton_center(const MapParams &seed, std::int64_t q,
                                  int max_steps = 100) {
  if (q < 1)
    fail(ErrorKind::Domain, "period must be positive");
  MapParams m = seed;
  NewtonResult r;
  for (int k = 0; k < max_steps; ++k) {
    auto [z, dz] = iterate_with_dc(m, q);
    const cplx g = z - 1.0;
    r.c = m.c;
    r.residual = std::abs(g);
    r.steps = k;
    if (!(std::abs(dz) > 1e-300))
      fail(ErrorKind::DerivativeUnderflow, "dG/dc vanished");
    const cplx step = g / dz;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag()))
      fail(ErrorKind::NewtonDivergence, "non-finite Newton step");
    if (r.residual < 1e-14 || std::abs(step) < 1e-15 * std::abs(m.c)) {
      if (r.residual < 1e-12)
        return r;
    }
    m = m.with_c(m.c - step);
  }
  auto [z, dz] = iterate_with_dc(m, q);
  (void)dz;
  r.c = m.c;
  r.residual = std::abs(z - 1.0);
  r.steps = max_steps;
  if (r.residual < 1e-12)
    return r;
  fail(ErrorKind::NewtonDivergence,
       "no convergence in " + std::to_string(max_steps) + " steps (q = " +
           std::to_string(q) + ")");
}

struct CenterCheck {
  bool ok = false;
  std::vector<std::int64_t> observed;
  std::vector<std::int64_t> expected;
  double winding = 0.0;
};

/// At the center of period q_n the orbit of 1 returns like the rotation before
/// q_{n-1}, returns exactly at q_n, and winds once positively.
inline CenterCheck center_check(const MapParams &m, const RotationNumber &theta, int n) {
  if (n < 1)
    fail(ErrorKind::Domain, "level must be positive");
  auto q = theta.denominators(n);
  const std::int64_t qn = q[static_cast<std::size_t>(n)];
  const std::int64_t qprev = q[static_cast<std::size_t>(n - 1)];
  CenterCheck r;
  r.expected = {1};
  if (qprev > 1)
    r.expected = closest_returns_rotation(theta.value, qprev - 1);
  if (r.expected.back() != qn)
    r.expected.push_back(qn);
  auto o = compute_orbit(m, static_cast<std::size_t>(qn) + 1);
  if (o.status != OrbitStatus::Bounded)
    return r;
  r.observed = closest_returns_orbit(o.z, 1.0, 1e-9);
  std::vector<cplx> cyc(o.z.begin(), o.z.begin() + qn);
  r.winding = qn >= 3 ? polygon_winding(cyc, theta.value) : 1.0;
  r.ok = r.observed == r.expected && std::abs(r.winding - 1.0) < 1e-6 &&
         std::abs(o.z[static_cast<std::size_t>(qn)] - 1.0) < 1e-9;
  return r;
}

struct SeedScan {
  std::vector<cplx> hits;
  cplx centroid;
};

/// Grid scan of the c-plane for parameters whose orbit of 1 stays bounded,
/// returns like rotation by theta for `levels` returns and winds positively.
inline SeedScan locate_herman_seed(Criticality crit, const RotationNumber &theta,
                                   int levels = 5, int grid = 400, double box = 5.0) {
  auto expected = expected_returns(theta, levels);
  const auto horizon = static_cast<std::size_t>(expected.back());
  SeedScan s;
  MapParams m(crit, cplx{1.0, 0.0});
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const cplx c{-box + 2.0 * box * i / (grid - 1), -box + 2.0 * box * j / (grid - 1)};
      if (std::abs(c) < 0.1)
        continue;
      m.c = c;
      auto o = compute_orbit(m, horizon + 1);
      if (o.status != OrbitStatus::Bounded)
        continue;
      if (closest_returns_orbit(o.z) != expected)
        continue;
      if (std::abs(polygon_winding(o.z, theta.value) - 1.0) > 0.5)
        continue;
      s.hits.push_back(c);
    }
  if (s.hits.empty())
    fail(ErrorKind::NoBracket, "no parameter with rotation combinatorics in the scan box");
  cplx sum = 0.0;
  for (auto c : s.hits)
    sum += c;
  s.centroid = sum / static_cast<double>(s.hits.size());
  std::stable_sort(s.hits.begin(), s.hits.end(), [&](cplx a, cplx b) {
    return std::abs(a - s.centroid) < std::abs(b - s.centroid);
  });
  return s;
}

struct Center {
  int n = 0;
  std::int64_t q = 0;
  cplx c;
  double residual = 0.0;
};

struct CenterSequence {
  std::vector<Center> centers;
  std::optional<Error> error; // set when the continuation stopped early
};

/// c_n with F_{c_n}^{q_n}(1) = 1 for n = 1..n_max. Seeds are tried in order:
/// two extrapolations from earlier centers, the previous center, then the scan.
inline CenterSequence center_sequence(Criticality crit, const RotationNumber &theta,
                                      int n_max, const SeedScan &scan,
                                      std::size_t max_scan_seeds = 16) {
  if (n_max < 1)
    fail(ErrorKind::Domain, "n_max must be positive");
  auto q = theta.denominators(n_max);
  CenterSequence out;
  MapParams base(crit, cplx{1.0, 0.0});
  for (int n = 1; n <= n_max; ++n) {
    const std::int64_t qn = q[static_cast<std::size_t>(n)];
    std::vector<cplx> seeds;
    const auto &cs = out.centers;
    const std::size_t k = cs.size();
    if (k >= 4) {
      const cplx l2 = (cs[k - 1].c - cs[k - 2].c) / (cs[k - 3].c - cs[k - 4].c);
      seeds.push_back(cs[k - 1].c + (cs[k - 2].c - cs[k - 3].c) * l2);
    }
    if (k >= 3) {
      const cplx d1 = cs[k - 1].c - cs[k - 2].c;
      seeds.push_back(cs[k - 1].c + d1 * d1 / (cs[k - 2].c - cs[k - 3].c));
    }
    if (k >= 1)
      seeds.push_back(cs[k - 1].c);
    if (n == 1)
      seeds.push_back(1.0);
    seeds.push_back(scan.centroid);
    for (std::size_t i = 0; i < std::min(max_scan_seeds, scan.hits.size()); ++i)
      seeds.push_back(scan.hits[i]);
    bool found = false;
    for (cplx s : seeds) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || s == cplx{})
        continue;
      try {
        auto r = newton_center(base.with_c(s), qn);
        if (!center_check(base.with_c(r.c), theta, n).ok)
          continue;
        out.centers.push_back({n, qn, r.c, r.residual});
        found = true;
        break;
      } catch (const Error &) {
      }
    }
    if (!found) {
      out.error = Error(ErrorKind::WrongCombinatorics,
                        "no seed converged to a center with rotation combinatorics (q = " +
                            std::to_string(qn) + ")");
      break;
    }
  }
  return out;
}

/// Aitken extrapolation of the last three terms.
inline cplx extrapolate_limit(const std::vector<cplx> &c) {
  if (c.size() < 3)
    fail(ErrorKind::Domain, "need at least three terms");
  const std::size_t k = c.size();
  const cplx d1 = c[k - 1] - c[k - 2];
  const cplx d0 = c[k - 2] - c[k - 3];
  const cplx l = d1 / d0;
  return c[k - 1] + d1 * l / (1.0 - l);
}

/// |c_{n+1} - c_n| / |c_n - c_{n-1}|.
inline std::vector<double> step_ratios(const std::vector<cplx> &c) {
  std::vector<double> r;
  for (std::size_t k = 2; k < c.size(); ++k)
    r.push_back(std::abs(c[k] - c[k - 1]) / std::abs(c[k - 1] - c[k - 2]));
  return r;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_orbit_csv(std::ostream &os, const std::vector<cplx> &z) {
  os << "k,re,im\n";
  for (std::size_t k = 0; k < z.size(); ++k)
    csv::row(os, csv::num(static_cast<unsigned long long>(k)), csv::num(z[k].real()),
             csv::num(z[k].imag()));
}

inline void write_centers_csv_header(std::ostream &os) { os << "n,q_n,re_c,im_c,residual\n"; }

inline void write_center_row(std::ostream &os, const Center &c) {
  csv::row(os, csv::num(c.n), csv::num(static_cast<long long>(c.q)), csv::num(c.c.real()),
           csv::num(c.c.imag()), csv::num(c.residual));
}

} // namespace hermanlab
