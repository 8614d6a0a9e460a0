#pragma once

// Continued fractions, convergents and the prime renormalization r_prm acting
// on rotation numbers. Everything here is pure; the integer recurrences are
// exact and refuse to wrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hermanlab/error.hpp"

namespace hermanlab {

inline constexpr int kMaxCfDepth = 64;
/// A partial quotient larger than this means "rational at double precision".
inline constexpr double kMaxCfTerm = 1e9;
/// Remainders below this terminate the expansion.
inline constexpr double kCfRemainderFloor = 1e-15;

inline double golden_mean() { return (std::sqrt(5.0) - 1.0) / 2.0; }
inline double silver_mean() { return std::numbers::sqrt2 - 1.0; }

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    fail(ErrorKind::Overflow, "64-bit overflow in " + std::to_string(a) + "*" +
                                  std::to_string(b));
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    fail(ErrorKind::Overflow, "64-bit overflow in " + std::to_string(a) + "+" +
                                  std::to_string(b));
  return r;
}

/// Signed distance of x to the nearest integer, in (-1/2, 1/2].
inline long double wrap_half(long double x) {
  long double f = x - std::floor(x);
  return f > 0.5L ? f - 1.0L : f;
}

} // namespace detail

struct ContinuedFraction {
  std::vector<std::int64_t> terms; // a_1, a_2, ...

  /// Value of the finite fraction [0; a_1, ..., a_D].
  double value() const {
    long double x = 0.0L;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it)
      x = 1.0L / (static_cast<long double>(*it) + x);
    return static_cast<double>(x);
  }
};

inline double cf_value(std::span<const std::int64_t> terms) {
  return ContinuedFraction{{terms.begin(), terms.end()}}.value();
}

/// Gauss-map expansion of theta. Throws RationalResolution when theta cannot be
/// told apart from a rational within `depth` terms.
inline ContinuedFraction cf_expand(double theta, int depth) {
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::Domain, "cf_expand: theta must lie in (0,1)");
  if (depth < 1 || depth > kMaxCfDepth)
    fail(ErrorKind::Domain, "cf_expand: depth must be in [1," +
                                std::to_string(kMaxCfDepth) + "]");
  ContinuedFraction cf;
  long double x = theta;
  for (int k = 0; k < depth; ++k) {
    if (x < kCfRemainderFloor)
      fail(ErrorKind::RationalResolution,
           "rational within resolution (remainder vanished at term " +
               std::to_string(k + 1) + ")");
    long double inv = 1.0L / x;
    long double a = std::floor(inv);
    if (a > kMaxCfTerm)
      fail(ErrorKind::RationalResolution,
           "rational within resolution (term " + std::to_string(k + 1) +
               " exceeds 1e9)");
    cf.terms.push_back(static_cast<std::int64_t>(a));
    x = inv - a;
  }
  return cf;
}

/// Convergents p_k/q_k for k = 1..n (index 0 holds k = 1).
struct Convergents {
  std::vector<std::int64_t> p;
  std::vector<std::int64_t> q;

  std::size_t size() const { return q.size(); }
};

inline Convergents best_approximants(std::span<const std::int64_t> terms) {
  Convergents out;
  std::int64_t p_prev2 = 1, p_prev = 0; // p_{-1}, p_0
  std::int64_t q_prev2 = 0, q_prev = 1; // q_{-1}, q_0
  for (std::int64_t a : terms) {
    if (a < 1)
      fail(ErrorKind::Domain, "continued fraction terms must be >= 1");
    std::int64_t p = detail::checked_add(detail::checked_mul(a, p_prev), p_prev2);
    std::int64_t q = detail::checked_add(detail::checked_mul(a, q_prev), q_prev2);
    out.p.push_back(p);
    out.q.push_back(q);
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;
  }
  return out;
}

inline Convergents best_approximants(double theta, int n) {
  auto cf = cf_expand(theta, n);
  return best_approximants(cf.terms);
}

struct GaussStep {
  double value = 0.0;
  bool terminated = false; // 1/theta was an integer at double precision
};

inline GaussStep gauss(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::Domain, "gauss: theta must lie in (0,1)");
  long double inv = 1.0L / static_cast<long double>(theta);
  long double frac = inv - std::floor(inv);
  GaussStep s;
  s.value = static_cast<double>(frac);
  s.terminated = frac < kCfRemainderFloor * inv || 1.0L - frac < kCfRemainderFloor * inv;
  if (s.terminated)
    s.value = 0.0;
  return s;
}

inline double r_prm(double theta) {
  if (!(theta >= 0.0 && theta < 1.0))
    fail(ErrorKind::Domain, "r_prm: theta must lie in [0,1)");
  if (theta < 0.5)
    return theta / (1.0 - theta);
  return 2.0 - 1.0 / theta;
}

/// Smallest m <= max_m with |r_prm^m(theta) - theta| < tol.
inline std::optional<int> r_prm_period(double theta, int max_m = 64,
                                       double tol = 1e-9) {
  double x = theta;
  for (int m = 1; m <= max_m; ++m) {
    x = r_prm(x);
    if (std::abs(x - theta) < tol)
      return m;
    if (x <= 0.0)
      return std::nullopt;
  }
  return std::nullopt;
}

inline std::optional<int> gauss_period(double theta, int max_p = 32,
                                       double tol = 1e-9) {
  double x = theta;
  for (int p = 1; p <= max_p; ++p) {
    auto s = gauss(x);
    if (s.terminated)
      return std::nullopt;
    x = s.value;
    if (std::abs(x - theta) < tol)
      return p;
  }
  return std::nullopt;
}

/// The renormalization period used by the commuting-pair fixed point: the
/// smallest even period of theta under the Gauss map.
inline std::optional<int> smallest_even_gauss_period(double theta,
                                                     int max_p = 32) {
  auto p = gauss_period(theta, max_p);
  if (!p)
    return std::nullopt;
  return (*p % 2 == 0) ? *p : 2 * *p;
}

/// Times q <= n at which {q theta} comes strictly closer to 0 than at every
/// earlier time. Ties keep the earlier time.
inline std::vector<std::int64_t> closest_returns_rotation(double theta,
                                                          std::int64_t n) {
  if (n < 1 || n > 1'000'000)
    fail(ErrorKind::Domain, "closest_returns_rotation: N must be in [1,1e6]");
  std::vector<std::int64_t> out;
  long double best = std::numeric_limits<long double>::infinity();
  const long double th = theta;
  for (std::int64_t j = 1; j <= n; ++j) {
    long double d = std::abs(detail::wrap_half(th * static_cast<long double>(j)));
    if (d < best) {
      best = d;
      out.push_back(j);
    }
  }
  return out;
}

enum class RotationType { Generic, Bounded, PrePeriodic, Periodic };

inline std::string_view type_name(RotationType t) {
  switch (t) {
  case RotationType::Generic: return "generic";
  case RotationType::Bounded: return "bounded";
  case RotationType::PrePeriodic: return "pre-periodic";
  case RotationType::Periodic: return "periodic";
  }
  return "?";
}

struct RotationClass {
  double theta = 0.0;
  RotationType type = RotationType::Generic;
  std::optional<int> gauss_period;     // when periodic within the depth
  std::optional<int> r_prm_period;
  std::optional<int> preperiod;        // offset where the period starts
};

namespace detail {

/// Smallest (offset, period) such that terms[k+period] == terms[k] for all
/// k >= offset, with at least two full periods observed.
inline std::optional<std::pair<int, int>>
eventual_period(std::span<const std::int64_t> t) {
  const int n = static_cast<int>(t.size());
  for (int off = 0; off < n; ++off) {
    for (int per = 1; off + 2 * per <= n; ++per) {
      bool ok = true;
      for (int k = off; k + per < n && ok; ++k)
        ok = t[k] == t[k + per];
      if (ok)
        return std::pair{off, per};
    }
  }
  return std::nullopt;
}

} // namespace detail

/// Classification from the first `depth` partial quotients. `bound` is the
/// largest term still considered "bounded type" at this truncation.
inline RotationClass classify(double theta, int depth = 24,
                              std::int64_t bound = 1000) {
  RotationClass rc;
  rc.theta = theta;
  auto cf = cf_expand(theta, depth);
  std::int64_t mx = 0;
  for (auto a : cf.terms)
    mx = std::max(mx, a);
  if (mx > bound)
    return rc;
  rc.type = RotationType::Bounded;
  // The tail of a double expansion is noise; only trust the first 2/3.
  std::span<const std::int64_t> trusted(cf.terms.data(), cf.terms.size() * 2 / 3);
  if (auto ep = detail::eventual_period(trusted)) {
    rc.preperiod = ep->first;
    rc.type = ep->first == 0 ? RotationType::Periodic : RotationType::PrePeriodic;
    if (ep->first == 0) {
      rc.gauss_period = ep->second;
      rc.r_prm_period = r_prm_period(theta);
    }
  }
  return rc;
}

/// A rotation number, with its exact partial quotients when it is of periodic
/// type.
struct RotationNumber {
  double value = 0.0;
  std::vector<std::int64_t> period; // empty: use the floating expansion

  static RotationNumber from_period(std::vector<std::int64_t> period_terms) {
    if (period_terms.empty())
      fail(ErrorKind::Domain, "empty continued fraction period");
    for (auto a : period_terms)
      if (a < 1)
        fail(ErrorKind::Domain, "continued fraction terms must be >= 1");
    RotationNumber r;
    r.period = std::move(period_terms);
    std::vector<std::int64_t> t;
    while (t.size() < 96)
      t.insert(t.end(), r.period.begin(), r.period.end());
    r.value = cf_value(t);
    return r;
  }

  static RotationNumber golden() { return from_period({1}); }
  static RotationNumber silver() { return from_period({2}); }
  static RotationNumber from_value(double v) {
    if (!(v > 0.0 && v < 1.0))
      fail(ErrorKind::Domain, "rotation number must lie in (0,1)");
    return RotationNumber{v, {}};
  }

  std::vector<std::int64_t> terms(int depth) const {
    if (period.empty())
      return cf_expand(value, depth).terms;
    std::vector<std::int64_t> t;
    t.reserve(depth);
    for (int k = 0; k < depth; ++k)
      t.push_back(period[static_cast<std::size_t>(k) % period.size()]);
    return t;
  }

  /// q_0 = 1, q_1, ..., q_depth.
  std::vector<std::int64_t> denominators(int depth) const {
    auto conv = best_approximants(terms(depth));
    std::vector<std::int64_t> q{1};
    q.insert(q.end(), conv.q.begin(), conv.q.end());
    return q;
  }
};

} // namespace hermanlab
