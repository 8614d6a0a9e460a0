#pragma once

// Critical commuting pairs sampled along the orbit of the critical point.
//
// Level n carries the pair (f^{q_n} on I_{n-1}, f^{q_{n-1}} on I_n). Orbit
// points are placed combinatorially: z_j sits where {j theta} sits for the
// rotation, in the coordinate -y_j / y_{q_{n-1}} with y_j the signed distance
// of j theta to the nearest integer. The normalization sends the critical
// point to 0 and f_+(0) = z_{q_{n-1}} to -1; it is affine for even n and
// anti-affine for odd n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "hermanlab/csv.hpp"
#include "hermanlab/error.hpp"
#include "hermanlab/ratmap.hpp"
#include "hermanlab/rotnum.hpp"

namespace hermanlab {

struct PairSample {
  double comb = 0.0;   // combinatorial coordinate
  cplx w;              // normalized position
  std::int64_t j = 0;  // orbit index
};

/// w = (z - 1) / scale, conjugated when `anti`.
struct PairNormalization {
  cplx scale{1.0, 0.0};
  bool anti = false;

  cplx apply(cplx z) const {
    const cplx w = (z - 1.0) / scale;
    return anti ? std::conj(w) : w;
  }
};

struct CommutingPairSample {
  int level = 0;
  std::int64_t q_prev = 0; // q_{n-1}: shift of f_+
  std::int64_t q_cur = 0;  // q_n: shift of f_-
  double r = 0.0;          // combinatorial position of f_-(0)
  cplx minus_endpoint;     // normalized f_-(0)
  cplx plus_endpoint;      // normalized f_+(0), equal to -1
  std::vector<PairSample> samples; // sorted by comb
  PairNormalization norm;
  RotationNumber theta;
  std::size_t orbit_length = 0;
};

namespace detail {

/// Signed distance of j theta to the nearest integer.
inline double rot_y(const RotationNumber &theta, std::int64_t j) {
  return static_cast<double>(
      wrap_half(static_cast<long double>(theta.value) * static_cast<long double>(j)));
}

inline constexpr double kCombSlack = 1e-12;

} // namespace detail

/// Orbit of the rigid rotation in the linear chart: z_j = 1 + y_j.
inline std::vector<cplx> rigid_rotation_orbit(const RotationNumber &theta, std::size_t n) {
  std::vector<cplx> z(n);
  for (std::size_t j = 0; j < n; ++j)
    z[j] = 1.0 + detail::rot_y(theta, static_cast<std::int64_t>(j));
  return z;
}

inline CommutingPairSample build_pair(const std::vector<cplx> &orbit,
                                      const RotationNumber &theta, int n) {
  if (n < 1)
    fail(ErrorKind::Domain, "level must be positive");
  auto q = theta.denominators(n + 1);
  const std::int64_t qa = q[static_cast<std::size_t>(n - 1)];
  const std::int64_t qb = q[static_cast<std::size_t>(n)];
  const std::int64_t qc = q[static_cast<std::size_t>(n + 1)];
  if (static_cast<std::int64_t>(orbit.size()) <= qc)
    fail(ErrorKind::InsufficientOrbit,
         "orbit length " + std::to_string(orbit.size()) + " does not exceed q_{n+1} = " +
             std::to_string(qc));
  const double ya = detail::rot_y(theta, qa);
  CommutingPairSample p;
  p.level = n;
  p.q_prev = qa;
  p.q_cur = qb;
  p.r = -detail::rot_y(theta, qb) / ya;
  p.theta = theta;
  p.orbit_length = orbit.size();
  p.norm = {1.0 - orbit[static_cast<std::size_t>(qa)], n % 2 == 1};
  if (std::abs(p.norm.scale) == 0.0)
    fail(ErrorKind::Degenerate, "f_+(0) coincides with the critical point");
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    const double comb = -detail::rot_y(theta, static_cast<std::int64_t>(j)) / ya;
    if (comb < -1.0 - detail::kCombSlack || comb > p.r + detail::kCombSlack)
      continue;
    p.samples.push_back({comb, p.norm.apply(orbit[j]), static_cast<std::int64_t>(j)});
  }
  if (p.samples.size() < 3)
    fail(ErrorKind::EmptySample, "fewer than three samples at level " + std::to_string(n));
  std::sort(p.samples.begin(), p.samples.end(),
            [](const PairSample &a, const PairSample &b) { return a.comb < b.comb; });
  p.plus_endpoint = p.norm.apply(orbit[static_cast<std::size_t>(qa)]);
  p.minus_endpoint = p.norm.apply(orbit[static_cast<std::size_t>(qb)]);
  return p;
}

/// Number of times f_- is applied after f_+ before the orbit of 0 crosses to
/// the other side: the partial quotient a_{n+1}.
inline int chi_of_pair(const CommutingPairSample &p) {
  const double ya = detail::rot_y(p.theta, p.q_prev);
  for (int k = 1; k <= 1'000'000; ++k) {
    const std::int64_t idx = p.q_prev + static_cast<std::int64_t>(k + 1) * p.q_cur;
    if (idx >= static_cast<std::int64_t>(p.orbit_length))
      fail(ErrorKind::Inconclusive, "orbit too short to decide chi");
    const double comb = -detail::rot_y(p.theta, idx) / ya;
    if (std::abs(comb) < 1e-12)
      fail(ErrorKind::Inconclusive, "orbit point on the boundary of I_+");
    if (comb > 0.0)
      return k;
  }
  fail(ErrorKind::Inconclusive, "chi exceeds search bound");
}

/// Pre-renormalization (f_-^chi f_+ , f_-) rescaled so that the new f_+(0) is -1.
/// The affine/anti-affine type of the normalization alternates.
inline CommutingPairSample renormalize_pair(const CommutingPairSample &p) {
  const int chi = chi_of_pair(p);
  const std::int64_t q_next = p.q_prev + static_cast<std::int64_t>(chi) * p.q_cur;
  if (q_next >= static_cast<std::int64_t>(p.orbit_length))
    fail(ErrorKind::InsufficientOrbit, "orbit too short for the next level");
  const double yb = detail::rot_y(p.theta, p.q_cur);
  const double r_next = -detail::rot_y(p.theta, q_next) / yb;
  const cplx m = p.minus_endpoint;
  if (std::abs(m) == 0.0)
    fail(ErrorKind::Degenerate, "f_-(0) at the critical point");
  CommutingPairSample out;
  out.level = p.level + 1;
  out.q_prev = p.q_cur;
  out.q_cur = q_next;
  out.r = r_next;
  out.theta = p.theta;
  out.orbit_length = p.orbit_length;
  out.norm.anti = !p.norm.anti;
  out.norm.scale = p.norm.anti ? -p.norm.scale * std::conj(m) : -p.norm.scale * m;
  auto rescale = [&](cplx w) { return std::conj(-w / m); };
  bool have_minus = false;
  for (const auto &s : p.samples) {
    const double comb = -s.comb / p.r;
    if (comb < -1.0 - detail::kCombSlack || comb > r_next + detail::kCombSlack)
      continue;
    out.samples.push_back({comb, rescale(s.w), s.j});
    if (s.j == q_next) {
      out.minus_endpoint = rescale(s.w);
      have_minus = true;
    }
  }
  if (!have_minus)
    fail(ErrorKind::EmptySample, "f_-(0) of the renormalized pair is not sampled");
  std::sort(out.samples.begin(), out.samples.end(),
            [](const PairSample &a, const PairSample &b) { return a.comb < b.comb; });
  out.plus_endpoint = rescale(m);
  return out;
}

inline std::vector<cplx> scaling_ratios(const std::vector<cplx> &orbit,
                                        const RotationNumber &theta, int n_max) {
  if (n_max < 1)
    fail(ErrorKind::Domain, "n_max must be positive");
  auto q = theta.denominators(n_max + 1);
  if (static_cast<std::int64_t>(orbit.size()) <= q.back())
    fail(ErrorKind::InsufficientOrbit, "orbit shorter than q_{n_max+1}");
  std::vector<cplx> s;
  for (int n = 1; n <= n_max; ++n)
    s.push_back((orbit[static_cast<std::size_t>(q[static_cast<std::size_t>(n + 1)])] - 1.0) /
                (orbit[static_cast<std::size_t>(q[static_cast<std::size_t>(n)])] - 1.0));
  return s;
}

inline std::vector<cplx> mu_estimate(const std::vector<cplx> &orbit,
                                     const RotationNumber &theta, int p, int n_max) {
  if (p < 1 || n_max < 1)
    fail(ErrorKind::Domain, "p and n_max must be positive");
  auto q = theta.denominators(n_max + p);
  if (static_cast<std::int64_t>(orbit.size()) <= q.back())
    fail(ErrorKind::InsufficientOrbit, "orbit shorter than q_{n_max+p}");
  std::vector<cplx> mu;
  for (int n = 1; n <= n_max; ++n)
    mu.push_back((orbit[static_cast<std::size_t>(q[static_cast<std::size_t>(n + p)])] - 1.0) /
                 (orbit[static_cast<std::size_t>(q[static_cast<std::size_t>(n)])] - 1.0));
  return mu;
}

struct PairDistance {
  double distance = 0.0;
  std::size_t matched = 0;
};

namespace detail {

/// Smallest gap from samples[i] to a neighbour.
inline double local_spacing(const std::vector<PairSample> &s, std::size_t i) {
  double g = INFINITY;
  if (i > 0)
    g = std::min(g, s[i].comb - s[i - 1].comb);
  if (i + 1 < s.size())
    g = std::min(g, s[i + 1].comb - s[i].comb);
  return g;
}

inline std::size_t nearest(const std::vector<PairSample> &s, double x) {
  auto it = std::lower_bound(s.begin(), s.end(), x,
                             [](const PairSample &a, double v) { return a.comb < v; });
  std::size_t i = static_cast<std::size_t>(it - s.begin());
  if (i == s.size())
    return i - 1;
  if (i > 0 && x - s[i - 1].comb <= s[i].comb - x)
    return i - 1;
  return i;
}

} // namespace detail

/// Sup of |w_A - w_B| over mutually nearest samples whose combinatorial gap is
/// below half the local spacing, plus the distance of the f_-(0) endpoints.
inline PairDistance pair_distance_report(const CommutingPairSample &a,
                                         const CommutingPairSample &b) {
  if (std::abs(a.r - b.r) > 1e-9)
    fail(ErrorKind::Incompatible, "pairs have different combinatorics");
  if (a.samples.empty() || b.samples.empty())
    fail(ErrorKind::EmptySample, "empty pair");
  PairDistance d;
  double sup = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const std::size_t k = detail::nearest(b.samples, a.samples[i].comb);
    if (detail::nearest(a.samples, b.samples[k].comb) != i)
      continue;
    const double gap = std::abs(a.samples[i].comb - b.samples[k].comb);
    const double spacing =
        std::min(detail::local_spacing(a.samples, i), detail::local_spacing(b.samples, k));
    if (!(gap < 0.5 * spacing))
      continue;
    sup = std::max(sup, std::abs(a.samples[i].w - b.samples[k].w));
    ++d.matched;
  }
  if (d.matched == 0)
    fail(ErrorKind::EmptySample, "no matched samples");
  d.distance = sup + std::abs(a.minus_endpoint - b.minus_endpoint);
  return d;
}

inline double pair_distance(const CommutingPairSample &a, const CommutingPairSample &b) {
  return pair_distance_report(a, b).distance;
}

struct RenormDiagnostics {
  std::vector<int> level;
  std::vector<std::int64_t> q;
  std::vector<cplx> s;
  std::vector<cplx> mu;
  std::vector<std::optional<double>> delta; // pair_distance(R^n, R^{n+p})
};

inline RenormDiagnostics renorm_diagnostics(const std::vector<cplx> &orbit,
                                            const RotationNumber &theta, int p, int n_max) {
  RenormDiagnostics d;
  auto q = theta.denominators(n_max + p + 1);
  d.s = scaling_ratios(orbit, theta, n_max);
  d.mu = mu_estimate(orbit, theta, p, n_max);
  for (int n = 1; n <= n_max; ++n) {
    d.level.push_back(n);
    d.q.push_back(q[static_cast<std::size_t>(n)]);
    std::optional<double> delta;
    try {
      delta = pair_distance(build_pair(orbit, theta, n), build_pair(orbit, theta, n + p));
    } catch (const Error &) {
    }
    d.delta.push_back(delta);
  }
  return d;
}

inline void write_diagnostics_csv(std::ostream &os, const RenormDiagnostics &d) {
  os << "n,q_n,re_s,im_s,re_mu,im_mu,delta\n";
  for (std::size_t i = 0; i < d.level.size(); ++i)
    csv::row(os, csv::num(d.level[i]), csv::num(static_cast<long long>(d.q[i])),
             csv::num(d.s[i].real()), csv::num(d.s[i].imag()), csv::num(d.mu[i].real()),
             csv::num(d.mu[i].imag()), d.delta[i] ? csv::num(*d.delta[i]) : std::string{});
}

} // namespace hermanlab
