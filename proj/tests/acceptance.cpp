// Standalone acceptance run: one line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "hermanlab/cprenorm.hpp"
#include "hermanlab/ratmap.hpp"
#include "hermanlab/render.hpp"
#include "hermanlab/rotnum.hpp"
#include "hermanlab/sector.hpp"

using namespace hermanlab;

namespace {

const cplx kHerman22{-0.755700, -0.654917};
const cplx kHerman32{-1.144208, -0.964454};
const Criticality k22{2, 2}, k32{3, 2};

int failures = 0;

enum class Verdict { Pass, Fail, Warn };

struct Outcome {
  bool ok = false;
  std::string detail;
};

void report(int id, const char *name, const Outcome &o, bool advisory = false) {
  const Verdict v = o.ok ? Verdict::Pass : advisory ? Verdict::Warn : Verdict::Fail;
  const char *tag = v == Verdict::Pass ? "PASS" : v == Verdict::Warn ? "WARN" : "FAIL";
  if (v == Verdict::Fail)
    ++failures;
  std::printf("[%s] %2d %s: %s\n", tag, id, name, o.detail.c_str());
  std::fflush(stdout);
}

template <class Fn> void criterion(int id, const char *name, Fn &&fn, bool advisory = false) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const Error &e) {
    o = {false, std::string("error ") + std::string(kind_name(e.kind())) + ": " + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, " (%.2fs)", secs);
  o.detail += buf;
  report(id, name, o, advisory);
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double slope_of_log(const std::vector<double> &y) {
  const double n = static_cast<double>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double x = static_cast<double>(k), l = std::log(y[k]);
    sx += x;
    sy += l;
    sxx += x * x;
    sxy += x * l;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool strictly_decreasing(const std::vector<double> &v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1]))
      return false;
  return true;
}

const std::vector<cplx> &reference_orbit() {
  static const auto o = compute_orbit(MapParams(k32, kHerman32), 1597);
  return o.z;
}

// ---------------------------------------------------------------------------

Outcome golden_r_prm() {
  const double g = golden_mean();
  const double err = std::abs(r_prm(r_prm(g)) - g);
  return {err < 1e-12, fmt("|r_prm^2(g) - g| = %.3g", err)};
}

Outcome golden_eigenvalue() {
  const auto s = anti_renorm_matrix(golden_mean());
  const double t_ref = (3.0 + std::sqrt(5.0)) / 2.0;
  const double et = std::abs(s.t - t_ref);
  TranslationPair p = s.pair;
  for (std::size_t k = 0; k < s.steps.size(); ++k)
    p = prime_renorm_pair(p).pair;
  const double ep = std::max(std::abs(-p.u + s.pair.u / s.t), std::abs(p.v - s.pair.v / s.t));
  return {et < 1e-10 && ep < 1e-10, fmt("|t - t*| = %.3g, pair error = %.3g", et, ep)};
}

Outcome power_triples() {
  const auto s = anti_renorm_matrix(golden_mean());
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> lvl(-3, 3), coef(0, 6), drop(1, 4);
  auto rnd = [&] { return PowerTriple{lvl(rng), coef(rng), coef(rng)}; };
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto p = rnd(), q = rnd();
    const auto low = detail::lower_to(p, p.n - drop(rng), s.matrix);
    const double ip = iota(p, s), iq = iota(q, s);
    const double e_class = std::abs(iota(low, s) - ip) / (1.0 + ip);
    const double e_add = std::abs(iota(pt_add(p, q, s), s) - (ip + iq)) / (1.0 + ip + iq);
    worst = std::max({worst, e_class, e_add});
    const int c = pt_cmp(p, q, s);
    const bool order = std::abs(ip - iq) < 1e-12 * (1.0 + ip) ? c == 0 : c == (ip > iq ? 1 : -1);
    // T^P = T^Q on a test point iff the normalized triples agree.
    const auto other = (trial % 2 == 0) ? low : q;
    const double x = 0.3;
    const bool same_map =
        std::abs(cascade_translate(p, x, s) - cascade_translate(other, x, s)) < 1e-10;
    const bool same_class = pt_normalize(p, s) == pt_normalize(other, s);
    if (e_class >= 1e-10 || e_add >= 1e-10 || !order || same_map != same_class ||
        !(pt_normalize(low, s) == pt_normalize(p, s)))
      ++bad;
  }
  return {bad == 0, fmt("10000 trials, %d violations, worst relative error %.3g", bad, worst)};
}

Outcome proper_discontinuity() {
  const auto s = anti_renorm_matrix(golden_mean());
  const auto pts = enumerate_window(s, {1e4, 10.0, 20'000'000});
  double m01 = INFINITY, m001 = INFINITY;
  std::size_t n001 = 0;
  for (const auto &cp : pts) {
    if (cp.p.is_zero())
      continue;
    if (cp.iota <= 0.1)
      m01 = std::min(m01, std::abs(cp.b));
    if (cp.iota <= 0.01) {
      m001 = std::min(m001, std::abs(cp.b));
      ++n001;
    }
  }
  return {n001 > 0 && m001 > m01,
          fmt("%zu points; min|b| iota<=0.01: %.6g, iota<=0.1: %.6g", pts.size(), m001, m01)};
}

Outcome dominant_witnesses() {
  const auto s = anti_renorm_matrix(golden_mean());
  const auto all = dominant_points(s, {});
  const std::vector<CascadePoint> dom(all.begin() + 1, all.end());
  int found = 0;
  double worst = 0.0;
  std::string missing;
  for (std::size_t i = 2; i < 12; ++i) {
    if (i + 1 >= dom.size()) {
      missing += fmt(" %zu(window)", i);
      continue;
    }
    if (auto w = dominant_push_witness(dom, i, s, 1e-9)) {
      ++found;
      worst = std::max(worst, w->error);
    } else {
      missing += fmt(" %zu", i);
    }
  }
  return {found == 10, fmt("%d/10 gaps pushed, worst endpoint error %.3g%s%s", found, worst,
                          missing.empty() ? "" : ", missing", missing.c_str())};
}

Outcome bisection22() {
  BisectionConfig cfg;
  cfg.iterations = 200'000;
  const auto r = find_c_bisection(k22, golden_mean(), 1e-6, cfg);
  const double dmod = std::abs(std::abs(r.c) - std::abs(kHerman22));
  const double darg = std::abs(std::arg(r.c) - std::arg(kHerman22));
  return {dmod < 1e-4 && darg < 1e-4,
          fmt("c = %.7f%+.7fi, |d mod| = %.2g, |d arg| = %.2g", r.c.real(), r.c.imag(), dmod,
              darg)};
}

Outcome centers32() {
  const auto th = RotationNumber::golden();
  const auto scan = locate_herman_seed(k32, th);
  const auto seq = center_sequence(k32, th, 12, scan);
  if (seq.error)
    return {false, std::string("continuation stopped: ") + seq.error->what()};
  std::vector<cplx> cs;
  int checked = 0;
  for (const auto &c : seq.centers) {
    cs.push_back(c.c);
    if (center_check(MapParams(k32, c.c), th, c.n).ok)
      ++checked;
  }
  const auto ratios = step_ratios(cs);
  // Geometric decay over the tail: every step ratio below one and a negative trend.
  std::vector<double> steps;
  for (std::size_t k = 4; k < cs.size(); ++k)
    steps.push_back(std::abs(cs[k] - cs[k - 1]));
  const auto tail = std::vector<double>(ratios.begin() + 3, ratios.end());
  const double rmax = *std::max_element(tail.begin(), tail.end());
  const double slope = slope_of_log(steps);
  const cplx lim = extrapolate_limit(cs);
  const double dist = std::abs(lim - kHerman32);
  const bool ok = seq.centers.back().q == 233 && checked == static_cast<int>(cs.size()) &&
                  rmax < 1.0 && slope < 0.0 && dist < 1e-3;
  return {ok, fmt("q up to %lld, %d/%zu centers checked, max tail ratio %.3f, log-step slope "
                  "%.3f, limit %.7f%+.7fi at distance %.2g",
                  static_cast<long long>(seq.centers.back().q), checked, cs.size(), rmax, slope,
                  lim.real(), lim.imag(), dist)};
}

Outcome fibonacci_returns() {
  const auto r = combinatorial_rotation_check(MapParams(k32, kHerman32), RotationNumber::golden(), 8);
  std::string obs;
  for (auto q : r.observed)
    obs += (obs.empty() ? "" : ",") + std::to_string(q);
  return {r.ok && r.observed == std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21, 34},
          "returns " + obs};
}

Outcome renorm_convergence() {
  const auto d = renorm_diagnostics(reference_orbit(), RotationNumber::golden(), 2, 8);
  std::vector<double> delta;
  std::string list;
  for (int n = 2; n <= 8; ++n) {
    const auto &x = d.delta[static_cast<std::size_t>(n - 1)];
    if (!x)
      return {false, fmt("delta_%d unavailable", n)};
    delta.push_back(*x);
    list += fmt("%s%.3g", list.empty() ? "" : ",", *x);
  }
  const double slope = slope_of_log(delta);
  return {strictly_decreasing(delta) && slope < -0.2,
          fmt("delta_2..8 = %s, log slope %.3f", list.c_str(), slope)};
}

Outcome mu_cauchy() {
  const auto mu = mu_estimate(reference_orbit(), RotationNumber::golden(), 2, 10);
  double mmax = 0.0;
  std::vector<double> diffs;
  for (int n = 2; n <= 8; ++n) {
    const cplx a = mu[static_cast<std::size_t>(n - 1)], b = mu[static_cast<std::size_t>(n + 1)];
    mmax = std::max({mmax, std::abs(a), std::abs(b)});
    diffs.push_back(std::abs(b - a));
  }
  std::string list;
  for (double x : diffs)
    list += fmt("%s%.3g", list.empty() ? "" : ",", x);
  const cplx last = mu[9];
  return {mmax < 1.0 && strictly_decreasing(diffs),
          fmt("max|mu| = %.4f, |mu_{n+2}-mu_n| = %s, mu_10 = %.5f%+.5fi", mmax, list.c_str(),
              last.real(), last.imag())};
}

// Sector run ends against the rigid commuting pairs.
Outcome rigid_vs_sector() {
  double worst = 0.0;
  int levels = 0;
  std::string why;
  for (const auto &th : {RotationNumber::golden(), RotationNumber::silver()}) {
    struct Run {
      TranslationPair end;
      int length;
    };
    std::vector<Run> runs;
    TranslationPair p{th.value, 1.0 - th.value};
    std::optional<Branch> last;
    for (int k = 0; k < 80 && runs.size() < 16; ++k) {
      auto st = prime_renorm_pair(p);
      if (last && *last == st.branch) {
        runs.back().end = st.pair;
        ++runs.back().length;
      } else {
        runs.push_back({st.pair, 1});
      }
      last = st.branch;
      p = st.pair;
    }
    runs.pop_back(); // may be cut short
    const auto orbit = rigid_rotation_orbit(th, 200000);
    std::size_t k0 = 0;
    for (int n = (th.terms(1)[0] == 1 ? 2 : 1); n <= 12; ++n) {
      const auto pair = build_pair(orbit, th, n);
      const double yb = std::abs(detail::rot_y(th, pair.q_prev));
      const double ya = std::abs(detail::rot_y(th, pair.q_cur));
      std::size_t k = k0;
      while (k < runs.size() &&
             std::max(std::abs(std::max(runs[k].end.u, runs[k].end.v) - yb),
                      std::abs(std::min(runs[k].end.u, runs[k].end.v) - ya)) > 1e-10)
        ++k;
      if (k + 1 >= runs.size()) {
        why += fmt(" no run end for level %d", n);
        break;
      }
      const auto &e = runs[k].end;
      worst = std::max(worst, std::abs(std::min(e.u, e.v) / std::max(e.u, e.v) - pair.r));
      if (chi_of_pair(pair) != runs[k + 1].length)
        why += fmt(" chi mismatch at level %d", n);
      if (n < 12) {
        const double dist = pair_distance(renormalize_pair(pair), build_pair(orbit, th, n + 1));
        worst = std::max(worst, dist);
      }
      k0 = k + 1;
      ++levels;
    }
  }
  return {why.empty() && worst < 1e-10,
          fmt("%d levels (golden, silver), worst deviation %.3g%s", levels, worst, why.c_str())};
}

std::string read_golden(const std::string &path) {
  std::ifstream in(path);
  std::string s;
  in >> s;
  return s;
}

Outcome render_golden() {
  const MapParams m(k32, kHerman32);
  const ViewPort vp{{0.0, 0.0}, 6.0, 512, 512};
  RenderConfig cfg;
  cfg.max_iter = 2000;
  const auto a = render_dynamical(m, vp, cfg);
  const auto b = render_dynamical(m, vp, cfg);
  const bool same = a.rgb == b.rgb && a.cls == b.cls;
  const std::uint64_t h = ppm_hash(a);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  const std::string want = read_golden(HERMANLAB_GOLDEN_DIR "/julia_32.fnv");
  const std::size_t neither = a.count(PixelClass::Neither);
  return {same && neither > 0 && want == hex,
          fmt("repeat %s, neither pixels %zu, hash %s vs stored %s", same ? "identical" : "DIFFERS",
              neither, hex, want.empty() ? "(missing)" : want.c_str())};
}

Outcome zoom_stability() {
  RenderConfig cfg;
  cfg.max_iter = 2000;
  ZoomOptions opt;
  opt.pixels = 96;
  const auto pairs = zoom_probe(k32, kHerman32, {0.2, 0.02358, 0.00278, 0.000328}, cfg, opt);
  double lo = INFINITY, hi = 0.0;
  std::string list;
  for (const auto &p : pairs) {
    const double mod = std::abs(p.lambda);
    lo = std::min(lo, mod);
    hi = std::max(hi, mod);
    list += fmt("%s%.4g(score %.2f)", list.empty() ? "" : ",", std::abs(p.lambda), p.score);
  }
  const double spread = hi / lo - 1.0;
  return {spread < 0.1, fmt("|lambda| = %s, relative spread %.3f", list.c_str(), spread)};
}

} // namespace

int main() {
  criterion(1, "golden r_prm periodicity", golden_r_prm);
  criterion(2, "anti-renormalization eigenvalue", golden_eigenvalue);
  criterion(3, "power-triple algebra", power_triples);
  criterion(4, "proper discontinuity window", proper_discontinuity);
  criterion(5, "dominant-push witnesses", dominant_witnesses);
  criterion(6, "(2,2) Herman parameter by bisection", bisection22);
  criterion(7, "(3,2) Herman parameter by centers", centers32);
  criterion(8, "Fibonacci closest returns", fibonacci_returns);
  criterion(9, "renormalization convergence", renorm_convergence);
  criterion(10, "self-similarity factor", mu_cauchy);
  criterion(11, "rigid rotation vs sector renormalization", rigid_vs_sector);
  criterion(12, "render determinism and golden hash", render_golden);
  criterion(13, "zoom probe stability", zoom_stability, true);
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
