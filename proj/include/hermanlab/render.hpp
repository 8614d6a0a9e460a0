#pragma once

// Escape/attraction-time images of the dynamical and parameter planes of F_c,
// external rays by inverse iteration in Boettcher position, and a zoom probe
// comparing parameter images at successive scales.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hermanlab/csv.hpp"
#include "hermanlab/error.hpp"
#include "hermanlab/ratmap.hpp"

namespace hermanlab {

inline constexpr int kMaxSide = 16384;

struct ViewPort {
  cplx center{0.0, 0.0};
  double width = 4.0;
  int w = 512;
  int h = 512;

  double pixel() const { return width / w; }

  /// Pixel centre; row 0 is the top edge.
  cplx at(int i, int j) const {
    const double p = pixel();
    return {center.real() + (i + 0.5 - 0.5 * w) * p, center.imag() - (j + 0.5 - 0.5 * h) * p};
  }
};

struct RenderConfig {
  int max_iter = 500;
  double r_zero = 1e-3;
  double r_inf = 1e3;
  int palette = 0;            // 0: blue/gold, 1: grey
  int overlay = 0;            // orbit points of 1 drawn on dynamical images
  std::size_t pixel_budget = std::size_t{1} << 26;
  int threads = 0;            // 0: HERMANLAB_THREADS or hardware concurrency
};

enum class PixelClass : std::uint8_t { Zero = 0, Infinity = 1, Neither = 2 };

struct Image {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> rgb;
  std::vector<PixelClass> cls;
  std::vector<float> smooth; // smoothed capture time, -1 for Neither

  std::size_t count(PixelClass c) const {
    return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c));
  }
  PixelClass class_at(int i, int j) const {
    return cls[static_cast<std::size_t>(j) * w + i];
  }
};

namespace detail {

inline void check_view(const ViewPort &vp, const RenderConfig &cfg) {
  if (vp.w < 1 || vp.h < 1 || vp.w > kMaxSide || vp.h > kMaxSide)
    fail(ErrorKind::Domain, "image sides must lie in [1,16384]");
  if (!(vp.width > 0.0) || !std::isfinite(vp.width))
    fail(ErrorKind::Domain, "viewport width must be positive");
  if (static_cast<std::size_t>(vp.w) * static_cast<std::size_t>(vp.h) > cfg.pixel_budget)
    fail(ErrorKind::Budget, "pixel budget exceeded");
  if (!(cfg.r_zero > 0.0 && cfg.r_zero < 1.0 && cfg.r_inf > 1.0))
    fail(ErrorKind::Domain, "capture radii must satisfy 0 < r_zero < 1 < r_inf");
  if (cfg.max_iter < 0)
    fail(ErrorKind::Domain, "max_iter must be nonnegative");
}

inline int worker_count(const RenderConfig &cfg, int rows) {
  int n = cfg.threads;
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char *env = std::getenv("HERMANLAB_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0)
        n = std::min(n > 0 ? n : cap, cap);
    }
  }
  return std::clamp(n, 1, std::max(rows, 1));
}

/// Runs body(row) for every row on a pool of workers.
template <class Body> void parallel_rows(int rows, int workers, Body &&body) {
  std::atomic<int> next{0};
  auto run = [&] {
    for (int r = next++; r < rows; r = next++)
      body(r);
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < workers; ++k)
    pool.emplace_back(run);
  run();
  for (auto &t : pool)
    t.join();
}

struct Capture {
  PixelClass cls = PixelClass::Neither;
  float smooth = -1.0f;
};

/// First capture of the orbit of z under z -> mult * F_1(z).
inline Capture capture(const MapParams &unit, cplx mult, cplx z, const RenderConfig &cfg) {
  const double lz = std::log(cfg.r_zero), li = std::log(cfg.r_inf);
  const double z2 = cfg.r_zero * cfg.r_zero, i2 = cfg.r_inf * cfg.r_inf;
  const double d0 = unit.crit.d0, di = unit.crit.dinf;
  const double mr = mult.real(), mi = mult.imag();
  double zr = z.real(), zi = z.imag();
  for (int k = 0; k <= cfg.max_iter; ++k) {
    const double r2 = zr * zr + zi * zi;
    if (r2 < z2) {
      const double f = r2 > 0.0 ? std::log(0.5 * std::log(r2) / lz) / std::log(d0) : 1.0;
      return {PixelClass::Zero, static_cast<float>(std::max(k - std::min(f, 1.0), 0.0))};
    }
    if (!(r2 <= i2)) {
      const double f = std::isfinite(r2) ? std::log(0.5 * std::log(r2) / li) / std::log(di) : 1.0;
      return {PixelClass::Infinity, static_cast<float>(std::max(k - std::min(f, 1.0), 0.0))};
    }
    if (k == cfg.max_iter)
      break;
    double fr, fi;
    eval_F_fast(unit, zr, zi, fr, fi);
    zr = mr * fr - mi * fi;
    zi = mr * fi + mi * fr;
  }
  return {};
}

inline void shade(const Capture &c, int palette, std::uint8_t *px) {
  if (c.cls == PixelClass::Neither) {
    px[0] = 255;
    px[1] = 0;
    px[2] = 0;
    return;
  }
  const double v = 0.5 + 0.5 * std::cos(0.35 * static_cast<double>(c.smooth));
  const double b = 0.25 + 0.75 * v;
  double r, g, bl;
  if (palette == 1) {
    r = g = bl = c.cls == PixelClass::Zero ? 0.15 + 0.45 * v : 0.55 + 0.45 * v;
  } else if (c.cls == PixelClass::Zero) {
    r = 0.10 * b;
    g = 0.35 * b;
    bl = 0.95 * b;
  } else {
    r = 0.95 * b;
    g = 0.80 * b;
    bl = 0.25 * b;
  }
  px[0] = static_cast<std::uint8_t>(std::lround(255.0 * r));
  px[1] = static_cast<std::uint8_t>(std::lround(255.0 * g));
  px[2] = static_cast<std::uint8_t>(std::lround(255.0 * bl));
}

template <class PointFn>
Image render_with(const ViewPort &vp, const RenderConfig &cfg, PointFn &&point) {
  check_view(vp, cfg);
  Image img;
  img.w = vp.w;
  img.h = vp.h;
  const std::size_t n = static_cast<std::size_t>(vp.w) * static_cast<std::size_t>(vp.h);
  img.rgb.assign(3 * n, 0);
  img.cls.assign(n, PixelClass::Neither);
  img.smooth.assign(n, -1.0f);
  parallel_rows(vp.h, worker_count(cfg, vp.h), [&](int j) {
    for (int i = 0; i < vp.w; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * vp.w + i;
      const Capture c = point(vp.at(i, j));
      img.cls[idx] = c.cls;
      img.smooth[idx] = c.smooth;
      shade(c, cfg.palette, &img.rgb[3 * idx]);
    }
  });
  return img;
}

} // namespace detail

inline Image render_dynamical(const MapParams &m, const ViewPort &vp, const RenderConfig &cfg) {
  const MapParams unit = m.with_c(1.0);
  Image img = detail::render_with(vp, cfg, [&](cplx z) {
    return detail::capture(unit, m.c, z, cfg);
  });
  if (cfg.overlay > 0) {
    auto o = compute_orbit(m, static_cast<std::size_t>(cfg.overlay));
    for (cplx z : o.z) {
      const double p = vp.pixel();
      const auto i = static_cast<long>(std::floor((z.real() - vp.center.real()) / p + 0.5 * vp.w));
      const auto j = static_cast<long>(std::floor((vp.center.imag() - z.imag()) / p + 0.5 * vp.h));
      if (i < 0 || j < 0 || i >= vp.w || j >= vp.h)
        continue;
      auto *px = &img.rgb[3 * (static_cast<std::size_t>(j) * vp.w + static_cast<std::size_t>(i))];
      px[0] = px[1] = px[2] = 255;
    }
  }
  return img;
}

/// Each pixel is a parameter c, classified by the fate of the orbit of 1.
inline Image render_parameter(Criticality crit, const ViewPort &vp, const RenderConfig &cfg) {
  const MapParams unit(crit, 1.0);
  return detail::render_with(vp, cfg, [&](cplx c) {
    if (c == cplx{0.0, 0.0}) // F_0 is constant 0
      return detail::Capture{PixelClass::Zero, 0.0f};
    return detail::capture(unit, c, c, cfg); // z_1 = F_c(1) = c
  });
}

inline void write_ppm(std::ostream &os, const Image &img) {
  os << "P6\n" << img.w << ' ' << img.h << "\n255\n";
  os.write(reinterpret_cast<const char *>(img.rgb.data()),
           static_cast<std::streamsize>(img.rgb.size()));
}

inline void write_ppm(const std::string &path, const Image &img) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    fail(ErrorKind::Io, "cannot open " + path + " for writing");
  write_ppm(f, img);
  if (!f)
    fail(ErrorKind::Io, "write failed for " + path);
}

/// 64-bit FNV-1a of the PPM bytes.
inline std::uint64_t ppm_hash(const Image &img) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string &s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  mix("P6\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n");
  for (std::uint8_t b : img.rgb) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// External rays

enum class Basin { Zero, Infinity };

struct RayTrace {
  Basin basin = Basin::Zero;
  double angle = 0.0;
  std::vector<cplx> points;              // points[k] at Boettcher radius rho^(d^-k)
  std::optional<int> precritical_step;   // tracing stopped at this step
};

struct RayConfig {
  double rho = 1e-3;      // Boettcher radius of points[0]
  int substeps = 16;      // continuation steps between consecutive points
  int newton_steps = 60;
  double tol = 1e-13;
};

namespace detail {

/// The map in the chosen basin's chart: F near 0, psi(w) = 1/F(1/w) near oo.
struct BasinMap {
  const MapParams &m;
  Basin basin;

  FEval operator()(cplx x) const {
    if (basin == Basin::Zero)
      return eval_F_raw(m, x);
    const cplx z = 1.0 / x;
    const auto e = eval_F_raw(m, z);
    return {1.0 / e.f, e.df / (e.f * e.f * x * x)};
  }
};

/// f^k(x) and (f^k)'(x).
inline FEval iterate(const BasinMap &f, cplx x, int k) {
  cplx d = 1.0;
  for (int i = 0; i < k; ++i) {
    const auto e = f(x);
    d *= e.df;
    x = e.f;
  }
  return {x, d};
}

inline double frac01(double t) { return t - std::floor(t); }

} // namespace detail

/// Inverse iteration along the ray of angle t: points[k] solves
/// f^k(z) = B^{-1}(rho e^{2 pi i d^k t}) and is continued from points[k-1].
inline RayTrace trace_ray(const MapParams &m, Basin basin, double t, int depth,
                          const RayConfig &rc = {}) {
  if (depth < 0 || depth > 40)
    fail(ErrorKind::Domain, "depth must lie in [0,40]");
  if (!(rc.rho > 0.0 && rc.rho < 1.0))
    fail(ErrorKind::Domain, "Boettcher radius must lie in (0,1)");
  verify_critical_structure(m);
  const int d = basin == Basin::Zero ? m.crit.d0 : m.crit.dinf;
  const cplx a = leading_coefficient(m, basin == Basin::Infinity);
  const cplx kappa = std::pow(a, 1.0 / (d - 1)); // B(x) ~ kappa x
  const detail::BasinMap f{m, basin};
  auto seed = [&](double angle, double r) {
    return std::polar(r, 2.0 * std::numbers::pi * detail::frac01(angle)) / kappa;
  };
  RayTrace ray;
  ray.basin = basin;
  ray.angle = detail::frac01(t);
  std::vector<cplx> chart{seed(ray.angle, rc.rho)};
  double angle_k = ray.angle;
  for (int k = 1; k <= depth; ++k) {
    angle_k = detail::frac01(angle_k * d);
    const cplx target = seed(angle_k, rc.rho);
    cplx x = chart.back();
    const cplx start = detail::iterate(f, x, k).f;
    const cplx l0 = std::log(start);
    cplx l1 = std::log(target);
    const double turn = 2.0 * std::numbers::pi;
    l1 += cplx{0.0, turn * std::round((l0.imag() - l1.imag()) / turn)};
    bool hit = false;
    double sig = 0.0;
    double h = 1.0 / rc.substeps;
    while (sig < 1.0 && !hit) {
      const double next = std::min(1.0, sig + h);
      const cplx goal = std::exp((1.0 - next) * l0 + next * l1);
      cplx y = x;
      bool ok = false;
      for (int it = 0; it < rc.newton_steps; ++it) {
        const auto e = detail::iterate(f, y, k);
        const cplx res = e.f - goal;
        if (!(std::abs(e.df) > 1e-300) || !std::isfinite(std::abs(e.df))) {
          hit = true;
          break;
        }
        const cplx dy = res / e.df;
        y -= dy;
        if (std::abs(res) <= rc.tol * std::abs(goal) ||
            std::abs(dy) <= 1e-15 * std::max(std::abs(y), 1e-300)) {
          ok = true;
          break;
        }
      }
      if (hit)
        break;
      if (ok) {
        x = y;
        sig = next;
        h = std::min(2.0 * h, 1.0 / rc.substeps);
      } else {
        h *= 0.5;
        if (h < 1e-7)
          fail(ErrorKind::BranchAmbiguity,
               "inverse branch not resolved at step " + std::to_string(k));
      }
    }
    if (hit) {
      ray.precritical_step = k;
      break;
    }
    chart.push_back(x);
  }
  for (cplx x : chart)
    ray.points.push_back(basin == Basin::Zero ? x : 1.0 / x);
  return ray;
}

// ---------------------------------------------------------------------------
// Zoom probe

struct ZoomPair {
  double scale_i = 0.0;
  double scale_j = 0.0;
  cplx lambda;
  double score = 0.0;
};

struct ZoomOptions {
  int pixels = 128;
  int phases = 32;
  std::vector<double> moduli; // empty: a grid around the scale ratio
};

namespace detail {

inline std::vector<double> luminance(const Image &img) {
  std::vector<double> y(static_cast<std::size_t>(img.w) * img.h);
  for (std::size_t k = 0; k < y.size(); ++k)
    y[k] = 0.299 * img.rgb[3 * k] + 0.587 * img.rgb[3 * k + 1] + 0.114 * img.rgb[3 * k + 2];
  return y;
}

/// Normalized cross-correlation of A(delta) against B(lambda delta), offsets
/// measured from the common centre, nearest-neighbour sampling of B.
inline double ncc(const std::vector<double> &A, double wa, const std::vector<double> &B,
                  double wb, int n, cplx lambda) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  std::size_t cnt = 0;
  const double pa = wa / n, pb = wb / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const cplx delta{(i + 0.5 - 0.5 * n) * pa, -(j + 0.5 - 0.5 * n) * pa};
      const cplx e = lambda * delta;
      const long bi = std::lround(std::floor(e.real() / pb + 0.5 * n));
      const long bj = std::lround(std::floor(-e.imag() / pb + 0.5 * n));
      if (bi < 0 || bj < 0 || bi >= n || bj >= n)
        continue;
      const double x = A[static_cast<std::size_t>(j) * n + i];
      const double y = B[static_cast<std::size_t>(bj) * n + static_cast<std::size_t>(bi)];
      sa += x;
      sb += y;
      saa += x * x;
      sbb += y * y;
      sab += x * y;
      ++cnt;
    }
  if (cnt < static_cast<std::size_t>(n) * n / 4)
    return -1.0;
  const double c = static_cast<double>(cnt);
  const double va = saa - sa * sa / c, vb = sbb - sb * sb / c;
  if (va <= 1e-12 * c || vb <= 1e-12 * c)
    return (va <= 1e-12 * c && vb <= 1e-12 * c && std::abs(sa / c - sb / c) < 1e-9) ? 1.0 : 0.0;
  return std::clamp((sab - sa * sb / c) / std::sqrt(va * vb), -1.0, 1.0);
}

} // namespace detail

inline std::vector<ZoomPair> zoom_probe(Criticality crit, cplx c_star,
                                        const std::vector<double> &scales,
                                        const RenderConfig &cfg, const ZoomOptions &opt = {}) {
  if (scales.size() < 2)
    fail(ErrorKind::Domain, "zoom probe needs at least two scales");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0))
      fail(ErrorKind::Domain, "scales must be positive");
    if (i > 0 && scales[i] > scales[i - 1])
      fail(ErrorKind::Domain, "scales must be non-increasing");
  }
  if (opt.pixels < 8 || opt.phases < 1)
    fail(ErrorKind::Domain, "zoom probe needs >= 8 pixels and >= 1 phase");
  std::vector<std::vector<double>> lum;
  for (double s : scales)
    lum.push_back(detail::luminance(
        render_parameter(crit, ViewPort{c_star, s, opt.pixels, opt.pixels}, cfg)));
  std::vector<ZoomPair> out;
  for (std::size_t i = 0; i + 1 < scales.size(); ++i) {
    const double ratio = scales[i + 1] / scales[i];
    std::vector<cplx> cands{cplx{ratio, 0.0}};
    std::vector<double> mods = opt.moduli;
    if (mods.empty())
      for (int k = -8; k <= 8; ++k)
        mods.push_back(ratio * std::pow(2.0, k / 8.0));
    for (double mo : mods)
      for (int ph = 0; ph < opt.phases; ++ph)
        cands.push_back(std::polar(mo, 2.0 * std::numbers::pi * ph / opt.phases));
    ZoomPair best{scales[i], scales[i + 1], cands[0], -2.0};
    for (cplx l : cands) {
      const double sc = detail::ncc(lum[i], scales[i], lum[i + 1], scales[i + 1], opt.pixels, l);
      if (sc > best.score + 1e-12) {
        best.lambda = l;
        best.score = sc;
      }
    }
    out.push_back(best);
  }
  return out;
}

inline void write_zoom_csv(std::ostream &os, const std::vector<ZoomPair> &pairs) {
  os << "scale_i,scale_j,best_lambda_re,best_lambda_im,score\n";
  for (const auto &p : pairs)
    csv::row(os, csv::num(p.scale_i), csv::num(p.scale_j), csv::num(p.lambda.real()),
             csv::num(p.lambda.imag()), csv::num(p.score));
}

} // namespace hermanlab
