#pragma once

// Command-line front end. Tables go to stdout (or --out), diagnostics to
// stderr. Exit codes: 0 success, 1 numerical or I/O failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hermanlab/cprenorm.hpp"
#include "hermanlab/ratmap.hpp"
#include "hermanlab/render.hpp"
#include "hermanlab/rotnum.hpp"
#include "hermanlab/sector.hpp"

namespace hermanlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// golden | silver | decimal in (0,1) | cf:a1,a2,... (read as a periodic tail).
inline RotationNumber parse_theta(const std::string &s) {
  if (s == "golden")
    return RotationNumber::golden();
  if (s == "silver")
    return RotationNumber::silver();
  if (s.rfind("cf:", 0) == 0) {
    std::vector<std::int64_t> terms;
    std::stringstream ss(s.substr(3));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      const long long a = std::stoll(tok, &pos);
      if (pos != tok.size() || a < 1)
        throw CLI::ValidationError("--theta", "bad continued fraction term '" + tok + "'");
      terms.push_back(a);
    }
    if (terms.empty())
      throw CLI::ValidationError("--theta", "empty continued fraction");
    return RotationNumber::from_period(std::move(terms));
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception &) {
    pos = 0;
  }
  if (pos != s.size() || !(v > 0.0 && v < 1.0))
    throw CLI::ValidationError("--theta", "expected golden, silver, cf:... or a decimal in (0,1)");
  // A decimal of detectably periodic type takes the exact-term path.
  try {
    auto rc = classify(v);
    if (rc.type == RotationType::Periodic && rc.gauss_period) {
      auto terms = cf_expand(v, *rc.gauss_period).terms;
      auto r = RotationNumber::from_period(terms);
      if (std::abs(r.value - v) < 1e-15)
        return r;
    }
  } catch (const Error &) {
  }
  return RotationNumber::from_value(v);
}

inline cplx parse_complex(const std::string &s, const std::string &name) {
  const auto comma = s.find(',');
  try {
    std::size_t p1 = 0, p2 = 0;
    if (comma == std::string::npos) {
      const double re = std::stod(s, &p1);
      if (p1 == s.size())
        return {re, 0.0};
    } else {
      const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
      const double re = std::stod(a, &p1);
      const double im = std::stod(b, &p2);
      if (p1 == a.size() && p2 == b.size())
        return {re, im};
    }
  } catch (const std::exception &) {
  }
  throw CLI::ValidationError(name, "expected 're,im'");
}

inline std::vector<double> parse_list(const std::string &s, const std::string &name) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos != tok.size() || tok.empty())
      throw CLI::ValidationError(name, "bad number '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw CLI::ValidationError(name, "empty list");
  return out;
}

/// Reads flat `key = value` lines into `--key=value` arguments.
inline std::vector<std::string> config_args(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw CLI::ValidationError("--config", "cannot read " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t\r");
      const auto e = x.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : x.substr(b, e - b + 1);
    };
    if (trim(line).empty())
      continue;
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", "expected key=value: " + line);
    out.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
  }
  return out;
}

struct Options {
  std::string theta = "golden";
  int depth = 10;
  std::int64_t horizon = 1000;
  int steps = 0;
  bool matrix = false;
  double x_max = 100.0;
  double iota_max = 10.0;
  std::size_t budget = 2'000'000;
  int d0 = 3;
  int dinf = 2;
  double tol = 1e-6;
  std::int64_t iterations = 200'000;
  int levels = 12;
  int n_max = 12;
  std::string c = "-1.144208,-0.964454";
  std::size_t length = 1597;
  int period = 0;
  std::string orbit_out;
  std::string center = "0,0";
  double width = 6.0;
  int w = 512;
  int h = 512;
  int max_iter = 500;
  double r_zero = 1e-3;
  double r_inf = 1e3;
  int palette = 0;
  int overlay = 0;
  std::string basin = "0";
  double angle = 0.0;
  int ray_depth = 8;
  std::string scales = "0.2,0.02358,0.00278";
  std::string moduli;
  int pixels = 128;
  int phases = 32;
  std::string out;
};

class Output {
public:
  Output(const std::string &path, std::ostream &fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_)
        fail(ErrorKind::Io, "cannot open " + path + " for writing");
      os_ = file_.get();
    }
  }
  std::ostream &stream() { return *os_; }
  void finish() {
    os_->flush();
    if (!*os_)
      fail(ErrorKind::Io, "write failed");
  }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream *os_;
};

inline void add_theta(CLI::App *sub, Options &o) {
  sub->add_option("--theta", o.theta, "golden, silver, cf:a1,a2,... or a decimal")
      ->capture_default_str();
}

inline void add_crit(CLI::App *sub, Options &o) {
  sub->add_option("--d0", o.d0, "inner criticality")->check(CLI::Range(2, 32))->capture_default_str();
  sub->add_option("--dinf", o.dinf, "outer criticality")->check(CLI::Range(2, 32))->capture_default_str();
}

inline void add_render(CLI::App *sub, Options &o) {
  sub->add_option("--center", o.center, "view centre re,im")->capture_default_str();
  sub->add_option("--width", o.width, "view width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--cols", o.w, "pixels across")->check(CLI::Range(1, kMaxSide))->capture_default_str();
  sub->add_option("--rows", o.h, "pixels down")->check(CLI::Range(1, kMaxSide))->capture_default_str();
  sub->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::Range(0, 1'000'000))->capture_default_str();
  sub->add_option("--r-zero", o.r_zero, "capture radius of 0")->check(CLI::Range(1e-300, 0.999999))->capture_default_str();
  sub->add_option("--r-inf", o.r_inf, "capture radius of oo")->check(CLI::Range(1.000001, 1e300))->capture_default_str();
  sub->add_option("--palette", o.palette, "0 colour, 1 grey")->check(CLI::Range(0, 1))->capture_default_str();
  sub->add_option("--out", o.out, "PPM output path")->required();
}

inline RenderConfig render_config(const Options &o) {
  RenderConfig cfg;
  cfg.max_iter = o.max_iter;
  cfg.r_zero = o.r_zero;
  cfg.r_inf = o.r_inf;
  cfg.palette = o.palette;
  cfg.overlay = o.overlay;
  return cfg;
}

inline void print_error(std::ostream &err, const Error &e) {
  err << "error: kind=" << kind_name(e.kind()) << " message=\"" << e.what() << "\"\n";
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Numerical lab for critical quasicircle maps", "hermanlab"};
  app.require_subcommand(1);
  Options o;

  auto *cf = app.add_subcommand("cf", "continued fraction and convergents");
  add_theta(cf, o);
  cf->add_option("--depth", o.depth, "number of terms")->check(CLI::Range(1, kMaxCfDepth))->capture_default_str();

  auto *rot = app.add_subcommand("rotnum", "classification, r_prm and closest returns");
  add_theta(rot, o);
  rot->add_option("--depth", o.depth, "classification depth")->check(CLI::Range(4, kMaxCfDepth))->capture_default_str();
  rot->add_option("--n", o.horizon, "closest-return horizon")->check(CLI::Range(1, 1'000'000))->capture_default_str();

  auto *sec = app.add_subcommand("sector", "prime renormalization of the pair (theta, 1-theta)");
  add_theta(sec, o);
  sec->add_option("--steps", o.steps, "steps (0: one period)")->check(CLI::Range(0, 64))->capture_default_str();
  sec->add_flag("--matrix", o.matrix, "print M, t and eigenvector instead");

  auto *cas = app.add_subcommand("cascade", "dominant points of the translation cascade");
  add_theta(cas, o);
  cas->add_option("--x-max", o.x_max, "window |b_P| bound")->check(CLI::PositiveNumber)->capture_default_str();
  cas->add_option("--iota-max", o.iota_max, "window iota bound")->check(CLI::PositiveNumber)->capture_default_str();
  cas->add_option("--budget", o.budget, "enumeration budget")->check(CLI::Range(1, 100'000'000))->capture_default_str();

  auto *fh = app.add_subcommand("find-herman", "locate the Herman parameter c(theta)");
  add_theta(fh, o);
  add_crit(fh, o);
  fh->add_option("--tol", o.tol, "rotation-number tolerance (bisection)")->check(CLI::Range(1e-12, 0.1))->capture_default_str();
  fh->add_option("--iterations", o.iterations, "lift iterations (bisection)")->check(CLI::Range(10'000, 100'000'000))->capture_default_str();
  fh->add_option("--levels", o.levels, "center levels (non-symmetric case)")->check(CLI::Range(3, 30))->capture_default_str();

  auto *cen = app.add_subcommand("centers", "centers F_c^{q_n}(1) = 1 along the convergents");
  add_theta(cen, o);
  add_crit(cen, o);
  cen->add_option("--n-max", o.n_max, "last level")->check(CLI::Range(1, 30))->capture_default_str();
  cen->add_option("--out", o.out, "CSV output path");

  auto *ren = app.add_subcommand("renorm", "commuting-pair diagnostics along the orbit of 1");
  add_theta(ren, o);
  add_crit(ren, o);
  ren->add_option("--c", o.c, "parameter re,im")->capture_default_str();
  ren->add_option("--length", o.length, "orbit length")->check(CLI::Range(8, 10'000'000))->capture_default_str();
  ren->add_option("--p", o.period, "level shift (0: smallest even Gauss period)")->check(CLI::Range(0, 64))->capture_default_str();
  ren->add_option("--n-max", o.n_max, "last level")->check(CLI::Range(1, 40))->capture_default_str();
  ren->add_option("--orbit-out", o.orbit_out, "write the orbit as CSV");
  ren->add_option("--out", o.out, "CSV output path");

  auto *rj = app.add_subcommand("render-julia", "dynamical plane of F_c as PPM");
  add_crit(rj, o);
  rj->add_option("--c", o.c, "parameter re,im")->capture_default_str();
  rj->add_option("--overlay", o.overlay, "orbit points of 1 to draw")->check(CLI::Range(0, 10'000'000))->capture_default_str();
  add_render(rj, o);

  auto *rp = app.add_subcommand("render-param", "parameter plane as PPM");
  add_crit(rp, o);
  add_render(rp, o);

  auto *tr = app.add_subcommand("trace-ray", "external ray by inverse iteration");
  add_crit(tr, o);
  tr->add_option("--c", o.c, "parameter re,im")->capture_default_str();
  tr->add_option("--basin", o.basin, "0 or inf")->check(CLI::IsMember({"0", "inf"}))->capture_default_str();
  tr->add_option("--angle", o.angle, "angle in [0,1)")->check(CLI::Range(0.0, 0.9999999999))->capture_default_str();
  tr->add_option("--depth", o.ray_depth, "pullback steps")->check(CLI::Range(0, 40))->capture_default_str();
  tr->add_option("--out", o.out, "CSV output path");

  auto *zp = app.add_subcommand("zoom-probe", "self-similarity probe of the parameter plane");
  add_crit(zp, o);
  zp->add_option("--c", o.c, "zoom centre re,im")->capture_default_str();
  zp->add_option("--scales", o.scales, "non-increasing widths")->capture_default_str();
  zp->add_option("--moduli", o.moduli, "candidate |lambda| values");
  zp->add_option("--pixels", o.pixels, "image side")->check(CLI::Range(8, 2048))->capture_default_str();
  zp->add_option("--phases", o.phases, "phase grid")->check(CLI::Range(1, 1024))->capture_default_str();
  zp->add_option("--max-iter", o.max_iter, "iteration cap")->check(CLI::Range(1, 1'000'000))->capture_default_str();
  zp->add_option("--out", o.out, "CSV output path");

  // --config FILE (anywhere after the subcommand) expands to its key=value lines.
  std::vector<std::string> args;
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" || a.rfind("--config=", 0) == 0) {
        std::string path;
        if (a == "--config") {
          if (i + 1 >= argc)
            throw CLI::ValidationError("--config", "missing file name");
          path = argv[++i];
        } else {
          path = a.substr(9);
        }
        auto extra = config_args(path);
        args.insert(args.end(), extra.begin(), extra.end());
      } else {
        args.push_back(a);
      }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App *sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  RotationNumber theta;
  Criticality crit{o.d0, o.dinf};
  cplx c_param;
  try {
    theta = parse_theta(o.theta);
    c_param = parse_complex(o.c, "--c");
  } catch (const CLI::ParseError &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  }

  std::optional<Output> sink;
  try {
    if (name == "cf") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      auto terms = theta.terms(o.depth);
      auto conv = best_approximants(terms);
      os << "k,a_k,p_k,q_k\n";
      for (std::size_t k = 0; k < terms.size(); ++k)
        csv::row(os, csv::num(static_cast<unsigned long long>(k + 1)),
                 csv::num(static_cast<long long>(terms[k])),
                 csv::num(static_cast<long long>(conv.p[k])),
                 csv::num(static_cast<long long>(conv.q[k])));
    } else if (name == "rotnum") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      auto rc = classify(theta.value, o.depth);
      auto opt = [](std::optional<int> v) { return v ? csv::num(*v) : std::string{}; };
      os << "key,value\n";
      csv::row(os, "theta", csv::num(theta.value));
      csv::row(os, "type", type_name(rc.type));
      csv::row(os, "gauss_period", opt(rc.gauss_period));
      csv::row(os, "r_prm_period", opt(r_prm_period(theta.value)));
      csv::row(os, "even_gauss_period", opt(smallest_even_gauss_period(theta.value)));
      csv::row(os, "r_prm", csv::num(r_prm(theta.value)));
      csv::row(os, "gauss", csv::num(gauss(theta.value).value));
      std::string returns;
      for (auto q : closest_returns_rotation(theta.value, o.horizon))
        returns += (returns.empty() ? "" : " ") + std::to_string(q);
      csv::row(os, "closest_returns", returns);
    } else if (name == "sector") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      auto st = anti_renorm_matrix(theta.value);
      if (o.matrix) {
        os << "key,value\n";
        csv::row(os, "period", csv::num(static_cast<unsigned long long>(st.steps.size())));
        csv::row(os, "m11", csv::num(static_cast<long long>(st.matrix.m11)));
        csv::row(os, "m12", csv::num(static_cast<long long>(st.matrix.m12)));
        csv::row(os, "m21", csv::num(static_cast<long long>(st.matrix.m21)));
        csv::row(os, "m22", csv::num(static_cast<long long>(st.matrix.m22)));
        csv::row(os, "t", csv::num(st.t));
        csv::row(os, "w1", csv::num(st.w1));
        csv::row(os, "w2", csv::num(st.w2));
      } else {
        const int steps = o.steps > 0 ? o.steps : static_cast<int>(st.steps.size());
        os << "step,branch,u,v,rotation\n";
        TranslationPair p = st.pair;
        csv::row(os, "0", "", csv::num(p.u), csv::num(p.v), csv::num(rotation_of_pair(p)));
        for (int k = 1; k <= steps; ++k) {
          auto s = prime_renorm_pair(p);
          p = s.pair;
          csv::row(os, csv::num(k), branch_name(s.branch), csv::num(p.u), csv::num(p.v),
                   csv::num(rotation_of_pair(p)));
        }
      }
    } else if (name == "cascade") {
      sink.emplace(o.out, out);
      auto st = anti_renorm_matrix(theta.value);
      write_dominant_csv(sink->stream(), dominant_points(st, {o.x_max, o.iota_max, o.budget}));
    } else if (name == "find-herman") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      os << "method,re_c,im_c,abs_c,arg_c\n";
      if (crit.symmetric()) {
        BisectionConfig bc;
        bc.iterations = o.iterations;
        auto r = find_c_bisection(crit, theta.value, o.tol, bc);
        csv::row(os, "bisection", csv::num(r.c.real()), csv::num(r.c.imag()),
                 csv::num(std::abs(r.c)), csv::num(std::arg(r.c)));
      } else {
        auto scan = locate_herman_seed(crit, theta);
        auto seq = center_sequence(crit, theta, o.levels, scan);
        if (seq.error)
          throw *seq.error;
        std::vector<cplx> cs;
        for (auto &c : seq.centers)
          cs.push_back(c.c);
        const cplx lim = extrapolate_limit(cs);
        csv::row(os, "centers", csv::num(lim.real()), csv::num(lim.imag()),
                 csv::num(std::abs(lim)), csv::num(std::arg(lim)));
      }
    } else if (name == "centers") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      auto scan = locate_herman_seed(crit, theta);
      auto seq = center_sequence(crit, theta, o.n_max, scan);
      write_centers_csv_header(os);
      for (auto &c : seq.centers)
        write_center_row(os, c);
      sink->finish();
      if (seq.error)
        throw *seq.error;
    } else if (name == "renorm") {
      const MapParams m(crit, c_param);
      const int p = o.period > 0 ? o.period
                                 : smallest_even_gauss_period(theta.value).value_or(2);
      auto orbit = compute_orbit(m, o.length);
      if (!o.orbit_out.empty()) {
        Output oo(o.orbit_out, out);
        write_orbit_csv(oo.stream(), orbit.z);
        oo.finish();
      }
      if (orbit.status != OrbitStatus::Bounded)
        fail(ErrorKind::OrbitEscaped, "orbit of 1 captured after " +
                                          std::to_string(orbit.z.size()) + " points (" +
                                          std::string(status_name(orbit.status)) + ")");
      auto d = renorm_diagnostics(orbit.z, theta, p, o.n_max);
      sink.emplace(o.out, out);
      write_diagnostics_csv(sink->stream(), d);
    } else if (name == "render-julia" || name == "render-param") {
      const ViewPort vp{parse_complex(o.center, "--center"), o.width, o.w, o.h};
      const auto img = name == "render-julia"
                           ? render_dynamical(MapParams(crit, c_param), vp, render_config(o))
                           : render_parameter(crit, vp, render_config(o));
      write_ppm(o.out, img);
    } else if (name == "trace-ray") {
      sink.emplace(o.out, out);
      auto &os = sink->stream();
      auto ray = trace_ray(MapParams(crit, c_param), o.basin == "0" ? Basin::Zero : Basin::Infinity,
                           o.angle, o.ray_depth);
      os << "k,re,im\n";
      for (std::size_t k = 0; k < ray.points.size(); ++k)
        csv::row(os, csv::num(static_cast<unsigned long long>(k)), csv::num(ray.points[k].real()),
                 csv::num(ray.points[k].imag()));
      if (ray.precritical_step)
        err << "warning: kind=precritical_hit step=" << *ray.precritical_step << "\n";
    } else if (name == "zoom-probe") {
      ZoomOptions zo;
      zo.pixels = o.pixels;
      zo.phases = o.phases;
      if (!o.moduli.empty())
        zo.moduli = parse_list(o.moduli, "--moduli");
      RenderConfig cfg;
      cfg.max_iter = o.max_iter;
      auto res = zoom_probe(crit, c_param, parse_list(o.scales, "--scales"), cfg, zo);
      sink.emplace(o.out, out);
      write_zoom_csv(sink->stream(), res);
    }
    if (sink)
      sink->finish();
  } catch (const CLI::ParseError &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    if (sink)
      sink->stream().flush();
    print_error(err, e);
    return kExitNumerical;
  }
  return kExitOk;
}

} // namespace hermanlab::cli
