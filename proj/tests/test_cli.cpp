#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "hermanlab");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = hermanlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / "hermanlab_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST(Cli, ContinuedFractionTable) {
  auto r = run({"cf", "--theta", "golden", "--depth", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "k,a_k,p_k,q_k\n1,1,1,1\n2,1,1,2\n3,1,2,3\n4,1,3,5\n");
}

TEST(Cli, NamedAndDecimalThetaAgree) {
  for (const char *cmd : {"cf", "rotnum", "sector"}) {
    auto a = run({cmd, "--theta", "golden"});
    auto b = run({cmd, "--theta", "0.6180339887498949"});
    EXPECT_EQ(a.code, 0) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Cli, RationalDecimalIsNumericalError) {
  auto r = run({"cf", "--theta", "0.3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error: kind="), std::string::npos);
}

TEST(Cli, SectorMatrix) {
  auto r = run({"sector", "--theta", "golden", "--matrix"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("m11,1"), std::string::npos);
  EXPECT_NE(r.out.find("m22,2"), std::string::npos);
}

TEST(Cli, FindHermanSymmetric) {
  auto r = run({"find-herman", "--theta", "golden", "--d0", "2", "--dinf", "2"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "method,re_c,im_c,abs_c,arg_c");
  double re = 0, im = 0;
  ASSERT_EQ(std::sscanf(row.c_str(), "bisection,%lf,%lf", &re, &im), 2);
  EXPECT_NEAR(re, -0.755700, 1e-4);
  EXPECT_NEAR(im, -0.654917, 1e-4);
}

TEST(Cli, RenderJuliaWritesPpm) {
  const auto path = scratch("j.ppm");
  fs::remove(path);
  auto r = run({"render-julia", "--cols", "16", "--rows", "12", "--max-iter", "100", "--out",
                path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bytes = slurp(path);
  EXPECT_EQ(bytes.substr(0, 12), "P6\n16 12\n255");
  EXPECT_EQ(bytes.size(), std::string("P6\n16 12\n255\n").size() + 16 * 12 * 3);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = scratch("a.ppm"), b = scratch("b.ppm");
  for (const auto &p : {a, b})
    ASSERT_EQ(run({"render-param", "--cols", "24", "--rows", "24", "--max-iter", "200", "--out",
                   p.string()})
                  .code,
              0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(run({"cascade", "--theta", "golden"}).out, run({"cascade", "--theta", "golden"}).out);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"cf", "--theta", "banana"}).code, 2);
  EXPECT_EQ(run({"cf", "--depth", "0"}).code, 2);
  EXPECT_EQ(run({"render-julia", "--cols", "8"}).code, 2);
  auto r = run({"trace-ray", "--basin", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("usage:", 0), 0u);
}

TEST(Cli, MissingOutputDirectoryIsIoError) {
  auto r = run({"render-julia", "--cols", "8", "--rows", "8", "--out", "/nonexistent-dir/x.ppm"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: kind=io", 0), 0u);
}

TEST(Cli, CenterFailureFlushesPartialTable) {
  auto r = run({"centers", "--theta", "golden", "--n-max", "16"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out.rfind("n,q_n,re_c,im_c,residual\n", 0), 0u);
  EXPECT_NE(r.out.find("\n13,377,"), std::string::npos);
  EXPECT_NE(r.err.find("error: kind=wrong_combinatorics"), std::string::npos);
}

TEST(Cli, ConfigFile) {
  const auto good = scratch("good.cfg"), bad = scratch("bad.cfg");
  std::ofstream(good) << "# cf settings\ntheta = silver\ndepth=3\n";
  std::ofstream(bad) << "theta=golden\ncolour=blue\n";
  auto r = run({"cf", "--config", good.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, run({"cf", "--theta", "silver", "--depth", "3"}).out);
  EXPECT_EQ(run({"cf", "--config", bad.string()}).code, 2);
  EXPECT_EQ(run({"cf", "--config", scratch("missing.cfg").string()}).code, 2);
}

TEST(Cli, TraceRayCsv) {
  auto r = run({"trace-ray", "--angle", "0.25", "--depth", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}
