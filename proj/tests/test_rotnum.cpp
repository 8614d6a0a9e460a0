#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "hermanlab/rotnum.hpp"
#include "hermanlab/sector.hpp"
#include "oracle_values.hpp"

using namespace hermanlab;

namespace {

std::vector<std::int64_t> ints(std::initializer_list<std::int64_t> v) { return v; }

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Domain;
}

} // namespace

TEST(CfExpand, GoldenMeanIsAllOnes) {
  EXPECT_EQ(cf_expand(golden_mean(), 10).terms, std::vector<std::int64_t>(10, 1));
}

TEST(CfExpand, SilverMeanIsAllTwos) {
  EXPECT_EQ(cf_expand(silver_mean(), 6).terms, std::vector<std::int64_t>(6, 2));
}

TEST(CfExpand, NearHalfIsRationalWithinResolution) {
  EXPECT_EQ(kind_of([] { cf_expand(0.5 + 1e-18, 3); }), ErrorKind::RationalResolution);
  EXPECT_EQ(kind_of([] { cf_expand(0.3, 10); }), ErrorKind::RationalResolution);
}

TEST(CfExpand, OutsideUnitIntervalIsDomainError) {
  EXPECT_EQ(kind_of([] { cf_expand(0.0, 3); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { cf_expand(1.0, 3); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { cf_expand(-0.2, 3); }), ErrorKind::Domain);
}

TEST(BestApproximants, FibonacciDenominators) {
  auto c = best_approximants(golden_mean(), 6);
  EXPECT_EQ(c.q, ints({1, 2, 3, 5, 8, 13}));
  EXPECT_EQ(c.p, ints({1, 1, 2, 3, 5, 8}));
}

TEST(BestApproximants, SilverDenominators) {
  EXPECT_EQ(best_approximants(RotationNumber::silver().terms(4)).q, ints({2, 5, 12, 29}));
}

TEST(BestApproximants, FirstDenominatorIsFirstTerm) {
  for (std::int64_t a : {1, 2, 7, 40}) {
    std::vector<std::int64_t> t{a, 3, 1};
    EXPECT_EQ(best_approximants(t).q.front(), a);
  }
}

TEST(BestApproximants, OverflowIsReported) {
  std::vector<std::int64_t> t(60, 1000);
  EXPECT_EQ(kind_of([&] { best_approximants(t); }), ErrorKind::Overflow);
}

TEST(Gauss, FixedPoints) {
  EXPECT_NEAR(gauss(golden_mean()).value, golden_mean(), 1e-15);
  EXPECT_NEAR(gauss(silver_mean()).value, silver_mean(), 1e-15);
  EXPECT_FALSE(gauss(golden_mean()).terminated);
}

TEST(Gauss, RationalTerminates) {
  auto s = gauss(1.0 / 3.0);
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(s.value, 0.0);
}

TEST(RPrm, Branches) {
  EXPECT_NEAR(r_prm(1.0 / 3.0), 0.5, 1e-15);
  EXPECT_NEAR(r_prm(golden_mean()), oracle::kRPrmGolden, 1e-15);
  EXPECT_NEAR(r_prm(r_prm(golden_mean())), golden_mean(), 1e-12);
}

TEST(RPrmPeriod, KnownPeriods) {
  EXPECT_EQ(r_prm_period(golden_mean()), 2);
  EXPECT_EQ(r_prm_period(silver_mean()), oracle::kSilverRPrmPeriod);
  EXPECT_FALSE(r_prm_period(0.123456789, 10).has_value());
}

TEST(GaussPeriod, GoldenAndEvenPeriod) {
  EXPECT_EQ(gauss_period(golden_mean()), 1);
  EXPECT_EQ(smallest_even_gauss_period(golden_mean()), 2);
  EXPECT_EQ(gauss_period(RotationNumber::from_period({1, 2}).value), 2);
  EXPECT_EQ(smallest_even_gauss_period(RotationNumber::from_period({3, 1, 2}).value), 6);
}

TEST(ClosestReturns, Fibonacci) {
  EXPECT_EQ(closest_returns_rotation(golden_mean(), 100),
            ints({1, 2, 3, 5, 8, 13, 21, 34, 55, 89}));
}

TEST(ClosestReturns, Silver) {
  EXPECT_EQ(closest_returns_rotation(silver_mean(), 30), ints({1, 2, 5, 12, 29}));
}

TEST(ClosestReturns, HorizonOne) {
  EXPECT_EQ(closest_returns_rotation(0.2718281828, 1), ints({1}));
}

TEST(Classify, Types) {
  EXPECT_EQ(classify(golden_mean()).type, RotationType::Periodic);
  EXPECT_EQ(classify(RotationNumber::from_period({4, 1, 3}).value).type, RotationType::Periodic);
  // [0; 5, 1, 1, 1, ...]
  const double pre = 1.0 / (5.0 + golden_mean());
  auto rc = classify(pre);
  EXPECT_EQ(rc.type, RotationType::PrePeriodic);
  EXPECT_EQ(rc.preperiod, 1);
  EXPECT_EQ(classify(std::numbers::pi - 3.0).type, RotationType::Bounded);
  EXPECT_EQ(classify(1.0 / (2000.0 + golden_mean())).type, RotationType::Generic);
}

TEST(RotationNumber, DecimalAndNamedAgree) {
  auto named = RotationNumber::golden();
  EXPECT_EQ(named.terms(12), cf_expand(0.6180339887498949, 12).terms);
  EXPECT_NEAR(named.value, 0.6180339887498949, 1e-16);
  EXPECT_EQ(named.denominators(4), ints({1, 1, 2, 3, 5}));
}

TEST(Property, CfRoundTrip) {
  std::mt19937_64 rng(20240901);
  std::uniform_int_distribution<int> term(1, 9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::int64_t> t(40);
    for (auto &a : t)
      a = term(rng);
    const double theta = cf_value(t);
    auto cf = cf_expand(theta, 20);
    EXPECT_NEAR(cf_value(cf.terms), theta, 1e-12);
  }
}

TEST(Property, ClosestReturnsAreDenominators) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = u(rng);
    auto qs = RotationNumber::from_value(theta).denominators(14);
    auto r = closest_returns_rotation(theta, std::min<std::int64_t>(qs.back(), 100000));
    for (auto q : r)
      EXPECT_NE(std::find(qs.begin(), qs.end(), q), qs.end())
          << "theta=" << theta << " q=" << q;
  }
}

// Sector step on (1 - theta, theta) followed by v/(u+v) is r_prm.
TEST(Property, RPrmIsOneSectorStep) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 1000; ++trial) {
    const double theta = u(rng);
    if (std::abs(theta - 0.5) < 1e-6)
      continue;
    auto s = prime_renorm_pair({1.0 - theta, theta});
    EXPECT_NEAR(rotation_of_pair(s.pair), r_prm(theta), 1e-12);
    auto t = prime_renorm_pair({theta, 1.0 - theta});
    EXPECT_NEAR(1.0 - rotation_of_pair(t.pair), r_prm(theta), 1e-12);
  }
}

TEST(Property, GoldenPeriodsRealizedBySector) {
  auto st = anti_renorm_matrix(golden_mean());
  EXPECT_EQ(gauss_period(golden_mean()), 1);
  EXPECT_EQ(st.steps.size(), 2u);
  EXPECT_EQ(static_cast<int>(st.steps.size()), r_prm_period(golden_mean()));
}
