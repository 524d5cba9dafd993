#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "condtau/inference.hpp"
#include "oracles.hpp"

using namespace condtau;

namespace {

Sample monotone(bool increasing, std::size_t n = 30) {
  std::vector<double> a, b, z;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(static_cast<double>(i));
    b.push_back(increasing ? static_cast<double>(i) : -static_cast<double>(i));
    z.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  return Sample(a, b, z);
}

}  // namespace

TEST(GGMoment, DegenerateDependence) {
  EXPECT_EQ(estimate_gg_moment(Concordance::g2, monotone(true), Point{0.5}, KernelSpec(), 0.3), 1.0);
  EXPECT_EQ(estimate_gg_moment(Concordance::g2, monotone(false), Point{0.5}, KernelSpec(), 0.3), 1.0);
}

TEST(GGMoment, MatchesTripleLoop) {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 4 + t % 17;
    const Sample s = oracle::random_sample(rng, n);
    const Point z{u(rng)};
    const KernelFamily f = t % 2 ? KernelFamily::gaussian : KernelFamily::epanechnikov;
    const double h = f == KernelFamily::gaussian ? 0.2 : 0.6;
    const auto w = oracle::weights(s, z, f, h);
    std::size_t nz = 0;
    for (double v : w) nz += v != 0.0;
    if (nz < 3) continue;
    for (int k = 1; k <= 3; ++k) {
      const double lib = estimate_gg_moment(concordance_from_int(k), s, z, KernelSpec(f), h);
      EXPECT_NEAR(lib, oracle::gg_moment(k, s, w), 1e-12) << "n=" << n << " k=" << k;
    }
  }
}

TEST(GGMoment, Bounded) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const Sample s = oracle::random_sample(rng, 60);
    for (int k = 1; k <= 3; ++k) {
      const double m = estimate_gg_moment(concordance_from_int(k), s, Point{0.5}, KernelSpec(), 0.4);
      EXPECT_LE(std::abs(m), k == 2 ? 1.0 : 9.0);
    }
  }
}

TEST(GGMoment, Errors) {
  const Sample s({1, 2, 3, 4}, {1, 2, 3, 4}, {0.0, 0.1, 0.9, 1.0});
  EXPECT_THROW(estimate_gg_moment(Concordance::g2, s, Point{0.05}, KernelSpec(), 0.2), SparseWindow);
  EXPECT_THROW(estimate_gg_moment(Concordance::g2, s, Point{5.0}, KernelSpec(), 0.2), AllWeightsZero);
  const Sample two({1, 2}, {1, 2}, {0.0, 0.1});
  EXPECT_THROW(estimate_gg_moment(Concordance::g2, two, Point{0.05}, KernelSpec(), 0.2), InvalidArgument);
}

TEST(Variance, FullFormulaMatchesOracle) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 20; ++t) {
    const Sample s = oracle::random_sample(rng, 15);
    const Point z{0.5};
    const double h = 0.7;
    const auto w = oracle::weights(s, z, KernelFamily::epanechnikov, h);
    const auto taus = oracle::estimators(s, w);
    std::vector<double> k;
    for (std::size_t i = 0; i < s.size(); ++i) k.push_back(oracle::base_kernel(KernelFamily::epanechnikov, (s.z(i)[0] - 0.5) / h));
    const double f_hat = oracle::exact_sum(k) / h / 15.0;
    const double raw = 4.0 * 0.6 / f_hat * (oracle::gg_moment(2, s, w) - taus.tilde * taus.tilde);
    const auto v = estimate_variance(Estimator::tilde, s, z, KernelSpec(), h);
    EXPECT_NEAR(v.raw, raw, 1e-12);
    EXPECT_EQ(v.h_entry, std::max(0.0, v.raw));
    EXPECT_EQ(v.clamped, v.raw < 0.0);
    EXPECT_EQ(v.tau, taus.tilde);
  }
}

TEST(Variance, ZeroAtPerfectDependence) {
  const auto v = estimate_variance(Estimator::tilde, monotone(true), Point{0.5}, KernelSpec(), 0.3);
  EXPECT_NEAR(v.tau, 1.0, 1e-15);
  EXPECT_NEAR(v.h_entry, 0.0, 1e-12);
  // tau^(2) stays below 1 - s_n, so the plug-in is positive
  const auto r = estimate_variance(Estimator::tau2, monotone(true), Point{0.5}, KernelSpec(), 0.3);
  EXPECT_GT(r.h_entry, 0.0);
}

TEST(Variance, NegativePlugInIsClamped) {
  // A tiny window where the distinct-triple moment falls below tau^2.
  std::mt19937_64 rng(33);
  bool seen = false;
  for (int t = 0; t < 400 && !seen; ++t) {
    const Sample s = oracle::random_sample(rng, 12);
    try {
      const auto v = estimate_variance(Estimator::tau1, s, Point{0.5}, KernelSpec(), 0.5);
      if (v.clamped) {
        seen = true;
        EXPECT_LT(v.raw, 0.0);
        EXPECT_EQ(v.h_entry, 0.0);
      }
    } catch (const Error&) {
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Variance, RankInvariance) {
  std::mt19937_64 rng(34);
  const Sample s = oracle::random_sample(rng, 100);
  std::vector<double> a(s.x1s()), b(s.x2s());
  for (auto& v : a) v = std::exp(v);
  for (auto& v : b) v = v * v * v + v;
  const Sample t(a, b, s.zs());
  const auto v1 = estimate_variance(Estimator::tilde, s, Point{0.5}, KernelSpec(), 0.3);
  const auto v2 = estimate_variance(Estimator::tilde, t, Point{0.5}, KernelSpec(), 0.3);
  EXPECT_EQ(v1.raw, v2.raw);
}

TEST(ConfidenceInterval, Examples) {
  const auto a = confidence_interval(0.3, 0.0, 100, 0.5, 1, 0.95);
  EXPECT_EQ(a.lower, 0.3);
  EXPECT_EQ(a.upper, 0.3);
  // n h^p = 100: half-width 1.959964 / 10
  const auto b = confidence_interval(0.0, 1.0, 200, 0.5, 1, 0.95);
  EXPECT_NEAR(b.upper, 0.1959964, 1e-7);
  EXPECT_NEAR(b.upper - b.lower, 2.0 * 1.959963984540054 * b.standard_error, 1e-15);
  const auto c = confidence_interval(0.0, 1.0, 200, 0.5, 1, 0.99);
  EXPECT_LT(c.lower, b.lower);
  EXPECT_GT(c.upper, b.upper);
  EXPECT_LE(b.lower, b.center);
  EXPECT_LE(b.center, b.upper);
}

TEST(ConfidenceInterval, Truncation) {
  const auto raw = confidence_interval(0.95, 4.0, 50, 0.2, 1, 0.95);
  EXPECT_GT(raw.upper, 1.0);
  const auto cut = confidence_interval(0.95, 4.0, 50, 0.2, 1, 0.95, true);
  EXPECT_EQ(cut.upper, 1.0);
  EXPECT_EQ(cut.lower, raw.lower);
}

TEST(ConfidenceInterval, Errors) {
  EXPECT_THROW(confidence_interval(0.0, 1.0, 10, 0.5, 1, 1.0), InvalidArgument);
  EXPECT_THROW(confidence_interval(0.0, -1.0, 10, 0.5, 1, 0.9), InvalidArgument);
}
