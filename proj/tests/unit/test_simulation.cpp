#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "condtau/simulation.hpp"
#include "oracles.hpp"

using namespace condtau;

TEST(Settings, TrueTau) {
  EXPECT_EQ(true_tau(Setting::one, 0.0), -1.0);
  EXPECT_EQ(true_tau(Setting::one, 0.5), 0.0);
  EXPECT_EQ(true_tau(Setting::one, 1.0), 1.0);
  EXPECT_EQ(true_tau(Setting::two, 0.0), 0.0);
  EXPECT_NEAR(true_tau(Setting::two, 1.0), 0.682689492137086, 1e-14);
  EXPECT_NEAR(true_tau(Setting::two, -1.0), -0.682689492137086, 1e-14);
  EXPECT_NEAR(copula_rho(0.5), std::sqrt(0.5), 1e-15);
  EXPECT_THROW(setting_from_int(3), InvalidArgument);
}

TEST(Settings, Support) {
  EXPECT_TRUE(in_support(Setting::one, 0.0));
  EXPECT_FALSE(in_support(Setting::one, 1.01));
  EXPECT_TRUE(in_support(Setting::two, -7.0));
  EXPECT_FALSE(in_support(Setting::two, NAN));
}

TEST(Generate, Deterministic) {
  const Sample a = generate({Setting::two, 50, 9});
  const Sample b = generate({Setting::two, 50, 9});
  const Sample c = generate({Setting::two, 50, 10});
  EXPECT_EQ(a.x1s(), b.x1s());
  EXPECT_EQ(a.x2s(), b.x2s());
  EXPECT_EQ(a.zs(), b.zs());
  EXPECT_NE(a.x1s(), c.x1s());
  EXPECT_THROW(generate({Setting::one, 1, 0}), InvalidArgument);
}

TEST(Generate, Margins) {
  const std::size_t n = 200000;
  const Sample s = generate({Setting::one, n, 3});
  double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0, zmin = 1.0, zmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = s.z(i)[0];
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
    const double r1 = s.x1(i) - z, r2 = s.x2(i) - z;
    m1 += r1;
    m2 += r2;
    v1 += r1 * r1;
    v2 += r2 * r2;
  }
  EXPECT_GE(zmin, 0.0);
  EXPECT_LT(zmax, 1.0);
  EXPECT_NEAR(m1 / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 0.0, 0.01);
  EXPECT_NEAR(v1 / n, 1.0, 0.02);
  EXPECT_NEAR(v2 / n, 1.0, 0.02);
}

TEST(Generate, ConditionalKendall) {
  // Rows with Z near a point have Kendall's tau near the truth there.
  const Sample s = generate({Setting::one, 100000, 4});
  for (double z0 : {0.2, 0.5, 0.85}) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (std::abs(s.z(i)[0] - z0) < 0.01) {
        a.push_back(s.x1(i));
        b.push_back(s.x2(i));
      }
    ASSERT_GT(a.size(), 1000u);
    EXPECT_NEAR(oracle::kendall_tau(a, b), true_tau(Setting::one, z0), 0.06) << z0;
  }
}

TEST(Grid, Defaults) {
  const auto g1 = default_z_grid(Setting::one);
  ASSERT_EQ(g1.size(), 99u);
  EXPECT_EQ(g1.front(), 0.01);
  EXPECT_EQ(g1.back(), 0.99);
  const auto g2 = default_z_grid(Setting::two);
  ASSERT_EQ(g2.size(), 101u);
  EXPECT_EQ(g2.front(), -2.5);
  EXPECT_NEAR(g2.back(), 2.5, 1e-12);
}

TEST(Trapezoid, MatchesOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x{0.0}, y{u(rng)};
    for (int i = 0; i < 30; ++i) {
      x.push_back(x.back() + u(rng));
      y.push_back(u(rng));
    }
    EXPECT_NEAR(trapezoid(x, y), oracle::trapezoid(x, y), 1e-13);
  }
  EXPECT_NEAR(trapezoid({0.0, 1.0, 3.0}, {1.0, 1.0, 1.0}), 3.0, 1e-15);
  EXPECT_EQ(trapezoid({2.0}, {5.0}), 0.0);
}

TEST(MonteCarlo, ReportShape) {
  MCConfig cfg;
  cfg.setting = {Setting::one, 30, 1};
  cfg.reps = 4;
  cfg.alpha_h = {1.0, 2.0};
  const MCReport r = run_mc(cfg);
  EXPECT_EQ(r.local.size(), 2u * 4u * 99u);
  EXPECT_EQ(r.integrated.size(), 8u);
  EXPECT_EQ(r.base_bandwidth.size(), 4u);
  for (const auto& row : r.local) {
    EXPECT_EQ(row.stats.defined + row.stats.undefined, 4u);
    if (row.stats.defined == 0) continue;
    EXPECT_NEAR(row.stats.mse, row.stats.bias * row.stats.bias + row.stats.sd * row.stats.sd, 1e-10);
    EXPECT_EQ(row.truth, true_tau(Setting::one, row.z));
  }
  EXPECT_NO_THROW(r.find(Estimator::tilde, 2.0));
  EXPECT_THROW(r.find(Estimator::tilde, 3.0), InvalidArgument);
}

TEST(MonteCarlo, IntegratedFromLocal) {
  MCConfig cfg;
  cfg.setting = {Setting::two, 60, 2};
  cfg.reps = 5;
  cfg.estimators = {Estimator::tau2, Estimator::tilde};
  const MCReport r = run_mc(cfg);
  for (const auto& ir : r.integrated) {
    std::vector<double> zs, mse;
    for (const auto& row : r.local)
      if (row.estimator == ir.estimator && row.stats.defined > 0) {
        zs.push_back(row.z);
        mse.push_back(row.stats.mse);
      }
    EXPECT_EQ(ir.points_used, zs.size());
    EXPECT_NEAR(ir.imse, oracle::trapezoid(zs, mse), 1e-13);
  }
}

TEST(MonteCarlo, TinySample) {
  // n = 3 leaves many windows empty; those points are skipped, not fatal.
  MCConfig cfg;
  cfg.setting = {Setting::one, 3, 11};
  cfg.reps = 2;
  const MCReport r = run_mc(cfg);
  EXPECT_EQ(r.local.size(), 4u * 99u);
  std::size_t undefined = 0;
  for (const auto& ir : r.integrated) undefined += ir.undefined;
  EXPECT_GT(undefined, 0u);
}

TEST(MonteCarlo, ThreadInvariance) {
  MCConfig cfg;
  cfg.setting = {Setting::one, 80, 21};
  cfg.reps = 7;
  cfg.alpha_h = {1.5};
  const MCReport a = run_mc(cfg);
  cfg.threads = 4;
  const MCReport b = run_mc(cfg);
  ASSERT_EQ(a.local.size(), b.local.size());
  for (std::size_t i = 0; i < a.local.size(); ++i) {
    EXPECT_EQ(std::isnan(a.local[i].stats.mse), std::isnan(b.local[i].stats.mse));
    if (!std::isnan(a.local[i].stats.mse)) EXPECT_EQ(a.local[i].stats.mse, b.local[i].stats.mse);
  }
  for (std::size_t i = 0; i < a.integrated.size(); ++i)
    EXPECT_EQ(a.integrated[i].imse, b.integrated[i].imse);
}

TEST(MonteCarlo, Validation) {
  MCConfig cfg;
  cfg.setting = {Setting::one, 30, 1};
  cfg.reps = 1;
  EXPECT_THROW(run_mc(cfg), InvalidArgument);
  cfg.reps = 3;
  cfg.z_grid = {0.2, 0.1};
  EXPECT_THROW(run_mc(cfg), InvalidArgument);
  cfg.z_grid = {0.5, 1.5};
  EXPECT_THROW(run_mc(cfg), InvalidArgument);
  cfg.z_grid = {};
  cfg.alpha_h = {0.0};
  EXPECT_THROW(run_mc(cfg), InvalidArgument);
  cfg.alpha_h = {1.0};
  cfg.estimators = {};
  EXPECT_THROW(run_mc(cfg), InvalidArgument);
}

TEST(MonteCarlo, CrossValidatedBandwidth) {
  MCConfig cfg;
  cfg.setting = {Setting::two, 60, 3};
  cfg.reps = 2;
  cfg.source = BandwidthSource::cross_validation;
  cfg.n_pairs = 100;
  const MCReport r = run_mc(cfg);
  for (double h : r.base_bandwidth) EXPECT_GT(h, 0.0);
}

TEST(CVStudy, ReferenceBandwidths) {
  CVStudyConfig cfg;
  cfg.n_values = {100, 500};
  cfg.reps = 2;
  cfg.n_pairs = 50;
  const auto rows = run_cv_study(cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].h_ref, 0.3981071705534972, 1e-15);
  EXPECT_NEAR(rows[1].h_ref, 0.2885399811814427, 1e-15);
  for (const auto& r : rows) {
    ASSERT_EQ(r.h_cv.size(), 2u);
    EXPECT_NEAR(r.mean_h_cv, 0.5 * (r.h_cv[0] + r.h_cv[1]), 1e-15);
    EXPECT_NEAR(r.sd_h_cv, 0.5 * std::abs(r.h_cv[0] - r.h_cv[1]), 1e-15);
    EXPECT_TRUE(r.integrated.empty());
  }
  cfg.multipliers = {1.0};
  cfg.n_values = {100};
  const auto with = run_cv_study(cfg);
  EXPECT_EQ(with[0].integrated.size(), 4u);
  EXPECT_EQ(with[0].h_cv, rows[0].h_cv);
}

TEST(CVStudy, Errors) {
  CVStudyConfig cfg;
  cfg.n_values = {};
  EXPECT_THROW(run_cv_study(cfg), InvalidArgument);
  cfg.n_values = {3};
  EXPECT_THROW(run_cv_study(cfg), InvalidArgument);
}

TEST(Seeds, Distinct) {
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
  EXPECT_NE(mix_seed(0, 1), mix_seed(1, 0));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}
