#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "condtau/bandwidth.hpp"
#include "condtau/error.hpp"
#include "condtau/estimators.hpp"
#include "condtau/kernels.hpp"
#include "condtau/parallel.hpp"
#include "condtau/sample.hpp"

namespace condtau {

enum class Setting { one = 1, two = 2 };

inline Setting setting_from_int(int id) {
  if (id == 1) return Setting::one;
  if (id == 2) return Setting::two;
  throw InvalidArgument("setting must be 1 or 2");
}

struct SettingSpec {
  Setting id = Setting::one;
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Conditional Kendall's tau: 2z - 1 (Setting 1) or 2 Phi(z) - 1 (Setting 2).
inline double true_tau(Setting id, double z) {
  return id == Setting::one ? 2.0 * z - 1.0 : 2.0 * normal_cdf(z) - 1.0;
}

inline double margin_mean(Setting id, double z) { return id == Setting::one ? z : normal_cdf(z); }

/// Gaussian copula correlation with Kendall's tau equal to `tau`.
inline double copula_rho(double tau) { return std::sin(std::numbers::pi * tau / 2.0); }

inline bool in_support(Setting id, double z) {
  if (!std::isfinite(z)) return false;
  return id == Setting::two || (z >= 0.0 && z <= 1.0);
}

/// splitmix64 finalizer; derives independent replication streams.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t x = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline Sample generate(const SettingSpec& spec) {
  if (spec.n < 2) throw InvalidArgument("sample size must be at least 2");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  std::vector<double> x1(spec.n), x2(spec.n), z(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    z[i] = spec.id == Setting::one ? unif(rng) : norm(rng);
    const double m = margin_mean(spec.id, z[i]);
    const double rho = copula_rho(true_tau(spec.id, z[i]));
    const double e1 = norm(rng);
    const double e2 = norm(rng);
    x1[i] = m + e1;
    x2[i] = m + rho * e1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * e2;
  }
  return Sample(std::move(x1), std::move(x2), std::move(z));
}

/// 99 points 0.01..0.99 (Setting 1) or 101 points on [-2.5, 2.5] (Setting 2).
inline std::vector<double> default_z_grid(Setting id) {
  std::vector<double> grid;
  if (id == Setting::one) {
    for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  } else {
    for (int i = 0; i <= 100; ++i) grid.push_back(-2.5 + i * 0.05);
  }
  return grid;
}

/// Trapezoid rule on an increasing grid.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionMismatch(x.size(), y.size());
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) total += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return total;
}

enum class BandwidthSource { rule_of_thumb, cross_validation };

struct MCConfig {
  SettingSpec setting;
  std::size_t reps = 500;
  std::vector<Estimator> estimators{kAllEstimators.begin(), kAllEstimators.end()};
  std::vector<double> alpha_h{1.5};
  BandwidthSource source = BandwidthSource::rule_of_thumb;
  std::size_t n_pairs = 1000;  // cross-validation only
  std::vector<double> z_grid;  // empty: default grid of the setting
  KernelSpec kernel{};
  std::size_t threads = 1;

  std::vector<double> grid() const { return z_grid.empty() ? default_z_grid(setting.id) : z_grid; }

  void validate() const {
    if (setting.n < 2) throw InvalidArgument("sample size must be at least 2");
    if (reps < 2) throw InvalidArgument("at least two replications are required");
    if (estimators.empty()) throw InvalidArgument("no estimator selected");
    if (alpha_h.empty()) throw InvalidArgument("no bandwidth multiplier given");
    for (double a : alpha_h)
      if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("alpha_h must be positive");
    if (kernel.dim != 1) throw InvalidArgument("simulation settings have a univariate covariate");
    if (source == BandwidthSource::cross_validation && setting.n < 4)
      throw InvalidArgument("cross-validation needs at least four observations");
    const auto g = grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!in_support(setting.id, g[i])) throw InvalidArgument("z grid leaves the setting's support");
      if (i > 0 && !(g[i] > g[i - 1])) throw InvalidArgument("z grid must be strictly increasing");
    }
  }
};

struct CellStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double bias = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();  // divisor: defined replications
  double mse = std::numeric_limits<double>::quiet_NaN();
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

struct LocalRow {
  double z = 0.0;
  Estimator estimator = Estimator::tilde;
  double alpha_h = 0.0;
  double truth = 0.0;
  CellStats stats;
};

struct IntegratedRow {
  Estimator estimator = Estimator::tilde;
  double alpha_h = 0.0;
  double ibias = 0.0;
  double isd = 0.0;
  double imse = 0.0;
  std::size_t undefined = 0;  // summed over the grid
  std::size_t points_used = 0;
};

struct MCReport {
  MCConfig config;
  std::vector<double> z_grid;
  std::vector<LocalRow> local;  // ordered by (alpha_h, estimator, z)
  std::vector<IntegratedRow> integrated;
  std::vector<double> base_bandwidth;  // per replication: rule_of_thumb(1) or h_CV

  const IntegratedRow& find(Estimator e, double alpha) const {
    for (const auto& r : integrated)
      if (r.estimator == e && r.alpha_h == alpha) return r;
    throw InvalidArgument("no such (estimator, alpha_h) cell in the report");
  }
};

namespace detail {

inline CellStats cell_stats(const std::vector<double>& values, double truth) {
  CellStats c;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) {
      ++c.undefined;
      continue;
    }
    sum += v;
    ++c.defined;
  }
  if (c.defined == 0) return c;
  const double m = static_cast<double>(c.defined);
  c.mean = sum / m;
  double ss = 0.0, se = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    ss += (v - c.mean) * (v - c.mean);
    se += (v - truth) * (v - truth);
  }
  c.bias = c.mean - truth;
  c.sd = std::sqrt(ss / m);
  c.mse = se / m;
  return c;
}

inline double base_bandwidth(const Sample& s, const MCConfig& config) {
  if (config.source == BandwidthSource::rule_of_thumb) return rule_of_thumb(s, 1.0);
  CVConfig cv;
  cv.n_pairs = config.n_pairs;
  cv.kernel = config.kernel;
  cv.h_grid = default_h_grid(s);
  return cv_select(s, cv).h_cv;
}

}  // namespace detail

/// Monte Carlo study. Replication r uses the stream mix_seed(seed, r), and
/// results are reduced in replication order, so the report does not depend on
/// the thread count. Undefined estimates are excluded per point and counted;
/// integrated measures use the trapezoid rule over the points where the
/// local measure is defined.
inline MCReport run_mc(const MCConfig& config) {
  config.validate();
  const std::vector<double> grid = config.grid();
  const std::size_t na = config.alpha_h.size();
  const std::size_t ne = config.estimators.size();
  const std::size_t nz = grid.size();
  const std::size_t cells = na * ne * nz;
  auto cell = [&](std::size_t a, std::size_t e, std::size_t zi) { return (a * ne + e) * nz + zi; };

  std::vector<std::vector<double>> values(config.reps);
  std::vector<double> base(config.reps);
  parallel_for(config.reps, config.threads, [&](std::size_t r) {
    SettingSpec spec = config.setting;
    spec.seed = mix_seed(config.setting.seed, r);
    const Sample s = generate(spec);
    const double h0 = detail::base_bandwidth(s, config);
    base[r] = h0;
    LocalEstimator est(s, config.kernel);
    std::vector<double> out(cells, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < na; ++a) {
      const double h = config.alpha_h[a] * h0;
      for (std::size_t zi = 0; zi < nz; ++zi) {
        const double z = grid[zi];
        std::optional<PairSums> sums;
        try {
          sums = est.sums(std::span<const double>(&z, 1), h);
        } catch (const AllWeightsZero&) {
          continue;
        }
        for (std::size_t e = 0; e < ne; ++e) {
          try {
            out[cell(a, e, zi)] = tau_value(config.estimators[e], *sums);
          } catch (const DegenerateWindow&) {
          }
        }
      }
    }
    values[r] = std::move(out);
  });

  MCReport rep;
  rep.config = config;
  rep.z_grid = grid;
  rep.base_bandwidth = base;
  std::vector<double> column(config.reps);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t e = 0; e < ne; ++e) {
      IntegratedRow ir;
      ir.estimator = config.estimators[e];
      ir.alpha_h = config.alpha_h[a];
      std::vector<double> zs, bias, sd, mse;
      for (std::size_t zi = 0; zi < nz; ++zi) {
        for (std::size_t r = 0; r < config.reps; ++r) column[r] = values[r][cell(a, e, zi)];
        LocalRow row;
        row.z = grid[zi];
        row.estimator = config.estimators[e];
        row.alpha_h = config.alpha_h[a];
        row.truth = true_tau(config.setting.id, grid[zi]);
        row.stats = detail::cell_stats(column, row.truth);
        ir.undefined += row.stats.undefined;
        if (row.stats.defined > 0) {
          zs.push_back(row.z);
          bias.push_back(row.stats.bias);
          sd.push_back(row.stats.sd);
          mse.push_back(row.stats.mse);
        }
        rep.local.push_back(row);
      }
      ir.points_used = zs.size();
      ir.ibias = trapezoid(zs, bias);
      ir.isd = trapezoid(zs, sd);
      ir.imse = trapezoid(zs, mse);
      rep.integrated.push_back(ir);
    }
  }
  return rep;
}

struct CVStudyRow {
  std::size_t n = 0;
  std::vector<double> h_cv;  // per replication
  double mean_h_cv = 0.0;
  double sd_h_cv = 0.0;  // divisor: replications
  double h_ref = 0.0;    // n^{-1/5}
  std::vector<IntegratedRow> integrated;  // one per (multiplier, estimator)
};

struct CVStudyConfig {
  Setting setting = Setting::two;
  std::vector<std::size_t> n_values{100, 500, 1000, 2000};
  std::size_t reps = 100;
  std::size_t n_pairs = 1000;
  std::vector<double> multipliers;  // empty: bandwidth statistics only
  std::vector<Estimator> estimators{kAllEstimators.begin(), kAllEstimators.end()};
  std::uint64_t seed = 0;
  KernelSpec kernel{};
  std::size_t threads = 1;
};

/// Cross-validated bandwidths over a ladder of sample sizes, and optionally
/// the integrated measures of the estimators at h = multiplier * h_CV.
inline std::vector<CVStudyRow> run_cv_study(const CVStudyConfig& config) {
  if (config.n_values.empty()) throw InvalidArgument("no sample size given");
  if (config.reps < 2) throw InvalidArgument("at least two replications are required");
  std::vector<CVStudyRow> rows;
  for (std::size_t idx = 0; idx < config.n_values.size(); ++idx) {
    const std::size_t n = config.n_values[idx];
    if (n < 4) throw InvalidArgument("cross-validation needs at least four observations");
    CVStudyRow row;
    row.n = n;
    row.h_ref = std::pow(static_cast<double>(n), -0.2);
    const std::uint64_t seed = mix_seed(config.seed, 0x100000000ULL + idx);
    if (config.multipliers.empty()) {
      row.h_cv.resize(config.reps);
      parallel_for(config.reps, config.threads, [&](std::size_t r) {
        const Sample s = generate({config.setting, n, mix_seed(seed, r)});
        MCConfig mc;
        mc.n_pairs = config.n_pairs;
        mc.kernel = config.kernel;
        mc.source = BandwidthSource::cross_validation;
        row.h_cv[r] = detail::base_bandwidth(s, mc);
      });
    } else {
      MCConfig mc;
      mc.setting = {config.setting, n, seed};
      mc.reps = config.reps;
      mc.estimators = config.estimators;
      mc.alpha_h = config.multipliers;
      mc.source = BandwidthSource::cross_validation;
      mc.n_pairs = config.n_pairs;
      mc.kernel = config.kernel;
      mc.threads = config.threads;
      MCReport rep = run_mc(mc);
      row.h_cv = rep.base_bandwidth;
      row.integrated = rep.integrated;
    }
    double sum = 0.0;
    for (double h : row.h_cv) sum += h;
    row.mean_h_cv = sum / static_cast<double>(row.h_cv.size());
    double ss = 0.0;
    for (double h : row.h_cv) ss += (h - row.mean_h_cv) * (h - row.mean_h_cv);
    row.sd_h_cv = std::sqrt(ss / static_cast<double>(row.h_cv.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace condtau
