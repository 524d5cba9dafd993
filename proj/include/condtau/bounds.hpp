#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "condtau/error.hpp"
#include "condtau/estimators.hpp"
#include "condtau/kernels.hpp"
#include "condtau/parallel.hpp"
#include "condtau/simulation.hpp"

namespace condtau {

/// Regularity constants of the covariate density and of the joint density.
struct DensityConstants {
  double f_min = 1.0;
  double f_max = 1.0;
  double f_z = 1.0;  // density of Z at the query point
  double c_k_alpha = 0.0;
  double c_ktilde_2 = 0.0;
  double c_xz_alpha = 0.0;
  int alpha = 2;

  void validate() const {
    if (!(f_min > 0.0) || !(f_max >= f_min) || !std::isfinite(f_max))
      throw InvalidArgument("density bounds need 0 < f_min <= f_max");
    if (!(f_z >= f_min && f_z <= f_max)) throw InvalidArgument("f_z must lie in [f_min, f_max]");
    if (!(c_k_alpha >= 0.0) || !(c_ktilde_2 >= 0.0) || !(c_xz_alpha >= 0.0))
      throw InvalidArgument("smoothness constants must be nonnegative");
    if (alpha < 1) throw InvalidArgument("alpha must be a positive integer");
  }
};

struct BoundCondition {
  std::string name;
  bool ok = true;
};

struct BoundResult {
  double threshold_x = std::numeric_limits<double>::quiet_NaN();
  double prob_bound = 0.0;  // raw_bound clipped to [0, 1]
  double raw_bound = 0.0;
  std::vector<BoundCondition> conditions;
};

namespace detail {

inline double alpha_term(double c, double h, int alpha) {
  return c * std::pow(h, alpha) / std::tgamma(alpha + 1.0);
}

inline void check_bound_inputs(std::size_t n, double h, std::size_t p) {
  if (n < 2) throw InvalidArgument("n must be at least 2");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("bandwidth must be positive");
  if (p == 0) throw InvalidArgument("dimension must be positive");
}

inline double clip01(double v) { return std::min(std::max(v, 0.0), 1.0); }

}  // namespace detail

/// Lower bound on P(f^_Z(z) > 0):
/// 1 - 2 exp(-n h^p a^2 / (2 f_max int K^2 + (2/3) C_K a)), a = f_min - C_{K,a} h^a / a!.
inline BoundResult positivity_bound(std::size_t n, double h, std::size_t p,
                                    const KernelConstants& kc, const DensityConstants& dc) {
  detail::check_bound_inputs(n, h, p);
  if (!(dc.f_min > 0.0) || !(dc.f_max >= dc.f_min))
    throw InvalidArgument("density bounds need 0 < f_min <= f_max");
  const double a = dc.f_min - detail::alpha_term(dc.c_k_alpha, h, dc.alpha);
  BoundResult r;
  r.conditions.push_back({"C_K_alpha h^alpha / alpha! < f_min", a > 0.0});
  if (!(a > 0.0)) throw ConditionViolated("C_K_alpha h^alpha / alpha! < f_min");
  const double nh = static_cast<double>(n) * std::pow(h, static_cast<double>(p));
  r.raw_bound =
      1.0 - 2.0 * std::exp(-nh * a * a / (2.0 * dc.f_max * kc.int_k2 + 2.0 / 3.0 * kc.sup_k * a));
  r.prob_bound = detail::clip01(r.raw_bound);
  return r;
}

/// Deviation level x and the probability that |tau^(k) - tau| exceeds it.
inline BoundResult deviation_bound(Concordance k, std::size_t n, double h, std::size_t p, double t,
                                   double t_prime, const KernelConstants& kc,
                                   const DensityConstants& dc) {
  detail::check_bound_inputs(n, h, p);
  dc.validate();
  BoundResult r;
  const double bias_f = detail::alpha_term(dc.c_k_alpha, h, dc.alpha);
  const double d = dc.f_z - dc.c_ktilde_2 * h * h;
  const std::pair<const char*, bool> checks[] = {
      {"t > 0", t > 0.0},
      {"t' > 0", t_prime > 0.0},
      {"C_K_alpha h^alpha / alpha! + t <= f_min / 2", bias_f + t <= dc.f_min / 2.0},
      {"C_Ktilde_2 h^2 < f_z", d > 0.0},
  };
  for (const auto& [name, ok] : checks) r.conditions.push_back({name, ok});
  for (const auto& [name, ok] : checks)
    if (!ok) throw ConditionViolated(name);

  const double c = k == Concordance::g2 ? 2.0 : 4.0;
  const double nd = static_cast<double>(n);
  const double hp = std::pow(h, static_cast<double>(p));
  const double fz = dc.f_z;
  r.threshold_x = c / (fz * fz) *
                  (detail::alpha_term(dc.c_xz_alpha, h, dc.alpha) +
                   3.0 * fz * kc.int_k2 / (2.0 * nd * hp) + t_prime) *
                  (1.0 + 16.0 * fz * fz / (dc.f_min * dc.f_min * dc.f_min) * (bias_f + t));

  const double t1 =
      2.0 * std::exp(-nd * hp * t * t / (2.0 * dc.f_max * kc.int_k2 + 2.0 / 3.0 * kc.sup_k * t));
  const double t2 = 2.0 * std::exp(-(nd - 1.0) * hp * hp * t_prime * t_prime /
                                   (4.0 * dc.f_max * dc.f_max * kc.int_k2 * kc.int_k2 +
                                    8.0 / 3.0 * kc.sup_k * kc.sup_k * t_prime));
  const double t3 = 2.0 * std::exp(-nd * hp * d * d /
                                   (8.0 * dc.f_max * kc.int_ktilde2 + 4.0 * kc.sup_ktilde * d / 3.0));
  r.raw_bound = t1 + t2 + t3;
  r.prob_bound = detail::clip01(r.raw_bound);
  return r;
}

/// Constants for Setting 1 at an interior point: Z is uniform, so the density
/// terms are exact, and the joint-density constant is a numerical upper bound
/// valid for |z - 0.5| + h <= 0.14 with the Epanechnikov kernel.
inline DensityConstants setting1_interior_constants() {
  DensityConstants dc;
  dc.f_min = dc.f_max = dc.f_z = 1.0;
  dc.c_k_alpha = 0.0;
  dc.c_ktilde_2 = 0.0;
  dc.c_xz_alpha = 17.4;
  dc.alpha = 2;
  return dc;
}

struct ValidityConfig {
  Setting setting = Setting::one;
  std::size_t n = 12000;
  double h = 0.1;
  double z = 0.5;
  double t = 0.08;
  double t_prime = 0.32;
  Concordance k = Concordance::g2;
  std::size_t reps = 2000;
  std::uint64_t seed = 0;
  KernelSpec kernel{};
  DensityConstants constants = setting1_interior_constants();
  std::size_t threads = 1;
};

struct ValidityReport {
  BoundResult bound;
  std::size_t reps = 0;
  std::size_t violations = 0;  // includes undefined estimates
  std::size_t undefined = 0;
  double frequency = 0.0;
  double tolerance = 0.0;  // 3 binomial standard errors at prob_bound
  bool vacuous = false;    // prob_bound clipped at 1
  bool consistent = false;

  friend bool operator==(const ValidityReport& a, const ValidityReport& b) {
    return a.bound.threshold_x == b.bound.threshold_x && a.bound.raw_bound == b.bound.raw_bound &&
           a.reps == b.reps && a.violations == b.violations && a.undefined == b.undefined &&
           a.frequency == b.frequency;
  }
};

/// Empirical frequency of |tau^(k)(z) - tau(z)| > x over seeded replications,
/// compared with the deviation bound.
inline ValidityReport bound_validity_check(const ValidityConfig& cfg) {
  if (cfg.reps < 1) throw InvalidArgument("at least one replication is required");
  if (!in_support(cfg.setting, cfg.z)) throw InvalidArgument("z is outside the setting's support");
  ValidityReport rep;
  rep.reps = cfg.reps;
  rep.bound = deviation_bound(cfg.k, cfg.n, cfg.h, cfg.kernel.dim, cfg.t, cfg.t_prime,
                              constants(cfg.kernel), cfg.constants);
  const double truth = true_tau(cfg.setting, cfg.z);
  const Estimator kind = estimator_of(cfg.k);
  std::vector<char> violated(cfg.reps, 0), undefined(cfg.reps, 0);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const Sample s = generate({cfg.setting, cfg.n, mix_seed(cfg.seed, r)});
    LocalEstimator est(s, cfg.kernel);
    try {
      const double v = est.estimate(kind, std::span<const double>(&cfg.z, 1), cfg.h).value;
      violated[r] = std::abs(v - truth) > rep.bound.threshold_x;
    } catch (const AllWeightsZero&) {
      undefined[r] = 1;
      violated[r] = 1;
    }
  });
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    rep.violations += violated[r];
    rep.undefined += undefined[r];
  }
  const double reps = static_cast<double>(cfg.reps);
  rep.frequency = static_cast<double>(rep.violations) / reps;
  rep.vacuous = rep.bound.prob_bound >= 1.0;
  rep.tolerance = 3.0 * std::sqrt(rep.bound.prob_bound * (1.0 - rep.bound.prob_bound) / reps);
  rep.consistent = rep.vacuous || rep.frequency <= rep.bound.prob_bound + rep.tolerance;
  return rep;
}

}  // namespace condtau
