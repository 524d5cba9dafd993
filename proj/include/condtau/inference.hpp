#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "condtau/error.hpp"
#include "condtau/estimators.hpp"
#include "condtau/kernels.hpp"
#include "condtau/sample.hpp"
#include "condtau/weights.hpp"

namespace condtau {

/// Plug-in for E[g_k(X_1, X) g_k(X_2, X) | Z = Z_1 = Z_2 = z]: a weighted
/// average over distinct index triples (a, b, c) of g_k(X_b, X_a) g_k(X_c, X_a),
/// normalised by the total weight of those triples.
///
/// O(m^2) in the number m of nonzero weights, using for each a
///   sum_{b != a, c != a, c != b} w_b w_c g_ba g_ca = m_a^2 - sum_{b != a} w_b^2 g_ba^2
/// with m_a = sum_{b != a} w_b g_ba.
inline double estimate_gg_moment(Concordance k, const Sample& sample, std::span<const double> z,
                                 const KernelSpec& spec, double h) {
  if (sample.size() < 3) throw InvalidArgument("the triple moment needs at least three observations");
  const WeightVector wv = nw_weights(sample, z, spec, h);
  if (wv.n_effective < 3) throw SparseWindow(3);

  std::vector<double> a1, a2, w;
  for (std::size_t i = 0; i < wv.weights.size(); ++i) {
    if (wv.weights[i] == 0.0) continue;
    a1.push_back(sample.x1(i));
    a2.push_back(sample.x2(i));
    w.push_back(wv.weights[i]);
  }
  const std::size_t m = w.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double lin = 0.0, sq = 0.0, mass = 0.0, mass_sq = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      const double gw = w[b] * g(k, a1[b], a2[b], a1[a], a2[a]);
      lin += gw;
      sq += gw * gw;
      mass += w[b];
      mass_sq += w[b] * w[b];
    }
    num += w[a] * (lin * lin - sq);
    den += w[a] * (mass * mass - mass_sq);
  }
  return num / den;
}

struct VarianceEstimate {
  Point z;
  Estimator kind = Estimator::tilde;
  Concordance k = Concordance::g2;
  double h_entry = 0.0;  // plug-in asymptotic variance, clamped at 0
  double raw = 0.0;
  bool clamped = false;
  double f_hat = 0.0;
  double gg_moment = 0.0;
  double tau = 0.0;
};

/// 4 int K^2 / f^_Z(z) * (E^[g g] - tau^2) with tau the estimator of `kind`
/// at z. Negative plug-ins are clamped to 0 and flagged.
inline VarianceEstimate estimate_variance(Estimator kind, const Sample& sample,
                                          std::span<const double> z, const KernelSpec& spec,
                                          double h) {
  VarianceEstimate v;
  v.z.assign(z.begin(), z.end());
  v.kind = kind;
  v.k = concordance_of(kind);
  v.f_hat = kde(sample, z, spec, h);
  if (!(v.f_hat > 0.0)) throw AllWeightsZero();
  v.gg_moment = estimate_gg_moment(v.k, sample, z, spec, h);
  v.tau = estimate(kind, sample, z, spec, h).value;
  v.raw = 4.0 * constants(spec).int_k2 / v.f_hat * (v.gg_moment - v.tau * v.tau);
  v.clamped = v.raw < 0.0;
  v.h_entry = std::max(0.0, v.raw);
  return v;
}

struct ConfidenceInterval {
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;
  double standard_error = 0.0;
};

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// center +/- q_{1-(1-level)/2} sqrt(h_entry / (n h^p)). With `truncate` the
/// bounds are clipped to [-1, 1].
inline ConfidenceInterval confidence_interval(double center, double h_entry, std::size_t n,
                                              double h, std::size_t p, double level,
                                              bool truncate = false) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must lie in (0, 1)");
  if (!(h_entry >= 0.0)) throw InvalidArgument("variance entry must be nonnegative");
  if (!(h > 0.0) || n == 0) throw InvalidArgument("need n > 0 and h > 0");
  ConfidenceInterval ci;
  ci.level = level;
  ci.center = center;
  ci.standard_error =
      std::sqrt(h_entry / (static_cast<double>(n) * std::pow(h, static_cast<double>(p))));
  const double half = normal_quantile(1.0 - (1.0 - level) / 2.0) * ci.standard_error;
  ci.lower = center - half;
  ci.upper = center + half;
  if (truncate) {
    ci.lower = std::clamp(ci.lower, -1.0, 1.0);
    ci.upper = std::clamp(ci.upper, -1.0, 1.0);
  }
  return ci;
}

inline ConfidenceInterval confidence_interval(const TauEstimate& est, const VarianceEstimate& var,
                                              std::size_t n, double level, bool truncate = false) {
  return confidence_interval(est.value, var.h_entry, n, est.h, est.z.size(), level, truncate);
}

}  // namespace condtau
