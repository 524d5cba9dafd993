#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "condtau/error.hpp"
#include "condtau/exact_sum.hpp"
#include "condtau/kernels.hpp"
#include "condtau/sample.hpp"

namespace condtau {

/// Nadaraya-Watson weights at a query point.
struct WeightVector {
  std::vector<double> weights;
  double s_n = 0.0;  // sum of squared weights
  Point z;
  double h = 0.0;
  std::size_t n_effective = 0;  // number of nonzero weights
  bool has_negative = false;
};

namespace detail {

inline constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();

inline void check_query(const Sample& sample, std::span<const double> z, const KernelSpec& spec,
                        double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("bandwidth must be positive and finite");
  if (spec.dim != sample.dim()) throw DimensionMismatch(sample.dim(), spec.dim);
  if (z.size() != sample.dim()) throw DimensionMismatch(sample.dim(), z.size());
}

// Unscaled kernel values K((Z_i - z) / h); rows `skip_a` and `skip_b` get 0.
inline std::vector<double> kernel_column(const Sample& sample, std::span<const double> z,
                                         const KernelSpec& spec, double h,
                                         std::size_t skip_a = kNoRow,
                                         std::size_t skip_b = kNoRow) {
  const std::size_t n = sample.size();
  const std::size_t p = sample.dim();
  std::vector<double> k(n, 0.0);
  const double* zs = sample.zs().data();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == skip_a || i == skip_b) continue;
    double v = 1.0;
    for (std::size_t d = 0; d < p && v != 0.0; ++d)
      v *= base_kernel(spec.family, (zs[i * p + d] - z[d]) / h);
    k[i] = v;
  }
  return k;
}

inline WeightVector normalize(std::vector<double> k, std::span<const double> z, double h) {
  ExactSum total;
  for (double v : k) total.add(v);
  const double denom = total.result();
  if (denom == 0.0) throw AllWeightsZero();

  WeightVector w;
  w.z.assign(z.begin(), z.end());
  w.h = h;
  ExactSum sq;
  for (double& v : k) {
    if (v == 0.0) continue;
    v /= denom;
    sq.add(v * v);
    ++w.n_effective;
    w.has_negative = w.has_negative || v < 0.0;
  }
  w.s_n = sq.result();
  w.weights = std::move(k);
  return w;
}

}  // namespace detail

/// w_i = K_h(Z_i - z) / sum_j K_h(Z_j - z). The h^{-p} factor cancels and is
/// not applied; the denominator is summed exactly so the weights do not depend
/// on the row order.
inline WeightVector nw_weights(const Sample& sample, std::span<const double> z,
                               const KernelSpec& spec, double h) {
  detail::check_query(sample, z, spec, h);
  if (sample.size() < 2) throw InvalidArgument("at least two observations are required");
  return detail::normalize(detail::kernel_column(sample, z, spec, h), z, h);
}

/// Weights computed as if rows i and j were removed; those rows get weight 0.
inline WeightVector nw_weights_excluding(const Sample& sample, std::span<const double> z,
                                         const KernelSpec& spec, double h, std::size_t i,
                                         std::size_t j) {
  detail::check_query(sample, z, spec, h);
  if (sample.size() < 4) throw InvalidArgument("leave-pair-out needs at least four observations");
  return detail::normalize(detail::kernel_column(sample, z, spec, h, i, j), z, h);
}

/// f^_Z(z) = n^{-1} sum_j K_h(Z_j - z).
inline double kde(const Sample& sample, std::span<const double> z, const KernelSpec& spec,
                  double h) {
  detail::check_query(sample, z, spec, h);
  if (sample.size() == 0) throw InvalidArgument("empty sample");
  ExactSum total;
  for (double v : detail::kernel_column(sample, z, spec, h)) total.add(v);
  const double hp = std::pow(h, static_cast<double>(sample.dim()));
  return total.result() / hp / static_cast<double>(sample.size());
}

/// Density estimate with K~ = K^2 / int K^2 in place of K.
inline double kde_squared_kernel(const Sample& sample, std::span<const double> z,
                                 const KernelSpec& spec, double h) {
  detail::check_query(sample, z, spec, h);
  if (sample.size() == 0) throw InvalidArgument("empty sample");
  ExactSum total;
  for (double v : detail::kernel_column(sample, z, spec, h)) total.add(v * v);
  const double hp = std::pow(h, static_cast<double>(sample.dim()));
  return total.result() / constants(spec).int_k2 / hp / static_cast<double>(sample.size());
}

}  // namespace condtau
