#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

#include "condtau/error.hpp"

namespace condtau {

enum class KernelFamily { epanechnikov, gaussian, uniform };

/// Product kernel on R^p built from a symmetric univariate base of the given
/// order. Only second-order bases are provided.
struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
  std::size_t dim = 1;
  int order = 2;

  KernelSpec() = default;
  KernelSpec(KernelFamily f, std::size_t p = 1, int alpha = 2) : family(f), dim(p), order(alpha) {
    validate();
  }

  void validate() const {
    if (dim == 0) throw InvalidArgument("kernel dimension must be positive");
    if (order < 2) throw InvalidArgument("kernel order must be at least 2");
    if (order != 2) throw InvalidArgument("only second-order kernels are implemented");
  }

  bool compact() const noexcept { return family != KernelFamily::gaussian; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Analytic constants of the product kernel K and of K~ = K^2 / int K^2.
struct KernelConstants {
  double sup_k;          // C_K = sup |K|
  double int_k2;         // int K^2
  double int_abs_k;      // int |K|
  double sup_ktilde;     // sup K~
  double int_ktilde2;    // int K~^2
  double support_radius; // sup-norm radius of the support; infinity if unbounded
};

namespace detail {

// Univariate bases; the support is open, so |u| = 1 evaluates to 0.
inline double base_kernel(KernelFamily f, double u) noexcept {
  switch (f) {
    case KernelFamily::epanechnikov: return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::uniform: return std::abs(u) < 1.0 ? 0.5 : 0.0;
    case KernelFamily::gaussian:
      return std::exp(-0.5 * u * u) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  }
  return 0.0;
}

struct BaseConstants {
  double sup, int2, int4, radius;
};

inline BaseConstants base_constants(KernelFamily f) noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (f) {
    case KernelFamily::epanechnikov: return {0.75, 0.6, 9.0 / 35.0, 1.0};
    case KernelFamily::uniform: return {0.5, 0.5, 0.125, 1.0};
    case KernelFamily::gaussian: {
      const double pi = std::numbers::pi;
      // phi(0), 1/(2 sqrt(pi)), (2 pi)^-2 sqrt(pi / 2)
      return {1.0 / std::sqrt(2.0 * pi), 0.5 / std::sqrt(pi),
              std::sqrt(pi / 2.0) / (4.0 * pi * pi), inf};
    }
  }
  return {0, 0, 0, 0};
}

}  // namespace detail

/// K(u) for u in R^p.
inline double evaluate(const KernelSpec& spec, std::span<const double> u) {
  if (u.size() != spec.dim) throw DimensionMismatch(spec.dim, u.size());
  double k = 1.0;
  for (double ud : u) {
    k *= detail::base_kernel(spec.family, ud);
    if (k == 0.0) break;
  }
  return k;
}

inline double evaluate(const KernelSpec& spec, double u) {
  return evaluate(spec, std::span<const double>(&u, 1));
}

/// K_h(v) = h^{-p} K(v / h).
inline double scaled_evaluate(const KernelSpec& spec, double h, std::span<const double> v) {
  if (!(h > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (v.size() != spec.dim) throw DimensionMismatch(spec.dim, v.size());
  double k = 1.0;
  for (double vd : v) k *= detail::base_kernel(spec.family, vd / h);
  return k / std::pow(h, static_cast<double>(spec.dim));
}

inline KernelConstants constants(const KernelSpec& spec) {
  spec.validate();
  const auto b = detail::base_constants(spec.family);
  const double p = static_cast<double>(spec.dim);
  KernelConstants c{};
  c.sup_k = std::pow(b.sup, p);
  c.int_k2 = std::pow(b.int2, p);
  c.int_abs_k = 1.0;  // all bases are nonnegative and integrate to one
  c.sup_ktilde = c.sup_k * c.sup_k / c.int_k2;
  c.int_ktilde2 = std::pow(b.int4, p) / (c.int_k2 * c.int_k2);
  c.support_radius = b.radius;
  return c;
}

inline std::string_view kernel_name(KernelFamily f) noexcept {
  switch (f) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::uniform: return "uniform";
  }
  return "?";
}

inline KernelFamily kernel_from_name(std::string_view name) {
  if (name == "epanechnikov" || name == "epa") return KernelFamily::epanechnikov;
  if (name == "gaussian" || name == "gauss") return KernelFamily::gaussian;
  if (name == "uniform" || name == "box") return KernelFamily::uniform;
  throw InvalidArgument("unknown kernel '" + std::string(name) +
                        "' (expected epanechnikov, gaussian or uniform)");
}

}  // namespace condtau
