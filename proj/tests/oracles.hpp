#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond the Sample container.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "condtau/kernels.hpp"
#include "condtau/sample.hpp"

namespace oracle {

/// Exact sum of doubles in MPFR, rounded once to nearest.
class MpfrSum {
public:
  MpfrSum() {
    mpfr_init2(acc_, 4400);
    mpfr_set_zero(acc_, 1);
  }
  ~MpfrSum() { mpfr_clear(acc_); }
  MpfrSum(const MpfrSum&) = delete;
  MpfrSum& operator=(const MpfrSum&) = delete;

  void add(double x) { mpfr_add_d(acc_, acc_, x, MPFR_RNDN); }
  double value() const { return mpfr_get_d(acc_, MPFR_RNDN); }

private:
  mpfr_t acc_;
};

inline double exact_sum(const std::vector<double>& v) {
  MpfrSum s;
  for (double x : v) s.add(x);
  return s.value();
}

inline double base_kernel(condtau::KernelFamily f, double u) {
  switch (f) {
    case condtau::KernelFamily::epanechnikov: return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case condtau::KernelFamily::uniform: return std::abs(u) < 1.0 ? 0.5 : 0.0;
    case condtau::KernelFamily::gaussian:
      return std::exp(-0.5 * u * u) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  }
  return 0.0;
}

/// Nadaraya-Watson weights with an exactly summed denominator.
inline std::vector<double> weights(const condtau::Sample& s, const std::vector<double>& z,
                                   condtau::KernelFamily f, double h,
                                   std::size_t skip_a = static_cast<std::size_t>(-1),
                                   std::size_t skip_b = static_cast<std::size_t>(-1)) {
  const std::size_t n = s.size(), p = s.dim();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == skip_a || i == skip_b) continue;
    double v = 1.0;
    for (std::size_t d = 0; d < p && v != 0.0; ++d) v *= base_kernel(f, (s.z(i)[d] - z[d]) / h);
    k[i] = v;
  }
  const double denom = exact_sum(k);
  for (double& v : k) v /= denom;
  return k;
}

struct Taus {
  double tau1, tau2, tau3, tilde, s_n;
};

/// Ordered double loop over i != j with the indicator forms of the three
/// estimators, each sum accumulated exactly and rounded once.
inline Taus estimators(const condtau::Sample& s, const std::vector<double>& w) {
  const std::size_t n = s.size();
  MpfrSum c1, c2, c3, sq;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] != 0.0) sq.add(w[i] * w[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || w[i] == 0.0 || w[j] == 0.0) continue;
      const double prod = w[i] * w[j];
      const double a1 = s.x1(i), a2 = s.x2(i), b1 = s.x1(j), b2 = s.x2(j);
      if (a1 < b1 && a2 < b2) c1.add(prod);
      const double sg = ((a1 < b1) - (a1 > b1)) * ((a2 < b2) - (a2 > b2));
      if (sg != 0.0) c2.add(sg * prod);
      if (a1 < b1 && a2 > b2) c3.add(prod);
    }
  }
  Taus t;
  t.s_n = sq.value();
  t.tau1 = 4.0 * c1.value() - 1.0;
  t.tau2 = c2.value();
  t.tau3 = 1.0 - 4.0 * c3.value();
  t.tilde = t.tau2 / (1.0 - t.s_n);
  // Each estimator is reported inside its attainable range.
  auto into = [](double& v, double lo, double hi) { v = v < lo ? lo : (v > hi ? hi : v); };
  into(t.tau1, -1.0, 1.0 - 2.0 * t.s_n);
  into(t.tau2, -1.0 + t.s_n, 1.0 - t.s_n);
  into(t.tau3, -1.0 + 2.0 * t.s_n, 1.0);
  into(t.tilde, -1.0, 1.0);
  return t;
}

/// Classical sample Kendall's tau by direct pair counting (no ties).
inline double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long long c = 0, d = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0) ++c;
      if (s < 0) ++d;
    }
  return static_cast<double>(c - d) / (static_cast<double>(n) * (n - 1) / 2.0);
}

inline double g(int k, double a1, double a2, double b1, double b2) {
  switch (k) {
    case 1: return 4.0 * ((a1 < b1) && (a2 < b2)) - 1.0;
    case 2: return static_cast<double>(((a1 < b1) - (a1 > b1)) * ((a2 < b2) - (a2 > b2)));
    default: return 1.0 - 4.0 * ((a1 < b1) && (a2 > b2));
  }
}

/// Triple loop over distinct (a, b, c) of w_a w_b w_c g(X_b, X_a) g(X_c, X_a),
/// divided by the sum of the same weight products.
inline double gg_moment(int k, const condtau::Sample& s, const std::vector<double>& w) {
  const std::size_t n = s.size();
  long double num = 0.0L, den = 0.0L;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        if (a == b || a == c || b == c) continue;
        const long double wp = static_cast<long double>(w[a]) * w[b] * w[c];
        num += wp * g(k, s.x1(b), s.x2(b), s.x1(a), s.x2(a)) * g(k, s.x1(c), s.x2(c), s.x1(a), s.x2(a));
        den += wp;
      }
  return static_cast<double>(num / den);
}

/// All pairwise sup-norm distances, sorted.
inline std::vector<double> sorted_distances(const condtau::Sample& s) {
  std::vector<double> d;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      double m = 0.0;
      for (std::size_t k = 0; k < s.dim(); ++k) m = std::max(m, std::abs(s.z(i)[k] - s.z(j)[k]));
      d.push_back(m);
    }
  std::sort(d.begin(), d.end());
  return d;
}

/// Composite rule with the end-point weights written out explicitly.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return 0.0;
  long double acc = 0.5L * (x[1] - x[0]) * y[0] + 0.5L * (x[m - 1] - x[m - 2]) * y[m - 1];
  for (std::size_t i = 1; i + 1 < m; ++i) acc += 0.5L * (x[i + 1] - x[i - 1]) * y[i];
  return static_cast<double>(acc);
}

/// Random tie-free sample with a smooth dependence on Z.
inline condtau::Sample random_sample(std::mt19937_64& rng, std::size_t n, std::size_t p = 1) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> x1(n), x2(n), z(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double zsum = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      z[i * p + d] = ud(rng);
      zsum += z[i * p + d];
    }
    const double e = nd(rng);
    x1[i] = e;
    x2[i] = (zsum / static_cast<double>(p) - 0.5) * 2.0 * e + nd(rng);
  }
  return condtau::Sample(std::move(x1), std::move(x2), std::move(z), p);
}

}  // namespace oracle
