#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "condtau/error.hpp"
#include "condtau/estimators.hpp"
#include "condtau/exact_sum.hpp"
#include "condtau/kernels.hpp"
#include "condtau/parallel.hpp"
#include "condtau/sample.hpp"

namespace condtau {

/// Sample standard deviation (divisor n - 1) of covariate coordinate d.
inline double covariate_sd(const Sample& sample, std::size_t d) {
  const std::size_t n = sample.size();
  const std::size_t p = sample.dim();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += sample.zs()[i * p + d];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = sample.zs()[i * p + d] - mean;
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

/// h = alpha_h * sd(Z) * n^{-1/5}. For p > 1 the scale is the geometric mean
/// of the coordinate standard deviations and the rate n^{-1/(4+p)}.
inline double rule_of_thumb(const Sample& sample, double alpha_h) {
  if (sample.size() < 2) throw InvalidArgument("rule of thumb needs at least two observations");
  if (!(alpha_h > 0.0)) throw InvalidArgument("alpha_h must be positive");
  const std::size_t p = sample.dim();
  double scale = 0.0;
  if (p == 1) {
    scale = covariate_sd(sample, 0);
    if (!(scale > 0.0)) throw InvalidArgument("zero variance in Z");
  } else {
    double log_scale = 0.0;
    for (std::size_t d = 0; d < p; ++d) {
      const double sd = covariate_sd(sample, d);
      if (!(sd > 0.0)) throw InvalidArgument("zero variance in Z");
      log_scale += std::log(sd);
    }
    scale = std::exp(log_scale / static_cast<double>(p));
  }
  const double n = static_cast<double>(sample.size());
  return alpha_h * scale * std::pow(n, -1.0 / (4.0 + static_cast<double>(p)));
}

struct PairSelection {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // i < j
  double tilde_h = 0.0;
};

namespace detail {

inline double sup_distance(const Sample& s, std::size_t i, std::size_t j) {
  const std::size_t p = s.dim();
  double d = 0.0;
  for (std::size_t k = 0; k < p; ++k) d = std::max(d, std::abs(s.zs()[i * p + k] - s.zs()[j * p + k]));
  return d;
}

}  // namespace detail

/// Keeps the pairs whose covariates are closest in sup-norm. tilde_h is the
/// empirical quantile of order N_pairs / (n(n-1)/2) of the pairwise
/// distances, i.e. the N_pairs-th smallest; every pair at distance <= tilde_h
/// is kept, so ties can add pairs.
inline PairSelection select_pairs(const Sample& sample, std::size_t n_pairs) {
  const std::size_t n = sample.size();
  if (n < 2) throw InvalidArgument("pair selection needs at least two observations");
  const std::size_t total = n * (n - 1) / 2;
  if (n_pairs < 1 || n_pairs > total)
    throw InvalidArgument("N_pairs must lie in [1, n(n-1)/2]");

  std::vector<double> dist;
  dist.reserve(total);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist.push_back(detail::sup_distance(sample, i, j));
  auto nth = dist.begin() + static_cast<std::ptrdiff_t>(n_pairs - 1);
  std::nth_element(dist.begin(), nth, dist.end());

  PairSelection sel;
  sel.tilde_h = *nth;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (detail::sup_distance(sample, i, j) <= sel.tilde_h) sel.pairs.emplace_back(i, j);
  return sel;
}

struct CVConfig {
  Concordance k = Concordance::g2;
  // Compare g2 against the rescaled estimator instead of tau^(2).
  bool rescaled = false;
  std::size_t n_pairs = 1000;
  std::vector<double> h_grid;
  KernelSpec kernel{};
  std::size_t threads = 1;
  // Evaluate leave-out estimators with the quadratic exact-sum path instead of
  // the O(m log m) sweep.
  bool exact = false;

  Estimator estimator() const noexcept { return rescaled ? Estimator::tilde : estimator_of(k); }

  void validate() const {
    if (rescaled && k != Concordance::g2)
      throw InvalidArgument("the rescaled estimator is paired with g2");
    if (n_pairs < 1) throw InvalidArgument("N_pairs must be positive");
    if (h_grid.empty()) throw InvalidArgument("bandwidth grid is empty");
    for (double h : h_grid)
      if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("bandwidths must be positive");
  }
};

/// 20 (by default) geometrically spaced bandwidths spanning
/// [lo, hi] x rule_of_thumb(sample, 1).
inline std::vector<double> default_h_grid(const Sample& sample, std::size_t count = 20,
                                          double lo = 0.25, double hi = 4.0) {
  if (count == 0) throw InvalidArgument("grid size must be positive");
  const double base = rule_of_thumb(sample, 1.0);
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = base * lo * std::pow(hi / lo, t);
  }
  return grid;
}

/// Estimator at (Z_i + Z_j)/2 on the sample with rows i and j removed.
inline TauEstimate tau_hat_leave_pair_out(Estimator kind, const Sample& sample,
                                          std::pair<std::size_t, std::size_t> exclude,
                                          const KernelSpec& spec, double h) {
  const auto [i, j] = exclude;
  if (sample.size() < 4) throw InvalidArgument("leave-pair-out needs at least four observations");
  if (i >= sample.size() || j >= sample.size() || i == j)
    throw InvalidArgument("excluded rows must be two distinct valid indices");
  Point mid(sample.dim());
  for (std::size_t d = 0; d < sample.dim(); ++d) mid[d] = (sample.z(i)[d] + sample.z(j)[d]) / 2.0;
  const auto w = nw_weights_excluding(sample, mid, spec, h, i, j);
  return detail::make_estimate(kind, detail::pair_sums_from_weights(sample, w), mid, h);
}

inline TauEstimate tau_hat_leave_pair_out(Concordance k, const Sample& sample,
                                          std::pair<std::size_t, std::size_t> exclude,
                                          const KernelSpec& spec, double h) {
  return tau_hat_leave_pair_out(estimator_of(k), sample, exclude, spec, h);
}

struct CVPoint {
  double h = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
  std::size_t used_pairs = 0;
  std::size_t skipped_pairs = 0;  // leave-out estimator undefined at the midpoint
};

namespace detail {

inline CVPoint cv_criterion_with(const LocalEstimator& est, double h, const CVConfig& config,
                                 const PairSelection& selection) {
  const Sample& s = est.sample();
  if (selection.pairs.empty()) throw InvalidArgument("pair selection is empty");
  if (!(selection.tilde_h > 0.0))
    throw InvalidArgument("pair selection has tilde_h = 0 (duplicated covariates)");
  const Estimator kind = config.estimator();
  const std::size_t p = s.dim();
  CVPoint out;
  out.h = h;
  ExactSum sum;
  Point mid(p);
  for (const auto& [i, j] : selection.pairs) {
    for (std::size_t d = 0; d < p; ++d) mid[d] = (s.z(i)[d] + s.z(j)[d]) / 2.0;
    double tau;
    try {
      tau = tau_value(kind, config.exact ? est.sums(mid, h, i, j) : est.fast_sums(mid, h, i, j));
    } catch (const AllWeightsZero&) {
      ++out.skipped_pairs;
      continue;
    } catch (const DegenerateWindow&) {
      ++out.skipped_pairs;
      continue;
    }
    // Both orientations of the ordered double sum; g1 and g3 are asymmetric.
    const double a = g(config.k, s.x1(i), s.x2(i), s.x1(j), s.x2(j)) - tau;
    const double b = g(config.k, s.x1(j), s.x2(j), s.x1(i), s.x2(i)) - tau;
    sum.add(a * a);
    sum.add(b * b);
    ++out.used_pairs;
  }
  if (out.used_pairs == 0) return out;
  const double n = static_cast<double>(s.size());
  const double box = 1.0 / std::pow(selection.tilde_h, static_cast<double>(p));
  // Rescale to the full selection so skipped pairs do not lower the criterion.
  const double coverage =
      static_cast<double>(selection.pairs.size()) / static_cast<double>(out.used_pairs);
  out.value = 2.0 / (n * (n - 1.0)) * box * coverage * sum.result();
  return out;
}

}  // namespace detail

/// Leave-pair-out criterion with the box kernel 1{|z|_inf <= 1} at scale tilde_h.
inline CVPoint cv_criterion(const Sample& sample, double h, const CVConfig& config,
                            const PairSelection& selection) {
  if (!(h > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (sample.size() < 4) throw InvalidArgument("cross-validation needs at least four observations");
  LocalEstimator est(sample, config.kernel);
  return detail::cv_criterion_with(est, h, config, selection);
}

struct CVResult {
  double h_cv = 0.0;
  std::vector<CVPoint> curve;
  PairSelection selection;
};

/// Grid argmin of the criterion; ties go to the smallest bandwidth. The grid
/// is sorted and deduplicated first. N_pairs is capped at n(n-1)/2.
inline CVResult cv_select(const Sample& sample, const CVConfig& config) {
  config.validate();
  if (sample.size() < 4) throw InvalidArgument("cross-validation needs at least four observations");
  std::vector<double> grid = config.h_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const std::size_t n = sample.size();
  CVResult res;
  res.selection = select_pairs(sample, std::min(config.n_pairs, n * (n - 1) / 2));
  LocalEstimator est(sample, config.kernel);
  res.curve.resize(grid.size());
  parallel_for(grid.size(), config.threads, [&](std::size_t g_idx) {
    res.curve[g_idx] = detail::cv_criterion_with(est, grid[g_idx], config, res.selection);
  });

  bool found = false;
  double best = 0.0;
  for (const auto& pt : res.curve) {
    if (std::isnan(pt.value)) continue;
    if (!found || pt.value < best) {
      best = pt.value;
      res.h_cv = pt.h;
      found = true;
    }
  }
  if (!found) throw Error("cross-validation criterion is undefined for every bandwidth");
  return res;
}

}  // namespace condtau
