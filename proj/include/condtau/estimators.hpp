#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "condtau/error.hpp"
#include "condtau/exact_sum.hpp"
#include "condtau/kernels.hpp"
#include "condtau/sample.hpp"
#include "condtau/weights.hpp"

namespace condtau {

enum class Concordance { g1 = 1, g2 = 2, g3 = 3 };
enum class Estimator { tau1, tau2, tau3, tilde };

inline constexpr std::array<Estimator, 4> kAllEstimators{Estimator::tau1, Estimator::tau2,
                                                         Estimator::tau3, Estimator::tilde};

inline std::string_view estimator_name(Estimator e) noexcept {
  switch (e) {
    case Estimator::tau1: return "tau1";
    case Estimator::tau2: return "tau2";
    case Estimator::tau3: return "tau3";
    case Estimator::tilde: return "tilde";
  }
  return "?";
}

inline Estimator estimator_from_name(std::string_view s) {
  if (s == "tau1" || s == "1") return Estimator::tau1;
  if (s == "tau2" || s == "2") return Estimator::tau2;
  if (s == "tau3" || s == "3") return Estimator::tau3;
  if (s == "tilde" || s == "4") return Estimator::tilde;
  throw InvalidArgument("unknown estimator '" + std::string(s) +
                        "' (expected tau1, tau2, tau3 or tilde)");
}

/// Concordance function whose conditional mean the estimator of the same
/// index targets; the rescaled estimator shares g2.
inline Concordance concordance_of(Estimator e) noexcept {
  switch (e) {
    case Estimator::tau1: return Concordance::g1;
    case Estimator::tau3: return Concordance::g3;
    default: return Concordance::g2;
  }
}

inline Estimator estimator_of(Concordance k) noexcept {
  switch (k) {
    case Concordance::g1: return Estimator::tau1;
    case Concordance::g3: return Estimator::tau3;
    default: return Estimator::tau2;
  }
}

inline Concordance concordance_from_int(int k) {
  if (k < 1 || k > 3) throw InvalidArgument("concordance index must be 1, 2 or 3");
  return static_cast<Concordance>(k);
}

/// g_k(x_i, x_j) with strict inequalities; ties contribute as "neither".
inline double g(Concordance k, double xi1, double xi2, double xj1, double xj2) noexcept {
  switch (k) {
    case Concordance::g1: return (xi1 < xj1 && xi2 < xj2) ? 3.0 : -1.0;
    case Concordance::g2: {
      // Sign product rather than the raw product, which can underflow to 0.
      const int a = (xi1 > xj1) - (xi1 < xj1);
      const int b = (xi2 > xj2) - (xi2 < xj2);
      return static_cast<double>(a * b);
    }
    case Concordance::g3: return (xi1 < xj1 && xi2 > xj2) ? -3.0 : 1.0;
  }
  return 0.0;
}

inline double g(Concordance k, std::array<double, 2> xi, std::array<double, 2> xj) noexcept {
  return g(k, xi[0], xi[1], xj[0], xj[1]);
}

/// Weighted pair sums shared by all estimators at one point. Each sum is the
/// exact sum of the rounded products w_i * w_j, rounded once.
struct PairSums {
  double concordant = 0.0;   // sum over unordered concordant pairs
  double discordant = 0.0;   // sum over unordered discordant pairs
  double difference = 0.0;   // concordant - discordant, rounded once
  double s_n = 0.0;
  std::size_t n_effective = 0;
  std::size_t tied_pairs = 0;  // active pairs tied in x1 or x2
  bool has_negative = false;
};

struct TauEstimate {
  Estimator kind = Estimator::tilde;
  Point z;
  double value = 0.0;
  double s_n = 0.0;
  double h = 0.0;
  std::size_t n_effective = 0;
  std::size_t tied_pairs = 0;
  // Signed weights void the range guarantees.
  bool negative_weights = false;
};

/// Each value is projected onto its range [-1, 1 - 2 s_n], [-1 + s_n, 1 - s_n],
/// [-1 + 2 s_n, 1] or [-1, 1]. Weights that sum to 1 only up to rounding can
/// otherwise land one ulp outside when the window is perfectly (dis)concordant.
/// Signed weights carry no range, so they are left alone.
inline double tau_value(Estimator kind, const PairSums& s) {
  auto range = [&](double v, double lo, double hi) {
    return s.has_negative ? v : std::clamp(v, lo, std::max(lo, hi));
  };
  switch (kind) {
    case Estimator::tau1: return range(4.0 * s.concordant - 1.0, -1.0, 1.0 - 2.0 * s.s_n);
    case Estimator::tau2: return range(2.0 * s.difference, -1.0 + s.s_n, 1.0 - s.s_n);
    case Estimator::tau3: return range(1.0 - 4.0 * s.discordant, -1.0 + 2.0 * s.s_n, 1.0);
    case Estimator::tilde:
      if (s.n_effective < 2) throw DegenerateWindow();
      return range(2.0 * s.difference / (1.0 - s.s_n), -1.0, 1.0);
  }
  return 0.0;
}

namespace detail {

inline int sign(double d) noexcept { return (d > 0.0) - (d < 0.0); }

// Fused single pass over the unordered active pairs.
inline PairSums accumulate_pairs(std::span<const double> a, std::span<const double> b,
                                 std::span<const double> w) {
  ExactSum conc;
  ExactSum disc;
  std::size_t ties = 0;
  const std::size_t m = w.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double ai = a[i], bi = b[i], wi = w[i];
    for (std::size_t j = i + 1; j < m; ++j) {
      const int s = sign(ai - a[j]) * sign(bi - b[j]);
      const double prod = wi * w[j];
      if (s > 0)
        conc.add(prod);
      else if (s < 0)
        disc.add(prod);
      else
        ++ties;
    }
  }
  PairSums out;
  out.concordant = conc.result();
  out.discordant = disc.result();
  conc -= disc;
  out.difference = conc.result();
  out.tied_pairs = ties;
  return out;
}

inline PairSums pair_sums_from_weights(const Sample& sample, const WeightVector& w) {
  std::vector<double> a, b, ws;
  a.reserve(w.n_effective);
  b.reserve(w.n_effective);
  ws.reserve(w.n_effective);
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    if (w.weights[i] == 0.0) continue;
    a.push_back(sample.x1(i));
    b.push_back(sample.x2(i));
    ws.push_back(w.weights[i]);
  }
  PairSums s = accumulate_pairs(a, b, ws);
  s.s_n = w.s_n;
  s.n_effective = w.n_effective;
  s.has_negative = w.has_negative;
  return s;
}

inline TauEstimate make_estimate(Estimator kind, const PairSums& s, std::span<const double> z,
                                 double h) {
  TauEstimate e;
  e.kind = kind;
  e.z.assign(z.begin(), z.end());
  e.value = tau_value(kind, s);
  e.s_n = s.s_n;
  e.h = h;
  e.n_effective = s.n_effective;
  e.tied_pairs = s.tied_pairs;
  e.negative_weights = s.has_negative;
  return e;
}

}  // namespace detail

inline PairSums pair_sums(const Sample& sample, std::span<const double> z, const KernelSpec& spec,
                          double h) {
  return detail::pair_sums_from_weights(sample, nw_weights(sample, z, spec, h));
}

/// Raw estimators tau^(1), tau^(2), tau^(3) at z.
inline TauEstimate tau_hat(Estimator kind, const Sample& sample, std::span<const double> z,
                           const KernelSpec& spec, double h) {
  if (kind == Estimator::tilde)
    throw InvalidArgument("tau_hat computes the raw estimators; use tau_tilde");
  return detail::make_estimate(kind, pair_sums(sample, z, spec, h), z, h);
}

/// Rescaled estimator tau^(2) / (1 - s_n), valued in [-1, 1].
inline TauEstimate tau_tilde(const Sample& sample, std::span<const double> z,
                             const KernelSpec& spec, double h) {
  return detail::make_estimate(Estimator::tilde, pair_sums(sample, z, spec, h), z, h);
}

inline TauEstimate estimate(Estimator kind, const Sample& sample, std::span<const double> z,
                            const KernelSpec& spec, double h) {
  return detail::make_estimate(kind, pair_sums(sample, z, spec, h), z, h);
}

/// Evaluates many points over one sample. For a univariate covariate and a
/// compact kernel, rows are pre-sorted by Z so each point only visits the
/// observations inside its window. Results are bit-identical to the free
/// functions.
class LocalEstimator {
public:
  LocalEstimator(const Sample& sample, KernelSpec spec) : sample_(&sample), spec_(spec) {
    spec_.validate();
    if (spec_.dim != sample.dim()) throw DimensionMismatch(sample.dim(), spec_.dim);
    if (sample.dim() == 1 && spec_.compact()) {
      order_.resize(sample.size());
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::stable_sort(order_.begin(), order_.end(), [&](std::size_t i, std::size_t j) {
        return sample.zs()[i] < sample.zs()[j];
      });
      sorted_z_.reserve(order_.size());
      for (auto i : order_) sorted_z_.push_back(sample.zs()[i]);
    }
    std::vector<double> x2 = sample.x2s();
    std::sort(x2.begin(), x2.end());
    x2.erase(std::unique(x2.begin(), x2.end()), x2.end());
    x2_rank_count_ = x2.size();
    x2_rank_.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
      x2_rank_[i] = static_cast<std::size_t>(
          std::lower_bound(x2.begin(), x2.end(), sample.x2(i)) - x2.begin()) + 1;
  }

  const Sample& sample() const noexcept { return *sample_; }
  const KernelSpec& kernel() const noexcept { return spec_; }

  /// Pair sums at z, optionally leaving out rows skip_a and skip_b.
  PairSums sums(std::span<const double> z, double h, std::size_t skip_a = detail::kNoRow,
                std::size_t skip_b = detail::kNoRow) const {
    std::vector<std::size_t> rows;
    std::vector<double> k;
    const double denom = window(z, h, skip_a, skip_b, rows, k);
    const Sample& s = *sample_;
    std::vector<double> a(rows.size()), b(rows.size());
    ExactSum sq;
    bool negative = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      k[r] /= denom;
      sq.add(k[r] * k[r]);
      negative = negative || k[r] < 0.0;
      a[r] = s.x1(rows[r]);
      b[r] = s.x2(rows[r]);
    }
    PairSums out = detail::accumulate_pairs(a, b, k);
    out.s_n = sq.result();
    out.n_effective = rows.size();
    out.has_negative = negative;
    return out;
  }

  /// O(m log m) version of sums() for m active rows: rows are swept in x1
  /// order while a Fenwick tree over x2 ranks holds the kernel mass seen so
  /// far. Agrees with sums() up to rounding; tied pairs are not counted.
  PairSums fast_sums(std::span<const double> z, double h, std::size_t skip_a = detail::kNoRow,
                     std::size_t skip_b = detail::kNoRow) const {
    std::vector<std::size_t> rows;
    std::vector<double> k;
    const double denom = window(z, h, skip_a, skip_b, rows, k);
    const Sample& s = *sample_;
    const std::size_t m = rows.size();
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t u, std::size_t v) {
      const double xu = s.x1(rows[u]), xv = s.x1(rows[v]);
      return xu < xv || (xu == xv && rows[u] < rows[v]);
    });

    std::vector<double> tree(x2_rank_count_ + 1, 0.0);
    auto prefix = [&](std::size_t r) {
      double acc = 0.0;
      for (; r > 0; r -= r & (~r + 1)) acc += tree[r];
      return acc;
    };
    ExactSum conc, disc, sq;
    double inserted = 0.0;
    bool negative = false;
    std::size_t g = 0;
    while (g < m) {
      std::size_t e = g;
      while (e < m && s.x1(rows[idx[e]]) == s.x1(rows[idx[g]])) ++e;
      for (std::size_t q = g; q < e; ++q) {
        const std::size_t r = x2_rank_[rows[idx[q]]];
        const double below = prefix(r - 1);
        const double above = inserted - prefix(r);
        conc.add(k[idx[q]] * below);
        disc.add(k[idx[q]] * above);
      }
      for (std::size_t q = g; q < e; ++q) {
        const double kv = k[idx[q]];
        for (std::size_t r = x2_rank_[rows[idx[q]]]; r <= x2_rank_count_; r += r & (~r + 1))
          tree[r] += kv;
        inserted += kv;
      }
      g = e;
    }
    for (std::size_t r = 0; r < m; ++r) {
      const double w = k[r] / denom;
      sq.add(w * w);
      negative = negative || w < 0.0;
    }
    PairSums out;
    out.concordant = conc.result() / denom / denom;
    out.discordant = disc.result() / denom / denom;
    conc -= disc;
    out.difference = conc.result() / denom / denom;
    out.s_n = sq.result();
    out.n_effective = m;
    out.has_negative = negative;
    return out;
  }

  TauEstimate estimate(Estimator kind, std::span<const double> z, double h) const {
    return detail::make_estimate(kind, sums(z, h), z, h);
  }

private:
  // Rows with nonzero kernel value at z and the exact sum of those values.
  double window(std::span<const double> z, double h, std::size_t skip_a, std::size_t skip_b,
                std::vector<std::size_t>& rows, std::vector<double>& k) const {
    detail::check_query(*sample_, z, spec_, h);
    const Sample& s = *sample_;
    auto consider = [&](std::size_t i) {
      if (i == skip_a || i == skip_b) return;
      double v = 1.0;
      for (std::size_t d = 0; d < s.dim() && v != 0.0; ++d)
        v *= detail::base_kernel(spec_.family, (s.zs()[i * s.dim() + d] - z[d]) / h);
      if (v != 0.0) {
        rows.push_back(i);
        k.push_back(v);
      }
    };
    if (!order_.empty()) {
      // Superset of the open window |Z - z| < h.
      const double r = 2.0 * h;
      auto lo = std::lower_bound(sorted_z_.begin(), sorted_z_.end(), z[0] - r);
      auto hi = std::upper_bound(sorted_z_.begin(), sorted_z_.end(), z[0] + r);
      for (auto it = lo; it != hi; ++it)
        consider(order_[static_cast<std::size_t>(it - sorted_z_.begin())]);
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) consider(i);
    }
    ExactSum total;
    for (double v : k) total.add(v);
    const double denom = total.result();
    if (denom == 0.0) throw AllWeightsZero();
    return denom;
  }

  const Sample* sample_;
  KernelSpec spec_;
  std::vector<std::size_t> x2_rank_;  // 1-based dense ranks of x2
  std::size_t x2_rank_count_ = 0;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_z_;
};

enum class PointStatus { ok, all_weights_zero, degenerate_window };

struct GridEstimate {
  Point z;
  PointStatus status = PointStatus::ok;
  std::optional<TauEstimate> estimate;
};

/// Pointwise estimates over a grid; undefined points are flagged, not fatal.
inline std::vector<GridEstimate> tau_hat_grid(Estimator kind, const Sample& sample,
                                              const std::vector<Point>& grid,
                                              const KernelSpec& spec, double h) {
  if (grid.empty()) throw InvalidArgument("evaluation grid is empty");
  if (sample.size() < 2) throw InvalidArgument("at least two observations are required");
  LocalEstimator est(sample, spec);
  std::vector<GridEstimate> out;
  out.reserve(grid.size());
  for (const auto& z : grid) {
    GridEstimate ge;
    ge.z = z;
    try {
      ge.estimate = est.estimate(kind, z, h);
    } catch (const AllWeightsZero&) {
      ge.status = PointStatus::all_weights_zero;
    } catch (const DegenerateWindow&) {
      ge.status = PointStatus::degenerate_window;
    }
    out.push_back(std::move(ge));
  }
  return out;
}

}  // namespace condtau
