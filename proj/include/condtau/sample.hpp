#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "condtau/error.hpp"

namespace condtau {

/// An i.i.d. sample of (X1, X2, Z) with Z in R^p, stored column-wise for X
/// and row-major (n x p) for Z.
class Sample {
public:
  Sample() = default;

  Sample(std::vector<double> x1, std::vector<double> x2, std::vector<double> z, std::size_t p)
      : x1_(std::move(x1)), x2_(std::move(x2)), z_(std::move(z)), p_(p) {
    if (p_ == 0) throw InvalidArgument("covariate dimension must be positive");
    if (x1_.size() != x2_.size())
      throw InvalidArgument("x1 and x2 must have the same length");
    if (z_.size() != x1_.size() * p_)
      throw InvalidArgument("z must hold n * p values (n = " + std::to_string(x1_.size()) +
                            ", p = " + std::to_string(p_) + ")");
  }

  // Univariate covariate.
  Sample(std::vector<double> x1, std::vector<double> x2, std::vector<double> z)
      : Sample(std::move(x1), std::move(x2), std::move(z), 1) {}

  std::size_t size() const noexcept { return x1_.size(); }
  std::size_t dim() const noexcept { return p_; }

  double x1(std::size_t i) const { return x1_[i]; }
  double x2(std::size_t i) const { return x2_[i]; }
  std::span<const double> z(std::size_t i) const { return {z_.data() + i * p_, p_}; }

  const std::vector<double>& x1s() const noexcept { return x1_; }
  const std::vector<double>& x2s() const noexcept { return x2_; }
  const std::vector<double>& zs() const noexcept { return z_; }

  // Copy without rows i and j.
  Sample without_rows(std::size_t i, std::size_t j) const {
    std::vector<double> a, b, c;
    a.reserve(size());
    b.reserve(size());
    c.reserve(z_.size());
    for (std::size_t r = 0; r < size(); ++r) {
      if (r == i || r == j) continue;
      a.push_back(x1_[r]);
      b.push_back(x2_[r]);
      auto zr = z(r);
      c.insert(c.end(), zr.begin(), zr.end());
    }
    return Sample(std::move(a), std::move(b), std::move(c), p_);
  }

  bool all_finite() const noexcept {
    auto ok = [](const std::vector<double>& v) {
      for (double d : v)
        if (!std::isfinite(d)) return false;
      return true;
    };
    return ok(x1_) && ok(x2_) && ok(z_);
  }

  friend bool operator==(const Sample&, const Sample&) = default;

private:
  std::vector<double> x1_;
  std::vector<double> x2_;
  std::vector<double> z_;
  std::size_t p_ = 1;
};

using Point = std::vector<double>;

}  // namespace condtau
