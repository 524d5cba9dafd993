#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace condtau {

/// Order-independent floating point summation.
///
/// Every finite input is split into its integer significand and binary
/// exponent and added, as a 64-bit integer, to the bin of that exponent.
/// `result()` returns the exact sum of all inputs rounded once to nearest
/// (ties to even), so any permutation or partition of the same inputs yields
/// a bit-identical value. Non-finite inputs make the result non-finite.
class ExactSum {
public:
  ExactSum() = default;

  void add(double x) noexcept {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    int e = static_cast<int>((bits >> 52) & 0x7ff);
    auto m = static_cast<std::int64_t>(bits & kFracMask);
    if (e == 0x7ff) {
      special_ += x;
      has_special_ = true;
      return;
    }
    if (e == 0) {
      if (m == 0) return;
      e = 1;
    } else {
      m |= kHidden;
    }
    bins_[e] += (bits >> 63) ? -m : m;
    lo_ = std::min(lo_, e);
    hi_ = std::max(hi_, e);
    if (++pending_ == kMaxPending) carry();
  }

  ExactSum& operator+=(const ExactSum& other) noexcept { return merge(other, false); }
  ExactSum& operator-=(const ExactSum& other) noexcept { return merge(other, true); }

  void reset() noexcept {
    if (lo_ <= hi_) std::fill(bins_.begin() + lo_, bins_.begin() + hi_ + 1, 0);
    lo_ = kBins;
    hi_ = -1;
    pending_ = 0;
    special_ = 0.0;
    has_special_ = false;
  }

  double result() const {
    if (has_special_) return special_;
    if (lo_ > hi_) return 0.0;

    // Work on a copy so the accumulator stays usable.
    std::vector<std::int64_t> v(bins_.begin() + lo_, bins_.end());
    normalize_bits(v);
    bool negative = v.back() < 0;
    if (negative) {
      for (auto& b : v) b = -b;
      normalize_bits(v);
    }
    if (v.back() != 0) return negative ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();

    // v[i] is now the bit of weight 2^(lo_ + i - 1075).
    int top = static_cast<int>(v.size()) - 1;
    while (top >= 0 && v[top] == 0) --top;
    if (top < 0) return 0.0;
    const int top_exp = lo_ + top;
    const int low_bit = std::max(top - 52, 0);
    // Positions below bin 1 do not exist, so low_bit > 0 also means
    // the window starts at or above the subnormal unit.
    std::uint64_t mant = 0;
    for (int i = top; i >= low_bit; --i) mant = (mant << 1) | static_cast<std::uint64_t>(v[i]);
    if (low_bit > 0) {
      const bool guard = v[low_bit - 1] != 0;
      bool sticky = false;
      for (int i = low_bit - 2; i >= 0 && !sticky; --i) sticky = v[i] != 0;
      if (guard && (sticky || (mant & 1U))) ++mant;
    }
    const int scale = (top_exp - (top - low_bit)) - 1075;
    const double r = std::ldexp(static_cast<double>(mant), scale);
    return negative ? -r : r;
  }

private:
  static constexpr int kBins = 2048 + 128;
  static constexpr int kSpan = 53;
  static constexpr int kMaxPending = 1000;
  static constexpr std::uint64_t kFracMask = (std::uint64_t{1} << 52) - 1;
  static constexpr std::int64_t kHidden = std::int64_t{1} << 52;

  // Brings every bin below the last into [0, 2^53) so another kMaxPending
  // additions cannot overflow.
  void carry() noexcept {
    pending_ = 0;
    if (lo_ > hi_) return;
    for (int e = lo_; e < kBins - kSpan && e <= hi_; ++e) {
      const std::int64_t c = bins_[e] >> kSpan;
      if (c != 0) {
        bins_[e] -= c * (std::int64_t{1} << kSpan);
        bins_[e + kSpan] += c;
        hi_ = std::max(hi_, e + kSpan);
      }
    }
  }

  ExactSum& merge(const ExactSum& other, bool subtract) noexcept {
    if (other.has_special_) {
      special_ += subtract ? -other.special_ : other.special_;
      has_special_ = true;
    }
    if (other.lo_ > other.hi_) return *this;
    carry();
    ExactSum tmp = other;
    tmp.carry();
    for (int e = tmp.lo_; e <= tmp.hi_; ++e) bins_[e] += subtract ? -tmp.bins_[e] : tmp.bins_[e];
    lo_ = std::min(lo_, tmp.lo_);
    hi_ = std::max(hi_, tmp.hi_);
    carry();
    return *this;
  }

  // One-bit carry pass: afterwards every entry but the last is 0 or 1.
  static void normalize_bits(std::vector<std::int64_t>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const std::int64_t c = v[i] >> 1;
      v[i] -= c * 2;
      v[i + 1] += c;
    }
  }

  std::array<std::int64_t, kBins> bins_{};
  int lo_ = kBins;
  int hi_ = -1;
  int pending_ = 0;
  double special_ = 0.0;
  bool has_special_ = false;
};

inline double exact_sum(const std::vector<double>& xs) {
  ExactSum acc;
  for (double x : xs) acc.add(x);
  return acc.result();
}

}  // namespace condtau
