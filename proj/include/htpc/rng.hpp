#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace htpc {

// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011).
// A block is a pure function of (counter, key), so any sub-range of a
// stream can be generated independently and in any order.
namespace philox {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                      std::uint32_t& hi) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(prod);
  hi = static_cast<std::uint32_t>(prod >> 32);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mul_hi_lo(kMul0, ctr[0], lo0, hi0);
    mul_hi_lo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// Two 64-bit lanes from one block: (seed, counter, stream) -> 128 bits.
inline std::array<std::uint64_t, 2> block64(std::uint64_t seed,
                                            std::uint64_t counter,
                                            std::uint32_t stream) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter),
      static_cast<std::uint32_t>(counter >> 32), stream, 0u};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = block(ctr, key);
  return {out[0] | (static_cast<std::uint64_t>(out[1]) << 32),
          out[2] | (static_cast<std::uint64_t>(out[3]) << 32)};
}

}  // namespace philox

// Stateless 64-bit mixer (SplitMix64 finalizer); used to derive independent
// seeds for (seed, stream-index) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ull));
}

// SplitMix64 stream; cheap enough for tight Monte Carlo loops.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Inverse-CDF sampler over an integer support window. Thresholds are the CDF
// scaled to 2^64, so drawing costs one uniform plus a table scan. Mass beyond
// the window (< 2^-70 total) is folded into the boundary atoms.
class DiscreteCdfSampler {
 public:
  DiscreteCdfSampler() : lo_(0), thresholds_{~0ull} {}

  DiscreteCdfSampler(std::int64_t lo, std::vector<std::uint64_t> thresholds)
      : lo_(lo), thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw std::invalid_argument("empty cdf table");
    thresholds_.back() = ~0ull;
  }

  // Returns the first k with r < cdf_threshold(k); the last atom is a
  // catch-all so r == 2^64-1 stays in range.
  std::int64_t operator()(std::uint64_t r) const {
    const std::size_t n = thresholds_.size();
    if (n <= 48) {
      std::size_t k = 0;
      while (k + 1 < n && r >= thresholds_[k]) ++k;
      return lo_ + static_cast<std::int64_t>(k);
    }
    std::size_t lo = 0, hi = n - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (r >= thresholds_[mid])
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo_ + static_cast<std::int64_t>(lo);
  }

  template <class Rng>
  std::int64_t sample(Rng& rng) const {
    return (*this)(rng());
  }

  std::int64_t support_min() const { return lo_; }
  std::int64_t support_max() const {
    return lo_ + static_cast<std::int64_t>(thresholds_.size()) - 1;
  }

  double mean() const;

  static DiscreteCdfSampler poisson(double mean);
  static DiscreteCdfSampler binomial(std::int64_t trials, double p);

 private:
  std::int64_t lo_;
  std::vector<std::uint64_t> thresholds_;  // ascending, last == 2^64-1
};

namespace detail {

// Builds the scaled CDF from pmf values computed multiplicatively outward
// from the mode; `ratio_up(k)` = pmf(k+1)/pmf(k).
template <class RatioUp>
DiscreteCdfSampler build_cdf(std::int64_t mode, long double log_pmf_mode,
                             std::int64_t support_lo, std::int64_t support_hi,
                             RatioUp ratio_up) {
  constexpr long double kCut = 0x1.0p-80L;
  const long double pmf_mode = std::exp(log_pmf_mode);

  std::vector<long double> up, down;
  long double v = pmf_mode;
  for (std::int64_t k = mode; k < support_hi && (v > kCut || k < mode + 2);) {
    v *= ratio_up(k);
    ++k;
    up.push_back(v);
  }
  v = pmf_mode;
  for (std::int64_t k = mode; k > support_lo && (v > kCut || k > mode - 2);) {
    const long double r = ratio_up(k - 1);
    v = (r > 0) ? v / r : 0.0L;
    --k;
    down.push_back(v);
  }

  const std::int64_t lo = mode - static_cast<std::int64_t>(down.size());
  std::vector<long double> pmf;
  pmf.reserve(down.size() + 1 + up.size());
  for (auto it = down.rbegin(); it != down.rend(); ++it) pmf.push_back(*it);
  pmf.push_back(pmf_mode);
  for (long double x : up) pmf.push_back(x);

  std::vector<std::uint64_t> thr(pmf.size());
  long double cum = 0.0L;
  const long double scale = 0x1.0p64L;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    cum += pmf[i];
    long double t = cum * scale;
    if (t >= scale) t = scale - 1.0L;
    thr[i] = static_cast<std::uint64_t>(t);
  }
  thr.back() = ~0ull;
  return DiscreteCdfSampler(lo, std::move(thr));
}

}  // namespace detail

inline double DiscreteCdfSampler::mean() const {
  long double m = 0.0L, prev = 0.0L;
  const long double scale = 0x1.0p-64L;
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    const long double cdf = (k + 1 == thresholds_.size())
                                ? 1.0L
                                : static_cast<long double>(thresholds_[k]) * scale;
    m += (cdf - prev) * static_cast<long double>(lo_ + static_cast<std::int64_t>(k));
    prev = cdf;
  }
  return static_cast<double>(m);
}

inline DiscreteCdfSampler DiscreteCdfSampler::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson mean must be finite and >= 0");
  if (mean == 0.0) return DiscreteCdfSampler(0, {~0ull});
  const std::int64_t mode = static_cast<std::int64_t>(std::floor(mean));
  const long double lm = static_cast<long double>(mean);
  const long double log_pmf_mode =
      static_cast<long double>(mode) * std::log(lm) - lm -
      std::lgammal(static_cast<long double>(mode) + 1.0L);
  return detail::build_cdf(mode, log_pmf_mode, 0,
                           mode + 64 + 16 * static_cast<std::int64_t>(std::sqrt(mean + 1.0)),
                           [lm](std::int64_t k) {
                             return lm / static_cast<long double>(k + 1);
                           });
}

inline DiscreteCdfSampler DiscreteCdfSampler::binomial(std::int64_t trials,
                                                       double p) {
  if (trials < 0) throw std::invalid_argument("binomial trials must be >= 0");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial p must lie in [0,1]");
  if (trials == 0 || p == 0.0) return DiscreteCdfSampler(0, {~0ull});
  if (p == 1.0) return DiscreteCdfSampler(trials, {~0ull});
  const long double lp = static_cast<long double>(p);
  const long double lq = 1.0L - lp;
  const long double ln = static_cast<long double>(trials);
  std::int64_t mode = static_cast<std::int64_t>(std::floor((ln + 1.0L) * lp));
  if (mode > trials) mode = trials;
  const long double lmode = static_cast<long double>(mode);
  const long double log_pmf_mode =
      std::lgammal(ln + 1.0L) - std::lgammal(lmode + 1.0L) -
      std::lgammal(ln - lmode + 1.0L) + lmode * std::log(lp) +
      (ln - lmode) * std::log(lq);
  return detail::build_cdf(
      mode, log_pmf_mode, 0, trials, [ln, lp, lq](std::int64_t k) {
        const long double lk = static_cast<long double>(k);
        return (ln - lk) / (lk + 1.0L) * lp / lq;
      });
}

}  // namespace htpc
