#pragma once

// Counter-based random streams and the handful of distributions the
// samplers need. Everything here is implemented locally so that draws are
// bit-identical across standard libraries and thread schedules.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace bcp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

}  // namespace detail

/// Derive a 64-bit stream key from a master seed and a tuple of tags
/// (replicate, pair, row, purpose, ...). Distinct tag tuples give
/// statistically independent streams.
inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = detail::splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t t : tags) h = detail::splitmix64(h ^ detail::splitmix64(t + 0x3C6EF372FE94F82BULL));
  return h;
}

/// Philox4x32-10 keyed by a 64-bit stream key. Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}, counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ >= 2) {
      refill();
      pos_ = 0;
    }
    const result_type out = (static_cast<std::uint64_t>(block_[2 * pos_]) << 32) | block_[2 * pos_ + 1];
    ++pos_;
    return out;
  }

  /// Spare standard normal cached by the Box-Muller transform.
  bool has_spare = false;
  double spare = 0.0;

 private:
  void refill() {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0u,
                                     0u};
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      detail::mulhilo32(0xD2511F53u, ctr[0], hi0, lo0);
      detail::mulhilo32(0xCD9E8D57u, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    block_ = ctr;
    ++counter_;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 2;
};

inline Philox make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Philox(stream_key(seed, tags));
}

/// Uniform on the open interval (0, 1).
inline double uniform01(Philox& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

/// Uniform integer in [0, n), unbiased.
inline std::uint64_t uniform_index(Philox& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double standard_normal(Philox& rng) {
  if (rng.has_spare) {
    rng.has_spare = false;
    return rng.spare;
  }
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  rng.spare = r * std::sin(theta);
  rng.has_spare = true;
  return r * std::cos(theta);
}

/// Gamma(shape, 1) via Marsaglia-Tsang; shapes below one use the
/// U^(1/shape) boost.
inline double gamma_draw(Philox& rng, double shape) {
  if (shape < 1.0) {
    const double g = gamma_draw(rng, shape + 1.0);
    return g * std::pow(uniform01(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double beta_draw(Philox& rng, double a, double b) {
  // Small integer shapes: the a-th smallest of a + b - 1 uniforms.
  if (a >= 1.0 && b >= 1.0 && a + b <= 9.0 && a == std::floor(a) && b == std::floor(b)) {
    const int n = static_cast<int>(a + b) - 1;
    const int k = static_cast<int>(a) - 1;
    std::array<double, 8> u{};
    for (int t = 0; t < n; ++t) u[static_cast<std::size_t>(t)] = uniform01(rng);
    std::nth_element(u.begin(), u.begin() + k, u.begin() + n);
    return u[static_cast<std::size_t>(k)];
  }
  const double x = gamma_draw(rng, a);
  const double y = gamma_draw(rng, b);
  return x / (x + y);
}

/// Binomial(n, prob). Inversion for small means, Bernoulli sum otherwise;
/// both exact.
inline std::int64_t binomial_draw(Philox& rng, std::int64_t n, double prob) {
  if (n <= 0 || prob <= 0.0) return 0;
  if (prob >= 1.0) return n;
  const bool flip = prob > 0.5;
  const double q = flip ? 1.0 - prob : prob;
  std::int64_t k = 0;
  const double log_p0 = static_cast<double>(n) * std::log1p(-q);
  if (log_p0 > -500.0 && static_cast<double>(n) * q < 200.0) {
    const double ratio = q / (1.0 - q);
    double pmf = std::exp(log_p0);
    double u = uniform01(rng);
    while (u > pmf && k < n) {
      u -= pmf;
      ++k;
      pmf *= ratio * static_cast<double>(n - k + 1) / static_cast<double>(k);
    }
  } else {
    for (std::int64_t t = 0; t < n; ++t)
      if (uniform01(rng) < q) ++k;
  }
  return flip ? n - k : k;
}

/// Multinomial(n, probs) by sequential conditional binomials.
inline std::vector<std::int64_t> multinomial_draw(Philox& rng, std::int64_t n, std::span<const double> probs) {
  std::vector<std::int64_t> out(probs.size(), 0);
  double remaining_mass = 0.0;
  for (double p : probs) remaining_mass += p;
  std::int64_t remaining = n;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double cond = remaining_mass > 0.0 ? std::min(1.0, probs[k] / remaining_mass) : 0.0;
    out[k] = binomial_draw(rng, remaining, cond);
    remaining -= out[k];
    remaining_mass -= probs[k];
  }
  if (!probs.empty()) out.back() += remaining;
  return out;
}

inline std::int64_t beta_binomial_draw(Philox& rng, std::int64_t n, double a, double b) {
  if (n <= 0) return 0;
  return binomial_draw(rng, n, beta_draw(rng, a, b));
}

template <typename T>
void shuffle(Philox& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace bcp
