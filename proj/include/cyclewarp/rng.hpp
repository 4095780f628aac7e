#pragma once
// Counter-based random number generation with explicit stream addressing.
//
// Every stochastic routine in the library draws from a philox4x32-10 stream
// identified by a 64-bit key plus a 96-bit structural stream id
// (purpose, step, substream).  Because the generator is a pure function of
// (key, stream id, block counter), any parallel schedule that assigns one
// stream per logical work item reproduces the serial results bit for bit.
// Keys for nested contexts (a fit, one of its iterations, one grid
// candidate, one bootstrap replicate, ...) are derived by hashing the parent
// key with integer tags; stream ids inside a context are assigned
// structurally and never collide.
//
// Distribution samplers are hand-rolled so that sequences are identical
// across standard libraries and platforms; std:: distributions make no such
// guarantee.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace cyclewarp {

/// SplitMix64 finalizer; bijective 64-bit mixing.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derive a child key from a parent key and a list of integer tags.
/// Used to give every logical unit of work its own independent generator
/// family without any shared mutable state.
inline std::uint64_t derive_key(std::uint64_t parent,
                                std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(parent ^ 0x6A09E667F3BCC909ULL);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
  return h;
}

/// Structural stream purposes.  Keeping these distinct guarantees that the
/// streams used by different phases of one algorithm never overlap.
namespace stream {
enum : std::uint32_t {
  propagate = 1,  ///< particle transition draws
  resample = 2,   ///< multinomial resampling draws
  pathdraw = 3,   ///< final trajectory selection
  triple = 4,     ///< per-particle process-parameter draws at initialization
  noise = 5,      ///< observation noise / diffusion increments in simulation
  residuals = 6,  ///< bootstrap residual resampling
  combo = 7,      ///< cross-segment combination sampling
  amplitude = 8,  ///< amplitude candidate selection at initialization
  boxes = 9,      ///< parameter box draws for the simulation protocol
};
}

class Rng {
 public:
  Rng(std::uint64_t key, std::uint32_t purpose, std::uint32_t step,
      std::uint32_t substream) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        ctr_{0, substream, step, purpose} {}

  std::uint64_t next_u64() noexcept {
    if (have_ < 2) refill();
    have_ -= 2;
    const std::uint64_t lo = out_[have_];
    const std::uint64_t hi = out_[have_ + 1];
    return lo | (hi << 32);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1); never returns an endpoint, safe under log().
  double uniform_pos() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 6.283185307179586476925286766559 * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Gamma(shape, scale 1) via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      // Boost a draw with shape + 1 down by a uniform power.
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Poisson(mean).  Product-of-uniforms for small means, PTRS transformed
  /// rejection (Hormann) for large ones; both exact.
  std::uint64_t poisson(double mean) noexcept {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double prod = uniform_pos();
      while (prod > limit) {
        ++k;
        prod *= uniform_pos();
      }
      return k;
    }
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mean);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform_pos();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          kf * log_mu - mean - std::lgamma(kf + 1.0)) {
        return static_cast<std::uint64_t>(kf);
      }
    }
  }

 private:
  void refill() noexcept {
    std::uint32_t x0 = ctr_[0], x1 = ctr_[1], x2 = ctr_[2], x3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * x0;
      const std::uint64_t p1 = 0xCD9E8D57ULL * x2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t y0 = hi1 ^ x1 ^ k0;
      const std::uint32_t y1 = lo1;
      const std::uint32_t y2 = hi0 ^ x3 ^ k1;
      const std::uint32_t y3 = lo0;
      x0 = y0;
      x1 = y1;
      x2 = y2;
      x3 = y3;
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    out_[0] = x0;
    out_[1] = x1;
    out_[2] = x2;
    out_[3] = x3;
    ++ctr_[0];  // 2^32 blocks of four words per stream
    have_ = 4;
  }

  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cyclewarp
