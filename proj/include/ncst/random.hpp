#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ncst/error.hpp"

namespace ncst {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Immutable descriptor of a reproducible random stream. Equal descriptors always
// yield identical draw sequences; child() derives independent substreams.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  constexpr RngStream child(std::uint64_t tag) const noexcept {
    std::uint64_t s = stream_id ^ (0xD1B54A32D192ED03ull * (tag + 1));
    return {seed, detail::splitmix64(s)};
  }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;
};

// xoshiro256** seeded from (seed, stream_id) via SplitMix64.
class Engine {
 public:
  using result_type = std::uint64_t;

  explicit Engine(const RngStream& stream) noexcept {
    std::uint64_t sm = stream.seed ^ detail::rotl(stream.stream_id * 0xA24BAED4963EE407ull, 17);
    // Mix the stream id in twice so nearby ids land far apart.
    sm ^= detail::splitmix64(sm) ^ stream.stream_id;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Marsaglia polar method; exact normal distribution.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the U^{1/shape} boost.
  double gamma(double shape) noexcept {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
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
      const double u = uniform();
      if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chisq(double r) noexcept { return 2.0 * gamma(0.5 * r); }

 private:
  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> draw_std_normal(const RngStream& stream, std::size_t n) {
  Engine eng(stream);
  std::vector<double> out(n);
  for (auto& x : out) x = eng.normal();
  return out;
}

inline std::vector<double> draw_uniform(const RngStream& stream, std::size_t n) {
  Engine eng(stream);
  std::vector<double> out(n);
  for (auto& x : out) x = eng.uniform();
  return out;
}

inline std::vector<double> draw_chisq(const RngStream& stream, double r, std::size_t n) {
  if (!(r > 0.0)) throw DomainError("draw_chisq: degrees of freedom must be positive");
  Engine eng(stream);
  std::vector<double> out(n);
  for (auto& x : out) {
    // A draw can underflow to 0 for tiny r; redraw to keep the support strictly positive.
    do {
      x = eng.chisq(r);
    } while (!(x > 0.0));
  }
  return out;
}

}  // namespace ncst
