#ifndef BCC_RNG_HPP
#define BCC_RNG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

#include "bcc/errors.hpp"
#include "bcc/special.hpp"

// Randomness layer. Every scalar variate is produced from exactly one
// uniform via its inverse CDF, which keeps the consumption pattern of a
// stream a simple function of the draw counts. Substreams are derived
// from a base seed with splitmix64 so independent components (per-source
// updates, per-replicate simulations) can consume their own streams and
// stay reproducible under any execution order.

namespace bcc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a base seed and a path of tags.
/// Distinct paths give statistically independent seeds.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = base;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t tag : path) {
    s ^= tag + 0x9e3779b97f4a7c15ULL + (out << 6) + (out >> 2);
    out = splitmix64(s);
  }
  return out;
}

/// Uniform source backed by std::mt19937_64. The engine itself is fully
/// specified by the standard, so streams are stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double strictly inside (0, 1) with 53 random bits.
  double uniform01() {
    const std::uint64_t x = gen_() >> 11;
    return (static_cast<double>(x) + 0.5) * (1.0 / 9007199254740992.0);
  }

 private:
  std::mt19937_64 gen_;
};

template <class Engine>
double sample_normal(Engine& rng, double mean, double sd) {
  return mean + sd * norm_quantile(rng.uniform01());
}

/// Gamma draw in the rate parameterization: mean shape/rate.
template <class Engine>
double sample_gamma_rate(Engine& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("sample_gamma_rate: shape and rate must be positive");
  return inv_reg_inc_gamma_p(shape, rng.uniform01()) / rate;
}

template <class Engine>
void sample_dirichlet(Engine& rng, std::span<const double> concentration,
                      std::span<double> out) {
  double total = 0.0;
  for (std::size_t k = 0; k < concentration.size(); ++k) {
    out[k] = inv_reg_inc_gamma_p(concentration[k], rng.uniform01());
    total += out[k];
  }
  if (!(total > 0.0))
    throw NumericalError("sample_dirichlet: all gamma draws underflowed to zero");
  for (std::size_t k = 0; k < concentration.size(); ++k) out[k] /= total;
}

/// Draws an index in [0, w.size()) with probability proportional to the
/// nonnegative weights w.
template <class Engine>
int sample_categorical(Engine& rng, std::span<const double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0))
    throw NumericalError("sample_categorical: total mass is not positive");
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    cum += w[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

/// Draws an index from unnormalized log weights. Overwrites logw with the
/// shifted exponentials it scans, so callers can reuse one scratch buffer.
template <class Engine>
int sample_categorical_log(Engine& rng, std::span<double> logw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw)
    if (v > mx) mx = v;
  if (!std::isfinite(mx))
    throw NumericalError("sample_categorical_log: no outcome has positive mass");
  for (double& v : logw) v = std::exp(v - mx);
  return sample_categorical(rng, std::span<const double>(logw.data(), logw.size()));
}

/// Beta(a, b) draw conditioned on exceeding `lower`, by inverse CDF on the
/// truncated tail. When the tail holds no numerical mass the draw is
/// pinned just above the bound and `underflow_counter` (if given) is
/// incremented.
template <class Engine>
double sample_truncated_beta(Engine& rng, double a, double b, double lower,
                             std::uint64_t* underflow_counter = nullptr) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("sample_truncated_beta: shape parameters must be positive");
  if (!(lower >= 0.0 && lower < 1.0))
    throw std::domain_error("sample_truncated_beta: lower bound must lie in [0, 1)");
  const double f_lower = lower > 0.0 ? reg_inc_beta(a, b, lower) : 0.0;
  if (f_lower >= 1.0 - 1e-15) {
    if (underflow_counter) ++*underflow_counter;
    return std::min(lower + 1e-12, 0.5 * (lower + 1.0));
  }
  const double u = f_lower + rng.uniform01() * (1.0 - f_lower);
  double x = inv_reg_inc_beta(a, b, u);
  if (x < lower) x = lower;
  if (x >= 1.0) x = std::nextafter(1.0, 0.0);
  return x;
}

}  // namespace bcc

#endif
