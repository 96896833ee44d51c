#ifndef BCC_NORMAL_GAMMA_HPP
#define BCC_NORMAL_GAMMA_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcc/errors.hpp"
#include "bcc/matrix.hpp"
#include "bcc/rng.hpp"

// Diagonal normal-gamma mixture components. Per dimension d the model is
//   precision_d ~ Gamma(shape_d, rate_d)        (rate parameterization)
//   mean_d | precision_d ~ Normal(eta_d, 1 / (lambda * precision_d))
//   x_d | mean, precision ~ Normal(mean_d, 1 / precision_d)
// Gamma parameters are shape/rate everywhere; the rate convention is load
// bearing, a shape/scale reading inverts every variance.

namespace bcc {

struct NormalGammaParams {
  std::vector<double> eta;   // prior/posterior mean per dimension
  double lambda = 1.0;       // mean-precision scale, > 0
  std::vector<double> shape; // gamma shape per dimension, > 0
  std::vector<double> rate;  // gamma rate per dimension, > 0

  std::size_t dim() const { return eta.size(); }

  void validate() const {
    if (eta.size() != shape.size() || eta.size() != rate.size())
      throw std::invalid_argument("NormalGammaParams: field lengths differ");
    if (!(lambda > 0.0)) throw std::invalid_argument("NormalGammaParams: lambda must be positive");
    for (std::size_t d = 0; d < eta.size(); ++d) {
      if (!(shape[d] > 0.0)) throw std::invalid_argument("NormalGammaParams: shape must be positive");
      if (!(rate[d] > 0.0)) throw std::invalid_argument("NormalGammaParams: rate must be positive");
    }
  }

  friend bool operator==(const NormalGammaParams&, const NormalGammaParams&) = default;
};

struct ComponentParams {
  std::vector<double> mu;      // per-dimension mean
  std::vector<double> sigma2;  // per-dimension variance, > 0

  std::size_t dim() const { return mu.size(); }

  void validate() const {
    if (mu.size() != sigma2.size())
      throw std::invalid_argument("ComponentParams: field lengths differ");
    for (double v : sigma2)
      if (!(v > 0.0)) throw std::invalid_argument("ComponentParams: variances must be positive");
  }

  friend bool operator==(const ComponentParams&, const ComponentParams&) = default;
};

/// Log density of x under the component: sum of independent 1-D normals.
inline double log_likelihood(std::span<const double> x, const ComponentParams& theta) {
  if (x.size() != theta.dim())
    throw std::invalid_argument("log_likelihood: dimension mismatch");
  constexpr double log_2pi = 1.8378770664093454836;
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double z = x[d] - theta.mu[d];
    lp += -0.5 * (log_2pi + std::log(theta.sigma2[d]) + z * z / theta.sigma2[d]);
  }
  return lp;
}

/// Conjugate update from per-dimension sufficient statistics of a cluster:
/// n points, their mean, and the sum of squared deviations from that mean.
/// n = 0 returns the prior unchanged. The shape gains half the cluster
/// size n (not the total sample count), and the rate's shrinkage term
/// measures the cluster mean against the prior mean eta.
inline NormalGammaParams posterior_from_stats(const NormalGammaParams& prior, double n,
                                              std::span<const double> mean,
                                              std::span<const double> sum_sq_dev) {
  prior.validate();
  if (n == 0.0) return prior;
  if (mean.size() != prior.dim() || sum_sq_dev.size() != prior.dim())
    throw std::invalid_argument("posterior_from_stats: dimension mismatch");
  NormalGammaParams post = prior;
  post.lambda = prior.lambda + n;
  for (std::size_t d = 0; d < prior.dim(); ++d) {
    const double dev = mean[d] - prior.eta[d];
    post.eta[d] = (prior.lambda * prior.eta[d] + n * mean[d]) / (prior.lambda + n);
    post.shape[d] = prior.shape[d] + 0.5 * n;
    post.rate[d] = prior.rate[d] + 0.5 * sum_sq_dev[d] +
                   prior.lambda * n * dev * dev / (2.0 * (prior.lambda + n));
  }
  return post;
}

/// Conjugate update from the points of one cluster. The internal spread
/// statistic is the biased (divide-by-n) sample variance, entering the
/// rate update as half the sum of squared deviations.
inline NormalGammaParams posterior_update(const NormalGammaParams& prior,
                                          const std::vector<std::vector<double>>& points) {
  prior.validate();
  if (points.empty()) return prior;
  const std::size_t dim = prior.dim();
  std::vector<double> mean(dim, 0.0), ssd(dim, 0.0);
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("posterior_update: dimension mismatch");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += p[d];
  }
  const double n = static_cast<double>(points.size());
  for (std::size_t d = 0; d < dim; ++d) mean[d] /= n;
  for (const auto& p : points)
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = p[d] - mean[d];
      ssd[d] += dev * dev;
    }
  return posterior_from_stats(prior, n, mean, ssd);
}

/// Draws component parameters: per dimension a precision from
/// Gamma(shape, rate), then the mean given that precision.
template <class Engine>
ComponentParams sample_component(const NormalGammaParams& params, Engine& rng) {
  params.validate();
  const std::size_t dim = params.dim();
  ComponentParams theta;
  theta.mu.resize(dim);
  theta.sigma2.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double precision = sample_gamma_rate(rng, params.shape[d], params.rate[d]);
    theta.sigma2[d] = 1.0 / precision;
    theta.mu[d] = sample_normal(rng, params.eta[d], std::sqrt(theta.sigma2[d] / params.lambda));
  }
  return theta;
}

/// Data-driven prior for one source: eta from column means, unit lambda
/// and shape, rate from column variances so the prior precision has mean
/// 1/variance. Requires at least two rows and nonconstant columns.
inline NormalGammaParams default_hyperparams(const Matrix& source) {
  if (source.rows() < 2)
    throw std::invalid_argument("default_hyperparams: need at least two rows");
  NormalGammaParams prior;
  const std::size_t dim = source.cols();
  prior.eta.resize(dim);
  prior.lambda = 1.0;
  prior.shape.assign(dim, 1.0);
  prior.rate.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    prior.eta[d] = column_mean(source, d);
    const double var = column_variance(source, d);
    if (!(var > 0.0))
      throw DataError("default_hyperparams: column " + std::to_string(d + 1) +
                      " has zero variance; drop the variable or jitter it");
    prior.rate[d] = var;
  }
  return prior;
}

}  // namespace bcc

#endif
