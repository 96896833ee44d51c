#ifndef BCC_BASELINES_HPP
#define BCC_BASELINES_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcc/alignment.hpp"
#include "bcc/chain.hpp"
#include "bcc/dataset.hpp"
#include "bcc/matrix.hpp"
#include "bcc/normal_gamma.hpp"
#include "bcc/rng.hpp"

// Comparison samplers sharing the conjugate machinery of the consensus
// chain: an independent mixture per source, a single mixture over the
// concatenated features, and a pairwise-coupled model that draws all
// source labels of an object jointly.

namespace bcc {

// ---------------------------------------------------------------------------
// Independent finite mixture over one source (also the joint baseline once
// sources are concatenated).

struct MixtureState {
  std::vector<int> labels;
  std::vector<double> weights;
  std::vector<ComponentParams> theta;
};

struct MixtureDraws {
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  int n_clusters = 0;
  std::vector<MixtureState> states;
  Matrix weight_trace;  // iterations x K
};

/// Per-object label conditional of the independent mixture, as log masses.
inline std::vector<double> mixture_label_conditional(std::span<const double> x,
                                                     std::span<const double> weights,
                                                     const std::vector<ComponentParams>& theta) {
  std::vector<double> logw(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k)
    logw[k] = std::log(weights[k]) + log_likelihood(x, theta[k]);
  return logw;
}

/// Finite normal-gamma mixture sampler for a single source: component
/// update, label draw with mass pi_k * f(x | theta_k), Dirichlet weight
/// update. Streams: one for the component/label block, the main one for
/// the weights, mirroring the consensus chain's layout.
inline MixtureDraws separate_sampler(const Matrix& x, const ChainConfig& config,
                                     const NormalGammaParams* prior_override = nullptr) {
  config.model.validate();
  const int n_clusters = config.model.n_clusters;
  const int n_objects = static_cast<int>(x.rows());
  if (config.model.n_objects != n_objects)
    throw std::invalid_argument("separate_sampler: config object count disagrees with data");
  const NormalGammaParams prior =
      prior_override ? *prior_override : default_hyperparams(x);
  auto streams = SamplerStreams<Rng>::make(config.seed, 1);

  MixtureDraws draws;
  draws.iterations = config.iterations;
  draws.burn_in = config.burn_in;
  draws.thin = config.thin;
  draws.n_clusters = n_clusters;
  draws.weight_trace = Matrix(config.iterations, n_clusters);
  draws.states.reserve((config.iterations - config.burn_in) / config.thin);

  MixtureState state;
  state.labels = kmeans(x, n_clusters, streams.source[0]);
  state.weights.assign(n_clusters, 1.0 / n_clusters);
  state.theta.resize(n_clusters);

  std::vector<double> logw(n_clusters);
  detail::DensityCache cache;
  const std::vector<double> beta0 = config.resolved_beta0();
  for (int it = 1; it <= config.iterations; ++it) {
    // (1) components
    const auto stats = detail::cluster_stats(x, state.labels, n_clusters);
    for (int k = 0; k < n_clusters; ++k) {
      const auto post =
          posterior_from_stats(prior, stats.count[k], stats.mean[k], stats.ssd[k]);
      state.theta[k] = sample_component(post, streams.source[0]);
    }
    // (2) labels
    cache.rebuild(state.theta);
    std::vector<double> log_weights(n_clusters);
    for (int k = 0; k < n_clusters; ++k) log_weights[k] = std::log(state.weights[k]);
    for (int n = 0; n < n_objects; ++n) {
      const auto row = x.row(n);
      for (int k = 0; k < n_clusters; ++k)
        logw[k] = log_weights[k] + cache.log_density(k, row);
      state.labels[n] =
          1 + sample_categorical_log(streams.source[0], std::span<double>(logw));
    }
    // (3) weights
    std::vector<double> conc = beta0;
    for (int label : state.labels) conc[label - 1] += 1.0;
    sample_dirichlet(streams.main, conc, std::span<double>(state.weights));

    for (int k = 0; k < n_clusters; ++k) draws.weight_trace(it - 1, k) = state.weights[k];
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0)
      draws.states.push_back(state);
  }
  return draws;
}

/// Joint baseline: the independent mixture run on the feature-wise
/// concatenation of all sources, one clustering serving every source.
/// Component priors are derived per source and concatenated, so each
/// block keeps the defaults it would have alone.
inline MixtureDraws joint_sampler(const MultiSourceDataset& data, const ChainConfig& config) {
  data.validate();
  NormalGammaParams prior;
  prior.lambda = 1.0;
  for (const auto& s : data.sources) {
    const NormalGammaParams p = default_hyperparams(s.values);
    prior.eta.insert(prior.eta.end(), p.eta.begin(), p.eta.end());
    prior.shape.insert(prior.shape.end(), p.shape.begin(), p.shape.end());
    prior.rate.insert(prior.rate.end(), p.rate.begin(), p.rate.end());
  }
  const MultiSourceDataset joined = concatenate_sources(data);
  return separate_sampler(joined.sources[0].values, config, &prior);
}

// ---------------------------------------------------------------------------
// Pairwise-coupled baseline.

struct DependentState {
  std::vector<std::vector<int>> source_labels;      // L[m]
  Matrix pair_alpha;                                // symmetric M x M, diagonal unused
  std::vector<std::vector<double>> weights;         // per source
  std::vector<std::vector<ComponentParams>> theta;  // theta[m][k]
};

struct DependentDraws {
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  int n_clusters = 0;
  int n_sources = 0;
  std::vector<DependentState> states;
  Matrix pair_alpha_trace;  // iterations x M(M-1)/2, pairs in (i<j) order
};

/// Joint label conditional for one object under the pairwise model: log
/// mass over all K^M combinations, ordered with the last source's label
/// varying fastest.
inline std::vector<double> dependent_label_conditional(
    const std::vector<std::span<const double>>& x_rows,
    const std::vector<std::vector<double>>& weights,
    const std::vector<std::vector<ComponentParams>>& theta, const Matrix& pair_alpha,
    int n_clusters) {
  const int n_sources = static_cast<int>(x_rows.size());
  std::size_t n_combos = 1;
  for (int m = 0; m < n_sources; ++m) n_combos *= n_clusters;
  std::vector<std::vector<double>> site_log(n_sources,
                                            std::vector<double>(n_clusters));
  for (int m = 0; m < n_sources; ++m)
    for (int k = 0; k < n_clusters; ++k)
      site_log[m][k] =
          std::log(weights[m][k]) + log_likelihood(x_rows[m], theta[m][k]);
  std::vector<double> logw(n_combos);
  std::vector<int> combo(n_sources, 1);
  for (std::size_t c = 0; c < n_combos; ++c) {
    double lp = 0.0;
    for (int m = 0; m < n_sources; ++m) lp += site_log[m][combo[m] - 1];
    for (int i = 0; i < n_sources; ++i)
      for (int j = i + 1; j < n_sources; ++j)
        lp += log_nu(combo[i], combo[j], pair_alpha(i, j), n_clusters);
    logw[c] = lp;
    for (int m = n_sources - 1; m >= 0; --m) {
      if (++combo[m] <= n_clusters) break;
      combo[m] = 1;
    }
  }
  return logw;
}

/// Pairwise-coupled sampler: component updates per source, a joint draw of
/// all source labels per object over the K^M combinations, truncated-beta
/// updates of each pairwise agreement parameter, and per-source weight
/// updates. The joint enumeration grows exponentially in the number of
/// sources, hence the hard K^M guard.
inline DependentDraws dependent_sampler(const MultiSourceDataset& data,
                                        const ChainConfig& config) {
  config.validate(data);
  const int n_sources = config.model.n_sources;
  const int n_clusters = config.model.n_clusters;
  const int n_objects = config.model.n_objects;
  if (n_sources < 2)
    throw std::invalid_argument("dependent_sampler: needs at least two sources");
  double combos = 1.0;
  for (int m = 0; m < n_sources; ++m) combos *= n_clusters;
  if (combos > 4096.0)
    throw std::invalid_argument(
        "dependent_sampler: K^M = " + std::to_string(static_cast<long>(combos)) +
        " joint labels exceed the 4096 guard; the joint enumeration cost grows "
        "exponentially with the number of sources");
  const std::size_t n_combos = static_cast<std::size_t>(combos);

  const auto priors = resolve_component_priors(data, config);
  auto streams = SamplerStreams<Rng>::make(config.seed, n_sources);

  DependentDraws draws;
  draws.iterations = config.iterations;
  draws.burn_in = config.burn_in;
  draws.thin = config.thin;
  draws.n_clusters = n_clusters;
  draws.n_sources = n_sources;
  const int n_pairs = n_sources * (n_sources - 1) / 2;
  draws.pair_alpha_trace = Matrix(config.iterations, n_pairs);
  draws.states.reserve((config.iterations - config.burn_in) / config.thin);

  DependentState state;
  state.source_labels.resize(n_sources);
  for (int m = 0; m < n_sources; ++m)
    state.source_labels[m] = kmeans(data.sources[m].values, n_clusters, streams.source[m]);
  // align label conventions across sources before coupling them
  for (int m = 1; m < n_sources; ++m) {
    const auto sigma = best_label_permutation(state.source_labels[m],
                                              state.source_labels[0], n_clusters);
    for (int& l : state.source_labels[m]) l = sigma[l - 1];
  }
  state.pair_alpha = Matrix(n_sources, n_sources, 0.5 * (1.0 + 1.0 / n_clusters));
  state.weights.assign(n_sources, std::vector<double>(n_clusters, 1.0 / n_clusters));
  state.theta.resize(n_sources);

  const std::vector<double> beta0 = config.resolved_beta0();
  std::vector<double> logw(n_combos);
  std::vector<std::vector<double>> site_log(n_sources, std::vector<double>(n_clusters));
  std::vector<detail::DensityCache> caches(n_sources);
  const auto [prior_a, prior_b] = config.alpha_prior_for(0);

  for (int it = 1; it <= config.iterations; ++it) {
    // (1) components per source
    for (int m = 0; m < n_sources; ++m) {
      const auto stats = detail::cluster_stats(data.sources[m].values,
                                               state.source_labels[m], n_clusters);
      state.theta[m].resize(n_clusters);
      for (int k = 0; k < n_clusters; ++k) {
        const auto post =
            posterior_from_stats(priors[m], stats.count[k], stats.mean[k], stats.ssd[k]);
        state.theta[m][k] = sample_component(post, streams.source[m]);
      }
      caches[m].rebuild(state.theta[m]);
    }
    // (2) joint label draw per object
    std::vector<std::vector<double>> log_pair_terms(n_sources,
                                                    std::vector<double>(n_sources));
    std::vector<std::vector<double>> log_pair_other(n_sources,
                                                    std::vector<double>(n_sources));
    for (int i = 0; i < n_sources; ++i)
      for (int j = i + 1; j < n_sources; ++j) {
        const double a = detail::cap_adherence(state.pair_alpha(i, j));
        log_pair_terms[i][j] = std::log(a);
        log_pair_other[i][j] = std::log1p(-a) - std::log(double(n_clusters - 1));
      }
    for (int n = 0; n < n_objects; ++n) {
      for (int m = 0; m < n_sources; ++m) {
        const auto row = data.sources[m].values.row(n);
        for (int k = 0; k < n_clusters; ++k)
          site_log[m][k] = std::log(state.weights[m][k]) + caches[m].log_density(k, row);
      }
      std::vector<int> combo(n_sources, 1);
      for (std::size_t c = 0; c < n_combos; ++c) {
        double lp = 0.0;
        for (int m = 0; m < n_sources; ++m) lp += site_log[m][combo[m] - 1];
        for (int i = 0; i < n_sources; ++i)
          for (int j = i + 1; j < n_sources; ++j)
            lp += combo[i] == combo[j] ? log_pair_terms[i][j] : log_pair_other[i][j];
        logw[c] = lp;
        for (int m = n_sources - 1; m >= 0; --m) {
          if (++combo[m] <= n_clusters) break;
          combo[m] = 1;
        }
      }
      std::size_t pick = static_cast<std::size_t>(
          sample_categorical_log(streams.main, std::span<double>(logw)));
      for (int m = n_sources - 1; m >= 0; --m) {
        state.source_labels[m][n] = 1 + static_cast<int>(pick % n_clusters);
        pick /= n_clusters;
      }
    }
    // (3) pairwise agreement parameters
    {
      int pair_idx = 0;
      for (int i = 0; i < n_sources; ++i)
        for (int j = i + 1; j < n_sources; ++j) {
          int tau = 0;
          for (int n = 0; n < n_objects; ++n)
            tau += state.source_labels[i][n] == state.source_labels[j][n];
          const double draw = sample_truncated_beta(
              streams.main, prior_a + tau, prior_b + n_objects - tau,
              1.0 / n_clusters);
          state.pair_alpha(i, j) = draw;
          state.pair_alpha(j, i) = draw;
          draws.pair_alpha_trace(it - 1, pair_idx++) = draw;
        }
    }
    // (4) weights per source
    for (int m = 0; m < n_sources; ++m) {
      std::vector<double> conc = beta0;
      for (int label : state.source_labels[m]) conc[label - 1] += 1.0;
      sample_dirichlet(streams.main, conc, std::span<double>(state.weights[m]));
    }
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0)
      draws.states.push_back(state);
  }
  return draws;
}

}  // namespace bcc

#endif
