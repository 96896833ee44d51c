#ifndef BCC_CHAIN_HPP
#define BCC_CHAIN_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcc/alignment.hpp"
#include "bcc/dataset.hpp"
#include "bcc/kmeans.hpp"
#include "bcc/matrix.hpp"
#include "bcc/model.hpp"
#include "bcc/normal_gamma.hpp"
#include "bcc/rng.hpp"

// The consensus-clustering Gibbs sampler. One sweep draws, in order:
//   (1) component parameters per (source, cluster),
//   (2) source labels per (source, object),
//   (3) adherence per source (or one shared value),
//   (4) overall labels per object,
//   (5) mixture weights,
// each conditional on the most recent values of the other blocks.
//
// Stream layout: a run owns one main stream plus one stream per source,
// all derived from the configured seed. Source m's stream feeds its
// k-means initialization and its (1)-(2) draws; the main stream feeds
// (3)-(5). The per-source blocks are conditionally independent given the
// overall labels, so they could execute concurrently without changing
// results. Every scalar draw consumes exactly one uniform (see rng.hpp).

namespace bcc {

struct ChainState {
  std::vector<int> overall;                         // C, length N
  std::vector<std::vector<int>> source_labels;      // L[m], each length N
  std::vector<double> alpha;                        // adherence per source
  std::vector<double> pi;                           // mixture weights, length K
  std::vector<std::vector<ComponentParams>> theta;  // theta[m][k]

  void validate(const ModelConfig& model) const {
    model.validate();
    if (static_cast<int>(overall.size()) != model.n_objects)
      throw std::invalid_argument("ChainState: overall labels have wrong length");
    check_labels(overall, model.n_clusters);
    if (static_cast<int>(source_labels.size()) != model.n_sources)
      throw std::invalid_argument("ChainState: one label vector per source required");
    for (const auto& l : source_labels) {
      if (static_cast<int>(l.size()) != model.n_objects)
        throw std::invalid_argument("ChainState: source labels have wrong length");
      check_labels(l, model.n_clusters);
    }
    if (static_cast<int>(alpha.size()) != model.n_sources)
      throw std::invalid_argument("ChainState: one adherence per source required");
    for (double a : alpha) check_adherence(a, model.n_clusters);
    if (model.equal_adherence)
      for (double a : alpha)
        if (a != alpha[0])
          throw std::invalid_argument("ChainState: equal-adherence run with unequal alphas");
    if (static_cast<int>(pi.size()) != model.n_clusters)
      throw std::invalid_argument("ChainState: pi has wrong length");
    check_weights(pi);
    if (!theta.empty()) {
      if (static_cast<int>(theta.size()) != model.n_sources)
        throw std::invalid_argument("ChainState: theta must cover every source");
      for (const auto& per_source : theta)
        if (static_cast<int>(per_source.size()) != model.n_clusters)
          throw std::invalid_argument("ChainState: theta must cover every cluster");
    }
  }
};

enum class InitStrategy { KMeans, Random, Given };

struct ChainConfig {
  int iterations = 10000;
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  ModelConfig model;
  // One (a, b) prior per source; a single entry is shared by all sources
  // and is the prior of the shared adherence under equal_adherence.
  std::vector<std::pair<double, double>> alpha_prior{{1.0, 1.0}};
  std::vector<double> beta0;  // Dirichlet prior, length K; empty = all ones
  InitStrategy init = InitStrategy::KMeans;
  std::optional<ChainState> given_init;
  // Component priors per source; empty = default_hyperparams from the data.
  std::vector<NormalGammaParams> component_prior;
  // Keep sampled component parameters in saved states. Label summaries
  // never need them, and for wide data they dominate memory.
  bool store_components = true;

  void validate(const MultiSourceDataset& data) const {
    model.validate();
    data.validate();
    if (data.n_objects() != model.n_objects || data.n_sources() != model.n_sources)
      throw std::invalid_argument("ChainConfig: model dimensions disagree with the data");
    if (model.n_clusters > model.n_objects)
      throw std::invalid_argument("ChainConfig: more clusters than objects");
    if (iterations < 1) throw std::invalid_argument("ChainConfig: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
      throw std::invalid_argument("ChainConfig: burn_in must lie in [0, iterations)");
    if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
    if (alpha_prior.size() != 1 &&
        static_cast<int>(alpha_prior.size()) != model.n_sources)
      throw std::invalid_argument("ChainConfig: alpha_prior must have 1 or M entries");
    for (auto [a, b] : alpha_prior)
      if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("ChainConfig: alpha prior parameters must be positive");
    if (!beta0.empty()) {
      if (static_cast<int>(beta0.size()) != model.n_clusters)
        throw std::invalid_argument("ChainConfig: beta0 must have K entries");
      for (double b : beta0)
        if (!(b > 0.0)) throw std::invalid_argument("ChainConfig: beta0 entries must be positive");
    }
    if (init == InitStrategy::Given && !given_init)
      throw std::invalid_argument("ChainConfig: Given init requires given_init");
    if (!component_prior.empty() &&
        static_cast<int>(component_prior.size()) != model.n_sources)
      throw std::invalid_argument("ChainConfig: component_prior must cover every source");
  }

  std::pair<double, double> alpha_prior_for(int source) const {
    return alpha_prior.size() == 1 ? alpha_prior[0] : alpha_prior[source];
  }

  std::vector<double> resolved_beta0() const {
    return beta0.empty() ? std::vector<double>(model.n_clusters, 1.0) : beta0;
  }
};

struct PosteriorDraws {
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  ModelConfig model;
  std::vector<ChainState> states;  // post burn-in, thinned
  Matrix alpha_trace;              // iterations x M, every sweep
  Matrix pi_trace;                 // iterations x K, every sweep
  std::uint64_t beta_truncation_warnings = 0;
};

template <class Engine>
struct SamplerStreams {
  Engine main;
  std::vector<Engine> source;

  static SamplerStreams make(std::uint64_t seed, int n_sources) {
    SamplerStreams s{Engine(derive_seed(seed, {0})), {}};
    s.source.reserve(n_sources);
    for (int m = 0; m < n_sources; ++m)
      s.source.emplace_back(derive_seed(seed, {1, static_cast<std::uint64_t>(m)}));
    return s;
  }
};

namespace detail {

/// Per-cluster sufficient statistics of one source under given labels:
/// counts, per-dimension means and sums of squared deviations.
struct ClusterStats {
  std::vector<double> count;            // per cluster
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> ssd;
};

inline ClusterStats cluster_stats(const Matrix& x, std::span<const int> labels,
                                  int n_clusters) {
  const std::size_t dim = x.cols();
  ClusterStats s;
  s.count.assign(n_clusters, 0.0);
  s.mean.assign(n_clusters, std::vector<double>(dim, 0.0));
  s.ssd.assign(n_clusters, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int k = labels[i] - 1;
    s.count[k] += 1.0;
    const auto row = x.row(i);
    for (std::size_t d = 0; d < dim; ++d) s.mean[k][d] += row[d];
  }
  for (int k = 0; k < n_clusters; ++k)
    if (s.count[k] > 0.0)
      for (std::size_t d = 0; d < dim; ++d) s.mean[k][d] /= s.count[k];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int k = labels[i] - 1;
    const auto row = x.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = row[d] - s.mean[k][d];
      s.ssd[k][d] += dev * dev;
    }
  }
  return s;
}

/// Cached per-component terms for fast log-density evaluation.
struct DensityCache {
  std::vector<double> const_term;            // per cluster
  std::vector<std::vector<double>> inv_2s2;  // per cluster, per dimension
  std::vector<std::vector<double>> mu;

  void rebuild(const std::vector<ComponentParams>& theta) {
    constexpr double log_2pi = 1.8378770664093454836;
    const std::size_t n_clusters = theta.size();
    const_term.resize(n_clusters);
    inv_2s2.resize(n_clusters);
    mu.resize(n_clusters);
    for (std::size_t k = 0; k < n_clusters; ++k) {
      const auto& t = theta[k];
      double c = 0.0;
      inv_2s2[k].resize(t.dim());
      for (std::size_t d = 0; d < t.dim(); ++d) {
        c += -0.5 * (log_2pi + std::log(t.sigma2[d]));
        inv_2s2[k][d] = 0.5 / t.sigma2[d];
      }
      const_term[k] = c;
      mu[k] = t.mu;
    }
  }

  double log_density(int k, std::span<const double> x) const {
    double q = 0.0;
    const auto& m = mu[k];
    const auto& w = inv_2s2[k];
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double z = x[d] - m[d];
      q += z * z * w[d];
    }
    return const_term[k] - q;
  }
};

// Adherence draws can land so close to 1 that log(1 - alpha) overflows to
// -inf and a momentarily disagreeing label zeroes an entire conditional.
// Capping at 1 - 2^-53 keeps the kernels finite without moving any draw
// that matters.
inline double cap_adherence(double alpha) {
  constexpr double cap = 1.0 - 0x1p-53;
  return alpha > cap ? cap : alpha;
}

}  // namespace detail

/// Sweep block (1): for every (source, cluster), conjugate update given
/// the current source labels, then a fresh component draw. Empty clusters
/// draw from the prior.
template <class Engine>
void draw_components(ChainState& state, const MultiSourceDataset& data,
                     const std::vector<NormalGammaParams>& priors,
                     SamplerStreams<Engine>& streams) {
  const int n_sources = data.n_sources();
  const int n_clusters = static_cast<int>(state.pi.size());
  state.theta.resize(n_sources);
  for (int m = 0; m < n_sources; ++m) {
    const auto stats = detail::cluster_stats(data.sources[m].values,
                                             state.source_labels[m], n_clusters);
    state.theta[m].resize(n_clusters);
    for (int k = 0; k < n_clusters; ++k) {
      const NormalGammaParams post = posterior_from_stats(
          priors[m], stats.count[k], stats.mean[k], stats.ssd[k]);
      state.theta[m][k] = sample_component(post, streams.source[m]);
    }
  }
}

/// Sweep block (2): source labels, mass proportional to
/// nu(k, C_n, alpha_m) * f_m(x_mn | theta_mk), drawn in log space.
template <class Engine>
void draw_source_labels(ChainState& state, const MultiSourceDataset& data,
                        SamplerStreams<Engine>& streams) {
  const int n_sources = data.n_sources();
  const int n_clusters = static_cast<int>(state.pi.size());
  const int n_objects = data.n_objects();
  std::vector<double> logw(n_clusters);
  detail::DensityCache cache;
  for (int m = 0; m < n_sources; ++m) {
    cache.rebuild(state.theta[m]);
    const double alpha = detail::cap_adherence(state.alpha[m]);
    const double log_match = std::log(alpha);
    const double log_other = std::log1p(-alpha) - std::log(double(n_clusters - 1));
    const Matrix& x = data.sources[m].values;
    for (int n = 0; n < n_objects; ++n) {
      const auto row = x.row(n);
      const int c = state.overall[n];
      for (int k = 1; k <= n_clusters; ++k)
        logw[k - 1] = (k == c ? log_match : log_other) + cache.log_density(k - 1, row);
      state.source_labels[m][n] =
          1 + sample_categorical_log(streams.source[m], std::span<double>(logw));
    }
  }
}

/// Number of objects whose source-m label agrees with the overall label.
inline int agreement_count(const ChainState& state, int m) {
  int tau = 0;
  for (std::size_t n = 0; n < state.overall.size(); ++n)
    tau += state.source_labels[m][n] == state.overall[n];
  return tau;
}

/// Sweep block (3): adherence. Per source a truncated beta with the
/// agreement count, or one shared draw pooling all sources.
template <class Engine>
void draw_adherence(ChainState& state, const ChainConfig& config,
                    SamplerStreams<Engine>& streams,
                    std::uint64_t* truncation_warnings = nullptr) {
  const int n_objects = config.model.n_objects;
  const int n_sources = config.model.n_sources;
  const double lower = 1.0 / config.model.n_clusters;
  if (config.model.equal_adherence) {
    int tau = 0;
    for (int m = 0; m < n_sources; ++m) tau += agreement_count(state, m);
    const auto [a, b] = config.alpha_prior_for(0);
    const double draw = sample_truncated_beta(
        streams.main, a + tau, b + static_cast<double>(n_objects) * n_sources - tau,
        lower, truncation_warnings);
    std::fill(state.alpha.begin(), state.alpha.end(), draw);
  } else {
    for (int m = 0; m < n_sources; ++m) {
      const int tau = agreement_count(state, m);
      const auto [a, b] = config.alpha_prior_for(m);
      state.alpha[m] = sample_truncated_beta(streams.main, a + tau,
                                             b + n_objects - tau, lower,
                                             truncation_warnings);
    }
  }
}

/// Sweep block (4): overall labels, mass proportional to
/// pi_k * prod_m nu(k, L_mn, alpha_m). Computed as a per-object O(M + K)
/// update on top of shared per-sweep constants.
template <class Engine>
void draw_overall(ChainState& state, SamplerStreams<Engine>& streams) {
  const int n_clusters = static_cast<int>(state.pi.size());
  const int n_sources = static_cast<int>(state.source_labels.size());
  const int n_objects = static_cast<int>(state.overall.size());
  std::vector<double> log_match(n_sources), log_other(n_sources);
  double base = 0.0;
  for (int m = 0; m < n_sources; ++m) {
    const double alpha = detail::cap_adherence(state.alpha[m]);
    log_match[m] = std::log(alpha);
    log_other[m] = std::log1p(-alpha) - std::log(double(n_clusters - 1));
    base += log_other[m];
  }
  std::vector<double> log_pi(n_clusters);
  for (int k = 0; k < n_clusters; ++k) log_pi[k] = std::log(state.pi[k]) + base;
  std::vector<double> logw(n_clusters);
  for (int n = 0; n < n_objects; ++n) {
    for (int k = 0; k < n_clusters; ++k) logw[k] = log_pi[k];
    for (int m = 0; m < n_sources; ++m) {
      const int l = state.source_labels[m][n];
      logw[l - 1] += log_match[m] - log_other[m];
    }
    state.overall[n] = 1 + sample_categorical_log(streams.main, std::span<double>(logw));
  }
}

/// Sweep block (5): mixture weights from Dirichlet(beta0 + cluster sizes).
template <class Engine>
void draw_weights(ChainState& state, const ChainConfig& config,
                  SamplerStreams<Engine>& streams) {
  std::vector<double> conc = config.resolved_beta0();
  for (int label : state.overall) conc[label - 1] += 1.0;
  sample_dirichlet(streams.main, conc, std::span<double>(state.pi));
}

/// One full Gibbs sweep in the block order (1)-(5).
template <class Engine>
ChainState step(const ChainState& state, const MultiSourceDataset& data,
                const ChainConfig& config, const std::vector<NormalGammaParams>& priors,
                SamplerStreams<Engine>& streams,
                std::uint64_t* truncation_warnings = nullptr) {
  ChainState next = state;
  draw_components(next, data, priors, streams);
  draw_source_labels(next, data, streams);
  draw_adherence(next, config, streams, truncation_warnings);
  draw_overall(next, streams);
  draw_weights(next, config, streams);
  return next;
}

/// Overall label as the plurality of the per-source labels, lowest label
/// on ties.
inline std::vector<int> plurality_labels(const std::vector<std::vector<int>>& source_labels,
                                         int n_clusters) {
  const std::size_t n_objects = source_labels.at(0).size();
  std::vector<int> overall(n_objects);
  std::vector<int> votes(n_clusters);
  for (std::size_t n = 0; n < n_objects; ++n) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& labels : source_labels) ++votes[labels[n] - 1];
    int best = 0;
    for (int k = 1; k < n_clusters; ++k)
      if (votes[k] > votes[best]) best = k;
    overall[n] = best + 1;
  }
  return overall;
}

/// Starting state: per-source k-means (or uniform random) labels, overall
/// labels by plurality, adherence at the midpoint of its range, uniform
/// weights, and component parameters drawn from their conditional given
/// the initial labels.
template <class Engine>
ChainState initialize(const MultiSourceDataset& data, const ChainConfig& config,
                      const std::vector<NormalGammaParams>& priors,
                      SamplerStreams<Engine>& streams) {
  config.validate(data);
  if (config.init == InitStrategy::Given) {
    // passed through untouched; the first sweep redraws theta anyway
    ChainState state = *config.given_init;
    state.validate(config.model);
    return state;
  }
  const int n_clusters = config.model.n_clusters;
  const int n_sources = config.model.n_sources;
  ChainState state;
  state.source_labels.resize(n_sources);
  for (int m = 0; m < n_sources; ++m) {
    if (config.init == InitStrategy::KMeans) {
      state.source_labels[m] = kmeans(data.sources[m].values, n_clusters,
                                      streams.source[m]);
    } else {
      state.source_labels[m].resize(config.model.n_objects);
      std::vector<double> uniform(n_clusters, 1.0);
      for (int n = 0; n < config.model.n_objects; ++n)
        state.source_labels[m][n] =
            1 + sample_categorical(streams.source[m], std::span<const double>(uniform));
    }
  }
  // K-means labels carry an arbitrary convention per source; map every
  // source onto the first one so the plurality (and the coupling it seeds)
  // starts from comparable labels. Single-site moves cannot cross that
  // relabeling barrier later, so a mismatched start would stick.
  if (config.init == InitStrategy::KMeans)
    for (int m = 1; m < n_sources; ++m) {
      const auto sigma = best_label_permutation(state.source_labels[m],
                                                state.source_labels[0], n_clusters);
      for (int& l : state.source_labels[m]) l = sigma[l - 1];
    }
  state.overall = plurality_labels(state.source_labels, n_clusters);
  const double midpoint = 0.5 * (1.0 + 1.0 / n_clusters);
  state.alpha.assign(n_sources, midpoint);
  state.pi.assign(n_clusters, 1.0 / n_clusters);
  draw_components(state, data, priors, streams);
  return state;
}

/// Component priors for a run: the configured ones, or data-driven
/// defaults per source.
inline std::vector<NormalGammaParams> resolve_component_priors(
    const MultiSourceDataset& data, const ChainConfig& config) {
  if (!config.component_prior.empty()) return config.component_prior;
  std::vector<NormalGammaParams> priors;
  priors.reserve(data.sources.size());
  for (const auto& s : data.sources) priors.push_back(default_hyperparams(s.values));
  return priors;
}

/// Runs the chain: initialization plus `iterations` sweeps. States are
/// saved after the burn-in at the thinning interval; adherence and weight
/// traces cover every sweep. Deterministic given the seed.
inline PosteriorDraws run_chain(const MultiSourceDataset& data, const ChainConfig& config) {
  config.validate(data);
  const auto priors = resolve_component_priors(data, config);
  auto streams = SamplerStreams<Rng>::make(config.seed, config.model.n_sources);

  PosteriorDraws draws;
  draws.iterations = config.iterations;
  draws.burn_in = config.burn_in;
  draws.thin = config.thin;
  draws.model = config.model;
  draws.alpha_trace = Matrix(config.iterations, config.model.n_sources);
  draws.pi_trace = Matrix(config.iterations, config.model.n_clusters);
  draws.states.reserve((config.iterations - config.burn_in) / config.thin);

  ChainState state = initialize(data, config, priors, streams);
  for (int it = 1; it <= config.iterations; ++it) {
    state = step(state, data, config, priors, streams, &draws.beta_truncation_warnings);
    for (int m = 0; m < config.model.n_sources; ++m)
      draws.alpha_trace(it - 1, m) = state.alpha[m];
    for (int k = 0; k < config.model.n_clusters; ++k)
      draws.pi_trace(it - 1, k) = state.pi[k];
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
      assert((state.validate(config.model), true));
      if (config.store_components) {
        draws.states.push_back(state);
      } else {
        ChainState slim = state;
        slim.theta.clear();
        draws.states.push_back(std::move(slim));
      }
    }
  }
  return draws;
}

}  // namespace bcc

#endif
