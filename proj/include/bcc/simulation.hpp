#ifndef BCC_SIMULATION_HPP
#define BCC_SIMULATION_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bcc/alignment.hpp"
#include "bcc/baselines.hpp"
#include "bcc/chain.hpp"
#include "bcc/dataset.hpp"
#include "bcc/model.hpp"
#include "bcc/rng.hpp"
#include "bcc/summary.hpp"

// Simulation studies: two-cluster data generation, adherence recovery,
// the four-method error comparison, prior sensitivity, and the induced
// cluster-size table. Every study derives one seed per replicate from a
// master seed and emits plain records; smoothing and plotting are left to
// downstream tools.

namespace bcc {

struct TwoClusterTruth {
  std::vector<int> overall;
  std::vector<std::vector<int>> source_labels;
};

/// Two equal overall clusters over N objects (first half label 1, second
/// half label 2). Each source label follows the overall one with
/// probability `alpha`, and each source is one-dimensional with component
/// means +/- `mu_sep` and unit variance (label 1 positive).
template <class Engine>
std::pair<MultiSourceDataset, TwoClusterTruth> generate_two_cluster_data(
    double alpha, int n_sources, int n_objects, double mu_sep, Engine& rng) {
  if (n_objects < 2 || n_objects % 2 != 0)
    throw std::invalid_argument("generate_two_cluster_data: n_objects must be even");
  if (!(alpha >= 0.5 && alpha <= 1.0))
    throw std::domain_error("generate_two_cluster_data: alpha must lie in [0.5, 1]");
  if (!(mu_sep > 0.0))
    throw std::domain_error("generate_two_cluster_data: mu_sep must be positive");
  if (n_sources < 1)
    throw std::invalid_argument("generate_two_cluster_data: need at least one source");

  TwoClusterTruth truth;
  truth.overall.resize(n_objects);
  for (int n = 0; n < n_objects; ++n) truth.overall[n] = n < n_objects / 2 ? 1 : 2;

  MultiSourceDataset data;
  data.ids.resize(n_objects);
  for (int n = 0; n < n_objects; ++n) data.ids[n] = "obj" + std::to_string(n + 1);
  truth.source_labels.resize(n_sources);
  for (int m = 0; m < n_sources; ++m) {
    Matrix x(n_objects, 1);
    auto& labels = truth.source_labels[m];
    labels.resize(n_objects);
    for (int n = 0; n < n_objects; ++n) {
      const bool agree = rng.uniform01() < alpha;
      labels[n] = agree ? truth.overall[n] : 3 - truth.overall[n];
      const double mean = labels[n] == 1 ? mu_sep : -mu_sep;
      x(n, 0) = sample_normal(rng, mean, 1.0);
    }
    data.sources.push_back({"source" + std::to_string(m + 1), std::move(x)});
  }
  return {std::move(data), std::move(truth)};
}

struct StudyConfig {
  int reps = 100;
  int n_objects = 200;
  int iterations = 1200;
  int burn_in = 200;
  int thin = 1;
  std::uint64_t seed = 1;
  double alpha_prior_a = 1.0;
  double alpha_prior_b = 1.0;
};

namespace detail {

inline ChainConfig study_chain_config(const StudyConfig& study, int n_sources,
                                      bool equal_adherence, std::uint64_t seed) {
  ChainConfig config;
  config.iterations = study.iterations;
  config.burn_in = study.burn_in;
  config.thin = study.thin;
  config.seed = seed;
  config.model = {study.n_objects, n_sources, 2, equal_adherence};
  config.alpha_prior = {{study.alpha_prior_a, study.alpha_prior_b}};
  config.store_components = false;
  return config;
}

/// Post-burn-in mean of one adherence trace column.
inline double trace_mean(const Matrix& trace, int burn_in, int col) {
  double total = 0.0;
  for (std::size_t it = burn_in; it < trace.rows(); ++it) total += trace(it, col);
  return total / static_cast<double>(trace.rows() - burn_in);
}

inline std::vector<double> trace_column(const Matrix& trace, int burn_in, int col) {
  std::vector<double> out;
  out.reserve(trace.rows() - burn_in);
  for (std::size_t it = burn_in; it < trace.rows(); ++it) out.push_back(trace(it, col));
  return out;
}

}  // namespace detail

struct AlphaRecoveryRecord {
  int rep = 0;
  double true_alpha = 0.0;
  double alpha_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Adherence recovery: per replicate, draw a true alpha uniformly on
/// (0.5, 1), generate two one-dimensional sources over 200 objects with
/// +/- 1.5 component means, fit the equal-adherence consensus model, and
/// record the posterior mean and 95% interval of alpha.
inline std::vector<AlphaRecoveryRecord> alpha_recovery_study(const StudyConfig& study,
                                                             int n_sources = 2,
                                                             double mu_sep = 1.5) {
  std::vector<AlphaRecoveryRecord> records;
  records.reserve(study.reps);
  for (int rep = 0; rep < study.reps; ++rep) {
    Rng rng(derive_seed(study.seed, {0xa1fa, static_cast<std::uint64_t>(rep)}));
    const double true_alpha = 0.5 + 0.5 * rng.uniform01();
    auto [data, truth] =
        generate_two_cluster_data(true_alpha, n_sources, study.n_objects, mu_sep, rng);
    const ChainConfig config = detail::study_chain_config(
        study, n_sources, true,
        derive_seed(study.seed, {0xc8a1, static_cast<std::uint64_t>(rep)}));
    const PosteriorDraws draws = run_chain(data, config);
    AlphaRecoveryRecord rec;
    rec.rep = rep + 1;
    rec.true_alpha = true_alpha;
    rec.alpha_hat = detail::trace_mean(draws.alpha_trace, config.burn_in, 0);
    const auto tail = detail::trace_column(draws.alpha_trace, config.burn_in, 0);
    rec.ci_low = quantile(tail, 0.025);
    rec.ci_high = quantile(tail, 0.975);
    records.push_back(rec);
  }
  return records;
}

struct ErrorComparisonRecord {
  int rep = 0;
  double true_alpha = 0.0;
  double err_separate = 0.0;
  double err_joint = 0.0;
  double err_dependent = 0.0;
  double err_bcc = 0.0;
};

namespace detail {

inline std::vector<std::vector<int>> source_label_draws(const PosteriorDraws& draws,
                                                        int source) {
  std::vector<std::vector<int>> out;
  out.reserve(draws.states.size());
  for (const auto& s : draws.states) out.push_back(s.source_labels[source]);
  return out;
}

inline std::vector<std::vector<int>> mixture_label_draws(const MixtureDraws& draws) {
  std::vector<std::vector<int>> out;
  out.reserve(draws.states.size());
  for (const auto& s : draws.states) out.push_back(s.labels);
  return out;
}

inline std::vector<std::vector<int>> dependent_label_draws(const DependentDraws& draws,
                                                           int source) {
  std::vector<std::vector<int>> out;
  out.reserve(draws.states.size());
  for (const auto& s : draws.states) out.push_back(s.source_labels[source]);
  return out;
}

}  // namespace detail

/// Four-method comparison: per replicate, draw alpha uniformly on
/// (0.5, 1), generate weak-signal data (+/- 1 means), fit separate, joint,
/// pairwise-dependent, and consensus models, and score each against the
/// true source labels with permutation-aligned relative error. For joint
/// clustering the single estimated clustering is scored against every
/// source's truth.
inline std::vector<ErrorComparisonRecord> error_comparison_study(int n_sources,
                                                                 const StudyConfig& study,
                                                                 double mu_sep = 1.0) {
  if (n_sources < 2)
    throw std::invalid_argument("error_comparison_study: need at least two sources");
  std::vector<ErrorComparisonRecord> records;
  records.reserve(study.reps);
  for (int rep = 0; rep < study.reps; ++rep) {
    Rng rng(derive_seed(study.seed, {0xe44, static_cast<std::uint64_t>(rep)}));
    const double true_alpha = 0.5 + 0.5 * rng.uniform01();
    auto [data, truth] =
        generate_two_cluster_data(true_alpha, n_sources, study.n_objects, mu_sep, rng);

    ErrorComparisonRecord rec;
    rec.rep = rep + 1;
    rec.true_alpha = true_alpha;

    // separate: one mixture per source
    {
      std::vector<std::vector<int>> estimates(n_sources);
      for (int m = 0; m < n_sources; ++m) {
        ChainConfig config = detail::study_chain_config(
            study, 1, false,
            derive_seed(study.seed, {0x5e9, static_cast<std::uint64_t>(rep),
                                     static_cast<std::uint64_t>(m)}));
        config.model.n_objects = study.n_objects;
        const MixtureDraws draws = separate_sampler(data.sources[m].values, config);
        estimates[m] = dahl_point_estimate(detail::mixture_label_draws(draws));
      }
      rec.err_separate = relative_error(estimates, truth.source_labels, 2);
    }
    // joint: one mixture over concatenated features
    {
      ChainConfig config = detail::study_chain_config(
          study, 1, false, derive_seed(study.seed, {0x701, static_cast<std::uint64_t>(rep)}));
      const MixtureDraws draws = joint_sampler(data, config);
      const std::vector<int> estimate = dahl_point_estimate(detail::mixture_label_draws(draws));
      rec.err_joint = relative_error(std::vector<std::vector<int>>(n_sources, estimate),
                                     truth.source_labels, 2);
    }
    // dependent: pairwise-coupled labels
    {
      const ChainConfig config = detail::study_chain_config(
          study, n_sources, false,
          derive_seed(study.seed, {0xdeb, static_cast<std::uint64_t>(rep)}));
      const DependentDraws draws = dependent_sampler(data, config);
      std::vector<std::vector<int>> estimates(n_sources);
      for (int m = 0; m < n_sources; ++m)
        estimates[m] = dahl_point_estimate(detail::dependent_label_draws(draws, m));
      rec.err_dependent = relative_error(estimates, truth.source_labels, 2);
    }
    // consensus with shared adherence
    {
      const ChainConfig config = detail::study_chain_config(
          study, n_sources, true,
          derive_seed(study.seed, {0xbcc, static_cast<std::uint64_t>(rep)}));
      const PosteriorDraws draws = run_chain(data, config);
      std::vector<std::vector<int>> estimates(n_sources);
      for (int m = 0; m < n_sources; ++m)
        estimates[m] = dahl_point_estimate(detail::source_label_draws(draws, m));
      rec.err_bcc = relative_error(estimates, truth.source_labels, 2);
    }
    records.push_back(rec);
  }
  return records;
}

struct PriorSensitivityRecord {
  double prior_a = 0.0;
  double prior_b = 0.0;
  int rep = 0;
  double true_alpha = 0.0;
  double alpha_hat = 0.0;
};

/// Prior sensitivity: reruns the adherence-recovery generator under a grid
/// of truncated-beta priors and records the posterior mean per replicate.
inline std::vector<PriorSensitivityRecord> prior_sensitivity_study(
    const std::vector<std::pair<double, double>>& prior_grid, int reps_per_cell,
    const StudyConfig& base, double mu_sep = 1.5) {
  std::vector<PriorSensitivityRecord> records;
  records.reserve(prior_grid.size() * reps_per_cell);
  for (std::size_t cell = 0; cell < prior_grid.size(); ++cell) {
    StudyConfig study = base;
    study.reps = reps_per_cell;
    study.alpha_prior_a = prior_grid[cell].first;
    study.alpha_prior_b = prior_grid[cell].second;
    study.seed = derive_seed(base.seed, {0x9121, cell});
    const auto cell_records = alpha_recovery_study(study, 2, mu_sep);
    for (const auto& r : cell_records) {
      PriorSensitivityRecord rec;
      rec.prior_a = study.alpha_prior_a;
      rec.prior_b = study.alpha_prior_b;
      rec.rep = r.rep;
      rec.true_alpha = r.true_alpha;
      rec.alpha_hat = r.alpha_hat;
      records.push_back(rec);
    }
  }
  return records;
}

/// Induced source-cluster inclusion probabilities for a set of adherence
/// levels: K rows, one column per alpha. At alpha = 1 a column reproduces
/// pi; at alpha = 1/K it is uniform, and clusters with zero overall weight
/// pick up positive probability for any alpha < 1.
inline Matrix inclusion_probability_table(std::span<const double> pi,
                                          std::span<const double> alphas,
                                          int n_clusters) {
  Matrix table(n_clusters, alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a)
    for (int k = 1; k <= n_clusters; ++k)
      table(k - 1, a) = source_inclusion_prob(k, pi, alphas[a], n_clusters);
  return table;
}

}  // namespace bcc

#endif
