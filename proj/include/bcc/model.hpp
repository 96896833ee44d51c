#ifndef BCC_MODEL_HPP
#define BCC_MODEL_HPP

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcc/errors.hpp"

// Core consensus-clustering model. Objects carry an overall cluster label
// and one label per data source; an adherence parameter per source sets
// how strongly the source labels follow the overall one. Cluster labels
// are 1-based throughout (arrays are indexed with label - 1); all kernels
// here are pure functions.

namespace bcc {

struct ModelConfig {
  int n_objects = 0;   // N
  int n_sources = 0;   // M
  int n_clusters = 0;  // K
  bool equal_adherence = false;

  void validate() const {
    if (n_objects < 1) throw std::invalid_argument("ModelConfig: n_objects must be >= 1");
    if (n_sources < 1) throw std::invalid_argument("ModelConfig: n_sources must be >= 1");
    if (n_clusters < 2) throw std::invalid_argument("ModelConfig: n_clusters must be >= 2");
  }
};

inline void check_label(int label, int n_clusters) {
  if (label < 1 || label > n_clusters)
    throw std::domain_error("cluster label " + std::to_string(label) +
                            " outside {1,...," + std::to_string(n_clusters) + "}");
}

/// Adherence is a probability in [1/K, 1]: 1/K makes a source independent
/// of the overall clustering, 1 ties it exactly.
inline void check_adherence(double alpha, int n_clusters) {
  const double lo = 1.0 / n_clusters;
  if (!(alpha >= lo && alpha <= 1.0))
    throw std::domain_error("adherence " + std::to_string(alpha) +
                            " outside [1/K, 1] for K = " + std::to_string(n_clusters));
}

inline void check_weights(std::span<const double> pi) {
  double total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw std::domain_error("mixture weights must be nonnegative");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("mixture weights must sum to 1");
}

inline void check_labels(std::span<const int> labels, int n_clusters) {
  for (int l : labels) check_label(l, n_clusters);
}

/// Probability that a source assigns label `l` given overall label `c`:
/// alpha on agreement, (1 - alpha)/(K - 1) split over the rest.
inline double nu(int l, int c, double alpha, int n_clusters) {
  check_label(l, n_clusters);
  check_label(c, n_clusters);
  check_adherence(alpha, n_clusters);
  return l == c ? alpha : (1.0 - alpha) / (n_clusters - 1);
}

inline double log_nu(int l, int c, double alpha, int n_clusters) {
  check_label(l, n_clusters);
  check_label(c, n_clusters);
  check_adherence(alpha, n_clusters);
  return l == c ? std::log(alpha) : std::log1p(-alpha) - std::log(double(n_clusters - 1));
}

/// Marginal probability that a source with adherence `alpha` assigns label
/// `k`, induced by the overall weights pi:
///   pi_k * alpha + (1 - pi_k) * (1 - alpha)/(K - 1).
inline double source_inclusion_prob(int k, std::span<const double> pi, double alpha,
                                    int n_clusters) {
  check_label(k, n_clusters);
  check_weights(pi);
  check_adherence(alpha, n_clusters);
  if (static_cast<int>(pi.size()) != n_clusters)
    throw std::invalid_argument("source_inclusion_prob: pi length must equal K");
  const double p = pi[k - 1];
  return p * alpha + (1.0 - p) * (1.0 - alpha) / (n_clusters - 1);
}

inline double log_source_inclusion_prob(int k, std::span<const double> pi, double alpha,
                                        int n_clusters) {
  return std::log(source_inclusion_prob(k, pi, alpha, n_clusters));
}

/// Log conditional for the overall label of one object given its source
/// labels: log pi_k + sum_m log nu(l_m, k, alpha_m), normalized by
/// log-sum-exp. Probabilities over hundreds of sources underflow in
/// linear space, hence the log form is primary.
inline std::vector<double> log_overall_conditional(std::span<const int> source_labels,
                                                   std::span<const double> pi,
                                                   std::span<const double> alphas,
                                                   int n_clusters) {
  if (source_labels.size() != alphas.size())
    throw std::invalid_argument("log_overall_conditional: one adherence per source required");
  check_weights(pi);
  if (static_cast<int>(pi.size()) != n_clusters)
    throw std::invalid_argument("log_overall_conditional: pi length must equal K");
  std::vector<double> logp(n_clusters);
  for (int k = 1; k <= n_clusters; ++k) {
    double lp = std::log(pi[k - 1]);
    for (std::size_t m = 0; m < source_labels.size(); ++m)
      lp += log_nu(source_labels[m], k, alphas[m], n_clusters);
    logp[k - 1] = lp;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logp)
    if (v > mx) mx = v;
  if (!std::isfinite(mx))
    throw NumericalError("overall conditional is degenerate: no cluster has positive mass");
  double total = 0.0;
  for (double v : logp) total += std::exp(v - mx);
  const double log_total = mx + std::log(total);
  for (double& v : logp) v -= log_total;
  return logp;
}

/// Normalized conditional for the overall label of one object.
inline std::vector<double> overall_conditional(std::span<const int> source_labels,
                                               std::span<const double> pi,
                                               std::span<const double> alphas,
                                               int n_clusters) {
  std::vector<double> p = log_overall_conditional(source_labels, pi, alphas, n_clusters);
  for (double& v : p) v = std::exp(v);
  return p;
}

}  // namespace bcc

#endif
