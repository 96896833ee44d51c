#ifndef BCC_MARGINALS_HPP
#define BCC_MARGINALS_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcc/matrix.hpp"
#include "bcc/model.hpp"

// Marginal distributions of the source labels with the overall clustering
// integrated out, plus the pairwise-dependence (MDI-style) mass and the
// two-source substitution that maps one model onto the other.

namespace bcc {

/// Joint marginal mass of one label per source:
///   sum_k pi_k * prod_m nu(k_m, k, alpha_m).
/// Summing this over all K^M label combinations gives 1.
inline double joint_source_marginal(std::span<const int> source_labels,
                                    std::span<const double> pi,
                                    std::span<const double> alphas, int n_clusters) {
  if (source_labels.size() != alphas.size())
    throw std::invalid_argument("joint_source_marginal: one adherence per source required");
  check_weights(pi);
  if (static_cast<int>(pi.size()) != n_clusters)
    throw std::invalid_argument("joint_source_marginal: pi length must equal K");
  double total = 0.0;
  for (int k = 1; k <= n_clusters; ++k) {
    double term = pi[k - 1];
    for (std::size_t m = 0; m < source_labels.size(); ++m)
      term *= nu(source_labels[m], k, alphas[m], n_clusters);
    total += term;
  }
  return total;
}

inline double log_joint_source_marginal(std::span<const int> source_labels,
                                        std::span<const double> pi,
                                        std::span<const double> alphas,
                                        int n_clusters) {
  return std::log(joint_source_marginal(source_labels, pi, alphas, n_clusters));
}

/// Equal-adherence marginal mass sum_k pi_k * U^{t_k} with
/// U = (K-1) * alpha / (1 - alpha) and t_k the number of sources whose
/// label equals k. Proportional (with one constant across all K^M label
/// combinations) to joint_source_marginal with all adherences equal.
///
/// At alpha = 1 the ratio U is infinite; with `limit_at_one` set the
/// boundary is handled by case analysis instead (all mass on constant
/// label vectors, with relative weight pi of the shared label).
inline double equal_alpha_marginal(std::span<const int> source_labels,
                                   std::span<const double> pi, double alpha,
                                   int n_clusters, bool limit_at_one = false) {
  check_weights(pi);
  if (static_cast<int>(pi.size()) != n_clusters)
    throw std::invalid_argument("equal_alpha_marginal: pi length must equal K");
  check_adherence(alpha, n_clusters);
  check_labels(source_labels, n_clusters);
  if (alpha == 1.0) {
    if (!limit_at_one)
      throw std::domain_error(
          "equal_alpha_marginal: alpha = 1 requires the limit convention");
    for (int l : source_labels)
      if (l != source_labels[0]) return 0.0;
    return pi[source_labels[0] - 1];
  }
  const double ratio = (n_clusters - 1) * alpha / (1.0 - alpha);
  std::vector<int> match_count(n_clusters, 0);
  for (int l : source_labels) ++match_count[l - 1];
  double total = 0.0;
  for (int k = 0; k < n_clusters; ++k)
    total += pi[k] * std::pow(ratio, match_count[k]);
  return total;
}

inline double log_equal_alpha_marginal(std::span<const int> source_labels,
                                       std::span<const double> pi, double alpha,
                                       int n_clusters, bool limit_at_one = false) {
  return std::log(
      equal_alpha_marginal(source_labels, pi, alpha, n_clusters, limit_at_one));
}

/// Pairwise-dependence mass over one label per source:
///   prod_m pi_tilde[m][k_m] * prod_{i<j, k_i = k_j} (1 + phi(i, j)).
/// phi must be symmetric with nonnegative entries; phi = 0 recovers
/// independent per-source mixtures.
inline double mdi_pairwise_mass(std::span<const int> source_labels,
                                const std::vector<std::vector<double>>& pi_tilde,
                                const Matrix& phi) {
  const std::size_t n_sources = source_labels.size();
  if (pi_tilde.size() != n_sources)
    throw std::invalid_argument("mdi_pairwise_mass: one weight vector per source required");
  if (phi.rows() != n_sources || phi.cols() != n_sources)
    throw std::invalid_argument("mdi_pairwise_mass: phi must be n_sources x n_sources");
  double mass = 1.0;
  for (std::size_t m = 0; m < n_sources; ++m) {
    const int n_clusters = static_cast<int>(pi_tilde[m].size());
    check_label(source_labels[m], n_clusters);
    check_weights(pi_tilde[m]);
    mass *= pi_tilde[m][source_labels[m] - 1];
  }
  for (std::size_t i = 0; i < n_sources; ++i)
    for (std::size_t j = i + 1; j < n_sources; ++j) {
      if (!(phi(i, j) >= 0.0))
        throw std::domain_error("mdi_pairwise_mass: phi entries must be nonnegative");
      if (source_labels[i] == source_labels[j]) mass *= 1.0 + phi(i, j);
    }
  return mass;
}

inline double log_mdi_pairwise_mass(std::span<const int> source_labels,
                                    const std::vector<std::vector<double>>& pi_tilde,
                                    const Matrix& phi) {
  return std::log(mdi_pairwise_mass(source_labels, pi_tilde, phi));
}

struct MdiSubstitution {
  double phi = 0.0;
  double pi_tilde_1 = 0.0;
};

/// Two-source, two-cluster parameter substitution mapping the
/// equal-adherence consensus marginal onto the pairwise-dependence form.
/// Here U = alpha / (1 - alpha) >= 1, which for K = 2 coincides with the
/// (K-1) * alpha / (1 - alpha) ratio used elsewhere. The returned
/// (phi, pi_tilde_1) make the four pairwise masses proportional to the
/// consensus masses. No such substitution exists for more than two
/// sources.
inline MdiSubstitution bcc_to_mdi_substitution(double pi1, double agreement_ratio) {
  if (!(pi1 > 0.0 && pi1 < 1.0))
    throw std::domain_error("bcc_to_mdi_substitution: pi1 must lie strictly in (0, 1)");
  if (!(agreement_ratio >= 1.0))
    throw std::domain_error("bcc_to_mdi_substitution: agreement ratio must be >= 1");
  const double u = agreement_ratio;
  const double s = std::sqrt((1.0 - pi1) / u + pi1 * u);
  const double t = std::sqrt((1.0 - pi1) * u + pi1 / u);
  MdiSubstitution out;
  out.phi = t * s - 1.0;
  out.pi_tilde_1 = s / (t + s);
  return out;
}

}  // namespace bcc

#endif
