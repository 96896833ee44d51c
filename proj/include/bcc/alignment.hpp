#ifndef BCC_ALIGNMENT_HPP
#define BCC_ALIGNMENT_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcc/model.hpp"

// Label alignment between clusterings. Mixture labels are arbitrary, so
// any comparison against a reference first picks the label permutation
// maximizing agreement: exhaustively for small K, by the Hungarian
// algorithm in general.

namespace bcc {

/// Contingency counts: entry (i-1, j-1) is the number of positions with
/// label i in `a` and label j in `b`.
inline std::vector<std::vector<int>> label_cooccurrence(std::span<const int> a,
                                                        std::span<const int> b,
                                                        int n_labels_a, int n_labels_b) {
  if (a.size() != b.size())
    throw std::invalid_argument("label_cooccurrence: length mismatch");
  check_labels(a, n_labels_a);
  check_labels(b, n_labels_b);
  std::vector<std::vector<int>> counts(n_labels_a, std::vector<int>(n_labels_b, 0));
  for (std::size_t n = 0; n < a.size(); ++n) ++counts[a[n] - 1][b[n] - 1];
  return counts;
}

namespace detail {

/// Max-total-weight assignment over a square matrix (Hungarian algorithm,
/// O(K^3) potentials formulation). Returns the column assigned to each row.
inline std::vector<int> max_assignment(const std::vector<std::vector<double>>& weight) {
  const int n = static_cast<int>(weight.size());
  // minimize negated weights; 1-based internal arrays
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Permutation sigma of {1,...,K} maximizing agreement of sigma(estimated)
/// with the reference: sigma[k-1] is the reference label assigned to
/// estimated label k. Exhaustive for K <= 8, Hungarian beyond.
inline std::vector<int> best_label_permutation(std::span<const int> estimated,
                                               std::span<const int> reference,
                                               int n_clusters) {
  const auto counts = label_cooccurrence(estimated, reference, n_clusters, n_clusters);
  if (n_clusters <= 8) {
    std::vector<int> perm(n_clusters);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best_perm = perm;
    long best_score = -1;
    do {
      long score = 0;
      for (int k = 0; k < n_clusters; ++k) score += counts[k][perm[k]];
      if (score > best_score) {
        best_score = score;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int& k : best_perm) ++k;
    return best_perm;
  }
  std::vector<std::vector<double>> weight(n_clusters, std::vector<double>(n_clusters));
  for (int i = 0; i < n_clusters; ++i)
    for (int j = 0; j < n_clusters; ++j) weight[i][j] = counts[i][j];
  std::vector<int> sigma = detail::max_assignment(weight);
  for (int& k : sigma) ++k;
  return sigma;
}

/// Mismatches of `estimated` against `reference` after the best label
/// permutation of the estimate.
inline int aligned_mismatch_count(std::span<const int> estimated,
                                  std::span<const int> reference, int n_clusters) {
  const auto sigma = best_label_permutation(estimated, reference, n_clusters);
  int mismatches = 0;
  for (std::size_t n = 0; n < estimated.size(); ++n)
    mismatches += sigma[estimated[n] - 1] != reference[n];
  return mismatches;
}

/// Fraction of per-source label assignments that disagree with the truth,
/// each source aligned by its own best permutation; sources with no
/// shared label space are thereby scored on a common footing.
inline double relative_error(const std::vector<std::vector<int>>& estimated,
                             const std::vector<std::vector<int>>& truth, int n_clusters) {
  if (estimated.size() != truth.size() || estimated.empty())
    throw std::invalid_argument("relative_error: need matching nonempty clustering sets");
  long mismatches = 0;
  long total = 0;
  for (std::size_t m = 0; m < estimated.size(); ++m) {
    if (estimated[m].size() != truth[m].size())
      throw std::invalid_argument("relative_error: length mismatch in source " +
                                  std::to_string(m + 1));
    mismatches += aligned_mismatch_count(estimated[m], truth[m], n_clusters);
    total += static_cast<long>(truth[m].size());
  }
  return static_cast<double>(mismatches) / static_cast<double>(total);
}

}  // namespace bcc

#endif
