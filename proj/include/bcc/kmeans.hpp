#ifndef BCC_KMEANS_HPP
#define BCC_KMEANS_HPP

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcc/matrix.hpp"
#include "bcc/rng.hpp"

namespace bcc {

namespace detail {

inline double sq_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

namespace detail {

/// Lloyd's algorithm with k-means++ seeding, one start. Returns 1-based
/// labels; ties go to the lowest center index, and a center that loses all
/// its points keeps its previous position (the label simply goes unused).
template <class Engine>
std::vector<int> kmeans_single(const Matrix& x, int n_clusters, Engine& rng,
                               int max_iter) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();

  // k-means++ seeding
  std::vector<std::vector<double>> centers;
  centers.reserve(n_clusters);
  {
    const std::size_t first = std::min<std::size_t>(
        static_cast<std::size_t>(rng.uniform01() * n), n - 1);
    centers.emplace_back(x.row(first).begin(), x.row(first).end());
    std::vector<double> d2(n);
    for (int k = 1; k < n_clusters; ++k) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers)
          best = std::min(best, detail::sq_distance(x.row(i), c));
        d2[i] = best;
        total += best;
      }
      std::size_t pick;
      if (total > 0.0) {
        const double u = rng.uniform01() * total;
        double cum = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          cum += d2[i];
          if (u < cum) {
            pick = i;
            break;
          }
        }
      } else {
        // all remaining points coincide with existing centers
        pick = std::min<std::size_t>(static_cast<std::size_t>(rng.uniform01() * n), n - 1);
      }
      centers.emplace_back(x.row(pick).begin(), x.row(pick).end());
    }
  }

  std::vector<int> labels(n, 1);
  std::vector<double> sums(n_clusters * dim);
  std::vector<int> counts(n_clusters);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best_k = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n_clusters; ++k) {
        const double d = detail::sq_distance(x.row(i), centers[k]);
        if (d < best) {
          best = d;
          best_k = k;
        }
      }
      if (labels[i] != best_k + 1) {
        labels[i] = best_k + 1;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int k = labels[i] - 1;
      ++counts[k];
      const auto row = x.row(i);
      for (std::size_t d = 0; d < dim; ++d) sums[k * dim + d] += row[d];
    }
    for (int k = 0; k < n_clusters; ++k)
      if (counts[k] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          centers[k][d] = sums[k * dim + d] / counts[k];
  }
  return labels;
}

inline double within_cluster_ss(const Matrix& x, const std::vector<int>& labels,
                                int n_clusters) {
  const std::size_t dim = x.cols();
  std::vector<double> sums(n_clusters * dim, 0.0);
  std::vector<int> counts(n_clusters, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int k = labels[i] - 1;
    ++counts[k];
    const auto row = x.row(i);
    for (std::size_t d = 0; d < dim; ++d) sums[k * dim + d] += row[d];
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const int k = labels[i] - 1;
    const auto row = x.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = row[d] - sums[k * dim + d] / counts[k];
      ss += diff * diff;
    }
  }
  return ss;
}

}  // namespace detail

/// K-means with several k-means++ starts, keeping the labeling with the
/// smallest within-cluster sum of squares. Lloyd's iteration is a local
/// search, and a bad seeding on multi-structured data otherwise sticks.
template <class Engine>
std::vector<int> kmeans(const Matrix& x, int n_clusters, Engine& rng, int max_iter = 50,
                        int n_starts = 5) {
  const std::size_t n = x.rows();
  if (n_clusters < 1 || static_cast<std::size_t>(n_clusters) > n)
    throw std::invalid_argument("kmeans: need 1 <= n_clusters <= n_points");
  std::vector<int> best;
  double best_ss = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_starts; ++s) {
    auto labels = detail::kmeans_single(x, n_clusters, rng, max_iter);
    const double ss = detail::within_cluster_ss(x, labels, n_clusters);
    if (ss < best_ss) {
      best_ss = ss;
      best = std::move(labels);
    }
  }
  return best;
}

}  // namespace bcc

#endif
