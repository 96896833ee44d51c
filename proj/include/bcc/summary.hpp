#ifndef BCC_SUMMARY_HPP
#define BCC_SUMMARY_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcc/chain.hpp"
#include "bcc/matrix.hpp"
#include "bcc/rng.hpp"

// Posterior summaries: pairwise co-clustering fractions, Dahl's
// least-squares point estimate, adherence statistics, and the
// max-adherence rule for choosing the number of clusters.

namespace bcc {

/// Percentile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  if (p <= 0.0) return values.front();
  if (p >= 1.0) return values.back();
  const double h = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace detail {

/// Per-object bit signatures of the label sequence across draws, one
/// plane per bit of the label index. Co-clustering counts then reduce to
/// popcounts over XORed planes instead of a pass over every draw.
struct LabelSignatures {
  std::size_t n_objects = 0;
  std::size_t n_draws = 0;
  std::size_t words = 0;
  int planes = 0;
  std::vector<std::uint64_t> bits;  // [object][plane][word]

  explicit LabelSignatures(const std::vector<std::vector<int>>& draws) {
    n_draws = draws.size();
    if (n_draws == 0) throw std::invalid_argument("need at least one draw");
    n_objects = draws[0].size();
    int max_label = 1;
    for (const auto& d : draws) {
      if (d.size() != n_objects)
        throw std::invalid_argument("draws must have equal lengths");
      for (int l : d) max_label = std::max(max_label, l);
    }
    planes = std::max(1, static_cast<int>(std::bit_width(static_cast<unsigned>(max_label - 1))));
    words = (n_draws + 63) / 64;
    bits.assign(n_objects * planes * words, 0);
    for (std::size_t b = 0; b < n_draws; ++b)
      for (std::size_t i = 0; i < n_objects; ++i) {
        const unsigned code = static_cast<unsigned>(draws[b][i] - 1);
        for (int pl = 0; pl < planes; ++pl)
          if (code >> pl & 1u)
            bits[(i * planes + pl) * words + b / 64] |= 1ULL << (b % 64);
      }
  }

  /// Number of draws in which objects i and j share a label.
  std::size_t shared_count(std::size_t i, std::size_t j) const {
    std::size_t differ = 0;
    if (planes == 1) {
      const std::uint64_t* a = &bits[i * words];
      const std::uint64_t* b = &bits[j * words];
      for (std::size_t w = 0; w < words; ++w)
        differ += std::popcount(a[w] ^ b[w]);
    } else {
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t diff = 0;
        for (int pl = 0; pl < planes; ++pl)
          diff |= bits[(i * planes + pl) * words + w] ^
                  bits[(j * planes + pl) * words + w];
        differ += std::popcount(diff);
      }
    }
    return n_draws - differ;
  }
};

}  // namespace detail

/// N x N matrix of the fraction of draws in which each object pair shares
/// a label. Symmetric with unit diagonal.
inline Matrix coincidence_matrix(const std::vector<std::vector<int>>& draws) {
  const detail::LabelSignatures sig(draws);
  const std::size_t n = sig.n_objects;
  Matrix p(n, n, 0.0);
  const double inv_b = 1.0 / static_cast<double>(sig.n_draws);
  for (std::size_t i = 0; i < n; ++i) {
    p(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double frac = static_cast<double>(sig.shared_count(i, j)) * inv_b;
      p(i, j) = frac;
      p(j, i) = frac;
    }
  }
  return p;
}

/// Dahl's least-squares clustering: the draw whose pairwise association
/// matrix is closest in squared loss to the mean co-clustering fractions.
/// Ties resolve to the earliest draw. Depends only on the partition
/// structure of the draws, not on the label values.
inline std::vector<int> dahl_point_estimate(const std::vector<std::vector<int>>& draws) {
  const detail::LabelSignatures sig(draws);
  const std::size_t n = sig.n_objects;
  // Squared loss of draw b decomposes into a constant plus
  // sum over co-clustered pairs of (1 - 2 p_ij); only that sum varies.
  Matrix score(n, n, 0.0);
  const double inv_b = 1.0 / static_cast<double>(sig.n_draws);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      score(i, j) = 1.0 - 2.0 * static_cast<double>(sig.shared_count(i, j)) * inv_b;

  // The loss is accumulated over object pairs in (i, j) order, not in
  // label-bucket order, so relabeled draws produce bit-identical losses
  // and the earliest-draw tie break is invariant to label conventions.
  std::size_t best_draw = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < sig.n_draws; ++b) {
    const auto& labels = draws[b];
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int li = labels[i];
      for (std::size_t j = i + 1; j < n; ++j)
        if (labels[j] == li) loss += score(i, j);
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_draw = b;
    }
  }
  return draws[best_draw];
}

/// Adherence rescaled so that 0 is chance-level agreement and 1 is
/// identity: (K * alpha - 1) / (K - 1).
inline double adjusted_adherence(double alpha, int n_clusters) {
  check_adherence(alpha, n_clusters);
  return (n_clusters * alpha - 1.0) / (n_clusters - 1.0);
}

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Post-burn-in mean (with 2.5/97.5 percentile interval) of the adjusted
/// adherence averaged over sources.
inline IntervalEstimate mean_adjusted_adherence(const PosteriorDraws& draws) {
  const int n_sources = draws.model.n_sources;
  const int n_clusters = draws.model.n_clusters;
  if (draws.burn_in >= draws.iterations)
    throw std::invalid_argument("mean_adjusted_adherence: no post-burn-in draws");
  std::vector<double> per_draw;
  per_draw.reserve(draws.iterations - draws.burn_in);
  for (int it = draws.burn_in; it < draws.iterations; ++it) {
    double mean = 0.0;
    for (int m = 0; m < n_sources; ++m)
      mean += adjusted_adherence(draws.alpha_trace(it, m), n_clusters);
    per_draw.push_back(mean / n_sources);
  }
  IntervalEstimate est;
  double total = 0.0;
  for (double v : per_draw) total += v;
  est.point = total / static_cast<double>(per_draw.size());
  est.lower = quantile(per_draw, 0.025);
  est.upper = quantile(per_draw, 0.975);
  return est;
}

struct KSelectionRow {
  int n_clusters = 0;
  IntervalEstimate adherence;
};

struct KSelectionResult {
  int selected = 0;
  std::vector<KSelectionRow> table;
};

/// Runs a full chain per candidate K and picks the one with the highest
/// mean adjusted adherence (strict argmax; near-ties are left to the
/// reader of the table). Per-candidate seeds are derived from the base
/// seed, so the whole table is reproducible.
inline KSelectionResult select_K(const MultiSourceDataset& data,
                                 const std::vector<int>& k_range,
                                 const ChainConfig& base) {
  if (k_range.empty()) throw std::invalid_argument("select_K: empty candidate list");
  KSelectionResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (int k : k_range) {
    ChainConfig config = base;
    config.model.n_clusters = k;
    config.seed = derive_seed(base.seed, {0x5e1ec7ULL, static_cast<std::uint64_t>(k)});
    if (!base.beta0.empty())
      config.beta0.assign(k, base.beta0[0]);
    config.store_components = false;
    const PosteriorDraws draws = run_chain(data, config);
    KSelectionRow row;
    row.n_clusters = k;
    row.adherence = mean_adjusted_adherence(draws);
    if (row.adherence.point > best) {
      best = row.adherence.point;
      result.selected = k;
    }
    result.table.push_back(row);
  }
  return result;
}

/// Contingency table of two label vectors over the same objects: entry
/// (i-1, j-1) counts objects with label i in `a` and label j in `b`.
inline std::vector<std::vector<int>> matching_matrix(std::span<const int> a,
                                                     std::span<const int> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("matching_matrix: length mismatch");
  int ka = 0, kb = 0;
  for (int l : a) ka = std::max(ka, l);
  for (int l : b) kb = std::max(kb, l);
  check_labels(a, ka);
  check_labels(b, kb);
  std::vector<std::vector<int>> counts(ka, std::vector<int>(kb, 0));
  for (std::size_t n = 0; n < a.size(); ++n) ++counts[a[n] - 1][b[n] - 1];
  return counts;
}

}  // namespace bcc

#endif
