#ifndef BCC_DATASET_HPP
#define BCC_DATASET_HPP

#include <cmath>
#include <string>
#include <vector>

#include "bcc/errors.hpp"
#include "bcc/matrix.hpp"

namespace bcc {

struct DataSource {
  std::string name;
  Matrix values;  // objects x features
};

/// Aligned multi-source data: every source holds one row per object, in
/// the shared order of `ids`.
struct MultiSourceDataset {
  std::vector<std::string> ids;
  std::vector<DataSource> sources;

  int n_objects() const { return static_cast<int>(ids.size()); }
  int n_sources() const { return static_cast<int>(sources.size()); }

  void validate() const {
    if (sources.empty()) throw std::invalid_argument("dataset has no sources");
    for (const auto& s : sources) {
      if (s.values.rows() != ids.size())
        throw std::invalid_argument("source '" + s.name + "' has " +
                                    std::to_string(s.values.rows()) + " rows for " +
                                    std::to_string(ids.size()) + " objects");
      if (s.values.cols() == 0)
        throw std::invalid_argument("source '" + s.name + "' has no feature columns");
    }
  }
};

/// Center and scale each column to mean 0, unit sample variance.
inline void standardize_columns(Matrix& m, const std::string& source_name = "") {
  if (m.rows() < 2) throw DataError("standardize: need at least two rows");
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double mean = column_mean(m, c);
    const double var = column_variance(m, c);
    if (!(var > 0.0))
      throw DataError("standardize: column " + std::to_string(c + 1) +
                      (source_name.empty() ? "" : " of source '" + source_name + "'") +
                      " has zero variance; drop the variable or jitter it");
    const double sd = std::sqrt(var);
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) / sd;
  }
}

/// Joins all sources feature-wise into a single source over the same
/// objects (column order follows the source order).
inline MultiSourceDataset concatenate_sources(const MultiSourceDataset& data) {
  data.validate();
  std::size_t total_cols = 0;
  for (const auto& s : data.sources) total_cols += s.values.cols();
  Matrix joined(data.ids.size(), total_cols);
  std::size_t offset = 0;
  for (const auto& s : data.sources) {
    for (std::size_t r = 0; r < s.values.rows(); ++r)
      for (std::size_t c = 0; c < s.values.cols(); ++c)
        joined(r, offset + c) = s.values(r, c);
    offset += s.values.cols();
  }
  MultiSourceDataset out;
  out.ids = data.ids;
  out.sources.push_back({"joint", std::move(joined)});
  return out;
}

}  // namespace bcc

#endif
