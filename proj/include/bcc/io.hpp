#ifndef BCC_IO_HPP
#define BCC_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bcc/chain.hpp"
#include "bcc/csv.hpp"
#include "bcc/dataset.hpp"
#include "bcc/errors.hpp"
#include "bcc/matrix.hpp"
#include "bcc/summary.hpp"

// Data ingestion and run serialization. Input CSVs carry a header row;
// rows are objects keyed by the leading ID column and all remaining
// columns are numeric features (use `transpose` for files laid out the
// other way around). Objects are aligned across sources by ID
// intersection, ordered as in the first file.

namespace bcc {

struct SourceSpec {
  std::string path;
  char delimiter = ',';
  bool standardize = false;
  bool transpose = false;
};

namespace detail {

inline bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end && std::isfinite(out);
}

struct RawSource {
  std::string name;
  std::vector<std::string> ids;
  Matrix values;
};

inline RawSource load_source(const SourceSpec& spec) {
  CsvTable table = read_csv(spec.path, spec.delimiter);
  const std::string name = std::filesystem::path(spec.path).stem().string();
  if (spec.transpose) {
    // header holds object IDs; each row is one feature
    if (table.header.size() < 2)
      throw DataError(spec.path + ": transposed file needs at least one object column");
    RawSource src;
    src.name = name;
    src.ids.assign(table.header.begin() + 1, table.header.end());
    src.values = Matrix(src.ids.size(), table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != table.header.size())
        throw DataError(spec.path + ": row " + std::to_string(r + 2) + " has " +
                        std::to_string(row.size()) + " fields, expected " +
                        std::to_string(table.header.size()));
      for (std::size_t c = 1; c < row.size(); ++c) {
        double v;
        if (!parse_double(row[c], v))
          throw DataError(spec.path + ": row " + std::to_string(r + 2) + ", column " +
                          std::to_string(c + 1) + ": cannot parse '" + row[c] +
                          "' as a finite number");
        src.values(c - 1, r) = v;
      }
    }
    return src;
  }
  if (table.header.size() < 2)
    throw DataError(spec.path + ": need an ID column plus at least one feature column");
  RawSource src;
  src.name = name;
  src.ids.reserve(table.rows.size());
  src.values = Matrix(table.rows.size(), table.header.size() - 1);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError(spec.path + ": row " + std::to_string(r + 2) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    src.ids.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      double v;
      if (!parse_double(row[c], v))
        throw DataError(spec.path + ": row " + std::to_string(r + 2) + ", column " +
                        std::to_string(c + 1) + ": cannot parse '" + row[c] +
                        "' as a finite number");
      src.values(r, c - 1) = v;
    }
  }
  return src;
}

}  // namespace detail

/// Reads every source, aligns objects by ID intersection in the first
/// file's order, and optionally standardizes columns after alignment.
inline MultiSourceDataset ingest(const std::vector<SourceSpec>& specs) {
  if (specs.empty()) throw DataError("ingest: no input files");
  std::vector<detail::RawSource> raw;
  raw.reserve(specs.size());
  for (const auto& spec : specs) raw.push_back(detail::load_source(spec));

  std::vector<std::unordered_map<std::string, std::size_t>> index(raw.size());
  for (std::size_t s = 0; s < raw.size(); ++s) {
    for (std::size_t r = 0; r < raw[s].ids.size(); ++r) {
      const auto [it, inserted] = index[s].emplace(raw[s].ids[r], r);
      if (!inserted)
        throw DataError(specs[s].path + ": duplicate ID '" + raw[s].ids[r] + "'");
    }
  }

  std::vector<std::string> shared_ids;
  for (const auto& id : raw[0].ids) {
    bool everywhere = true;
    for (std::size_t s = 1; s < raw.size(); ++s)
      if (!index[s].count(id)) {
        everywhere = false;
        break;
      }
    if (everywhere) shared_ids.push_back(id);
  }
  if (shared_ids.empty()) {
    std::string msg = "ingest: no shared IDs across sources; per-file object counts:";
    for (std::size_t s = 0; s < raw.size(); ++s)
      msg += " " + specs[s].path + "=" + std::to_string(raw[s].ids.size());
    throw DataError(msg);
  }

  MultiSourceDataset data;
  data.ids = shared_ids;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    Matrix aligned(shared_ids.size(), raw[s].values.cols());
    for (std::size_t r = 0; r < shared_ids.size(); ++r) {
      const std::size_t src_row = index[s].at(shared_ids[r]);
      const auto row = raw[s].values.row(src_row);
      std::copy(row.begin(), row.end(), aligned.row(r).begin());
    }
    if (specs[s].standardize) standardize_columns(aligned, raw[s].name);
    data.sources.push_back({raw[s].name, std::move(aligned)});
  }
  data.validate();
  return data;
}

/// Writes one source back out in the ingestible layout (ID column plus
/// features), so a dataset round-trips through its own files.
inline void write_source_csv(const std::string& path, const MultiSourceDataset& data,
                             int source) {
  const Matrix& values = data.sources[source].values;
  std::vector<std::string> header{"id"};
  for (std::size_t c = 0; c < values.cols(); ++c)
    header.push_back("f" + std::to_string(c + 1));
  std::vector<std::vector<std::string>> rows;
  rows.reserve(values.rows());
  for (std::size_t r = 0; r < values.rows(); ++r) {
    std::vector<std::string> row{data.ids[r]};
    for (std::size_t c = 0; c < values.cols(); ++c)
      row.push_back(format_double(values(r, c)));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

/// Hard clusterings chosen from the posterior draws, plus the matching
/// matrices between the overall clustering and each source's.
struct ClusteringResult {
  std::vector<int> overall;
  std::vector<std::vector<int>> source_labels;
  std::vector<std::vector<std::vector<int>>> matching;  // per source
};

inline ClusteringResult summarize_clusterings(const PosteriorDraws& draws) {
  if (draws.states.empty())
    throw std::invalid_argument("summarize_clusterings: no saved states");
  ClusteringResult result;
  {
    std::vector<std::vector<int>> overall_draws;
    overall_draws.reserve(draws.states.size());
    for (const auto& s : draws.states) overall_draws.push_back(s.overall);
    result.overall = dahl_point_estimate(overall_draws);
  }
  const int n_sources = draws.model.n_sources;
  result.source_labels.resize(n_sources);
  result.matching.resize(n_sources);
  for (int m = 0; m < n_sources; ++m) {
    std::vector<std::vector<int>> label_draws;
    label_draws.reserve(draws.states.size());
    for (const auto& s : draws.states) label_draws.push_back(s.source_labels[m]);
    result.source_labels[m] = dahl_point_estimate(label_draws);
    result.matching[m] = matching_matrix(result.overall, result.source_labels[m]);
  }
  return result;
}

/// Reproducibility record written next to every output set. The
/// `environment` object is the one annotated field that may differ
/// between reruns (timestamps, wall time); everything else, like the
/// data outputs themselves, is a pure function of the inputs.
struct RunManifest {
  std::string schema_version = "1";
  std::string subcommand;
  std::vector<std::string> command_line;
  nlohmann::json resolved_config = nlohmann::json::object();
  std::vector<std::string> source_files;
  std::string output_directory;
  nlohmann::json environment = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["subcommand"] = subcommand;
    j["command_line"] = command_line;
    j["resolved_config"] = resolved_config;
    j["source_files"] = source_files;
    j["output_directory"] = output_directory;
    j["environment"] = environment;
    return j;
  }
};

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

/// Writes the standard output set for a fitted consensus chain:
/// summary.json, clusters.csv, trace_alpha.csv, trace_pi.csv, optional
/// coincidence_C.csv, and manifest.json.
inline void write_outputs(const PosteriorDraws& draws, const ClusteringResult& result,
                          const RunManifest& manifest, const std::vector<std::string>& ids,
                          const std::string& dir, bool emit_coincidence = false) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto path = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
  const int n_sources = draws.model.n_sources;
  const int n_clusters = draws.model.n_clusters;

  // summary.json
  {
    nlohmann::json j;
    std::vector<double> alpha_mean(n_sources, 0.0);
    const int tail = draws.iterations - draws.burn_in;
    for (int it = draws.burn_in; it < draws.iterations; ++it)
      for (int m = 0; m < n_sources; ++m) alpha_mean[m] += draws.alpha_trace(it, m);
    for (double& v : alpha_mean) v /= tail;
    std::vector<double> pi_mean(n_clusters, 0.0);
    for (int it = draws.burn_in; it < draws.iterations; ++it)
      for (int k = 0; k < n_clusters; ++k) pi_mean[k] += draws.pi_trace(it, k);
    for (double& v : pi_mean) v /= tail;
    const IntervalEstimate adherence = mean_adjusted_adherence(draws);
    j["alpha_posterior_mean"] = alpha_mean;
    j["mean_adjusted_adherence"] = {{"point", adherence.point},
                                    {"ci_low", adherence.lower},
                                    {"ci_high", adherence.upper}};
    j["pi_posterior_mean"] = pi_mean;
    std::vector<int> sizes(n_clusters, 0);
    for (int l : result.overall) ++sizes[l - 1];
    j["overall_cluster_sizes"] = sizes;
    for (int m = 0; m < n_sources; ++m)
      j["matching_overall_vs_source"][std::to_string(m + 1)] = result.matching[m];
    j["beta_truncation_warnings"] = draws.beta_truncation_warnings;
    write_json(path("summary.json"), j);
  }
  // clusters.csv: id, overall, one column per source
  {
    std::vector<std::string> header{"id", "C"};
    for (int m = 0; m < n_sources; ++m) header.push_back("L" + std::to_string(m + 1));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ids.size());
    for (std::size_t n = 0; n < ids.size(); ++n) {
      std::vector<std::string> row{ids[n], std::to_string(result.overall[n])};
      for (int m = 0; m < n_sources; ++m)
        row.push_back(std::to_string(result.source_labels[m][n]));
      rows.push_back(std::move(row));
    }
    write_csv(path("clusters.csv"), header, rows);
  }
  // traces: every sweep, including burn-in
  {
    std::vector<std::string> header{"iteration"};
    for (int m = 0; m < n_sources; ++m) header.push_back("alpha" + std::to_string(m + 1));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(draws.iterations);
    for (int it = 0; it < draws.iterations; ++it) {
      std::vector<std::string> row{std::to_string(it + 1)};
      for (int m = 0; m < n_sources; ++m)
        row.push_back(format_double(draws.alpha_trace(it, m)));
      rows.push_back(std::move(row));
    }
    write_csv(path("trace_alpha.csv"), header, rows);
  }
  {
    std::vector<std::string> header{"iteration"};
    for (int k = 0; k < n_clusters; ++k) header.push_back("pi" + std::to_string(k + 1));
    std::vector<std::vector<std::string>> rows;
    rows.reserve(draws.iterations);
    for (int it = 0; it < draws.iterations; ++it) {
      std::vector<std::string> row{std::to_string(it + 1)};
      for (int k = 0; k < n_clusters; ++k)
        row.push_back(format_double(draws.pi_trace(it, k)));
      rows.push_back(std::move(row));
    }
    write_csv(path("trace_pi.csv"), header, rows);
  }
  if (emit_coincidence) {
    std::vector<std::vector<int>> overall_draws;
    overall_draws.reserve(draws.states.size());
    for (const auto& s : draws.states) overall_draws.push_back(s.overall);
    const Matrix p = coincidence_matrix(overall_draws);
    std::vector<std::string> header{"id"};
    for (const auto& id : ids) header.push_back(id);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::vector<std::string> row{ids[i]};
      for (std::size_t j = 0; j < ids.size(); ++j) row.push_back(format_double(p(i, j)));
      rows.push_back(std::move(row));
    }
    write_csv(path("coincidence_C.csv"), header, rows);
  }
  write_json(path("manifest.json"), manifest.to_json());
}

}  // namespace bcc

#endif
