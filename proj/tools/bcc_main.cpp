// Command-line front end: fit, select-k, baseline, and simulate
// subcommands over CSV inputs. Exit codes: 0 success, 2 usage or
// configuration error, 3 data error, 4 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcc/bcc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::vector<std::string> data_files;
  int n_clusters = 2;
  int iterations = 10000;
  int burn_in = 2000;
  int thin = 1;
  bool equal_alpha = false;
  std::string alpha_prior = "1,1";
  double beta0 = 1.0;
  std::optional<std::uint64_t> seed;
  bool standardize = false;
  bool transpose = false;
  std::string out_dir = "bcc_out";
  bool emit_coincidence = false;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BCC_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("BCC_SEED", "not an unsigned integer: " + std::string(env));
    }
  }
  return 1;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError(flag, "expected 'a,b', got '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected 'a,b', got '" + text + "'");
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  try {
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto piece = text.substr(start, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - start);
      out.push_back(std::stod(piece));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected a comma-separated number list, got '" + text + "'");
  }
  return out;
}

std::pair<int, int> parse_range(const std::string& text, const std::string& flag) {
  const auto dots = text.find("..");
  if (dots == std::string::npos)
    throw CLI::ValidationError(flag, "expected 'lo..hi', got '" + text + "'");
  try {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 2 || hi < lo)
      throw CLI::ValidationError(flag, "need 2 <= lo <= hi, got '" + text + "'");
    return {lo, hi};
  } catch (const CLI::ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected 'lo..hi', got '" + text + "'");
  }
}

std::vector<std::pair<double, double>> parse_grid(const std::string& text,
                                                  const std::string& flag) {
  std::vector<std::pair<double, double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto semi = text.find(';', start);
    const auto piece =
        text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    if (!piece.empty()) out.push_back(parse_pair(piece, flag));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty prior grid");
  return out;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<bcc::SourceSpec> source_specs(const CommonOptions& opt) {
  std::vector<bcc::SourceSpec> specs;
  for (const auto& path : opt.data_files) {
    bcc::SourceSpec spec{path};
    spec.standardize = opt.standardize;
    spec.transpose = opt.transpose;
    specs.push_back(spec);
  }
  return specs;
}

bcc::ChainConfig make_chain_config(const CommonOptions& opt,
                                   const bcc::MultiSourceDataset& data,
                                   std::uint64_t seed) {
  bcc::ChainConfig config;
  config.iterations = opt.iterations;
  config.burn_in = opt.burn_in;
  config.thin = opt.thin;
  config.seed = seed;
  config.model = {data.n_objects(), data.n_sources(), opt.n_clusters, opt.equal_alpha};
  config.alpha_prior = {parse_pair(opt.alpha_prior, "--alpha-prior")};
  config.beta0.assign(opt.n_clusters, opt.beta0);
  config.store_components = false;
  return config;
}

json config_to_json(const bcc::ChainConfig& config) {
  json j;
  j["iterations"] = config.iterations;
  j["burn_in"] = config.burn_in;
  j["thin"] = config.thin;
  j["seed"] = config.seed;
  j["n_objects"] = config.model.n_objects;
  j["n_sources"] = config.model.n_sources;
  j["n_clusters"] = config.model.n_clusters;
  j["equal_alpha"] = config.model.equal_adherence;
  j["alpha_prior_a"] = config.alpha_prior[0].first;
  j["alpha_prior_b"] = config.alpha_prior[0].second;
  j["beta0"] = config.beta0;
  return j;
}

bcc::RunManifest make_manifest(const std::string& subcommand, int argc, char** argv,
                               const CommonOptions& opt, const json& resolved,
                               double runtime_seconds) {
  bcc::RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.command_line.assign(argv, argv + argc);
  manifest.resolved_config = resolved;
  manifest.source_files = opt.data_files;
  manifest.output_directory = opt.out_dir;
  manifest.environment["generated_at"] = timestamp_utc();
  manifest.environment["runtime_seconds"] = runtime_seconds;
  return manifest;
}

void add_common_options(CLI::App* cmd, CommonOptions& opt, bool needs_data) {
  auto* data = cmd->add_option("--data", opt.data_files,
                               "comma-separated CSV files, one per source")
                   ->delimiter(',');
  if (needs_data) data->required();
  cmd->add_option("--k", opt.n_clusters, "maximum number of clusters")
      ->check(CLI::Range(2, 10000));
  cmd->add_option("--iters", opt.iterations, "sweeps to run");
  cmd->add_option("--burnin", opt.burn_in, "sweeps to discard");
  cmd->add_option("--thin", opt.thin, "keep every thin-th state");
  cmd->add_flag("--equal-alpha", opt.equal_alpha, "one shared adherence for all sources");
  cmd->add_option("--alpha-prior", opt.alpha_prior, "truncated-beta prior 'a,b'");
  cmd->add_option("--beta0", opt.beta0, "Dirichlet concentration (replicated)");
  cmd->add_option("--seed", opt.seed, "RNG seed (falls back to BCC_SEED, then 1)");
  cmd->add_flag("--standardize", opt.standardize, "standardize columns per source");
  cmd->add_flag("--transpose", opt.transpose, "input files have features as rows");
  cmd->add_option("--out", opt.out_dir, "output directory");
}

int run_fit(int argc, char** argv, const CommonOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto data = bcc::ingest(source_specs(opt));
  const auto config = make_chain_config(opt, data, resolve_seed(opt.seed));
  const auto draws = bcc::run_chain(data, config);
  const auto result = bcc::summarize_clusterings(draws);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const auto manifest =
      make_manifest("fit", argc, argv, opt, config_to_json(config), runtime);
  bcc::write_outputs(draws, result, manifest, data.ids, opt.out_dir, opt.emit_coincidence);
  std::cout << "fit: wrote " << opt.out_dir << "\n";
  return 0;
}

int run_select_k(int argc, char** argv, const CommonOptions& opt,
                 const std::string& k_range_text) {
  const auto started = std::chrono::steady_clock::now();
  const auto [lo, hi] = parse_range(k_range_text, "--k-range");
  const auto data = bcc::ingest(source_specs(opt));
  auto base = make_chain_config(opt, data, resolve_seed(opt.seed));
  base.beta0.assign(1, opt.beta0);  // re-expanded per candidate
  std::vector<int> candidates;
  for (int k = lo; k <= hi; ++k) candidates.push_back(k);
  const auto result = bcc::select_K(data, candidates, base);

  fs::create_directories(opt.out_dir);
  std::vector<std::vector<std::string>> rows;
  json table = json::array();
  for (const auto& row : result.table) {
    rows.push_back({std::to_string(row.n_clusters),
                    bcc::format_double(row.adherence.point),
                    bcc::format_double(row.adherence.lower),
                    bcc::format_double(row.adherence.upper),
                    row.n_clusters == result.selected ? "1" : "0"});
    table.push_back({{"k", row.n_clusters},
                     {"mean_adjusted_adherence", row.adherence.point},
                     {"ci_low", row.adherence.lower},
                     {"ci_high", row.adherence.upper}});
  }
  bcc::write_csv((fs::path(opt.out_dir) / "k_selection.csv").string(),
                 {"k", "mean_adjusted_adherence", "ci_low", "ci_high", "selected"}, rows);
  json summary;
  summary["selected_k"] = result.selected;
  summary["table"] = table;
  bcc::write_json((fs::path(opt.out_dir) / "summary.json").string(), summary);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json resolved = config_to_json(base);
  resolved["k_range"] = k_range_text;
  bcc::write_json((fs::path(opt.out_dir) / "manifest.json").string(),
                  make_manifest("select-k", argc, argv, opt, resolved, runtime).to_json());
  std::cout << "select-k: chose K = " << result.selected << "\n";
  return 0;
}

int run_baseline(int argc, char** argv, const CommonOptions& opt,
                 const std::string& method) {
  const auto started = std::chrono::steady_clock::now();
  const auto data = bcc::ingest(source_specs(opt));
  const auto seed = resolve_seed(opt.seed);
  auto config = make_chain_config(opt, data, seed);
  fs::create_directories(opt.out_dir);
  const auto out = [&](const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
  };
  json summary;
  summary["method"] = method;

  if (method == "separate") {
    std::vector<std::vector<std::string>> rows(data.n_objects());
    for (int n = 0; n < data.n_objects(); ++n) rows[n] = {data.ids[n]};
    std::vector<std::string> header{"id"};
    for (int m = 0; m < data.n_sources(); ++m) {
      auto cfg = config;
      cfg.model.n_sources = 1;
      cfg.seed = bcc::derive_seed(seed, {static_cast<std::uint64_t>(m)});
      const auto draws = bcc::separate_sampler(data.sources[m].values, cfg);
      std::vector<std::vector<int>> label_draws;
      for (const auto& s : draws.states) label_draws.push_back(s.labels);
      const auto estimate = bcc::dahl_point_estimate(label_draws);
      header.push_back("L" + std::to_string(m + 1));
      for (int n = 0; n < data.n_objects(); ++n)
        rows[n].push_back(std::to_string(estimate[n]));
    }
    bcc::write_csv(out("clusters.csv"), header, rows);
  } else if (method == "joint") {
    auto cfg = config;
    cfg.model.n_sources = 1;
    const auto draws = bcc::joint_sampler(data, cfg);
    std::vector<std::vector<int>> label_draws;
    for (const auto& s : draws.states) label_draws.push_back(s.labels);
    const auto estimate = bcc::dahl_point_estimate(label_draws);
    std::vector<std::vector<std::string>> rows;
    for (int n = 0; n < data.n_objects(); ++n)
      rows.push_back({data.ids[n], std::to_string(estimate[n])});
    bcc::write_csv(out("clusters.csv"), {"id", "L"}, rows);
  } else if (method == "dependent") {
    const auto draws = bcc::dependent_sampler(data, config);
    std::vector<std::vector<std::string>> rows(data.n_objects());
    std::vector<std::string> header{"id"};
    for (int n = 0; n < data.n_objects(); ++n) rows[n] = {data.ids[n]};
    for (int m = 0; m < data.n_sources(); ++m) {
      std::vector<std::vector<int>> label_draws;
      for (const auto& s : draws.states) label_draws.push_back(s.source_labels[m]);
      const auto estimate = bcc::dahl_point_estimate(label_draws);
      header.push_back("L" + std::to_string(m + 1));
      for (int n = 0; n < data.n_objects(); ++n)
        rows[n].push_back(std::to_string(estimate[n]));
    }
    bcc::write_csv(out("clusters.csv"), header, rows);
    // pairwise adherence trace
    std::vector<std::string> trace_header{"iteration"};
    for (int i = 0; i < data.n_sources(); ++i)
      for (int j = i + 1; j < data.n_sources(); ++j)
        trace_header.push_back("alpha" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    std::vector<std::vector<std::string>> trace_rows;
    for (int it = 0; it < draws.iterations; ++it) {
      std::vector<std::string> row{std::to_string(it + 1)};
      for (std::size_t c = 0; c < draws.pair_alpha_trace.cols(); ++c)
        row.push_back(bcc::format_double(draws.pair_alpha_trace(it, c)));
      trace_rows.push_back(std::move(row));
    }
    bcc::write_csv(out("trace_alpha.csv"), trace_header, trace_rows);
    std::vector<double> mean(draws.pair_alpha_trace.cols(), 0.0);
    for (int it = config.burn_in; it < draws.iterations; ++it)
      for (std::size_t c = 0; c < mean.size(); ++c)
        mean[c] += draws.pair_alpha_trace(it, c);
    for (double& v : mean) v /= draws.iterations - config.burn_in;
    summary["pair_alpha_posterior_mean"] = mean;
  } else {
    throw CLI::ValidationError("--method", "unknown method '" + method + "'");
  }

  bcc::write_json(out("summary.json"), summary);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json resolved = config_to_json(config);
  resolved["method"] = method;
  bcc::write_json(out("manifest.json"),
                  make_manifest("baseline", argc, argv, opt, resolved, runtime).to_json());
  std::cout << "baseline " << method << ": wrote " << opt.out_dir << "\n";
  return 0;
}

struct SimulateOptions {
  std::string study;
  int reps = 100;
  int n_sources = 2;
  int n_objects = 200;
  double mu_sep = -1.0;  // study default when negative
  std::string prior_grid = "1,1;0.5,0.5;5,5;100,100";
  int reps_per_cell = 20;
  std::string pi_text = "0.3,0.22,0.16,0.12,0.08,0.06,0.04,0.02,0,0";
  std::string alphas_text = "0.95,0.75,0.1";
};

int run_simulate(int argc, char** argv, const CommonOptions& opt,
                 const SimulateOptions& sim) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(opt.out_dir);
  const auto out = [&](const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
  };
  const auto seed = resolve_seed(opt.seed);
  const auto [prior_a, prior_b] = parse_pair(opt.alpha_prior, "--alpha-prior");

  bcc::StudyConfig study;
  study.reps = sim.reps;
  study.n_objects = sim.n_objects;
  study.iterations = opt.iterations;
  study.burn_in = opt.burn_in;
  study.thin = opt.thin;
  study.seed = seed;
  study.alpha_prior_a = prior_a;
  study.alpha_prior_b = prior_b;

  json resolved;
  resolved["study"] = sim.study;
  resolved["seed"] = seed;
  resolved["reps"] = sim.reps;
  resolved["iterations"] = study.iterations;
  resolved["burn_in"] = study.burn_in;

  std::string written;
  if (sim.study == "alpha-recovery") {
    const double mu_sep = sim.mu_sep > 0 ? sim.mu_sep : 1.5;
    const auto records = bcc::alpha_recovery_study(study, sim.n_sources, mu_sep);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records)
      rows.push_back({std::to_string(r.rep), bcc::format_double(r.true_alpha),
                      bcc::format_double(r.alpha_hat), bcc::format_double(r.ci_low),
                      bcc::format_double(r.ci_high)});
    written = "alpha_recovery.csv";
    bcc::write_csv(out(written), {"rep", "true_alpha", "alpha_hat", "ci_low", "ci_high"},
                   rows);
    resolved["mu_sep"] = mu_sep;
  } else if (sim.study == "error-comparison") {
    const double mu_sep = sim.mu_sep > 0 ? sim.mu_sep : 1.0;
    const auto records = bcc::error_comparison_study(sim.n_sources, study, mu_sep);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records)
      rows.push_back({std::to_string(r.rep), bcc::format_double(r.true_alpha),
                      bcc::format_double(r.err_separate), bcc::format_double(r.err_joint),
                      bcc::format_double(r.err_dependent), bcc::format_double(r.err_bcc)});
    written = "error_comparison.csv";
    bcc::write_csv(
        out(written),
        {"rep", "true_alpha", "err_separate", "err_joint", "err_dependent", "err_bcc"},
        rows);
    resolved["n_sources"] = sim.n_sources;
    resolved["mu_sep"] = mu_sep;
  } else if (sim.study == "prior-sensitivity") {
    const double mu_sep = sim.mu_sep > 0 ? sim.mu_sep : 1.5;
    const auto grid = parse_grid(sim.prior_grid, "--grid");
    const auto records =
        bcc::prior_sensitivity_study(grid, sim.reps_per_cell, study, mu_sep);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records)
      rows.push_back({bcc::format_double(r.prior_a), bcc::format_double(r.prior_b),
                      std::to_string(r.rep), bcc::format_double(r.true_alpha),
                      bcc::format_double(r.alpha_hat)});
    written = "prior_sensitivity.csv";
    bcc::write_csv(out(written), {"prior_a", "prior_b", "rep", "true_alpha", "alpha_hat"},
                   rows);
    resolved["grid"] = sim.prior_grid;
    resolved["reps_per_cell"] = sim.reps_per_cell;
  } else if (sim.study == "inclusion-table") {
    const auto pi = parse_double_list(sim.pi_text, "--pi");
    const auto alphas = parse_double_list(sim.alphas_text, "--alphas");
    const int k = static_cast<int>(pi.size());
    const auto table = bcc::inclusion_probability_table(pi, alphas, k);
    std::vector<std::string> header{"cluster", "pi"};
    for (double a : alphas) header.push_back("alpha_" + bcc::format_double(a));
    std::vector<std::vector<std::string>> rows;
    for (int row = 0; row < k; ++row) {
      std::vector<std::string> r{std::to_string(row + 1), bcc::format_double(pi[row])};
      for (std::size_t c = 0; c < alphas.size(); ++c)
        r.push_back(bcc::format_double(table(row, c)));
      rows.push_back(std::move(r));
    }
    written = "inclusion_table.csv";
    bcc::write_csv(out(written), header, rows);
    resolved["pi"] = sim.pi_text;
    resolved["alphas"] = sim.alphas_text;
  } else {
    throw CLI::ValidationError("--study", "unknown study '" + sim.study + "'");
  }

  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  bcc::write_json(out("manifest.json"),
                  make_manifest("simulate", argc, argv, opt, resolved, runtime).to_json());
  std::cout << "simulate " << sim.study << ": wrote " << written << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian consensus clustering of multi-source data"};
  app.require_subcommand(1);

  CommonOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "fit the consensus model");
  add_common_options(fit, fit_opt, true);
  fit->add_flag("--emit-coincidence", fit_opt.emit_coincidence,
                "also write the overall co-clustering matrix");

  CommonOptions select_opt;
  std::string k_range_text = "2..6";
  auto* select = app.add_subcommand("select-k", "pick K by mean adjusted adherence");
  add_common_options(select, select_opt, true);
  select->add_option("--k-range", k_range_text, "candidate range 'lo..hi'");

  CommonOptions baseline_opt;
  std::string method;
  auto* baseline = app.add_subcommand("baseline", "run a comparison sampler");
  add_common_options(baseline, baseline_opt, true);
  baseline->add_option("--method", method, "separate | joint | dependent")->required();

  CommonOptions sim_common;
  sim_common.iterations = 1200;
  sim_common.burn_in = 200;
  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run a simulation study");
  add_common_options(simulate, sim_common, false);
  simulate->add_option("--study", sim.study,
                       "alpha-recovery | error-comparison | prior-sensitivity | inclusion-table")
      ->required();
  simulate->add_option("--reps", sim.reps, "replicates");
  simulate->add_option("--sources", sim.n_sources, "sources to generate");
  simulate->add_option("--n", sim.n_objects, "objects per replicate");
  simulate->add_option("--mu-sep", sim.mu_sep, "component mean separation");
  simulate->add_option("--grid", sim.prior_grid, "prior grid 'a,b;a,b;...'");
  simulate->add_option("--reps-per-cell", sim.reps_per_cell, "replicates per grid cell");
  simulate->add_option("--pi", sim.pi_text, "overall weights for the inclusion table");
  simulate->add_option("--alphas", sim.alphas_text, "adherence levels for the inclusion table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return run_fit(argc, argv, fit_opt);
    if (select->parsed()) return run_select_k(argc, argv, select_opt, k_range_text);
    if (baseline->parsed()) return run_baseline(argc, argv, baseline_opt, method);
    if (simulate->parsed()) return run_simulate(argc, argv, sim_common, sim);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bcc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const bcc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
