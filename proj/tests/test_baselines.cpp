#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "bcc/baselines.hpp"
#include "bcc/marginals.hpp"
#include "bcc/simulation.hpp"
#include "bcc/summary.hpp"

using namespace bcc;

namespace {

ChainConfig baseline_config(int n_objects, int n_sources, std::uint64_t seed,
                            int iterations = 300, int burn_in = 100) {
  ChainConfig config;
  config.iterations = iterations;
  config.burn_in = burn_in;
  config.seed = seed;
  config.model = {n_objects, n_sources, 2, false};
  return config;
}

std::vector<double> normalized(std::vector<double> logw) {
  double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& v : logw) total += v = std::exp(v - mx);
  for (double& v : logw) v /= total;
  return logw;
}

}  // namespace

TEST_CASE("independent-mixture label conditional matches the consensus one at the independence bound") {
  // with adherence pinned at 1/K the consensus kernel is flat, so the
  // consensus label conditional must equal the mixture conditional with
  // uniform weights, site by site
  MultiSourceDataset data;
  data.ids = {"a", "b"};
  Matrix x(2, 1);
  x(0, 0) = -0.7;
  x(1, 0) = 1.3;
  data.sources.push_back({"s1", std::move(x)});

  const std::vector<ComponentParams> theta{{{-1.0}, {0.8}}, {{1.0}, {1.2}}};
  const std::vector<double> uniform{0.5, 0.5};

  for (int n = 0; n < 2; ++n) {
    const auto row = data.sources[0].values.row(n);
    const auto mixture = normalized(mixture_label_conditional(row, uniform, theta));
    for (int c = 1; c <= 2; ++c) {
      std::vector<double> consensus(2);
      for (int k = 1; k <= 2; ++k)
        consensus[k - 1] = nu(k, c, 0.5, 2) * std::exp(log_likelihood(row, theta[k - 1]));
      const double total = consensus[0] + consensus[1];
      for (int k = 0; k < 2; ++k)
        CHECK(consensus[k] / total == Catch::Approx(mixture[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("separate sampler nails well-separated clusters") {
  MultiSourceDataset data;
  Matrix x(40, 1);
  std::vector<int> truth(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = (i < 20 ? -10.0 : 10.0) + 0.01 * i;
    truth[i] = i < 20 ? 1 : 2;
  }
  const auto config = baseline_config(40, 1, 43);
  const auto draws = separate_sampler(x, config);
  std::vector<std::vector<int>> label_draws;
  for (const auto& s : draws.states) label_draws.push_back(s.labels);
  const auto estimate = dahl_point_estimate(label_draws);
  CHECK(relative_error({estimate}, {truth}, 2) == 0.0);
}

TEST_CASE("separate sampler is deterministic under a fixed seed") {
  Rng gen(47);
  auto [data, truth] = generate_two_cluster_data(0.8, 1, 30, 1.0, gen);
  const auto config = baseline_config(30, 1, 51, 50, 10);
  const auto a = separate_sampler(data.sources[0].values, config);
  const auto b = separate_sampler(data.sources[0].values, config);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].labels == b.states[i].labels);
    CHECK(a.states[i].weights == b.states[i].weights);
  }
}

TEST_CASE("joint sampler over one source is the separate sampler") {
  Rng gen(53);
  auto [data, truth] = generate_two_cluster_data(0.9, 1, 30, 1.0, gen);
  const auto config = baseline_config(30, 1, 57, 60, 20);
  const auto sep = separate_sampler(data.sources[0].values, config);
  const auto joint = joint_sampler(data, config);
  REQUIRE(sep.states.size() == joint.states.size());
  for (std::size_t i = 0; i < sep.states.size(); ++i) {
    CHECK(sep.states[i].labels == joint.states[i].labels);
    CHECK(sep.states[i].weights == joint.states[i].weights);
  }
}

TEST_CASE("joint sampler keeps per-source hyperparameter defaults") {
  MultiSourceDataset data;
  data.ids = {"a", "b", "c", "d"};
  Matrix x1(4, 1), x2(4, 2);
  for (int i = 0; i < 4; ++i) {
    x1(i, 0) = i;             // mean 1.5
    x2(i, 0) = 10.0 * i;      // mean 15
    x2(i, 1) = 5.0 + 2.0 * i; // mean 8
  }
  data.sources.push_back({"s1", std::move(x1)});
  data.sources.push_back({"s2", std::move(x2)});

  NormalGammaParams expected;
  {
    const auto p1 = default_hyperparams(data.sources[0].values);
    const auto p2 = default_hyperparams(data.sources[1].values);
    expected.lambda = 1.0;
    expected.eta = {p1.eta[0], p2.eta[0], p2.eta[1]};
    expected.shape = {p1.shape[0], p2.shape[0], p2.shape[1]};
    expected.rate = {p1.rate[0], p2.rate[0], p2.rate[1]};
  }
  const auto joined = concatenate_sources(data);
  const auto direct = default_hyperparams(joined.sources[0].values);
  CHECK(direct.eta == expected.eta);
  CHECK(direct.rate == expected.rate);
  CHECK(direct.shape == expected.shape);
}

TEST_CASE("joint clustering wins when both sources carry the same signal") {
  // fully adherent sources and a weak +/-1 signal; pooling features must
  // not lose to per-source fits on average
  double joint_total = 0.0, separate_total = 0.0;
  const int sims = 20;
  for (int sim = 0; sim < sims; ++sim) {
    Rng gen(derive_seed(61, {static_cast<std::uint64_t>(sim)}));
    auto [data, truth] = generate_two_cluster_data(1.0, 2, 60, 1.0, gen);

    const auto config =
        baseline_config(60, 1, derive_seed(67, {static_cast<std::uint64_t>(sim)}), 400, 100);
    std::vector<std::vector<int>> sep_estimates(2);
    for (int m = 0; m < 2; ++m) {
      auto cfg = config;
      cfg.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(m)});
      const auto draws = separate_sampler(data.sources[m].values, cfg);
      std::vector<std::vector<int>> label_draws;
      for (const auto& s : draws.states) label_draws.push_back(s.labels);
      sep_estimates[m] = dahl_point_estimate(label_draws);
    }
    separate_total += relative_error(sep_estimates, truth.source_labels, 2);

    const auto joint_draws = joint_sampler(data, config);
    std::vector<std::vector<int>> label_draws;
    for (const auto& s : joint_draws.states) label_draws.push_back(s.labels);
    const auto joint_estimate = dahl_point_estimate(label_draws);
    joint_total += relative_error({joint_estimate, joint_estimate}, truth.source_labels, 2);
  }
  CHECK(joint_total / sims <= separate_total / sims + 1e-12);
}

TEST_CASE("pairwise joint conditional factorizes at the independence bound") {
  const std::vector<std::vector<double>> weights{{0.3, 0.7}, {0.6, 0.4}};
  const std::vector<std::vector<ComponentParams>> theta{
      {{{-1.0}, {1.0}}, {{1.0}, {1.0}}},
      {{{-2.0}, {0.5}}, {{2.0}, {2.0}}}};
  Matrix pair_alpha(2, 2, 0.5);  // 1/K for K = 2
  const std::vector<double> x1{0.4}, x2{-0.9};
  const std::vector<std::span<const double>> rows{x1, x2};

  const auto joint = normalized(dependent_label_conditional(rows, weights, theta, pair_alpha, 2));

  const auto m1 = normalized(mixture_label_conditional(x1, weights[0], theta[0]));
  const auto m2 = normalized(mixture_label_conditional(x2, weights[1], theta[1]));
  int idx = 0;
  for (int k1 = 0; k1 < 2; ++k1)
    for (int k2 = 0; k2 < 2; ++k2)
      CHECK(joint[idx++] == Catch::Approx(m1[k1] * m2[k2]).epsilon(1e-12));
}

TEST_CASE("pairwise joint conditional matches the consensus marginal under substitution") {
  // two sources, two clusters, fixed components: the consensus model with
  // the overall labels integrated out and the pairwise model with
  // substituted parameters put proportional mass on the four label pairs
  const double pi1 = 0.35;
  const double u = 4.0;               // agreement ratio
  const double alpha = u / (1.0 + u); // consensus adherence
  const auto sub = bcc_to_mdi_substitution(pi1, u);

  const std::vector<std::vector<ComponentParams>> theta{
      {{{-1.0}, {1.0}}, {{1.0}, {1.0}}},
      {{{-1.5}, {0.7}}, {{0.5}, {1.4}}}};
  const std::vector<double> x1{0.2}, x2{-0.4};
  const std::vector<std::span<const double>> rows{x1, x2};

  const std::vector<std::vector<double>> sub_weights{
      {sub.pi_tilde_1, 1.0 - sub.pi_tilde_1}, {sub.pi_tilde_1, 1.0 - sub.pi_tilde_1}};
  // the pairwise coupling nu(k1,k2,a) carries ratio a(K-1)/(1-a) = 1+phi
  const double pair_a = (1.0 + sub.phi) / (2.0 + sub.phi);
  Matrix pair_alpha(2, 2, pair_a);
  const auto pairwise =
      normalized(dependent_label_conditional(rows, sub_weights, theta, pair_alpha, 2));

  const std::vector<double> pi{pi1, 1.0 - pi1};
  std::vector<double> consensus(4);
  int idx = 0;
  for (int k1 = 1; k1 <= 2; ++k1)
    for (int k2 = 1; k2 <= 2; ++k2) {
      const double marginal =
          equal_alpha_marginal(std::vector<int>{k1, k2}, pi, alpha, 2);
      consensus[idx++] = marginal * std::exp(log_likelihood(x1, theta[0][k1 - 1]) +
                                             log_likelihood(x2, theta[1][k2 - 1]));
    }
  const double total = std::accumulate(consensus.begin(), consensus.end(), 0.0);
  for (int i = 0; i < 4; ++i)
    CHECK(pairwise[i] == Catch::Approx(consensus[i] / total).epsilon(1e-10));
}

TEST_CASE("dependent sampler guards the exponential joint enumeration") {
  MultiSourceDataset data;
  data.ids.resize(10);
  for (int i = 0; i < 10; ++i) data.ids[i] = "o" + std::to_string(i);
  for (int m = 0; m < 4; ++m) {
    Matrix x(10, 1);
    for (int i = 0; i < 10; ++i) x(i, 0) = i + 0.1 * m;
    data.sources.push_back({"s" + std::to_string(m), std::move(x)});
  }
  ChainConfig config = baseline_config(10, 4, 71, 10, 2);
  config.model.n_clusters = 9;  // 9^4 = 6561 > 4096
  CHECK_THROWS_AS(dependent_sampler(data, config), std::invalid_argument);
}

TEST_CASE("dependent sampler is deterministic and in range") {
  Rng gen(73);
  auto [data, truth] = generate_two_cluster_data(0.85, 2, 20, 1.5, gen);
  const auto config = baseline_config(20, 2, 77, 40, 10);
  const auto a = dependent_sampler(data, config);
  const auto b = dependent_sampler(data, config);
  REQUIRE(a.states.size() == b.states.size());
  REQUIRE(!a.states.empty());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].source_labels == b.states[i].source_labels);
    for (int m = 0; m < 2; ++m)
      for (int l : a.states[i].source_labels[m]) {
        CHECK(l >= 1);
        CHECK(l <= 2);
      }
    CHECK(a.states[i].pair_alpha(0, 1) == b.states[i].pair_alpha(0, 1));
    CHECK(a.states[i].pair_alpha(0, 1) >= 0.5);
  }
}

TEST_CASE("relative error") {
  SECTION("exact match scores zero") {
    const std::vector<std::vector<int>> truth{{1, 2, 1, 2}, {2, 2, 1, 1}};
    CHECK(relative_error(truth, truth, 2) == 0.0);
  }

  SECTION("a global label swap scores zero") {
    const std::vector<std::vector<int>> truth{{1, 2, 1, 2}};
    const std::vector<std::vector<int>> swapped{{2, 1, 2, 1}};
    CHECK(relative_error(swapped, truth, 2) == 0.0);
  }

  SECTION("one mismatch in one of two sources scores 1/8") {
    const std::vector<std::vector<int>> truth{{1, 1, 2, 2}, {1, 1, 2, 2}};
    const std::vector<std::vector<int>> est{{1, 1, 2, 2}, {1, 1, 2, 1}};
    CHECK(relative_error(est, truth, 2) == Catch::Approx(1.0 / 8.0));
  }

  SECTION("alignment keeps random labelings at or below chance error") {
    std::mt19937 gen(79);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 2 + int(gen() % 5);
      const int n = 30;
      std::vector<int> est(n), truth(n);
      for (int i = 0; i < n; ++i) {
        est[i] = 1 + int(gen() % k);
        truth[i] = 1 + int(gen() % k);
      }
      const double err = relative_error({est}, {truth}, k);
      CHECK(err >= 0.0);
      CHECK(err <= 1.0 - 1.0 / k + 1e-12);
    }
  }

  SECTION("hungarian path agrees with exhaustive search") {
    std::mt19937 gen(83);
    for (int trial = 0; trial < 30; ++trial) {
      const int k = 2 + int(gen() % 5);  // exhaustive applies for K <= 8
      const int n = 40;
      std::vector<int> est(n), truth(n);
      for (int i = 0; i < n; ++i) {
        est[i] = 1 + int(gen() % k);
        truth[i] = 1 + int(gen() % k);
      }
      const auto counts = label_cooccurrence(est, truth, k, k);
      std::vector<std::vector<double>> weight(k, std::vector<double>(k));
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) weight[i][j] = counts[i][j];
      const auto assignment = detail::max_assignment(weight);
      long hungarian_score = 0;
      for (int i = 0; i < k; ++i) hungarian_score += counts[i][assignment[i]];
      const auto sigma = best_label_permutation(est, truth, k);
      long exhaustive_score = 0;
      for (int i = 0; i < k; ++i) exhaustive_score += counts[i][sigma[i] - 1];
      CHECK(hungarian_score == exhaustive_score);
    }
  }
}
