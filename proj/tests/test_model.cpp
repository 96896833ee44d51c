#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "bcc/model.hpp"
#include "bcc/rng.hpp"

using namespace bcc;

namespace {

std::vector<double> random_weights(std::mt19937& gen, int k) {
  std::uniform_real_distribution<> u(0.05, 1.0);
  std::vector<double> w(k);
  double total = 0.0;
  for (double& v : w) total += v = u(gen);
  for (double& v : w) v /= total;
  return w;
}

// u is majorized by v: partial sums of the descending sort of u never
// exceed those of v.
bool majorized_by(std::vector<double> u, std::vector<double> v) {
  std::sort(u.rbegin(), u.rend());
  std::sort(v.rbegin(), v.rend());
  double su = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
    if (su > sv + 1e-12) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("adherence kernel values") {
  CHECK(nu(1, 1, 0.8, 3) == Catch::Approx(0.8));
  CHECK(nu(2, 1, 0.8, 3) == Catch::Approx(0.1));
  CHECK(nu(2, 1, 1.0 / 3.0, 3) == Catch::Approx(1.0 / 3.0));
  CHECK(std::exp(log_nu(2, 1, 0.8, 3)) == Catch::Approx(0.1).epsilon(1e-13));

  CHECK_THROWS_AS(nu(1, 1, 0.2, 3), std::domain_error);   // below 1/K
  CHECK_THROWS_AS(nu(1, 1, 1.01, 3), std::domain_error);  // above 1
  CHECK_THROWS_AS(nu(0, 1, 0.8, 3), std::domain_error);
  CHECK_THROWS_AS(nu(1, 4, 0.8, 3), std::domain_error);
}

TEST_CASE("adherence kernel rows sum to one") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + int(gen() % 63);  // up to 64
    std::uniform_real_distribution<> ua(1.0 / k, 1.0);
    const double alpha = ua(gen);
    const int c = 1 + int(gen() % k);
    double total = 0.0;
    for (int l = 1; l <= k; ++l) total += nu(l, c, alpha, k);
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("source inclusion probability") {
  const std::vector<double> degenerate{1.0, 0.0};
  CHECK(source_inclusion_prob(1, degenerate, 0.9, 2) == Catch::Approx(0.9));

  std::mt19937 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + int(gen() % 9);
    const auto pi = random_weights(gen, k);
    std::uniform_real_distribution<> ua(1.0 / k, 1.0);
    const double alpha = ua(gen);
    double total = 0.0;
    for (int j = 1; j <= k; ++j) total += source_inclusion_prob(j, pi, alpha, k);
    CHECK(total == Catch::Approx(1.0).margin(1e-12));
    // independence bound collapses every cluster to 1/K
    for (int j = 1; j <= k; ++j)
      CHECK(source_inclusion_prob(j, pi, 1.0 / k, k) ==
            Catch::Approx(1.0 / k).margin(1e-13));
  }
}

TEST_CASE("induced cluster probabilities flatten as adherence drops") {
  // skewed overall weights over ten clusters, two of them empty
  const std::vector<double> pi{0.30, 0.22, 0.16, 0.12, 0.08, 0.06, 0.04, 0.02, 0.0, 0.0};
  const int k = 10;
  auto induced = [&](double alpha) {
    std::vector<double> p(k);
    for (int j = 1; j <= k; ++j) p[j - 1] = source_inclusion_prob(j, pi, alpha, k);
    return p;
  };
  const auto p95 = induced(0.95);
  const auto p75 = induced(0.75);
  const auto p10 = induced(0.10);

  // alpha at extremes
  CHECK(induced(1.0) == pi);
  for (double v : p10) CHECK(v == Catch::Approx(0.1).margin(1e-13));

  // zero-weight overall clusters pick up positive source probability
  CHECK(p95[8] > 0.0);
  CHECK(p95[9] > 0.0);

  // lower adherence is majorized by higher adherence: flatter profile
  CHECK(majorized_by(p75, p95));
  CHECK(majorized_by(p10, p75));
  const auto max75 = *std::max_element(p75.begin(), p75.end());
  const auto max95 = *std::max_element(p95.begin(), p95.end());
  const auto min75 = *std::min_element(p75.begin(), p75.end());
  const auto min95 = *std::min_element(p95.begin(), p95.end());
  CHECK(max75 < max95);
  CHECK(min75 > min95);
}

TEST_CASE("overall conditional") {
  SECTION("single fully adherent source pins the overall label") {
    const std::vector<int> labels{2};
    const std::vector<double> pi{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const std::vector<double> alphas{1.0};
    const auto p = overall_conditional(labels, pi, alphas, 3);
    CHECK(p[0] == Catch::Approx(0.0).margin(1e-300));
    CHECK(p[1] == Catch::Approx(1.0));
    CHECK(p[2] == Catch::Approx(0.0).margin(1e-300));
  }

  SECTION("two agreeing sources") {
    const std::vector<int> labels{1, 1};
    const std::vector<double> pi{0.5, 0.5};
    const std::vector<double> alphas{0.8, 0.8};
    const auto p = overall_conditional(labels, pi, alphas, 2);
    // normalize (0.5*0.8^2, 0.5*0.2^2)
    CHECK(p[0] == Catch::Approx(16.0 / 17.0).epsilon(1e-12));
    CHECK(p[1] == Catch::Approx(1.0 / 17.0).epsilon(1e-12));
    CHECK(p[0] + p[1] == Catch::Approx(1.0).margin(1e-13));
  }

  SECTION("disagreeing sources with equal adherence split evenly") {
    const std::vector<int> labels{1, 2};
    const std::vector<double> pi{0.5, 0.5};
    for (double alpha : {0.6, 0.75, 0.95}) {
      const std::vector<double> alphas{alpha, alpha};
      const auto p = overall_conditional(labels, pi, alphas, 2);
      CHECK(p[0] == Catch::Approx(0.5).margin(1e-13));
      CHECK(p[1] == Catch::Approx(0.5).margin(1e-13));
    }
  }

  SECTION("vanishing mass everywhere is an error") {
    const std::vector<int> labels{2};
    const std::vector<double> pi{1.0, 0.0};
    const std::vector<double> alphas{1.0};
    CHECK_THROWS_AS(overall_conditional(labels, pi, alphas, 2), NumericalError);
  }

  SECTION("log variant matches the linear one") {
    std::mt19937 gen(31);
    for (int trial = 0; trial < 30; ++trial) {
      const int k = 2 + int(gen() % 4);
      const int m = 1 + int(gen() % 3);
      const auto pi = random_weights(gen, k);
      std::uniform_real_distribution<> ua(1.0 / k, 1.0);
      std::vector<double> alphas(m);
      for (double& a : alphas) a = ua(gen);
      std::vector<int> labels(m);
      for (int& l : labels) l = 1 + int(gen() % k);
      const auto lin = overall_conditional(labels, pi, alphas, k);
      const auto lg = log_overall_conditional(labels, pi, alphas, k);
      for (int j = 0; j < k; ++j)
        CHECK(std::exp(lg[j]) == Catch::Approx(lin[j]).margin(1e-13));
    }
  }
}

TEST_CASE("model config validation") {
  CHECK_THROWS_AS((ModelConfig{0, 1, 2, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelConfig{10, 0, 2, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ModelConfig{10, 1, 1, false}.validate()), std::invalid_argument);
  CHECK_NOTHROW((ModelConfig{10, 1, 2, false}.validate()));
}
