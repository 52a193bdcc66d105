#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "gwcrp/errors.hpp"
#include "gwcrp/sampler.hpp"
#include "helpers.hpp"

using namespace gwcrp;

namespace {

// Scalar-parameter summary (one log-hazard, no covariates).
RegionSummary scalar_summary(double theta, double variance) {
  RegionSummary s;
  s.theta_hat.beta.resize(0);
  s.theta_hat.log_lambda.resize(1);
  s.theta_hat.log_lambda[0] = theta;
  s.sigma_hat.resize(1, 1);
  s.sigma_hat(0, 0) = variance;
  s.converged = true;
  return s;
}

RegionSummary vector_summary(const Vec& theta, const Mat& sigma) {
  RegionSummary s;
  s.theta_hat.beta = theta.head(theta.size() - 1);
  s.theta_hat.log_lambda = theta.tail(1);
  s.sigma_hat = sigma;
  s.converged = true;
  return s;
}

WeightMatrix unit_weights(int n) {
  WeightMatrix w;
  w.weights = Mat::Ones(n, n);
  w.weights.diagonal().setZero();
  w.decay = 0.0;
  return w;
}

// Simpson quadrature of the scalar marginal likelihood
// integral N(theta_hat; theta, v) N(theta; 0, v0) dtheta.
double marginal_by_quadrature(double theta_hat, double v, double v0) {
  auto density = [&](double theta) {
    const double a = std::exp(-0.5 * (theta_hat - theta) * (theta_hat - theta) / v) /
                     std::sqrt(2.0 * M_PI * v);
    const double b =
        std::exp(-0.5 * theta * theta / v0) / std::sqrt(2.0 * M_PI * v0);
    return a * b;
  };
  const double lo = -80.0, hi = 80.0;
  const int steps = 40000;  // even
  const double dx = (hi - lo) / steps;
  double total = density(lo) + density(hi);
  for (int k = 1; k < steps; ++k) {
    total += density(lo + k * dx) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  return total * dx / 3.0;
}

}  // namespace

TEST_CASE("PreparedSummaries validates configuration") {
  std::vector<RegionSummary> one{scalar_summary(0.3, 1.0)};
  GwcrpConfig config;
  config.alpha = 0.0;
  CHECK_THROWS_AS(PreparedSummaries(one, config), UsageError);
  config.alpha = 1.0;
  config.prior_variance = -1.0;
  CHECK_THROWS_AS(PreparedSummaries(one, config), UsageError);
  CHECK_THROWS_AS(PreparedSummaries({}, GwcrpConfig{}), UsageError);

  std::vector<RegionSummary> mixed{scalar_summary(0.3, 1.0),
                                   vector_summary(Vec::Zero(2), Mat::Identity(2, 2))};
  CHECK_THROWS_AS(PreparedSummaries(mixed, GwcrpConfig{}), UsageError);
}

TEST_CASE("new-cluster marginal matches scalar quadrature") {
  GwcrpConfig config;
  config.prior_variance = 100.0;
  for (double theta_hat : {0.0, 1.3, -2.5, 7.0}) {
    std::vector<RegionSummary> summaries{scalar_summary(theta_hat, 1.0)};
    PreparedSummaries prepared(summaries, config);
    // closed form: N(theta_hat; 0, sigma + v0) = N(theta_hat; 0, 101)
    const double closed =
        -0.5 * std::log(2.0 * M_PI * 101.0) - 0.5 * theta_hat * theta_hat / 101.0;
    CHECK(prepared.new_cluster_loglik(0) == doctest::Approx(closed).epsilon(1e-12));
    const double quad = std::log(marginal_by_quadrature(theta_hat, 1.0, 100.0));
    CHECK(prepared.new_cluster_loglik(0) == doctest::Approx(quad).epsilon(1e-8));
  }
}

TEST_CASE("label conditional reduces to the plain CRP at h = 0") {
  // At h = 0 every connected weight is 1, so the weighted sizes are the plain
  // cluster sizes. Check against an independently computed CRP conditional.
  std::mt19937 gen(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  GwcrpConfig config;
  config.alpha = 1.7;

  const int n = 8;
  std::vector<RegionSummary> summaries;
  for (int i = 0; i < n; ++i) {
    summaries.push_back(scalar_summary(normal(gen), 0.5 + 0.1 * i));
  }
  PreparedSummaries prepared(summaries, config);
  auto weights = unit_weights(n);

  std::uniform_int_distribution<int> pick_label(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    ChainState state;
    state.labels.resize(n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      state.labels[i] = std::min(pick_label(gen), k + 1);
      k = std::max(k, state.labels[i]);
    }
    for (int c = 0; c < k; ++c) {
      Vec theta(1);
      theta[0] = normal(gen);
      state.cluster_params.push_back(theta);
    }
    const int i = trial % n;
    Vec probs = label_full_conditional(i, state, prepared, weights, config);
    REQUIRE(probs.size() == k + 1);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));

    // independent computation on raw (unnormalized) masses
    std::vector<double> mass(k + 1, 0.0);
    for (int c = 0; c < k; ++c) {
      int size = 0;
      for (int j = 0; j < n; ++j) {
        if (j != i && state.labels[j] == c + 1) size += 1;
      }
      if (size == 0) continue;
      Eigen::VectorXd mu = state.cluster_params[c];
      Eigen::MatrixXd sigma = summaries[i].sigma_hat;
      Eigen::VectorXd x(1);
      x[0] = summaries[i].theta_hat.log_lambda[0];
      mass[c] = size * std::exp(oracle::mvn_logpdf(x, mu, sigma));
    }
    Eigen::VectorXd x(1);
    x[0] = summaries[i].theta_hat.log_lambda[0];
    mass[k] = config.alpha *
              marginal_by_quadrature(x[0], summaries[i].sigma_hat(0, 0), 100.0);
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    for (int c = 0; c <= k; ++c) {
      CHECK(probs[c] == doctest::Approx(mass[c] / total).epsilon(1e-7));
    }
  }
}

TEST_CASE("weights scale cluster attraction like an urn") {
  // Two singleton clusters with identical parameters: the probability ratio
  // must equal the weight ratio exactly.
  GwcrpConfig config;
  std::vector<RegionSummary> summaries{scalar_summary(0.4, 1.0),
                                       scalar_summary(1.0, 1.0),
                                       scalar_summary(-1.0, 1.0)};
  PreparedSummaries prepared(summaries, config);

  WeightMatrix w;
  w.weights = Mat::Zero(3, 3);
  const double far = std::exp(-2.0);
  w.weights(0, 1) = w.weights(1, 0) = 1.0;
  w.weights(0, 2) = w.weights(2, 0) = far;
  w.weights(1, 2) = w.weights(2, 1) = 1.0;

  ChainState state;
  state.labels = {0, 1, 2};  // region 0 is detached mid-sweep
  Vec shared(1);
  shared[0] = 0.2;
  state.cluster_params = {shared, shared};

  Vec probs = label_full_conditional(0, state, prepared, w, config);
  CHECK(probs[0] / probs[1] == doctest::Approx(1.0 / far).epsilon(1e-12));

  SUBCASE("zero total weight removes a cluster from contention") {
    w.weights(0, 2) = w.weights(2, 0) = 0.0;
    Vec p = label_full_conditional(0, state, prepared, w, config);
    CHECK(p[1] == 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("label conditional is equivariant under cluster relabeling") {
  std::mt19937 gen(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  GwcrpConfig config;
  const int n = 6;
  std::vector<RegionSummary> summaries;
  for (int i = 0; i < n; ++i) summaries.push_back(scalar_summary(normal(gen), 1.0));
  PreparedSummaries prepared(summaries, config);
  auto weights = unit_weights(n);

  ChainState state;
  state.labels = {1, 1, 2, 3, 2, 3};
  for (int c = 0; c < 3; ++c) {
    Vec theta(1);
    theta[0] = normal(gen);
    state.cluster_params.push_back(theta);
  }
  Vec base = label_full_conditional(2, state, prepared, weights, config);

  // swap clusters 1 and 3
  ChainState swapped = state;
  for (int& z : swapped.labels) {
    if (z == 1) z = 3;
    else if (z == 3) z = 1;
  }
  std::swap(swapped.cluster_params[0], swapped.cluster_params[2]);
  Vec perm = label_full_conditional(2, swapped, prepared, weights, config);
  CHECK(perm[2] == doctest::Approx(base[0]).epsilon(1e-14));
  CHECK(perm[0] == doctest::Approx(base[2]).epsilon(1e-14));
  CHECK(perm[1] == doctest::Approx(base[1]).epsilon(1e-14));
  CHECK(perm[3] == doctest::Approx(base[3]).epsilon(1e-14));
}

TEST_CASE("conjugate refresh has the right moments") {
  // Single-member cluster, sigma = 1, v0 = 100: the posterior is
  // N((100/101) theta_hat, 100/101). Check empirically over many draws.
  GwcrpConfig config;
  const double theta_hat = 2.0;
  std::vector<RegionSummary> summaries{scalar_summary(theta_hat, 1.0)};
  PreparedSummaries prepared(summaries, config);

  ChainState state;
  state.labels = {1};
  state.cluster_params = {Vec::Zero(1)};

  Rng rng(2024);
  const int draws = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int b = 0; b < draws; ++b) {
    update_cluster_params(state, prepared, rng);
    const double v = state.cluster_params[0][0];
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  const double expected_mean = theta_hat * 100.0 / 101.0;
  const double expected_var = 100.0 / 101.0;
  const double se = std::sqrt(expected_var / draws);
  CHECK(std::abs(mean - expected_mean) < 5.0 * se);
  CHECK(var == doctest::Approx(expected_var).epsilon(0.02));
}

TEST_CASE("conjugate refresh pools two members by precision") {
  GwcrpConfig config;
  config.prior_variance = 1e12;  // essentially flat prior
  std::vector<RegionSummary> summaries{scalar_summary(1.0, 0.5),
                                       scalar_summary(3.0, 2.0)};
  PreparedSummaries prepared(summaries, config);

  ChainState state;
  state.labels = {1, 1};
  state.cluster_params = {Vec::Zero(1)};

  Rng rng(9);
  const int draws = 200000;
  double sum = 0.0;
  for (int b = 0; b < draws; ++b) {
    update_cluster_params(state, prepared, rng);
    sum += state.cluster_params[0][0];
  }
  // precision-weighted mean: (2*1 + 0.5*3) / 2.5 = 1.4
  const double expected_var = 1.0 / 2.5;
  const double se = std::sqrt(expected_var / draws);
  CHECK(std::abs(sum / draws - 1.4) < 5.0 * se);

  auto refresh_with_empty_cluster = [&] {
    ChainState bad;
    bad.labels = {1, 1};
    bad.cluster_params = {Vec::Zero(1), Vec::Zero(1)};  // cluster 2 empty
    Rng r(1);
    update_cluster_params(bad, prepared, r);
  };
  CHECK_THROWS_AS(refresh_with_empty_cluster(), NumericError);
}

TEST_CASE("chains are deterministic and keep labels tidy") {
  std::mt19937 gen(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = 10;
  std::vector<RegionSummary> summaries;
  for (int i = 0; i < n; ++i) {
    summaries.push_back(scalar_summary(normal(gen) + (i < 5 ? -2.0 : 2.0), 0.3));
  }
  auto weights = unit_weights(n);
  GwcrpConfig config;
  config.iterations = 200;
  config.burn_in = 50;
  config.seed = 77;

  auto a = run_chain(summaries, weights, config);
  auto b = run_chain(summaries, weights, config);
  REQUIRE(a.label_draws.size() == 150);
  CHECK(a.label_draws == b.label_draws);
  for (size_t t = 0; t < a.param_draws.size(); ++t) {
    REQUIRE(a.param_draws[t].size() == b.param_draws[t].size());
    for (size_t c = 0; c < a.param_draws[t].size(); ++c) {
      CHECK(a.param_draws[t][c] == b.param_draws[t][c]);
    }
  }
  CHECK(a.per_region_loglik == b.per_region_loglik);

  config.seed = 78;
  auto c = run_chain(summaries, weights, config);
  CHECK(a.label_draws != c.label_draws);

  // every retained draw: labels contiguous 1..k, ordered by first appearance
  for (const auto& labels : a.label_draws) {
    int seen = 0;
    for (int z : labels) {
      REQUIRE(z >= 1);
      REQUIRE(z <= seen + 1);
      seen = std::max(seen, z);
    }
  }
  // the two halves should separate at least some of the time
  int split_draws = 0;
  for (const auto& labels : a.label_draws) {
    std::set<int> left(labels.begin(), labels.begin() + 5);
    std::set<int> right(labels.begin() + 5, labels.end());
    std::vector<int> overlap;
    std::set_intersection(left.begin(), left.end(), right.begin(), right.end(),
                          std::back_inserter(overlap));
    if (overlap.empty()) split_draws += 1;
  }
  CHECK(split_draws > 75);
}

TEST_CASE("single-region chain stays in one cluster") {
  std::vector<RegionSummary> summaries{scalar_summary(0.5, 1.0)};
  WeightMatrix w;
  w.weights = Mat::Zero(1, 1);
  GwcrpConfig config;
  config.iterations = 50;
  config.burn_in = 10;
  auto trace = run_chain(summaries, w, config);
  for (const auto& labels : trace.label_draws) {
    REQUIRE(labels.size() == 1);
    CHECK(labels[0] == 1);
  }
  REQUIRE(trace.per_region_loglik.rows() == 40);
}

TEST_CASE("run_chain validates iteration bounds and sizes") {
  std::vector<RegionSummary> summaries{scalar_summary(0.5, 1.0),
                                       scalar_summary(0.7, 1.0)};
  auto weights = unit_weights(2);
  GwcrpConfig config;
  config.iterations = 10;
  config.burn_in = 10;
  CHECK_THROWS_AS(run_chain(summaries, weights, config), UsageError);
  config.burn_in = 2;
  auto bad_weights = unit_weights(3);
  CHECK_THROWS_AS(run_chain(summaries, bad_weights, config), UsageError);
}

TEST_CASE("recorded loglik uses the injected likelihood") {
  std::vector<RegionSummary> summaries{scalar_summary(0.5, 1.0),
                                       scalar_summary(0.6, 1.0)};
  GwcrpConfig config;
  config.iterations = 20;
  config.burn_in = 5;
  PreparedSummaries prepared(summaries, config);
  auto weights = unit_weights(2);
  auto trace = run_chain(prepared, weights, config,
                         [](int i, const Vec&) { return -10.0 * (i + 1); });
  for (int b = 0; b < trace.per_region_loglik.rows(); ++b) {
    CHECK(trace.per_region_loglik(b, 0) == -10.0);
    CHECK(trace.per_region_loglik(b, 1) == -20.0);
  }
}
