#include "gwcrp/sampler.hpp"

#include <cmath>
#include <sstream>

#include "gwcrp/errors.hpp"

namespace gwcrp {

PreparedSummaries::PreparedSummaries(
    const std::vector<RegionSummary>& summaries, const GwcrpConfig& config) {
  if (summaries.empty()) {
    throw UsageError("at least one region summary required");
  }
  if (config.alpha <= 0.0) {
    throw UsageError("alpha must be positive");
  }
  if (config.prior_variance <= 0.0) {
    throw UsageError("prior variance must be positive");
  }
  dim_ = summaries.front().theta_hat.dim();
  prior_precision_ =
      Mat::Identity(dim_, dim_) / config.prior_variance;

  const Mat prior_cov = Mat::Identity(dim_, dim_) * config.prior_variance;
  for (const auto& s : summaries) {
    if (s.theta_hat.dim() != dim_) {
      throw UsageError("region summaries have inconsistent dimension");
    }
    Vec theta = s.theta_hat.stacked();
    theta_hat_.push_back(theta);
    density_.emplace_back(s.sigma_hat);
    precision_.push_back(density_.back().inverse());
    precision_theta_.push_back(precision_.back() * theta);
    // marginal over theta ~ N(0, Sigma0): N(theta_hat; 0, Sigma_hat + Sigma0)
    MvnDensity marginal(s.sigma_hat + prior_cov);
    new_cluster_loglik_.push_back(marginal.logpdf(theta, Vec::Zero(dim_)));
  }
}

Vec label_full_conditional(int i, const ChainState& state,
                           const PreparedSummaries& prepared,
                           const WeightMatrix& weights,
                           const GwcrpConfig& config) {
  const int n = static_cast<int>(state.labels.size());
  const int k = state.k();

  // weighted cluster sizes excluding region i
  Vec weighted_size = Vec::Zero(k);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    weighted_size[state.labels[j] - 1] += weights.weights(i, j);
  }

  Vec logmass = Vec::Constant(k + 1, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < k; ++c) {
    if (weighted_size[c] <= 0.0) continue;
    logmass[c] = std::log(weighted_size[c]) +
                 prepared.likelihood_density(i).logpdf(
                     prepared.theta_hat(i), state.cluster_params[c]);
  }
  logmass[k] = std::log(config.alpha) + prepared.new_cluster_loglik(i);

  const double max_log = logmass.maxCoeff();
  Vec probs(k + 1);
  for (int c = 0; c <= k; ++c) {
    probs[c] = std::isinf(logmass[c]) ? 0.0 : std::exp(logmass[c] - max_log);
  }
  probs /= probs.sum();
  return probs;
}

namespace {

// theta ~ N(V m, V) with V = (prior_precision + sum precisions)^{-1} and
// m = sum precision_i * theta_hat_i over the given members.
Vec draw_conjugate(const PreparedSummaries& prepared,
                   const std::vector<int>& members, Rng& rng) {
  const int d = prepared.dim();
  Mat posterior_precision = prepared.prior_precision();
  Vec m = Vec::Zero(d);
  for (int i : members) {
    posterior_precision += prepared.precision(i);
    m += prepared.precision_theta(i);
  }
  Eigen::LLT<Mat> llt(posterior_precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("cluster posterior precision not positive definite");
  }
  Vec mean = llt.solve(m);
  // V = P^{-1} = L^{-T} L^{-1}; sample mean + L^{-T} z
  Vec z(d);
  for (int r = 0; r < d; ++r) z[r] = rng.normal();
  return mean + llt.matrixL().transpose().solve(z);
}

int sample_categorical(const Vec& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return c;
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void update_cluster_params(ChainState& state,
                           const PreparedSummaries& prepared, Rng& rng) {
  const int k = state.k();
  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < static_cast<int>(state.labels.size()); ++i) {
    members[state.labels[i] - 1].push_back(i);
  }
  for (int c = 0; c < k; ++c) {
    if (members[c].empty()) {
      throw NumericError("empty cluster encountered in parameter update");
    }
    state.cluster_params[c] = draw_conjugate(prepared, members[c], rng);
  }
}

ChainTrace run_chain(const PreparedSummaries& prepared,
                     const WeightMatrix& weights, const GwcrpConfig& config,
                     const RegionLoglikFn& region_loglik) {
  const int n = prepared.regions();
  if (weights.weights.rows() != n) {
    throw UsageError("weight matrix size does not match region count");
  }
  if (config.burn_in < 0 || config.burn_in >= config.iterations) {
    throw UsageError("burn-in must be nonnegative and less than iterations");
  }

  Rng rng(config.seed);
  ChainState state;
  // Start from all singletons, each at its own conjugate posterior mean.
  // Coalescing from singletons reaches the high-probability partitions by
  // strictly favorable merges; a merged start leaves the chain metastable
  // below the diffuse-prior barrier against opening clusters.
  state.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    state.labels[i] = i + 1;
    Eigen::LLT<Mat> llt(prepared.prior_precision() + prepared.precision(i));
    state.cluster_params.push_back(llt.solve(prepared.precision_theta(i)));
  }

  const int retained = config.iterations - config.burn_in;
  ChainTrace trace;
  trace.label_draws.reserve(retained);
  trace.param_draws.reserve(retained);
  trace.per_region_loglik.resize(retained, n);

  std::vector<int> cluster_size(n, 1);
  for (int iter = 0; iter < config.iterations; ++iter) {
    for (int i = 0; i < n; ++i) {
      const int old = state.labels[i] - 1;
      state.labels[i] = 0;
      cluster_size[old] -= 1;
      if (cluster_size[old] == 0) {
        // delete the emptied cluster; later labels shift down one, which
        // keeps labels contiguous in order of first appearance
        state.cluster_params.erase(state.cluster_params.begin() + old);
        cluster_size.erase(cluster_size.begin() + old);
        for (int& z : state.labels) {
          if (z > old + 1) z -= 1;
        }
      }

      Vec probs = label_full_conditional(i, state, prepared, weights, config);
      const int choice = sample_categorical(probs, rng);
      if (choice == state.k()) {
        state.cluster_params.push_back(draw_conjugate(prepared, {i}, rng));
        cluster_size.push_back(0);
      }
      state.labels[i] = choice + 1;
      cluster_size[choice] += 1;
    }

    try {
      update_cluster_params(state, prepared, rng);
    } catch (const NumericError& err) {
      std::ostringstream msg;
      msg << "iteration " << iter << ": " << err.what();
      throw NumericError(msg.str());
    }

    if (iter >= config.burn_in) {
      const int b = iter - config.burn_in;
      // canonical labels: renumber clusters in order of first appearance
      std::vector<int> remap(state.k(), 0);
      int next = 0;
      std::vector<int> canonical(n);
      std::vector<Vec> params(state.k());
      for (int i = 0; i < n; ++i) {
        const int c = state.labels[i] - 1;
        if (remap[c] == 0) {
          remap[c] = ++next;
          params[next - 1] = state.cluster_params[c];
        }
        canonical[i] = remap[c];
      }
      trace.label_draws.push_back(std::move(canonical));
      trace.param_draws.push_back(std::move(params));
      for (int i = 0; i < n; ++i) {
        trace.per_region_loglik(b, i) =
            region_loglik(i, state.cluster_params[state.labels[i] - 1]);
      }
    }
  }
  return trace;
}

ChainTrace run_chain(const std::vector<RegionSummary>& summaries,
                     const WeightMatrix& weights, const GwcrpConfig& config) {
  PreparedSummaries prepared(summaries, config);
  auto approx = [&prepared](int i, const Vec& theta) {
    return prepared.likelihood_density(i).logpdf(prepared.theta_hat(i), theta);
  };
  return run_chain(prepared, weights, config, approx);
}

}  // namespace gwcrp
