#ifndef GWCRP_SAMPLER_HPP
#define GWCRP_SAMPLER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "gwcrp/graph.hpp"
#include "gwcrp/mvn.hpp"
#include "gwcrp/rng.hpp"
#include "gwcrp/survival.hpp"

namespace gwcrp {

struct GwcrpConfig {
  double alpha = 1.0;           // concentration
  double h = 0.0;               // spatial decay
  double prior_variance = 100.0;  // Sigma_0 = prior_variance * I
  int iterations = 2000;
  int burn_in = 500;
  std::uint64_t seed = 1;
};

// Cluster labels (1-based, contiguous, ordered by first appearance) and the
// current cluster parameter vectors.
struct ChainState {
  std::vector<int> labels;
  std::vector<Vec> cluster_params;

  int k() const { return static_cast<int>(cluster_params.size()); }
};

struct ChainTrace {
  std::vector<std::vector<int>> label_draws;     // B x n
  std::vector<std::vector<Vec>> param_draws;     // B x k_b, stacked theta
  Mat per_region_loglik;                         // B x n
};

// Per-region quantities the sampler reuses every sweep: theta-hat, the
// factored Sigma-hat, its inverse, and the marginal new-cluster log density
// log N(theta_hat; 0, Sigma_hat + Sigma_0).
class PreparedSummaries {
 public:
  PreparedSummaries(const std::vector<RegionSummary>& summaries,
                    const GwcrpConfig& config);

  int regions() const { return static_cast<int>(theta_hat_.size()); }
  int dim() const { return dim_; }
  const Vec& theta_hat(int i) const { return theta_hat_[i]; }
  const MvnDensity& likelihood_density(int i) const { return density_[i]; }
  const Mat& precision(int i) const { return precision_[i]; }
  const Vec& precision_theta(int i) const { return precision_theta_[i]; }
  double new_cluster_loglik(int i) const { return new_cluster_loglik_[i]; }
  const Mat& prior_precision() const { return prior_precision_; }

 private:
  int dim_ = 0;
  std::vector<Vec> theta_hat_;
  std::vector<MvnDensity> density_;
  std::vector<Mat> precision_;
  std::vector<Vec> precision_theta_;
  std::vector<double> new_cluster_loglik_;
  Mat prior_precision_;
};

// Normalized full conditional of z_i over {existing clusters} + {new}. The
// returned vector has state.k() + 1 entries; clusters with zero weighted
// size (excluding region i) get probability 0.
Vec label_full_conditional(int i, const ChainState& state,
                           const PreparedSummaries& prepared,
                           const WeightMatrix& weights,
                           const GwcrpConfig& config);

// Conjugate Gaussian refresh of every cluster's theta, in label order.
// theta_c ~ N(V_c m_c, V_c), V_c = (Sigma0^{-1} + sum_c Sigma_hat_i^{-1})^{-1}.
void update_cluster_params(ChainState& state,
                           const PreparedSummaries& prepared, Rng& rng);

// Exact per-region log-likelihood used for CPO recording; receives the
// region index and the region's current cluster parameters.
using RegionLoglikFn = std::function<double(int, const Vec&)>;

// Collapsed Gibbs chain. Starts from all-singleton clusters, each at its own
// conjugate posterior mean (no randomness consumed); each iteration sweeps
// the labels in region order and then refreshes cluster parameters.
// Deterministic given the seed. Draw order per iteration: one uniform per
// region (plus d normals when a region opens a new cluster), then d normals
// per cluster.
ChainTrace run_chain(const PreparedSummaries& prepared,
                     const WeightMatrix& weights, const GwcrpConfig& config,
                     const RegionLoglikFn& region_loglik);

// Convenience overload recording the Laplace-approximate log-likelihood.
ChainTrace run_chain(const std::vector<RegionSummary>& summaries,
                     const WeightMatrix& weights, const GwcrpConfig& config);

}  // namespace gwcrp

#endif
