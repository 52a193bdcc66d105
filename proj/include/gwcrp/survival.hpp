#ifndef GWCRP_SURVIVAL_HPP
#define GWCRP_SURVIVAL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gwcrp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One subject: follow-up time, event indicator (false = censored), covariate
// vector, and the index of the region the subject belongs to.
struct SurvivalRecord {
  double time = 0.0;
  bool event = false;
  Vec covariates;
  int region = 0;
};

// Partition of [0, inf) into J half-open pieces [a_{j-1}, a_j), a_0 = 0,
// a_J = inf. Cutpoints are the interior boundaries a_1 < ... < a_{J-1}.
class HazardPartition {
 public:
  HazardPartition() = default;
  explicit HazardPartition(std::vector<double> cutpoints);

  int pieces() const { return static_cast<int>(cutpoints_.size()) + 1; }
  const std::vector<double>& cutpoints() const { return cutpoints_; }

  // 1-based piece containing t; ties at a cutpoint go to the right piece.
  int piece_index(double t) const;

  // Cumulative exposure of follow-up t to piece j (1-based):
  // 0 below the piece, t - a_{j-1} inside, full width above.
  double exposure(double t, int j) const;

 private:
  std::vector<double> cutpoints_;
};

// Regression coefficients plus log baseline hazards, the per-cluster
// parameter vector theta = (beta, eta), eta = log lambda.
struct ParamVector {
  Vec beta;
  Vec log_lambda;

  int dim() const { return static_cast<int>(beta.size() + log_lambda.size()); }
  Vec stacked() const;
  static ParamVector from_stacked(const Vec& v, int p, int pieces);
};

// Per-region design, precomputed once: covariates, exposures per piece,
// event counts, and the event-weighted covariate sum. Sufficient for every
// likelihood/score evaluation. Rows keep the input record order; all sums
// below run over rows in that order.
struct RegionData {
  std::string id;
  Mat covariates;           // n_i x p
  Vec times;                // n_i
  std::vector<char> events; // n_i, 1 = event
  Mat exposures;            // n_i x J, exposures(l, j-1) = Delta_j(T_l)
  Eigen::VectorXi event_counts;  // J
  Vec event_covariate_sum;  // p, sum of delta_l * x_l

  int subjects() const { return static_cast<int>(times.size()); }
  static RegionData build(const std::string& id,
                          const std::vector<SurvivalRecord>& records,
                          const HazardPartition& partition);
};

// MLE and curvature for one region: thetaHat and SigmaHat = (-H)^{-1}.
struct RegionSummary {
  std::string id;
  Eigen::VectorXi event_counts;
  ParamVector theta_hat;
  Mat sigma_hat;
  int subject_count = 0;
  bool converged = false;
  int iterations = 0;
};

// d_{ji}: events falling in each piece, for one region's records.
Eigen::VectorXi event_counts(const std::vector<SurvivalRecord>& records,
                             const HazardPartition& partition);

// Single-region log-likelihood at theta.
double log_likelihood(const RegionData& region, const ParamVector& theta);

// Full-data log-likelihood: sum of per-region terms, regions in input order.
double log_likelihood(const std::vector<RegionData>& regions,
                      const std::vector<ParamVector>& params);

struct ScoreHessian {
  Vec gradient;  // d = p + J, beta block first
  Mat hessian;   // d x d, symmetric
};

// Analytic gradient and Hessian of the single-region log-likelihood in
// (beta, eta). Summation over subjects in row order, pieces in index order.
ScoreHessian score_and_hessian(const RegionData& region,
                               const ParamVector& theta);

struct FitOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // gradient max-norm
};

// Newton's method with backtracking step-halving. Initialization when no
// init is given: beta = 0, every eta_j = log(total events / total exposure).
RegionSummary fit_region_mle(const RegionData& region,
                             const ParamVector* init = nullptr,
                             const FitOptions& options = {});

// Log density of MVN(thetaHat | theta, sigmaHat), the Laplace approximation
// of the region likelihood.
double normal_approx_loglik(const Vec& theta_hat, const Mat& sigma_hat,
                            const Vec& theta);

}  // namespace gwcrp

#endif
