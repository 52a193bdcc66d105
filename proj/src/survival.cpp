#include "gwcrp/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gwcrp/errors.hpp"
#include "gwcrp/mvn.hpp"

namespace gwcrp {

namespace {

// Linear predictors are clamped before exponentiation; a converged fit whose
// final predictor touches the clamp is reported as non-converged.
constexpr double kLinpredClamp = 500.0;

double clamped_exp(double x) {
  return std::exp(std::clamp(x, -kLinpredClamp, kLinpredClamp));
}

}  // namespace

HazardPartition::HazardPartition(std::vector<double> cutpoints)
    : cutpoints_(std::move(cutpoints)) {
  double prev = 0.0;
  for (double a : cutpoints_) {
    if (!(a > prev) || !std::isfinite(a)) {
      throw UsageError("hazard cutpoints must be strictly increasing and > 0");
    }
    prev = a;
  }
}

int HazardPartition::piece_index(double t) const {
  // first cutpoint strictly greater than t; t == a_j falls in piece j+1
  auto it = std::upper_bound(cutpoints_.begin(), cutpoints_.end(), t);
  return static_cast<int>(it - cutpoints_.begin()) + 1;
}

double HazardPartition::exposure(double t, int j) const {
  const int J = pieces();
  if (j < 1 || j > J) {
    throw UsageError("piece index out of range");
  }
  if (t < 0.0) {
    throw UsageError("follow-up time must be nonnegative");
  }
  const double lo = (j == 1) ? 0.0 : cutpoints_[j - 2];
  const double hi = (j == J) ? std::numeric_limits<double>::infinity()
                             : cutpoints_[j - 1];
  if (t <= lo) return 0.0;
  if (t >= hi) return hi - lo;
  return t - lo;
}

Vec ParamVector::stacked() const {
  Vec v(dim());
  v << beta, log_lambda;
  return v;
}

ParamVector ParamVector::from_stacked(const Vec& v, int p, int pieces) {
  if (v.size() != p + pieces) {
    throw UsageError("stacked parameter vector has wrong dimension");
  }
  ParamVector out;
  out.beta = v.head(p);
  out.log_lambda = v.tail(pieces);
  return out;
}

Eigen::VectorXi event_counts(const std::vector<SurvivalRecord>& records,
                             const HazardPartition& partition) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(partition.pieces());
  for (const auto& rec : records) {
    if (rec.event) {
      counts[partition.piece_index(rec.time) - 1] += 1;
    }
  }
  return counts;
}

RegionData RegionData::build(const std::string& id,
                             const std::vector<SurvivalRecord>& records,
                             const HazardPartition& partition) {
  const int n = static_cast<int>(records.size());
  const int J = partition.pieces();
  const int p = n > 0 ? static_cast<int>(records.front().covariates.size()) : 0;

  RegionData region;
  region.id = id;
  region.covariates.resize(n, p);
  region.times.resize(n);
  region.events.resize(n);
  region.exposures.resize(n, J);
  region.event_counts = Eigen::VectorXi::Zero(J);
  region.event_covariate_sum = Vec::Zero(p);

  for (int l = 0; l < n; ++l) {
    const auto& rec = records[l];
    if (rec.time < 0.0) {
      throw DataError("region " + id + ": negative follow-up time");
    }
    if (rec.covariates.size() != p) {
      throw DataError("region " + id + ": inconsistent covariate dimension");
    }
    region.covariates.row(l) = rec.covariates.transpose();
    region.times[l] = rec.time;
    region.events[l] = rec.event ? 1 : 0;
    for (int j = 1; j <= J; ++j) {
      region.exposures(l, j - 1) = partition.exposure(rec.time, j);
    }
    if (rec.event) {
      region.event_counts[partition.piece_index(rec.time) - 1] += 1;
      region.event_covariate_sum += rec.covariates;
    }
  }
  return region;
}

double log_likelihood(const RegionData& region, const ParamVector& theta) {
  if (!theta.stacked().allFinite()) {
    throw NumericError("non-finite parameter vector");
  }
  const int J = static_cast<int>(theta.log_lambda.size());
  if (region.exposures.cols() != J ||
      region.covariates.cols() != theta.beta.size()) {
    throw UsageError("parameter dimensions do not match region data");
  }

  double value = region.event_counts.cast<double>().dot(theta.log_lambda) +
                 region.event_covariate_sum.dot(theta.beta);

  // risk_l = exp(x_l' beta), piece_exposure_j = sum_l Delta_j(T_l) risk_l
  Vec linpred = region.covariates * theta.beta;
  Vec risk(linpred.size());
  for (int l = 0; l < risk.size(); ++l) risk[l] = clamped_exp(linpred[l]);
  Vec piece_exposure = region.exposures.transpose() * risk;
  for (int j = 0; j < J; ++j) {
    value -= std::exp(theta.log_lambda[j]) * piece_exposure[j];
  }
  return value;
}

double log_likelihood(const std::vector<RegionData>& regions,
                      const std::vector<ParamVector>& params) {
  if (regions.size() != params.size()) {
    throw UsageError("one parameter vector per region required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    total += log_likelihood(regions[i], params[i]);
  }
  return total;
}

ScoreHessian score_and_hessian(const RegionData& region,
                               const ParamVector& theta) {
  const int p = static_cast<int>(theta.beta.size());
  const int J = static_cast<int>(theta.log_lambda.size());
  const int d = p + J;
  const int n = region.subjects();

  Vec lambda(J);
  for (int j = 0; j < J; ++j) lambda[j] = std::exp(theta.log_lambda[j]);

  Vec linpred = region.covariates * theta.beta;
  Vec risk(n);
  for (int l = 0; l < n; ++l) risk[l] = clamped_exp(linpred[l]);

  // S_j = sum_l Delta_j(T_l) risk_l, and the cumulative hazard weight per
  // subject w_l = risk_l * sum_j lambda_j Delta_j(T_l)
  Vec piece_exposure = region.exposures.transpose() * risk;  // J
  Vec subject_weight = (region.exposures * lambda).cwiseProduct(risk);  // n

  ScoreHessian out;
  out.gradient = Vec::Zero(d);
  out.hessian = Mat::Zero(d, d);

  out.gradient.head(p) = region.event_covariate_sum -
                         region.covariates.transpose() * subject_weight;
  for (int j = 0; j < J; ++j) {
    out.gradient[p + j] =
        region.event_counts[j] - lambda[j] * piece_exposure[j];
  }

  // beta block: -sum_l w_l x_l x_l'
  out.hessian.topLeftCorner(p, p) =
      -(region.covariates.transpose() *
        subject_weight.asDiagonal() * region.covariates);
  // cross block d2/deta_j dbeta = -lambda_j sum_l Delta_j(T_l) risk_l x_l
  Mat cross = region.covariates.transpose() *
              risk.asDiagonal() * region.exposures;  // p x J
  for (int j = 0; j < J; ++j) {
    out.hessian.block(0, p + j, p, 1) = -lambda[j] * cross.col(j);
    out.hessian.block(p + j, 0, 1, p) = -lambda[j] * cross.col(j).transpose();
    out.hessian(p + j, p + j) = -lambda[j] * piece_exposure[j];
  }
  return out;
}

RegionSummary fit_region_mle(const RegionData& region,
                             const ParamVector* init,
                             const FitOptions& options) {
  const int p = static_cast<int>(region.covariates.cols());
  const int J = static_cast<int>(region.exposures.cols());
  const int d = p + J;

  for (int j = 0; j < J; ++j) {
    if (region.event_counts[j] == 0) {
      std::ostringstream msg;
      msg << "region " << region.id << ": no events in hazard piece "
          << (j + 1) << "; the MLE for its log hazard diverges";
      throw DataError(msg.str());
    }
  }

  ParamVector theta;
  if (init != nullptr) {
    theta = *init;
  } else {
    theta.beta = Vec::Zero(p);
    const double total_events = region.event_counts.sum();
    const double total_exposure = region.exposures.sum();
    theta.log_lambda =
        Vec::Constant(J, std::log(total_events / total_exposure));
  }

  double loglik = log_likelihood(region, theta);
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    ScoreHessian sh = score_and_hessian(region, theta);
    if (sh.gradient.lpNorm<Eigen::Infinity>() < options.tolerance) {
      converged = true;
      break;
    }
    // The log-likelihood is jointly concave in (beta, eta), so -H is PSD;
    // an LLT failure means a rank-deficient design.
    Eigen::LLT<Mat> llt(-sh.hessian);
    if (llt.info() != Eigen::Success) {
      throw NumericError("region " + region.id +
                         ": singular Hessian (rank-deficient design matrix)");
    }
    Vec step = llt.solve(sh.gradient);

    double scale = 1.0;
    bool improved = false;
    Vec current = theta.stacked();
    for (int halving = 0; halving <= 30; ++halving) {
      ParamVector trial = ParamVector::from_stacked(current + scale * step, p, J);
      double trial_loglik = log_likelihood(region, trial);
      if (trial_loglik > loglik ||
          (halving == 0 && trial_loglik == loglik)) {
        theta = trial;
        loglik = trial_loglik;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      // Line-search stagnation: the predicted improvement (the Newton
      // decrement) is below the floating-point resolution of the
      // log-likelihood, so the maximizer is reached to machine precision
      // even though the absolute gradient tolerance is out of reach.
      const double decrement = 0.5 * sh.gradient.dot(step);
      if (decrement <= 1e-12 * (1.0 + std::abs(loglik))) {
        converged = true;
        break;
      }
      throw ConvergenceError("region " + region.id +
                             ": Newton step failed after 30 halvings");
    }
  }
  if (!converged) {
    throw ConvergenceError("region " + region.id + ": Newton did not reach " +
                           "gradient tolerance within iteration limit");
  }
  Vec linpred = region.covariates * theta.beta;
  if (linpred.size() > 0 &&
      linpred.lpNorm<Eigen::Infinity>() >= kLinpredClamp) {
    throw ConvergenceError("region " + region.id +
                           ": fitted linear predictor hit the overflow clamp");
  }

  ScoreHessian sh = score_and_hessian(region, theta);
  MvnDensity neg_hessian;  // factor (-H) to invert it
  try {
    neg_hessian.reset(-sh.hessian);
  } catch (const NumericError&) {
    throw NumericError("region " + region.id +
                       ": negative Hessian not positive definite at the MLE");
  }

  RegionSummary summary;
  summary.id = region.id;
  summary.event_counts = region.event_counts;
  summary.theta_hat = theta;
  summary.sigma_hat = neg_hessian.inverse();
  // symmetrize away factorization round-off
  summary.sigma_hat = 0.5 * (summary.sigma_hat + summary.sigma_hat.transpose()).eval();
  summary.subject_count = region.subjects();
  summary.converged = true;
  summary.iterations = iter;
  return summary;
}

double normal_approx_loglik(const Vec& theta_hat, const Mat& sigma_hat,
                            const Vec& theta) {
  MvnDensity density(sigma_hat);
  return density.logpdf(theta_hat, theta);
}

}  // namespace gwcrp
