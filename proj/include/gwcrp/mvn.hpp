#ifndef GWCRP_MVN_HPP
#define GWCRP_MVN_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "gwcrp/errors.hpp"

namespace gwcrp {

// Cholesky-backed multivariate normal log density, reused across the
// sampler's full conditionals. Factor once, evaluate many times.
class MvnDensity {
 public:
  MvnDensity() = default;
  explicit MvnDensity(const Eigen::MatrixXd& covariance) { reset(covariance); }

  void reset(const Eigen::MatrixXd& covariance) {
    llt_.compute(covariance);
    if (llt_.info() != Eigen::Success) {
      throw NumericError("covariance matrix is not positive definite");
    }
    dim_ = static_cast<int>(covariance.rows());
    log_det_ = 0.0;
    for (int i = 0; i < dim_; ++i) {
      log_det_ += 2.0 * std::log(llt_.matrixL()(i, i));
    }
  }

  double log_det() const { return log_det_; }

  // log N(x | mean, Sigma)
  double logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean) const {
    Eigen::VectorXd y = llt_.matrixL().solve(x - mean);
    return -0.5 * (dim_ * std::log(2.0 * M_PI) + log_det_ + y.squaredNorm());
  }

  Eigen::MatrixXd inverse() const {
    return llt_.solve(Eigen::MatrixXd::Identity(dim_, dim_));
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  int dim_ = 0;
  double log_det_ = 0.0;
};

}  // namespace gwcrp

#endif
