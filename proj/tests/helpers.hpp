#ifndef GWCRP_TESTS_HELPERS_HPP
#define GWCRP_TESTS_HELPERS_HPP

// Test-only oracles, written independently of the library code paths they
// check: straight-from-the-display likelihood, finite differences, a naive
// Cholesky, Floyd-Warshall, Nelder-Mead, and a KS test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "gwcrp/survival.hpp"

namespace oracle {

// Delta_j(t) via min/max, not the library's branch logic.
inline double exposure(double t, int j, const std::vector<double>& cuts) {
  const double lo = (j == 1) ? 0.0 : cuts[j - 2];
  const double hi = (j - 1 < static_cast<int>(cuts.size()))
                        ? cuts[j - 1]
                        : std::numeric_limits<double>::infinity();
  return std::max(0.0, std::min(t, hi) - lo);
}

// The displayed log-likelihood, summed term by term per region.
inline double log_likelihood(
    const std::vector<gwcrp::SurvivalRecord>& records,
    const std::vector<double>& cuts, const Eigen::VectorXd& beta,
    const Eigen::VectorXd& log_lambda) {
  const int J = static_cast<int>(cuts.size()) + 1;
  double total = 0.0;
  for (int j = 1; j <= J; ++j) {
    int d_j = 0;
    for (const auto& rec : records) {
      const double lo = (j == 1) ? 0.0 : cuts[j - 2];
      const double hi = (j - 1 < static_cast<int>(cuts.size()))
                            ? cuts[j - 1]
                            : std::numeric_limits<double>::infinity();
      if (rec.event && rec.time >= lo && rec.time < hi) d_j += 1;
    }
    total += d_j * log_lambda[j - 1];
  }
  for (const auto& rec : records) {
    if (rec.event) total += rec.covariates.dot(beta);
  }
  for (int j = 1; j <= J; ++j) {
    double s = 0.0;
    for (const auto& rec : records) {
      s += exposure(rec.time, j, cuts) * std::exp(rec.covariates.dot(beta));
    }
    total -= std::exp(log_lambda[j - 1]) * s;
  }
  return total;
}

inline Eigen::VectorXd central_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

// Lower-triangular Cholesky, textbook loops.
inline Eigen::MatrixXd naive_cholesky(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

inline double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& sigma) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd l = naive_cholesky(sigma);
  // forward substitution
  Eigen::VectorXd y = x - mu;
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(l(i, i));
  return -0.5 * (d * std::log(2.0 * M_PI) + log_det + y.squaredNorm());
}

inline std::vector<std::vector<double>> floyd_warshall(
    const std::vector<std::vector<bool>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    for (int j = 0; j < n; ++j) {
      if (adjacency[i][j]) d[i][j] = 1.0;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  return d;
}

// Derivative-free maximizer (Nelder-Mead on the negated objective).
inline Eigen::VectorXd nelder_mead_max(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, int max_iter = 20000, double tol = 1e-12) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += 0.5;
  std::vector<double> value(n + 1);
  for (int i = 0; i <= n; ++i) value[i] = -f(simplex[i]);

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> order(n + 1);
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return value[a] < value[b]; });
    std::vector<Eigen::VectorXd> sx(n + 1);
    std::vector<double> sv(n + 1);
    for (int i = 0; i <= n; ++i) {
      sx[i] = simplex[order[i]];
      sv[i] = value[order[i]];
    }
    simplex = sx;
    value = sv;
    if (std::abs(value[n] - value[0]) < tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;

    Eigen::VectorXd reflected = centroid + (centroid - simplex[n]);
    double fr = -f(reflected);
    if (fr < value[0]) {
      Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[n]);
      double fe = -f(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        value[n] = fe;
      } else {
        simplex[n] = reflected;
        value[n] = fr;
      }
    } else if (fr < value[n - 1]) {
      simplex[n] = reflected;
      value[n] = fr;
    } else {
      Eigen::VectorXd contracted = centroid + 0.5 * (simplex[n] - centroid);
      double fc = -f(contracted);
      if (fc < value[n]) {
        simplex[n] = contracted;
        value[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          value[i] = -f(simplex[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (value[i] < value[best]) best = i;
  }
  return simplex[best];
}

// One-sample KS statistic against a CDF, with the asymptotic p-value.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double ks_pvalue(double d, int n) {
  const double t = (std::sqrt(static_cast<double>(n)) + 0.12 +
                    0.11 / std::sqrt(static_cast<double>(n))) *
                   d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * t * t);
  }
  return std::clamp(p, 0.0, 1.0);
}

// Random single-region dataset for gradient/MLE checks. Events are made
// frequent enough that every piece usually has one.
inline std::vector<gwcrp::SurvivalRecord> random_region(
    std::mt19937& rng, int subjects, int p, const std::vector<double>& cuts) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double horizon = (cuts.empty() ? 4.0 : cuts.back() * 2.0);
  std::vector<gwcrp::SurvivalRecord> records;
  for (int s = 0; s < subjects; ++s) {
    gwcrp::SurvivalRecord rec;
    rec.region = 0;
    rec.covariates.resize(p);
    for (int r = 0; r < p; ++r) rec.covariates[r] = 0.5 * normal(rng);
    rec.time = uniform(rng) * horizon;
    rec.event = uniform(rng) < 0.8;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace oracle

#endif
