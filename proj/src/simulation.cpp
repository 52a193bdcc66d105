#include "gwcrp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwcrp/errors.hpp"
#include "gwcrp/rng.hpp"

namespace gwcrp {

void SimulationDesign::validate() const {
  if (!graph) {
    throw UsageError("simulation design has no graph");
  }
  if (static_cast<int>(true_labels.size()) != graph->size()) {
    throw UsageError("true label vector length does not match graph size");
  }
  const int k = static_cast<int>(cluster_params.size());
  for (int z : true_labels) {
    if (z < 1 || z > k) {
      throw UsageError("true label outside 1..k");
    }
  }
  for (const auto& cp : cluster_params) {
    if (cp.lambda.size() != partition.pieces()) {
      throw UsageError("cluster lambda length does not match hazard pieces");
    }
    if ((cp.lambda.array() <= 0.0).any()) {
      throw UsageError("baseline hazards must be positive");
    }
    if (cp.beta.size() != covariate_dim) {
      throw UsageError("cluster beta length does not match covariate dim");
    }
  }
  if (subjects_per_region < 1 || censor_rate <= 0.0 || censor_cap <= 0.0) {
    throw UsageError("invalid simulation design scalars");
  }
}

double inverse_piecewise_survival(double u, const Vec& lambda, double linpred,
                                  const HazardPartition& partition) {
  if (!(u > 0.0 && u < 1.0)) {
    throw UsageError("u must be in (0, 1)");
  }
  const int J = partition.pieces();
  if (lambda.size() != J) {
    throw UsageError("lambda length does not match hazard pieces");
  }
  // target baseline cumulative hazard
  double target = -std::log(u) / std::exp(linpred);
  double lo = 0.0;
  for (int j = 1; j <= J; ++j) {
    const double hi = (j == J) ? std::numeric_limits<double>::infinity()
                               : partition.cutpoints()[j - 1];
    const double piece_hazard = lambda[j - 1] * (hi - lo);
    if (target < piece_hazard || j == J) {
      return lo + target / lambda[j - 1];
    }
    target -= piece_hazard;
    lo = hi;
  }
  return lo;  // unreachable
}

std::vector<SurvivalRecord> generate_dataset(const SimulationDesign& design,
                                             std::uint64_t seed) {
  design.validate();
  Rng rng(seed);
  std::vector<SurvivalRecord> records;
  records.reserve(design.graph->size() * design.subjects_per_region);

  // draw order per subject: p covariate normals, one uniform for the event
  // time, one uniform for the censoring time
  for (int i = 0; i < design.graph->size(); ++i) {
    const auto& cp = design.cluster_params[design.true_labels[i] - 1];
    for (int s = 0; s < design.subjects_per_region; ++s) {
      SurvivalRecord rec;
      rec.region = i;
      rec.covariates.resize(design.covariate_dim);
      for (int r = 0; r < design.covariate_dim; ++r) {
        rec.covariates[r] = rng.normal();
      }
      const double linpred = rec.covariates.dot(cp.beta);
      const double event_time = inverse_piecewise_survival(
          rng.uniform(), cp.lambda, linpred, design.partition);
      const double censor_time =
          std::min(design.censor_cap, rng.exponential(design.censor_rate));
      rec.event = event_time <= censor_time;
      rec.time = std::min(event_time, censor_time);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw UsageError("rand_index requires equal-length label vectors");
  }
  const int n = static_cast<int>(a.size());
  if (n < 2) {
    throw UsageError("rand_index requires at least two elements");
  }
  long long agree = 0;
  long long pairs = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pairs += 1;
      if ((a[i] == a[j]) == (b[i] == b[j])) agree += 1;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

AbAmse ab_amse(const std::vector<std::vector<Vec>>& estimates_per_replicate,
               const SimulationDesign& design) {
  design.validate();
  const int n = design.graph->size();
  const int T = static_cast<int>(estimates_per_replicate.size());
  if (T == 0) {
    throw UsageError("no replicates given");
  }
  const int p = design.covariate_dim;
  const int J = design.partition.pieces();
  const int d = p + J;
  const int k = static_cast<int>(design.cluster_params.size());

  for (const auto& rep : estimates_per_replicate) {
    if (static_cast<int>(rep.size()) != n) {
      throw UsageError("replicate estimate count does not match region count");
    }
  }

  AbAmse out;
  out.ab = Vec::Zero(d);
  out.amse = Vec::Zero(d);
  out.ab_lambda = Vec::Zero(J);

  for (int c = 1; c <= k; ++c) {
    Vec truth(d);
    truth << design.cluster_params[c - 1].beta,
        design.cluster_params[c - 1].lambda.array().log().matrix();
    Vec cluster_bias = Vec::Zero(d);
    Vec cluster_mse = Vec::Zero(d);
    Vec cluster_bias_lambda = Vec::Zero(J);
    int members = 0;
    for (int i = 0; i < n; ++i) {
      if (design.true_labels[i] != c) continue;
      members += 1;
      Vec region_bias = Vec::Zero(d);
      Vec region_mse = Vec::Zero(d);
      Vec region_bias_lambda = Vec::Zero(J);
      for (int t = 0; t < T; ++t) {
        const Vec& est = estimates_per_replicate[t][i];
        if (est.size() != d) {
          throw UsageError("estimate dimension does not match design");
        }
        Vec err = est - truth;
        region_bias += err;
        region_mse += err.cwiseProduct(err);
        region_bias_lambda +=
            (est.tail(J).array().exp() -
             design.cluster_params[c - 1].lambda.array())
                .matrix();
      }
      cluster_bias += region_bias / T;
      cluster_mse += region_mse / T;
      cluster_bias_lambda += region_bias_lambda / T;
    }
    if (members == 0) {
      throw UsageError("true cluster with no member regions");
    }
    out.ab += cluster_bias / members;
    out.amse += cluster_mse / members;
    out.ab_lambda += cluster_bias_lambda / members;
  }
  out.ab /= k;
  out.amse /= k;
  out.ab_lambda /= k;

  out.ab_beta_aggregate = out.ab.head(p).mean();
  out.amse_beta_aggregate = out.amse.head(p).mean();
  out.ab_lambda_aggregate = out.ab_lambda.mean();
  out.amse_log_lambda_aggregate = out.amse.tail(J).mean();
  return out;
}

}  // namespace gwcrp
