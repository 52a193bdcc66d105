#ifndef GWCRP_SIMULATION_HPP
#define GWCRP_SIMULATION_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "gwcrp/graph.hpp"
#include "gwcrp/survival.hpp"

namespace gwcrp {

struct ClusterParams {
  Vec beta;
  Vec lambda;  // natural scale, per hazard piece
};

struct SimulationDesign {
  std::shared_ptr<SpatialGraph> graph;
  std::vector<int> true_labels;            // 1-based, per region
  std::vector<ClusterParams> cluster_params;
  int subjects_per_region = 60;
  int covariate_dim = 3;
  HazardPartition partition{{1.5, 6.0}};
  double censor_cap = 150.0;
  double censor_rate = 0.01;

  void validate() const;
};

// Exact inverse-CDF draw for the piecewise-constant-hazard model: returns t
// with Lambda(t) * exp(linpred) = -log(u), Lambda piecewise linear with
// slopes lambda_j.
double inverse_piecewise_survival(double u, const Vec& lambda, double linpred,
                                  const HazardPartition& partition);

// One replicate: covariates iid N(0,1), latent event time from the design's
// cluster hazard, censoring min(cap, Exp(rate)). Records come out grouped by
// region in graph order; deterministic given the seed.
std::vector<SurvivalRecord> generate_dataset(const SimulationDesign& design,
                                             std::uint64_t seed);

// Fraction of unordered pairs on which two partitions agree.
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct AbAmse {
  Vec ab;          // per parameter, theta scale (beta..., log lambda...)
  Vec amse;        // per parameter, theta scale
  Vec ab_lambda;   // per hazard piece, natural scale
  double ab_beta_aggregate = 0.0;
  double amse_beta_aggregate = 0.0;
  double ab_lambda_aggregate = 0.0;     // natural scale
  double amse_log_lambda_aggregate = 0.0;
};

// Cluster-then-average bias and MSE: per true cluster, average over member
// regions and replicates, then average across clusters.
AbAmse ab_amse(const std::vector<std::vector<Vec>>& estimates_per_replicate,
               const SimulationDesign& design);

}  // namespace gwcrp

#endif
