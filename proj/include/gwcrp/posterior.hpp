#ifndef GWCRP_POSTERIOR_HPP
#define GWCRP_POSTERIOR_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gwcrp/sampler.hpp"
#include "gwcrp/survival.hpp"

namespace gwcrp {

struct DahlResult {
  int draw_index = 0;                // retained draw realizing the minimum
  std::vector<int> labels;
};

// Dahl's method: the retained draw whose membership matrix is closest in
// elementwise squared distance to the average membership matrix. Ties go to
// the smallest draw index.
DahlResult dahl_partition(const std::vector<std::vector<int>>& label_draws);

struct CpoResult {
  Vec log_cpo;   // per region
  double lpml = 0.0;
};

// CPO_i is the harmonic mean of per-draw region likelihoods, computed in log
// space; LPML is the sum of log CPOs.
CpoResult cpo_lpml(const Mat& per_region_loglik);

struct GridPoint {
  double h = 0.0;
  int pieces = 0;
  double lpml = 0.0;
  bool failed = false;
};

// Argmax-LPML grid point over the non-failed cells; ties broken by smaller
// h, then fewer pieces.
int select_best(const std::vector<GridPoint>& grid);

// Shortest interval containing ceil(level * B) of the sorted samples.
std::pair<double, double> hpd_interval(const std::vector<double>& samples,
                                       double level);

struct PosteriorSummary {
  std::vector<int> dahl_labels;
  int dahl_draw = 0;
  int k_hat = 0;
  std::vector<Vec> param_estimates;              // per region, stacked theta
  std::vector<std::vector<std::pair<double, double>>> hpd;  // per region x d
  std::vector<int> representative_region;        // per Dahl cluster
  Vec log_cpo;
  double lpml = 0.0;
};

// Full post-processing of one chain: Dahl partition, per-region estimates
// from the representative draw, per-region 95% HPD intervals from each
// region's parameter trajectory, per-cluster representative region (minimum
// Euclidean distance from the posterior mean), and LPML.
PosteriorSummary summarize(const ChainTrace& trace, double level = 0.95);

}  // namespace gwcrp

#endif
