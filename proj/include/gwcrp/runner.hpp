#ifndef GWCRP_RUNNER_HPP
#define GWCRP_RUNNER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwcrp/io.hpp"
#include "gwcrp/posterior.hpp"
#include "gwcrp/sampler.hpp"
#include "gwcrp/simulation.hpp"

namespace gwcrp::runner {

struct McmcOptions {
  double alpha = 1.0;
  double prior_variance = 100.0;
  int iterations = 2000;
  int burn_in = 500;
  std::uint64_t seed = 1;
  Kernel kernel = Kernel::kExponential;
};

// Default h grid: 0 to 2 step 0.2, then 3 to 10 step 1.
std::vector<double> default_h_grid();

// Cutpoints for J pieces at even quantiles of the observed event times
// between 0 and the median-time anchor. Throws DataError when a region ends
// up with an empty piece.
HazardPartition auto_cutpoints(const io::Dataset& dataset, int pieces);

struct FitResult {
  std::vector<std::string> region_ids;
  std::vector<RegionSummary> summaries;
  ChainTrace trace;
  PosteriorSummary posterior;
  double h = 0.0;
  int pieces = 0;
};

// Region MLE fits, one chain, posterior summary. The dataset's regions are
// reordered to the graph's region order; id sets must match exactly.
FitResult fit_single(const io::Dataset& dataset, const SpatialGraph& graph,
                     const HazardPartition& partition, double h,
                     const McmcOptions& options);

struct SelectResult {
  std::vector<GridPoint> grid;
  int best = 0;
  FitResult best_fit;
};

// Joint (J, h) grid search by LPML. Failed cells are recorded and skipped
// during selection. Duplicate h values are removed first.
SelectResult select(const io::Dataset& dataset, const SpatialGraph& graph,
                    const std::vector<HazardPartition>& partitions,
                    std::vector<double> h_grid, const McmcOptions& options,
                    int threads);

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  double selected_h = 0.0;
  int k_hat = 0;
  double rand_selected = 0.0;
  int k_hat_crp = 0;
  double rand_crp = 0.0;
  double censor_rate = 0.0;
  std::vector<Vec> estimates_selected;  // per region, stacked theta
  std::vector<Vec> estimates_crp;
};

struct EvaluateResult {
  std::vector<ReplicateOutcome> replicates;
  int completed = 0;
  AbAmse selected;
  AbAmse crp;
  double mean_rand_selected = 0.0;
  double fraction_true_k = 0.0;
  double mean_censor_rate = 0.0;
};

// Full simulation study: per replicate, generate data, select h by LPML,
// and record clustering/estimation metrics against the truth; h = 0 (plain
// CRP) is evaluated alongside for comparison. Aggregates run over completed
// replicates only.
EvaluateResult evaluate(const SimulationDesign& design,
                        const std::vector<double>& h_grid,
                        const McmcOptions& options, int replicates,
                        int threads, std::uint64_t master_seed);

// Run `fn(i)` for i in [0, tasks) on up to `threads` workers. Exceptions are
// rethrown on the calling thread (first one wins).
void parallel_for(int tasks, int threads, const std::function<void(int)>& fn);

// CLI-facing entry point: executes one of fit/select/simulate/evaluate from
// an effective-config JSON object and writes output files. Throws on error.
void run_command(const std::string& command, const nlohmann::json& config);

}  // namespace gwcrp::runner

#endif
