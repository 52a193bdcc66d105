#include "gwcrp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "gwcrp/errors.hpp"
#include "gwcrp/rng.hpp"

namespace gwcrp::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> default_h_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.2 * i);
  for (int i = 3; i <= 10; ++i) grid.push_back(static_cast<double>(i));
  return grid;
}

namespace {

// Reorder the dataset's region groups to the graph's region order.
std::vector<std::vector<SurvivalRecord>> align_to_graph(
    const io::Dataset& dataset, const SpatialGraph& graph) {
  if (dataset.region_ids.size() != static_cast<std::size_t>(graph.size())) {
    throw DataError("survival data and graph disagree on the region set");
  }
  std::vector<std::vector<SurvivalRecord>> ordered(graph.size());
  for (std::size_t i = 0; i < dataset.region_ids.size(); ++i) {
    const int gi = graph.index_of(dataset.region_ids[i]);  // throws if unknown
    ordered[gi] = dataset.records_by_region[i];
  }
  return ordered;
}

struct PreparedData {
  std::vector<RegionData> regions;
  std::vector<RegionSummary> summaries;
  int covariate_dim = 0;
  int pieces = 0;
};

PreparedData prepare_regions(const io::Dataset& dataset,
                             const SpatialGraph& graph,
                             const HazardPartition& partition) {
  auto ordered = align_to_graph(dataset, graph);
  PreparedData out;
  out.covariate_dim = dataset.covariate_dim;
  out.pieces = partition.pieces();
  std::vector<std::string> failures;
  for (int i = 0; i < graph.size(); ++i) {
    out.regions.push_back(
        RegionData::build(graph.region_ids()[i], ordered[i], partition));
    try {
      out.summaries.push_back(fit_region_mle(out.regions.back()));
    } catch (const std::exception& err) {
      failures.emplace_back(err.what());
    }
  }
  if (!failures.empty()) {
    std::ostringstream msg;
    msg << failures.size() << " region fit(s) failed:";
    for (const auto& f : failures) msg << "\n  " << f;
    throw DataError(msg.str());
  }
  return out;
}

RegionLoglikFn exact_loglik_fn(const std::vector<RegionData>& regions, int p,
                               int J) {
  return [&regions, p, J](int i, const Vec& theta) {
    return log_likelihood(regions[i], ParamVector::from_stacked(theta, p, J));
  };
}

FitResult fit_prepared(const PreparedData& prepared, const SpatialGraph& graph,
                       double h, const McmcOptions& options) {
  GwcrpConfig config;
  config.alpha = options.alpha;
  config.h = h;
  config.prior_variance = options.prior_variance;
  config.iterations = options.iterations;
  config.burn_in = options.burn_in;
  config.seed = options.seed;

  WeightMatrix weights = weight_matrix(graph.distances(), h, options.kernel);
  PreparedSummaries sampler_input(prepared.summaries, config);
  FitResult result;
  result.region_ids = graph.region_ids();
  result.summaries = prepared.summaries;
  result.trace = run_chain(
      sampler_input, weights, config,
      exact_loglik_fn(prepared.regions, prepared.covariate_dim,
                      prepared.pieces));
  result.posterior = summarize(result.trace);
  result.h = h;
  result.pieces = prepared.pieces;
  return result;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - lo;
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

HazardPartition auto_cutpoints(const io::Dataset& dataset, int pieces) {
  if (pieces < 1) {
    throw UsageError("number of hazard pieces must be >= 1");
  }
  std::vector<double> event_times;
  for (const auto& group : dataset.records_by_region) {
    for (const auto& rec : group) {
      if (rec.event) event_times.push_back(rec.time);
    }
  }
  if (event_times.empty()) {
    throw DataError("auto cutpoints: the dataset contains no events");
  }
  if (pieces == 1) return HazardPartition(std::vector<double>{});

  std::sort(event_times.begin(), event_times.end());
  const double anchor = median(event_times);
  std::vector<double> cuts;
  for (int j = 1; j < pieces; ++j) {
    // even quantile split between 0 and the median-time anchor
    const double level = 0.5 * static_cast<double>(j) / (pieces - 1);
    cuts.push_back(quantile(event_times, level));
  }
  cuts.back() = anchor;
  HazardPartition partition(cuts);

  // fail loudly when a region would have an empty piece
  for (std::size_t i = 0; i < dataset.records_by_region.size(); ++i) {
    Eigen::VectorXi counts =
        event_counts(dataset.records_by_region[i], partition);
    for (int j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) {
        std::ostringstream msg;
        msg << "auto cutpoints for J=" << pieces << " leave region "
            << dataset.region_ids[i] << " with no events in piece " << (j + 1);
        throw DataError(msg.str());
      }
    }
  }
  return partition;
}

FitResult fit_single(const io::Dataset& dataset, const SpatialGraph& graph,
                     const HazardPartition& partition, double h,
                     const McmcOptions& options) {
  PreparedData prepared = prepare_regions(dataset, graph, partition);
  return fit_prepared(prepared, graph, h, options);
}

SelectResult select(const io::Dataset& dataset, const SpatialGraph& graph,
                    const std::vector<HazardPartition>& partitions,
                    std::vector<double> h_grid, const McmcOptions& options,
                    int threads) {
  if (partitions.empty() || h_grid.empty()) {
    throw UsageError("selection grids must be nonempty");
  }
  std::sort(h_grid.begin(), h_grid.end());
  h_grid.erase(std::unique(h_grid.begin(), h_grid.end()), h_grid.end());

  std::vector<PreparedData> prepared;
  for (const auto& partition : partitions) {
    prepared.push_back(prepare_regions(dataset, graph, partition));
  }

  const int cells = static_cast<int>(partitions.size() * h_grid.size());
  SelectResult result;
  result.grid.resize(cells);
  std::vector<FitResult> fits(cells);
  std::vector<char> cell_ok(cells, 0);

  parallel_for(cells, threads, [&](int cell) {
    const int pi = cell / static_cast<int>(h_grid.size());
    const int hi = cell % static_cast<int>(h_grid.size());
    GridPoint& point = result.grid[cell];
    point.h = h_grid[hi];
    point.pieces = partitions[pi].pieces();
    try {
      fits[cell] = fit_prepared(prepared[pi], graph, point.h, options);
      point.lpml = fits[cell].posterior.lpml;
      cell_ok[cell] = 1;
    } catch (const std::exception&) {
      point.failed = true;
    }
  });

  result.best = select_best(result.grid);
  result.best_fit = std::move(fits[result.best]);
  return result;
}

EvaluateResult evaluate(const SimulationDesign& design,
                        const std::vector<double>& h_grid,
                        const McmcOptions& options, int replicates,
                        int threads, std::uint64_t master_seed) {
  design.validate();
  if (replicates < 1 || h_grid.empty()) {
    throw UsageError("evaluate needs replicates >= 1 and a nonempty h grid");
  }
  std::vector<double> grid = h_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EvaluateResult result;
  result.replicates.resize(replicates);
  const SpatialGraph& graph = *design.graph;
  const int p = design.covariate_dim;
  const int J = design.partition.pieces();

  parallel_for(replicates, threads, [&](int t) {
    ReplicateOutcome& outcome = result.replicates[t];
    try {
      const std::uint64_t rep_seed = Rng::derive(master_seed, t);
      auto records = generate_dataset(design, Rng::derive(rep_seed, 0));

      int censored = 0;
      std::vector<std::vector<SurvivalRecord>> by_region(graph.size());
      for (auto& rec : records) {
        if (!rec.event) ++censored;
        by_region[rec.region].push_back(std::move(rec));
      }
      outcome.censor_rate =
          static_cast<double>(censored) /
          static_cast<double>(graph.size() * design.subjects_per_region);

      PreparedData prepared;
      prepared.covariate_dim = p;
      prepared.pieces = J;
      for (int i = 0; i < graph.size(); ++i) {
        prepared.regions.push_back(RegionData::build(
            graph.region_ids()[i], by_region[i], design.partition));
        prepared.summaries.push_back(fit_region_mle(prepared.regions.back()));
      }

      McmcOptions chain_options = options;
      std::vector<GridPoint> lpml_grid(grid.size());
      std::vector<FitResult> fits(grid.size());
      int crp_index = -1;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        chain_options.seed = Rng::derive(rep_seed, 1000 + g);
        fits[g] = fit_prepared(prepared, graph, grid[g], chain_options);
        lpml_grid[g] = {grid[g], J, fits[g].posterior.lpml, false};
        if (grid[g] == 0.0) crp_index = static_cast<int>(g);
      }
      const int best = select_best(lpml_grid);

      outcome.selected_h = grid[best];
      outcome.k_hat = fits[best].posterior.k_hat;
      outcome.rand_selected =
          rand_index(fits[best].posterior.dahl_labels, design.true_labels);
      outcome.estimates_selected = fits[best].posterior.param_estimates;
      if (crp_index < 0) {
        // h = 0 not on the grid: run it separately for the CRP baseline
        chain_options.seed = Rng::derive(rep_seed, 999);
        fits.push_back(fit_prepared(prepared, graph, 0.0, chain_options));
        crp_index = static_cast<int>(fits.size()) - 1;
      }
      outcome.k_hat_crp = fits[crp_index].posterior.k_hat;
      outcome.rand_crp =
          rand_index(fits[crp_index].posterior.dahl_labels, design.true_labels);
      outcome.estimates_crp = fits[crp_index].posterior.param_estimates;
      outcome.ok = true;
    } catch (const std::exception& err) {
      outcome.ok = false;
      outcome.error = err.what();
    }
  });

  const int true_k = static_cast<int>(design.cluster_params.size());
  std::vector<std::vector<Vec>> selected_estimates;
  std::vector<std::vector<Vec>> crp_estimates;
  for (const auto& outcome : result.replicates) {
    if (!outcome.ok) continue;
    result.completed += 1;
    result.mean_rand_selected += outcome.rand_selected;
    result.mean_censor_rate += outcome.censor_rate;
    if (outcome.k_hat == true_k) result.fraction_true_k += 1.0;
    selected_estimates.push_back(outcome.estimates_selected);
    crp_estimates.push_back(outcome.estimates_crp);
  }
  if (result.completed == 0) {
    throw DataError("all replicates failed");
  }
  result.mean_rand_selected /= result.completed;
  result.mean_censor_rate /= result.completed;
  result.fraction_true_k /= result.completed;
  result.selected = ab_amse(selected_estimates, design);
  result.crp = ab_amse(crp_estimates, design);
  return result;
}

void parallel_for(int tasks, int threads, const std::function<void(int)>& fn) {
  if (threads < 1) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, tasks);
  if (threads <= 1) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

McmcOptions mcmc_from_json(const json& config) {
  McmcOptions options;
  options.alpha = config.value("alpha", options.alpha);
  options.prior_variance = config.value("sigma0", options.prior_variance);
  options.iterations = config.value("iters", options.iterations);
  options.burn_in = config.value("burnin", options.burn_in);
  options.seed = config.value("seed", options.seed);
  const std::string kernel = config.value("kernel", std::string("exp"));
  if (kernel == "exp") {
    options.kernel = Kernel::kExponential;
  } else if (kernel == "sqexp") {
    options.kernel = Kernel::kSquaredExponential;
  } else {
    throw UsageError("kernel must be 'exp' or 'sqexp'");
  }
  return options;
}

fs::path require_out(const json& config) {
  if (!config.contains("out")) {
    throw UsageError("output directory ('out') is required");
  }
  fs::path out = config.at("out").get<std::string>();
  fs::create_directories(out);
  return out;
}

void echo_config(const fs::path& out, const std::string& command,
                 const json& config) {
  json echo = config;
  echo["command"] = command;
  io::atomic_write(out / "config.json", echo.dump(2) + "\n");
}

HazardPartition partition_from_config(const json& config,
                                      const io::Dataset& dataset) {
  if (config.contains("cutpoints")) {
    return HazardPartition(config.at("cutpoints").get<std::vector<double>>());
  }
  if (config.contains("auto_cutpoints")) {
    return auto_cutpoints(dataset, config.at("auto_cutpoints").get<int>());
  }
  throw UsageError("either 'cutpoints' or 'auto_cutpoints' is required");
}

void write_fit_outputs(const fs::path& out, const FitResult& fit,
                       int covariate_dim, int burn_in) {
  io::write_summary_json(out / "summary.json", fit.posterior, fit.region_ids,
                         covariate_dim, fit.pieces, fit.h);
  io::write_trace_ndjson(out / "trace.ndjson", fit.trace, burn_in);
  io::write_cluster_map_csv(out / "cluster_map.csv", fit.region_ids,
                            fit.posterior.dahl_labels);
}

void cmd_fit(const json& config) {
  const fs::path out = require_out(config);
  auto dataset = io::read_survival_csv(config.at("data").get<std::string>());
  auto graph = io::read_adjacency(config.at("graph").get<std::string>());
  auto partition = partition_from_config(config, dataset);
  const McmcOptions options = mcmc_from_json(config);
  const double h = config.value("h", 0.0);

  FitResult fit = fit_single(dataset, graph, partition, h, options);
  write_fit_outputs(out, fit, dataset.covariate_dim, options.burn_in);
  echo_config(out, "fit", config);
}

void cmd_select(const json& config) {
  const fs::path out = require_out(config);
  auto dataset = io::read_survival_csv(config.at("data").get<std::string>());
  auto graph = io::read_adjacency(config.at("graph").get<std::string>());
  const McmcOptions options = mcmc_from_json(config);

  std::vector<double> h_grid =
      config.contains("h_grid")
          ? config.at("h_grid").get<std::vector<double>>()
          : default_h_grid();

  std::vector<HazardPartition> partitions;
  if (config.contains("j_grid")) {
    std::set<int> pieces(config.at("j_grid").get<std::vector<int>>().begin(),
                         config.at("j_grid").get<std::vector<int>>().end());
    for (int J : pieces) {
      partitions.push_back(auto_cutpoints(dataset, J));
    }
  } else {
    partitions.push_back(partition_from_config(config, dataset));
  }

  const int threads = config.value("threads", 0);
  SelectResult result =
      select(dataset, graph, partitions, h_grid, options, threads);
  io::write_lpml_grid_csv(out / "lpml_grid.csv", result.grid);
  write_fit_outputs(out, result.best_fit, dataset.covariate_dim,
                    options.burn_in);
  echo_config(out, "select", config);
}

int replicate_count(const json& config) {
  if (config.value("full", false)) return config.value("replicates", 100);
  return config.value("replicates", 20);
}

void cmd_simulate(const json& config) {
  const fs::path out = require_out(config);
  auto design = io::read_design_json(config.at("design").get<std::string>());
  const std::uint64_t seed = config.value("seed", 1);
  const int replicates = replicate_count(config);

  io::write_adjacency(out / "graph.txt", *design.graph);
  io::write_cluster_map_csv(out / "true_labels.csv",
                            design.graph->region_ids(), design.true_labels);
  for (int t = 0; t < replicates; ++t) {
    auto records =
        generate_dataset(design, Rng::derive(Rng::derive(seed, t), 0));
    io::Dataset dataset;
    dataset.covariate_dim = design.covariate_dim;
    dataset.region_ids = design.graph->region_ids();
    dataset.records_by_region.resize(design.graph->size());
    for (auto& rec : records) {
      dataset.records_by_region[rec.region].push_back(std::move(rec));
    }
    std::ostringstream name;
    name << "rep_" << t << ".csv";
    io::write_survival_csv(out / name.str(), dataset);
  }
  echo_config(out, "simulate", config);
}

void cmd_evaluate(const json& config) {
  const fs::path out = require_out(config);
  auto design = io::read_design_json(config.at("design").get<std::string>());
  const McmcOptions options = mcmc_from_json(config);
  std::vector<double> h_grid =
      config.contains("h_grid")
          ? config.at("h_grid").get<std::vector<double>>()
          : default_h_grid();
  const int replicates = replicate_count(config);
  const int threads = config.value("threads", 0);
  const std::uint64_t seed = config.value("seed", 1);

  EvaluateResult result =
      evaluate(design, h_grid, options, replicates, threads, seed);

  {
    std::ostringstream csv;
    csv.precision(10);
    csv << "replicate,status,selected_h,k_hat,rand_index,k_hat_crp,"
           "rand_index_crp,censor_rate,error\n";
    for (std::size_t t = 0; t < result.replicates.size(); ++t) {
      const auto& r = result.replicates[t];
      if (r.ok) {
        csv << t << ",ok," << r.selected_h << ',' << r.k_hat << ','
            << r.rand_selected << ',' << r.k_hat_crp << ',' << r.rand_crp
            << ',' << r.censor_rate << ",\n";
      } else {
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        csv << t << ",failed,,,,,,," << msg << '\n';
      }
    }
    io::atomic_write(out / "evaluation.csv", csv.str());
  }
  {
    std::map<int, int> histogram;
    for (const auto& r : result.replicates) {
      if (r.ok) histogram[r.k_hat] += 1;
    }
    std::ostringstream csv;
    csv << "k_hat,count\n";
    for (auto [k, count] : histogram) csv << k << ',' << count << '\n';
    io::atomic_write(out / "khat_hist.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv.precision(10);
    csv << "method,metric,value\n";
    auto emit = [&csv](const std::string& method, const AbAmse& m) {
      csv << method << ",ab_beta," << m.ab_beta_aggregate << '\n'
          << method << ",amse_beta," << m.amse_beta_aggregate << '\n'
          << method << ",ab_lambda," << m.ab_lambda_aggregate << '\n'
          << method << ",amse_log_lambda," << m.amse_log_lambda_aggregate
          << '\n';
      for (int r = 0; r < m.ab.size(); ++r) {
        csv << method << ",ab_theta_" << r << ',' << m.ab[r] << '\n';
        csv << method << ",amse_theta_" << r << ',' << m.amse[r] << '\n';
      }
    };
    emit("lpml_selected", result.selected);
    emit("crp", result.crp);
    csv << "lpml_selected,mean_rand_index," << result.mean_rand_selected
        << '\n';
    csv << "lpml_selected,fraction_true_k," << result.fraction_true_k << '\n';
    csv << "all,completed_replicates," << result.completed << '\n';
    csv << "all,mean_censor_rate," << result.mean_censor_rate << '\n';
    io::atomic_write(out / "ab_amse.csv", csv.str());
  }
  echo_config(out, "evaluate", config);
}

}  // namespace

void run_command(const std::string& command, const json& config) {
  if (command == "fit") {
    cmd_fit(config);
  } else if (command == "select") {
    cmd_select(config);
  } else if (command == "simulate") {
    cmd_simulate(config);
  } else if (command == "evaluate") {
    cmd_evaluate(config);
  } else {
    throw UsageError("unknown command: " + command);
  }
}

}  // namespace gwcrp::runner
