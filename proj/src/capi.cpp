#include "gwcrp/gwcrp_c.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwcrp/errors.hpp"
#include "gwcrp/io.hpp"
#include "gwcrp/runner.hpp"

using nlohmann::json;

struct gwcrp_ctx {
  std::string error;
};

struct gwcrp_dataset {
  gwcrp::io::Dataset dataset;
};

struct gwcrp_graph {
  gwcrp::SpatialGraph graph;
};

struct gwcrp_result {
  gwcrp::runner::FitResult fit;
  int covariate_dim = 0;
  std::string summary_json;
};

namespace {

// Input-shaped failures map to GWCRP_ERR_INPUT, everything else to
// GWCRP_ERR_INTERNAL.
int classify(const std::exception& err) {
  if (dynamic_cast<const gwcrp::UsageError*>(&err) != nullptr ||
      dynamic_cast<const gwcrp::DataError*>(&err) != nullptr) {
    return GWCRP_ERR_INPUT;
  }
  return GWCRP_ERR_INTERNAL;
}

template <typename Fn>
int guarded(gwcrp_ctx* ctx, Fn&& fn) {
  if (ctx == nullptr) return GWCRP_ERR_INPUT;
  ctx->error.clear();
  try {
    fn();
    return GWCRP_OK;
  } catch (const std::exception& err) {
    ctx->error = err.what();
    return classify(err);
  } catch (...) {
    ctx->error = "unknown error";
    return GWCRP_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* gwcrp_version(void) { return "1.0.0"; }

gwcrp_ctx* gwcrp_ctx_new(void) { return new (std::nothrow) gwcrp_ctx(); }

void gwcrp_ctx_free(gwcrp_ctx* ctx) { delete ctx; }

const char* gwcrp_ctx_error(const gwcrp_ctx* ctx) {
  return ctx == nullptr ? "" : ctx->error.c_str();
}

gwcrp_dataset* gwcrp_dataset_load(gwcrp_ctx* ctx, const char* csv_path) {
  gwcrp_dataset* handle = nullptr;
  guarded(ctx, [&] {
    if (csv_path == nullptr) throw gwcrp::UsageError("csv_path is NULL");
    handle = new gwcrp_dataset{gwcrp::io::read_survival_csv(csv_path)};
  });
  return handle;
}

void gwcrp_dataset_free(gwcrp_dataset* dataset) { delete dataset; }

int gwcrp_dataset_region_count(const gwcrp_dataset* dataset) {
  return dataset == nullptr
             ? 0
             : static_cast<int>(dataset->dataset.region_ids.size());
}

int gwcrp_dataset_record_count(const gwcrp_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.total_records();
}

int gwcrp_dataset_covariate_count(const gwcrp_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.covariate_dim;
}

gwcrp_graph* gwcrp_graph_load(gwcrp_ctx* ctx, const char* edge_path) {
  gwcrp_graph* handle = nullptr;
  guarded(ctx, [&] {
    if (edge_path == nullptr) throw gwcrp::UsageError("edge_path is NULL");
    handle = new gwcrp_graph{gwcrp::io::read_adjacency(edge_path)};
  });
  return handle;
}

void gwcrp_graph_free(gwcrp_graph* graph) { delete graph; }

int gwcrp_graph_region_count(const gwcrp_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.size();
}

gwcrp_result* gwcrp_fit(gwcrp_ctx* ctx, const gwcrp_dataset* dataset,
                        const gwcrp_graph* graph, const char* config_json) {
  gwcrp_result* handle = nullptr;
  guarded(ctx, [&] {
    if (dataset == nullptr || graph == nullptr) {
      throw gwcrp::UsageError("dataset and graph handles are required");
    }
    json config;
    if (config_json != nullptr && config_json[0] != '\0') {
      try {
        config = json::parse(config_json);
      } catch (const json::parse_error& err) {
        throw gwcrp::UsageError(std::string("config JSON: ") + err.what());
      }
    } else {
      config = json::object();
    }

    gwcrp::runner::McmcOptions options;
    options.alpha = config.value("alpha", options.alpha);
    options.prior_variance = config.value("sigma0", options.prior_variance);
    options.iterations = config.value("iters", options.iterations);
    options.burn_in = config.value("burnin", options.burn_in);
    options.seed = config.value("seed", options.seed);
    const std::string kernel = config.value("kernel", std::string("exp"));
    if (kernel == "sqexp") {
      options.kernel = gwcrp::Kernel::kSquaredExponential;
    } else if (kernel != "exp") {
      throw gwcrp::UsageError("kernel must be 'exp' or 'sqexp'");
    }

    gwcrp::HazardPartition partition;
    if (config.contains("cutpoints")) {
      partition = gwcrp::HazardPartition(
          config.at("cutpoints").get<std::vector<double>>());
    } else if (config.contains("auto_cutpoints")) {
      partition = gwcrp::runner::auto_cutpoints(
          dataset->dataset, config.at("auto_cutpoints").get<int>());
    } else {
      throw gwcrp::UsageError(
          "config needs 'cutpoints' or 'auto_cutpoints'");
    }

    auto fit = gwcrp::runner::fit_single(dataset->dataset, graph->graph,
                                         partition, config.value("h", 0.0),
                                         options);

    auto result = std::make_unique<gwcrp_result>();
    result->covariate_dim = dataset->dataset.covariate_dim;
    result->summary_json = gwcrp::io::summary_json_string(
        fit.posterior, fit.region_ids, result->covariate_dim, fit.pieces,
        fit.h);
    result->fit = std::move(fit);
    handle = result.release();
  });
  return handle;
}

void gwcrp_result_free(gwcrp_result* result) { delete result; }

int gwcrp_result_k(const gwcrp_result* result) {
  return result == nullptr ? 0 : result->fit.posterior.k_hat;
}

double gwcrp_result_lpml(const gwcrp_result* result) {
  return result == nullptr ? 0.0 : result->fit.posterior.lpml;
}

int gwcrp_result_labels(const gwcrp_result* result, int* out, int cap) {
  if (result == nullptr) return 0;
  const auto& labels = result->fit.posterior.dahl_labels;
  const int n = static_cast<int>(labels.size());
  if (out != nullptr) {
    for (int i = 0; i < n && i < cap; ++i) out[i] = labels[i];
  }
  return n;
}

const char* gwcrp_result_summary_json(const gwcrp_result* result) {
  return result == nullptr ? "" : result->summary_json.c_str();
}

int gwcrp_run(gwcrp_ctx* ctx, const char* command, const char* config_json) {
  return guarded(ctx, [&] {
    if (command == nullptr) throw gwcrp::UsageError("command is NULL");
    json config;
    try {
      config = json::parse(config_json == nullptr ? "{}" : config_json);
    } catch (const json::parse_error& err) {
      throw gwcrp::UsageError(std::string("config JSON: ") + err.what());
    }
    gwcrp::runner::run_command(command, config);
  });
}

}  // extern "C"
