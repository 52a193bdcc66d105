// Command-line front end. All real work happens behind the C API; this file
// only assembles the effective config (defaults < config file < flags) and
// maps status codes to exit codes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwcrp/gwcrp_c.h"

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_file;
  std::string data, graph, design, out, kernel;
  std::vector<double> cutpoints, h_grid;
  std::vector<int> j_grid;
  double h = 0.0, alpha = 1.0, sigma0 = 100.0;
  int iters = 2000, burnin = 500, threads = 0, auto_cutpoints = 0;
  int replicates = 0;
  std::uint64_t seed = 1;
  bool full = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_file,
                  "JSON config file; flags override its values");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--threads", flags.threads,
                  "worker threads (0 = hardware)");
  cmd->add_option("--alpha", flags.alpha, "gwCRP concentration");
  cmd->add_option("--sigma0", flags.sigma0,
                  "prior variance v0, Sigma0 = v0*I");
  cmd->add_option("--iters", flags.iters, "MCMC iterations");
  cmd->add_option("--burnin", flags.burnin, "burn-in iterations");
  cmd->add_option("--kernel", flags.kernel, "weight kernel: exp or sqexp")
      ->check(CLI::IsMember({"exp", "sqexp"}));
}

// defaults < config file < explicitly passed flags
json effective_config(const CLI::App* cmd, const CommonFlags& flags) {
  json config = json::object();
  if (!flags.config_file.empty()) {
    std::ifstream in(flags.config_file);
    if (!in) {
      throw CLI::ValidationError("--config",
                                 "cannot open " + flags.config_file);
    }
    config = json::parse(in);
  }
  auto passed = [cmd](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  auto set = [&](const std::string& flag, const std::string& key,
                 const json& value) {
    if (passed(flag) || !config.contains(key)) config[key] = value;
  };
  if (passed("--data") || config.contains("data")) {
    set("--data", "data", flags.data);
  }
  if (passed("--graph") || config.contains("graph")) {
    set("--graph", "graph", flags.graph);
  }
  if (passed("--design") || config.contains("design")) {
    set("--design", "design", flags.design);
  }
  if (passed("--cutpoints")) config["cutpoints"] = flags.cutpoints;
  if (passed("--auto-cutpoints")) {
    config["auto_cutpoints"] = flags.auto_cutpoints;
  }
  if (passed("--h")) config["h"] = flags.h;
  if (passed("--h-grid")) config["h_grid"] = flags.h_grid;
  if (passed("--j-grid")) config["j_grid"] = flags.j_grid;
  if (passed("--replicates")) config["replicates"] = flags.replicates;
  if (passed("--full")) config["full"] = true;
  if (passed("--kernel")) config["kernel"] = flags.kernel;
  set("--out", "out", flags.out);
  set("--seed", "seed", flags.seed);
  set("--threads", "threads", flags.threads);
  set("--alpha", "alpha", flags.alpha);
  set("--sigma0", "sigma0", flags.sigma0);
  set("--iters", "iters", flags.iters);
  set("--burnin", "burnin", flags.burnin);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially clustered survival regression via a geographically "
               "weighted Chinese restaurant process"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gwcrp_version());

  CommonFlags flags;

  // subcommand help is long-only so the spatial decay flag --h stays free
  auto subcommand = [&app](const char* name, const char* desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->set_help_flag("--help", "print help and exit");
    return cmd;
  };

  CLI::App* fit = subcommand(
      "fit", "fit one (h, J) model and write the posterior summary");
  fit->add_option("--data", flags.data, "survival CSV");
  fit->add_option("--graph", flags.graph, "adjacency edge list");
  fit->add_option("--cutpoints", flags.cutpoints, "hazard cutpoints");
  fit->add_option("--auto-cutpoints", flags.auto_cutpoints,
                  "derive cutpoints for J pieces from event-time quantiles");
  fit->add_option("--h", flags.h, "spatial decay parameter");
  add_common(fit, flags);

  CLI::App* select = subcommand(
      "select", "grid-search (h, J) by LPML and report the best model");
  select->add_option("--data", flags.data, "survival CSV");
  select->add_option("--graph", flags.graph, "adjacency edge list");
  select->add_option("--cutpoints", flags.cutpoints, "hazard cutpoints");
  select->add_option("--h-grid", flags.h_grid, "h grid values");
  select->add_option("--j-grid", flags.j_grid,
                     "piece counts J; cutpoints derived per J");
  add_common(select, flags);

  CLI::App* simulate = subcommand(
      "simulate", "generate replicate datasets from a design file");
  simulate->add_option("--design", flags.design, "design JSON file");
  simulate->add_option("--replicates", flags.replicates, "replicate count");
  simulate->add_flag("--full", flags.full, "run 100 replicates");
  add_common(simulate, flags);

  CLI::App* evaluate = subcommand(
      "evaluate", "simulation study: generate, select h, score clustering");
  evaluate->add_option("--design", flags.design, "design JSON file");
  evaluate->add_option("--h-grid", flags.h_grid, "h grid values");
  evaluate->add_option("--replicates", flags.replicates, "replicate count");
  evaluate->add_flag("--full", flags.full, "run 100 replicates");
  add_common(evaluate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  json config;
  try {
    config = effective_config(cmd, flags);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }

  gwcrp_ctx* ctx = gwcrp_ctx_new();
  if (ctx == nullptr) {
    std::cerr << "error: out of memory\n";
    return 1;
  }
  const int status =
      gwcrp_run(ctx, cmd->get_name().c_str(), config.dump().c_str());
  if (status != GWCRP_OK) {
    std::cerr << "error: " << gwcrp_ctx_error(ctx) << '\n';
  }
  gwcrp_ctx_free(ctx);
  return status;
}
