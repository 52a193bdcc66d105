#ifndef GWCRP_IO_HPP
#define GWCRP_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gwcrp/posterior.hpp"
#include "gwcrp/sampler.hpp"
#include "gwcrp/simulation.hpp"
#include "gwcrp/survival.hpp"

namespace gwcrp::io {

struct Dataset {
  std::vector<std::string> region_ids;  // order of first appearance
  std::vector<std::vector<SurvivalRecord>> records_by_region;
  int covariate_dim = 0;

  int total_records() const;
};

// Survival CSV: header "region,time,event,x1,...,xp", event in {0,1}.
Dataset read_survival_csv(const std::filesystem::path& path);
void write_survival_csv(const std::filesystem::path& path,
                        const Dataset& dataset);

// Adjacency file: one undirected edge "regionA regionB" per line; isolated
// regions listed on a line by themselves.
SpatialGraph read_adjacency(const std::filesystem::path& path);
void write_adjacency(const std::filesystem::path& path,
                     const SpatialGraph& graph);

SimulationDesign read_design_json(const std::filesystem::path& path);

// Newline-delimited JSON trace records {iter, labels, k, loglik_per_region}.
void write_trace_ndjson(const std::filesystem::path& path,
                        const ChainTrace& trace, int burn_in);
ChainTrace read_trace_ndjson(const std::filesystem::path& path);

std::string summary_json_string(const PosteriorSummary& summary,
                                const std::vector<std::string>& region_ids,
                                int covariate_dim, int pieces, double h);

void write_summary_json(const std::filesystem::path& path,
                        const PosteriorSummary& summary,
                        const std::vector<std::string>& region_ids,
                        int covariate_dim, int pieces, double h);

void write_lpml_grid_csv(const std::filesystem::path& path,
                         const std::vector<GridPoint>& grid);

void write_cluster_map_csv(const std::filesystem::path& path,
                           const std::vector<std::string>& region_ids,
                           const std::vector<int>& labels);

// Whole-file write via temp file + rename in the destination directory.
void atomic_write(const std::filesystem::path& path,
                  const std::string& content);

}  // namespace gwcrp::io

#endif
