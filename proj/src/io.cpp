#include "gwcrp/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gwcrp/errors.hpp"

namespace gwcrp::io {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("cannot parse number '" + s + "' in " + context);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int Dataset::total_records() const {
  int total = 0;
  for (const auto& group : records_by_region) {
    total += static_cast<int>(group.size());
  }
  return total;
}

Dataset read_survival_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open survival CSV: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty survival CSV: " + path.string());
  }
  auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "region" || header[1] != "time" ||
      header[2] != "event") {
    throw DataError("survival CSV header must start with region,time,event");
  }
  const int p = static_cast<int>(header.size()) - 3;

  Dataset out;
  out.covariate_dim = p;
  std::map<std::string, int> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    const std::string context =
        path.string() + ":" + std::to_string(line_no);
    if (static_cast<int>(fields.size()) != p + 3) {
      throw DataError("wrong field count in " + context);
    }
    SurvivalRecord rec;
    rec.time = parse_double(fields[1], context);
    if (rec.time < 0.0) {
      throw DataError("negative time in " + context);
    }
    if (fields[2] == "1") {
      rec.event = true;
    } else if (fields[2] == "0") {
      rec.event = false;
    } else {
      throw DataError("event must be 0 or 1 in " + context);
    }
    rec.covariates.resize(p);
    for (int r = 0; r < p; ++r) {
      rec.covariates[r] = parse_double(fields[3 + r], context);
    }
    auto [it, inserted] =
        index.try_emplace(fields[0], static_cast<int>(out.region_ids.size()));
    if (inserted) {
      out.region_ids.push_back(fields[0]);
      out.records_by_region.emplace_back();
    }
    rec.region = it->second;
    out.records_by_region[it->second].push_back(std::move(rec));
  }
  if (out.region_ids.empty()) {
    throw DataError("survival CSV has no data rows: " + path.string());
  }
  return out;
}

void write_survival_csv(const std::filesystem::path& path,
                        const Dataset& dataset) {
  std::ostringstream out;
  out << "region,time,event";
  for (int r = 1; r <= dataset.covariate_dim; ++r) out << ",x" << r;
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < dataset.region_ids.size(); ++i) {
    for (const auto& rec : dataset.records_by_region[i]) {
      out << dataset.region_ids[i] << ',' << rec.time << ','
          << (rec.event ? 1 : 0);
      for (int r = 0; r < rec.covariates.size(); ++r) {
        out << ',' << rec.covariates[r];
      }
      out << '\n';
    }
  }
  atomic_write(path, out.str());
}

SpatialGraph read_adjacency(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open adjacency file: " + path.string());
  }
  std::vector<std::string> ids;
  std::map<std::string, int> index;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = index.try_emplace(id, static_cast<int>(ids.size()));
    if (inserted) ids.push_back(id);
    return it->second;
  };

  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;  // blank line
    if (!(fields >> b)) {
      intern(a);  // isolated region
      continue;
    }
    if (fields >> extra) {
      throw DataError("adjacency file " + path.string() + ":" +
                      std::to_string(line_no) + ": expected one edge per line");
    }
    const int ia = intern(a);
    const int ib = intern(b);
    if (ia == ib) {
      throw DataError("adjacency file " + path.string() + ":" +
                      std::to_string(line_no) + ": self edge on " + a);
    }
    edges.emplace_back(ia, ib);
  }
  if (ids.empty()) {
    throw DataError("adjacency file is empty: " + path.string());
  }
  const int n = static_cast<int>(ids.size());
  std::vector<std::vector<bool>> adjacency(n, std::vector<bool>(n, false));
  for (auto [a, b] : edges) {
    adjacency[a][b] = true;
    adjacency[b][a] = true;
  }
  return SpatialGraph(std::move(ids), std::move(adjacency));
}

void write_adjacency(const std::filesystem::path& path,
                     const SpatialGraph& graph) {
  std::ostringstream out;
  std::vector<bool> mentioned(graph.size(), false);
  for (int i = 0; i < graph.size(); ++i) {
    for (int j = i + 1; j < graph.size(); ++j) {
      if (graph.adjacent(i, j)) {
        out << graph.region_ids()[i] << ' ' << graph.region_ids()[j] << '\n';
        mentioned[i] = mentioned[j] = true;
      }
    }
  }
  for (int i = 0; i < graph.size(); ++i) {
    if (!mentioned[i]) out << graph.region_ids()[i] << '\n';
  }
  atomic_write(path, out.str());
}

SimulationDesign read_design_json(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    throw DataError("design file " + path.string() + ": " + err.what());
  }
  try {
    SimulationDesign design;

    std::vector<std::string> ids;
    std::map<std::string, int> index;
    auto intern = [&](const std::string& id) {
      auto [it, inserted] =
          index.try_emplace(id, static_cast<int>(ids.size()));
      if (inserted) ids.push_back(id);
      return it->second;
    };
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) {
      if (e.is_array() && e.size() == 2) {
        edges.emplace_back(intern(e[0].get<std::string>()),
                           intern(e[1].get<std::string>()));
      } else if (e.is_string()) {
        intern(e.get<std::string>());  // isolated region
      } else {
        throw DataError("design edges must be [a, b] pairs or bare ids");
      }
    }
    const int n = static_cast<int>(ids.size());
    std::vector<std::vector<bool>> adjacency(n, std::vector<bool>(n, false));
    for (auto [a, b] : edges) {
      adjacency[a][b] = true;
      adjacency[b][a] = true;
    }
    design.graph =
        std::make_shared<SpatialGraph>(std::move(ids), std::move(adjacency));

    design.true_labels = doc.at("true_labels").get<std::vector<int>>();
    for (const auto& cp : doc.at("cluster_params")) {
      ClusterParams params;
      auto beta = cp.at("beta").get<std::vector<double>>();
      auto lambda = cp.at("lambda").get<std::vector<double>>();
      params.beta = Eigen::Map<Vec>(beta.data(), beta.size());
      params.lambda = Eigen::Map<Vec>(lambda.data(), lambda.size());
      design.cluster_params.push_back(std::move(params));
    }
    design.partition =
        HazardPartition(doc.at("cutpoints").get<std::vector<double>>());
    design.subjects_per_region =
        doc.value("subjects_per_region", design.subjects_per_region);
    design.censor_cap = doc.value("censor_cap", design.censor_cap);
    design.censor_rate = doc.value("censor_rate", design.censor_rate);
    if (!design.cluster_params.empty()) {
      design.covariate_dim =
          static_cast<int>(design.cluster_params.front().beta.size());
    }
    design.validate();
    return design;
  } catch (const json::exception& err) {
    throw DataError("design file " + path.string() + ": " + err.what());
  }
}

void write_trace_ndjson(const std::filesystem::path& path,
                        const ChainTrace& trace, int burn_in) {
  std::ostringstream out;
  for (std::size_t b = 0; b < trace.label_draws.size(); ++b) {
    json rec;
    rec["iter"] = burn_in + static_cast<int>(b);
    rec["labels"] = trace.label_draws[b];
    rec["k"] = static_cast<int>(trace.param_draws[b].size());
    std::vector<double> loglik(trace.per_region_loglik.cols());
    for (int i = 0; i < trace.per_region_loglik.cols(); ++i) {
      loglik[i] = trace.per_region_loglik(static_cast<int>(b), i);
    }
    rec["loglik_per_region"] = loglik;
    out << rec.dump() << '\n';
  }
  atomic_write(path, out.str());
}

ChainTrace read_trace_ndjson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open trace file: " + path.string());
  }
  ChainTrace trace;
  std::vector<std::vector<double>> loglik_rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    trace.label_draws.push_back(rec.at("labels").get<std::vector<int>>());
    loglik_rows.push_back(
        rec.at("loglik_per_region").get<std::vector<double>>());
  }
  if (trace.label_draws.empty()) {
    throw DataError("trace file has no records: " + path.string());
  }
  const int B = static_cast<int>(loglik_rows.size());
  const int n = static_cast<int>(loglik_rows.front().size());
  trace.per_region_loglik.resize(B, n);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < n; ++i) {
      trace.per_region_loglik(b, i) = loglik_rows[b][i];
    }
  }
  return trace;
}

std::string summary_json_string(const PosteriorSummary& summary,
                                const std::vector<std::string>& region_ids,
                                int covariate_dim, int pieces, double h) {
  json doc;
  doc["h"] = h;
  doc["pieces"] = pieces;
  doc["covariates"] = covariate_dim;
  doc["k_hat"] = summary.k_hat;
  doc["lpml"] = summary.lpml;
  doc["dahl_draw"] = summary.dahl_draw;
  json regions = json::array();
  for (std::size_t i = 0; i < region_ids.size(); ++i) {
    json region;
    region["id"] = region_ids[i];
    region["cluster"] = summary.dahl_labels[i];
    const Vec& est = summary.param_estimates[i];
    region["beta"] = std::vector<double>(est.data(), est.data() + covariate_dim);
    std::vector<double> log_lambda(est.data() + covariate_dim,
                                   est.data() + est.size());
    region["log_lambda"] = log_lambda;
    json hpd = json::array();
    for (const auto& [lo, hi] : summary.hpd[i]) {
      hpd.push_back({lo, hi});
    }
    region["hpd"] = hpd;
    region["log_cpo"] = summary.log_cpo[static_cast<int>(i)];
    regions.push_back(std::move(region));
  }
  doc["regions"] = std::move(regions);
  json reps = json::array();
  for (int r : summary.representative_region) {
    reps.push_back(region_ids[r]);
  }
  doc["representative_regions"] = std::move(reps);
  return doc.dump(2) + "\n";
}

void write_summary_json(const std::filesystem::path& path,
                        const PosteriorSummary& summary,
                        const std::vector<std::string>& region_ids,
                        int covariate_dim, int pieces, double h) {
  atomic_write(path, summary_json_string(summary, region_ids, covariate_dim,
                                         pieces, h));
}

void write_lpml_grid_csv(const std::filesystem::path& path,
                         const std::vector<GridPoint>& grid) {
  std::ostringstream out;
  out.precision(12);
  out << "h,J,lpml,status\n";
  for (const auto& cell : grid) {
    out << cell.h << ',' << cell.pieces << ',';
    if (cell.failed) {
      out << "nan,failed\n";
    } else {
      out << cell.lpml << ",ok\n";
    }
  }
  atomic_write(path, out.str());
}

void write_cluster_map_csv(const std::filesystem::path& path,
                           const std::vector<std::string>& region_ids,
                           const std::vector<int>& labels) {
  std::ostringstream out;
  out << "region,label\n";
  for (std::size_t i = 0; i < region_ids.size(); ++i) {
    out << region_ids[i] << ',' << labels[i] << '\n';
  }
  atomic_write(path, out.str());
}

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw UsageError("cannot write file: " + tmp.string());
    }
    out << content;
    if (!out.flush()) {
      throw UsageError("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gwcrp::io
