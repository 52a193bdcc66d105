#include "gwcrp/graph.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "gwcrp/errors.hpp"

namespace gwcrp {

SpatialGraph::SpatialGraph(std::vector<std::string> region_ids,
                           std::vector<std::vector<bool>> adjacency)
    : region_ids_(std::move(region_ids)), adjacency_(std::move(adjacency)) {
  const std::size_t n = region_ids_.size();
  if (adjacency_.size() != n) {
    throw UsageError("adjacency matrix size does not match region count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency_[i].size() != n) {
      throw UsageError("adjacency matrix is not square");
    }
    if (adjacency_[i][i]) {
      throw UsageError("adjacency diagonal must be false");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency_[i][j] != adjacency_[j][i]) {
        throw UsageError("adjacency matrix must be symmetric");
      }
    }
  }
  distances_ = graph_distances(adjacency_);
}

int SpatialGraph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < region_ids_.size(); ++i) {
    if (region_ids_[i] == id) return static_cast<int>(i);
  }
  throw UsageError("unknown region id: " + id);
}

Eigen::MatrixXd graph_distances(
    const std::vector<std::vector<bool>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, inf);

  std::deque<int> queue;
  for (int source = 0; source < n; ++source) {
    dist(source, source) = 0.0;
    queue.clear();
    queue.push_back(source);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v = 0; v < n; ++v) {
        if (adjacency[u][v] && std::isinf(dist(source, v))) {
          dist(source, v) = dist(source, u) + 1.0;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

WeightMatrix weight_matrix(const Eigen::MatrixXd& distances, double h,
                           Kernel kernel) {
  if (h < 0.0) {
    throw UsageError("decay parameter h must be nonnegative");
  }
  const int n = static_cast<int>(distances.rows());
  WeightMatrix out;
  out.decay = h;
  out.kernel = kernel;
  out.weights.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = distances(i, j);
      double w;
      if (d <= 1.0) {
        w = 1.0;
      } else if (std::isinf(d)) {
        w = 0.0;
      } else if (kernel == Kernel::kExponential) {
        w = std::exp(-d * h);
      } else {
        w = std::exp(-d * d * h * h);
      }
      out.weights(i, j) = w;
    }
  }
  return out;
}

}  // namespace gwcrp
