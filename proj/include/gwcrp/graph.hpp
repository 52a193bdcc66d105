#ifndef GWCRP_GRAPH_HPP
#define GWCRP_GRAPH_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gwcrp {

// Region adjacency graph with all-pairs graph distances (edge counts of
// shortest paths; +inf between disconnected components).
class SpatialGraph {
 public:
  SpatialGraph(std::vector<std::string> region_ids,
               std::vector<std::vector<bool>> adjacency);

  int size() const { return static_cast<int>(region_ids_.size()); }
  const std::vector<std::string>& region_ids() const { return region_ids_; }
  bool adjacent(int i, int j) const { return adjacency_[i][j]; }
  const Eigen::MatrixXd& distances() const { return distances_; }

  // Index of a region id; throws UsageError when unknown.
  int index_of(const std::string& id) const;

 private:
  std::vector<std::string> region_ids_;
  std::vector<std::vector<bool>> adjacency_;
  Eigen::MatrixXd distances_;
};

// BFS from every vertex. Adjacency must be symmetric with a false diagonal.
Eigen::MatrixXd graph_distances(const std::vector<std::vector<bool>>& adjacency);

enum class Kernel { kExponential, kSquaredExponential };

struct WeightMatrix {
  Eigen::MatrixXd weights;  // entries in [0, 1], 1 on and next to the diagonal
  double decay = 0.0;
  Kernel kernel = Kernel::kExponential;
};

// Geographic weights: w = 1 for d <= 1; exp(-d h) (or exp(-d^2 h^2) for the
// squared-exponential sensitivity kernel) for finite d > 1; 0 for d = +inf.
WeightMatrix weight_matrix(const Eigen::MatrixXd& distances, double h,
                           Kernel kernel = Kernel::kExponential);

}  // namespace gwcrp

#endif
