#include "gwcrp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwcrp/errors.hpp"

namespace gwcrp {

DahlResult dahl_partition(const std::vector<std::vector<int>>& label_draws) {
  if (label_draws.empty()) {
    throw UsageError("dahl_partition requires at least one draw");
  }
  const int B = static_cast<int>(label_draws.size());
  const int n = static_cast<int>(label_draws.front().size());

  // co-clustering counts; kept as integers so tie-breaking is exact
  std::vector<std::vector<long long>> count(n, std::vector<long long>(n, 0));
  for (const auto& z : label_draws) {
    if (static_cast<int>(z.size()) != n) {
      throw UsageError("label draws have inconsistent length");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (z[i] == z[j]) count[i][j] += 1;
      }
    }
  }

  // For 0/1 membership entries, B * sum (B_l - mean)^2 =
  // sum_{co-clustered} (B - 2 count) + constant, an integer score.
  int best = 0;
  long long best_score = std::numeric_limits<long long>::max();
  for (int l = 0; l < B; ++l) {
    const auto& z = label_draws[l];
    long long score = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (z[i] == z[j]) score += B - 2 * count[i][j];
      }
    }
    if (score < best_score) {
      best_score = score;
      best = l;
    }
  }
  return {best, label_draws[best]};
}

CpoResult cpo_lpml(const Mat& per_region_loglik) {
  const int B = static_cast<int>(per_region_loglik.rows());
  const int n = static_cast<int>(per_region_loglik.cols());
  if (B == 0 || n == 0) {
    throw UsageError("cpo_lpml requires a nonempty log-likelihood matrix");
  }
  if (!per_region_loglik.allFinite()) {
    throw NumericError("non-finite per-region log-likelihood entries");
  }

  CpoResult out;
  out.log_cpo.resize(n);
  for (int i = 0; i < n; ++i) {
    // log CPO_i = log B - logsumexp_b(-loglik_bi)
    const Vec neg = -per_region_loglik.col(i);
    const double m = neg.maxCoeff();
    double acc = 0.0;
    for (int b = 0; b < B; ++b) acc += std::exp(neg[b] - m);
    out.log_cpo[i] = std::log(static_cast<double>(B)) - (m + std::log(acc));
  }
  out.lpml = out.log_cpo.sum();
  return out;
}

int select_best(const std::vector<GridPoint>& grid) {
  if (grid.empty()) {
    throw UsageError("empty selection grid");
  }
  int best = -1;
  for (int g = 0; g < static_cast<int>(grid.size()); ++g) {
    if (grid[g].failed) continue;
    if (best < 0 || grid[g].lpml > grid[best].lpml ||
        (grid[g].lpml == grid[best].lpml &&
         (grid[g].h < grid[best].h ||
          (grid[g].h == grid[best].h && grid[g].pieces < grid[best].pieces)))) {
      best = g;
    }
  }
  if (best < 0) {
    throw DataError("every grid cell failed; nothing to select");
  }
  return best;
}

std::pair<double, double> hpd_interval(const std::vector<double>& samples,
                                       double level) {
  if (level <= 0.0 || level >= 1.0) {
    throw UsageError("HPD level must be in (0, 1)");
  }
  if (samples.size() < 20) {
    throw UsageError("HPD interval requires at least 20 samples");
  }
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const int B = static_cast<int>(sorted.size());
  const int m = static_cast<int>(std::ceil(level * B));

  int best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (int lo = 0; lo + m <= B; ++lo) {
    const double width = sorted[lo + m - 1] - sorted[lo];
    if (width < best_width) {
      best_width = width;
      best = lo;
    }
  }
  return {sorted[best], sorted[best + m - 1]};
}

PosteriorSummary summarize(const ChainTrace& trace, double level) {
  const int B = static_cast<int>(trace.label_draws.size());
  if (B == 0) {
    throw UsageError("cannot summarize an empty trace");
  }
  const int n = static_cast<int>(trace.label_draws.front().size());
  const int d = static_cast<int>(trace.param_draws.front().front().size());

  PosteriorSummary out;
  DahlResult dahl = dahl_partition(trace.label_draws);
  out.dahl_labels = dahl.labels;
  out.dahl_draw = dahl.draw_index;
  out.k_hat = *std::max_element(dahl.labels.begin(), dahl.labels.end());

  for (int i = 0; i < n; ++i) {
    out.param_estimates.push_back(
        trace.param_draws[dahl.draw_index][dahl.labels[i] - 1]);
  }

  // Each region's parameter trajectory across draws: theta of its cluster.
  std::vector<Vec> posterior_mean(n, Vec::Zero(d));
  out.hpd.resize(n);
  std::vector<double> coord(B);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < d; ++r) {
      for (int b = 0; b < B; ++b) {
        coord[b] =
            trace.param_draws[b][trace.label_draws[b][i] - 1][r];
        posterior_mean[i][r] += coord[b];
      }
      posterior_mean[i][r] /= B;
      out.hpd[i].push_back(hpd_interval(coord, level));
    }
  }

  // Representative region per Dahl cluster: posterior mean closest to the
  // cluster's average posterior mean.
  out.representative_region.assign(out.k_hat, -1);
  for (int c = 1; c <= out.k_hat; ++c) {
    Vec cluster_mean = Vec::Zero(d);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (dahl.labels[i] == c) {
        cluster_mean += posterior_mean[i];
        count += 1;
      }
    }
    cluster_mean /= count;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (dahl.labels[i] != c) continue;
      const double dist = (posterior_mean[i] - cluster_mean).norm();
      if (dist < best) {
        best = dist;
        out.representative_region[c - 1] = i;
      }
    }
  }

  CpoResult cpo = cpo_lpml(trace.per_region_loglik);
  out.log_cpo = cpo.log_cpo;
  out.lpml = cpo.lpml;
  return out;
}

}  // namespace gwcrp
