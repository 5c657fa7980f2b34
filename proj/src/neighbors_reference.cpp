#include <algorithm>
#include <cmath>

#include "mrsl/neighbors.hpp"

namespace mrsl::reference {

std::vector<double> knn_radius(const PointCloud& points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 1 || k > n) throw InvalidArgument("knn_radius: need 1 <= k <= n");
  std::vector<double> out(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = squared_distance(points.row(i), points.row(j));
    std::sort(row.begin(), row.end());
    out[i] = std::sqrt(row[k - 1]);
  }
  return out;
}

Adjacency radius_neighbors(const PointCloud& points, double R) {
  if (!(R >= 0.0)) throw InvalidArgument("radius_neighbors: R must be >= 0");
  const std::size_t n = points.size();
  Adjacency adj(n);
  const double r2 = R * R;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (squared_distance(points.row(i), points.row(j)) <= r2) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

}  // namespace mrsl::reference
