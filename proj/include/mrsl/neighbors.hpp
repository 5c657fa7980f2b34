#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mrsl/common.hpp"

namespace mrsl {

using Adjacency = std::vector<std::vector<std::size_t>>;

enum class IndexMode { Auto, BruteForce, Grid };

/// Point count at which Auto switches from brute force to the grid.
inline constexpr std::size_t kGridThreshold = 20000;

/// Exact neighbor queries over a point cloud. Balls are closed and a point
/// counts as its own first neighbor. The grid mode buckets points by their
/// projections onto up to three orthonormal directions (the coordinate axes
/// when D <= 3, otherwise the leading principal axes) and filters candidates
/// with the same squared_distance as brute force, so both modes agree bit
/// for bit.
class DistanceIndex {
 public:
  explicit DistanceIndex(const PointCloud& points, IndexMode mode = IndexMode::Auto,
                         double cell_size = 0.0);

  IndexMode mode() const noexcept { return mode_; }
  double cell_size() const noexcept { return cell_; }
  const PointCloud& points() const noexcept { return *points_; }

  /// r_k(X_i) for every i.
  std::vector<double> knn_radius(std::size_t k) const;
  /// Sorted neighbor lists (self excluded) of pairs with distance <= R.
  Adjacency radius_neighbors(double R) const;

 private:
  struct CellKey {
    std::int64_t c[3];
    bool operator==(const CellKey& o) const noexcept {
      return c[0] == o.c[0] && c[1] == o.c[1] && c[2] == o.c[2];
    }
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept;
  };

  void project();
  CellKey cell_of(std::size_t i) const;
  double grid_kth(std::size_t i, std::size_t k) const;
  std::vector<std::size_t> grid_ball(std::size_t i, double R) const;

  const PointCloud* points_;
  IndexMode mode_;
  double cell_ = 0.0;
  std::size_t grid_dims_ = 0;
  std::vector<double> proj_;  // n x grid_dims_ projected coordinates
  std::int64_t span_[3] = {0, 0, 0};  // occupied cell range per axis
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

/// Brute-force kernels parallelized with OpenMP.
std::vector<double> knn_radius_brute(const PointCloud& points, std::size_t k);
Adjacency radius_neighbors_brute(const PointCloud& points, double R);

/// Serial textbook implementations kept as test oracles.
namespace reference {
std::vector<double> knn_radius(const PointCloud& points, std::size_t k);
Adjacency radius_neighbors(const PointCloud& points, double R);
}  // namespace reference

}  // namespace mrsl
