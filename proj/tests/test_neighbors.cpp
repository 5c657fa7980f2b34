#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mrsl/geometry.hpp"
#include "mrsl/neighbors.hpp"

using namespace mrsl;

namespace {

PointCloud line(std::vector<double> xs) { return PointCloud(1, std::move(xs)); }

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t D, bool lattice) {
  PointCloud p(D);
  std::vector<double> x(D);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) {
      // Lattice coordinates create many exact distance ties.
      v = lattice ? static_cast<double>(rng() % 5) * 0.25 : 2.0 * uniform01(rng) - 1.0;
    }
    p.push_back(x);
  }
  return p;
}

// k-th order statistic of row i of the distance matrix (self included).
std::vector<double> order_statistic_oracle(const PointCloud& p, std::size_t k) {
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < p.size(); ++j) row.push_back(squared_distance(p.row(i), p.row(j)));
    std::sort(row.begin(), row.end());
    out[i] = std::sqrt(row[k - 1]);
  }
  return out;
}

}  // namespace

TEST(KnnRadius, Examples) {
  const PointCloud p = line({0.0, 1.0, 3.0});
  EXPECT_EQ(knn_radius_brute(p, 2), (std::vector<double>{1.0, 1.0, 2.0}));
  EXPECT_EQ(knn_radius_brute(p, 1), (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(knn_radius_brute(p, 3), (std::vector<double>{3.0, 2.0, 3.0}));
  EXPECT_THROW(knn_radius_brute(p, 4), InvalidArgument);
  EXPECT_THROW(knn_radius_brute(p, 0), InvalidArgument);
}

TEST(RadiusNeighbors, Examples) {
  const PointCloud p = line({0.0, 0.1, 5.0, 5.1});
  const Adjacency adj = radius_neighbors_brute(p, 1.0);
  EXPECT_EQ(adj, (Adjacency{{1}, {0}, {3}, {2}}));
  const PointCloud dup = line({0.0, 0.0, 1.0});
  EXPECT_EQ(radius_neighbors_brute(dup, 0.0), (Adjacency{{1}, {0}, {}}));
  const Adjacency all = radius_neighbors_brute(p, 10.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(all[i].size(), 3u);
  // Closed balls: a pair at distance exactly R is an edge.
  EXPECT_EQ(radius_neighbors_brute(line({0.0, 0.5}), 0.5), (Adjacency{{1}, {0}}));
}

TEST(KnnRadius, OrderStatisticOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng() % 80, D = 1 + rng() % 6;
    const PointCloud p = random_cloud(rng, n, D, t % 3 == 0);
    const std::size_t k = 1 + rng() % n;
    EXPECT_EQ(reference::knn_radius(p, k), order_statistic_oracle(p, k));
    EXPECT_EQ(knn_radius_brute(p, k), order_statistic_oracle(p, k));
  }
}

TEST(DistanceIndex, GridEqualsBruteForce) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 500, D = 1 + rng() % 10;
    const PointCloud p = random_cloud(rng, n, D, t % 4 == 0);
    const DistanceIndex brute(p, IndexMode::BruteForce);
    const double cell = t % 2 == 0 ? 0.0 : 0.05 + uniform01(rng);
    const DistanceIndex grid(p, IndexMode::Grid, cell);
    const std::size_t k = 1 + rng() % n;
    ASSERT_EQ(grid.knn_radius(k), brute.knn_radius(k)) << t;
    const double R = t % 5 == 0 ? 0.25 : 1.5 * uniform01(rng);
    ASSERT_EQ(grid.radius_neighbors(R), brute.radius_neighbors(R)) << t;
    ASSERT_EQ(reference::radius_neighbors(p, R), brute.radius_neighbors(R)) << t;
  }
}

TEST(DistanceIndex, GridOnEmbeddedSphereWithClutter) {
  // Sphere in a random 4-flat of R^20 plus box clutter: grid axes come from the data.
  const SphereSpec s = SphereSpec::random_frame(3, 1.0, 20, 11);
  std::mt19937_64 rng(13);
  PointCloud p(20);
  for (int i = 0; i < 1500; ++i) p.push_back(s.embed(random_unit_vector(rng, 4)));
  std::vector<double> x(20);
  for (int i = 0; i < 300; ++i) {
    for (double& v : x) v = 4.0 * uniform01(rng) - 2.0;
    p.push_back(x);
  }
  const DistanceIndex brute(p, IndexMode::BruteForce);
  const DistanceIndex grid(p, IndexMode::Grid);
  for (std::size_t k : {1u, 2u, 40u, 400u, 1800u}) {
    ASSERT_EQ(grid.knn_radius(k), brute.knn_radius(k)) << k;
  }
  for (double R : {0.1, 0.4, 3.0}) ASSERT_EQ(grid.radius_neighbors(R), brute.radius_neighbors(R));
}

TEST(DistanceIndex, Monotonicity) {
  std::mt19937_64 rng(9);
  const PointCloud p = random_cloud(rng, 300, 3, false);
  const DistanceIndex idx(p, IndexMode::Grid);
  std::vector<double> prev(p.size(), 0.0);
  for (std::size_t k = 1; k <= 40; ++k) {
    const auto r = idx.knn_radius(k);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_GE(r[i], prev[i]);
    prev = r;
  }
  const Adjacency a = idx.radius_neighbors(0.2), b = idx.radius_neighbors(0.4);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_TRUE(std::includes(b[i].begin(), b[i].end(), a[i].begin(), a[i].end()));
  }
}

TEST(DistanceIndex, SymmetricSortedNoSelf) {
  std::mt19937_64 rng(10);
  const PointCloud p = random_cloud(rng, 400, 4, true);
  const Adjacency adj = DistanceIndex(p, IndexMode::Grid).radius_neighbors(0.3);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    EXPECT_TRUE(std::is_sorted(adj[i].begin(), adj[i].end()));
    for (std::size_t j : adj[i]) {
      EXPECT_NE(i, j);
      EXPECT_TRUE(std::binary_search(adj[j].begin(), adj[j].end(), i));
    }
  }
}
