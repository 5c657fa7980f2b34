#include "mrsl/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrsl {

namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw InvalidArgument("knn_radius: need 1 <= k <= n");
}

}  // namespace

std::vector<double> knn_radius_brute(const PointCloud& points, std::size_t k) {
  const std::size_t n = points.size();
  check_k(k, n);
  std::vector<double> out(n);
#pragma omp parallel
  {
    std::vector<double> row(n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) row[j] = squared_distance(points.row(i), points.row(j));
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
      out[i] = std::sqrt(row[k - 1]);
    }
  }
  return out;
}

Adjacency radius_neighbors_brute(const PointCloud& points, double R) {
  if (!(R >= 0.0)) throw InvalidArgument("radius_neighbors: R must be >= 0");
  const std::size_t n = points.size();
  Adjacency adj(n);
  const double r2 = R * R;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && squared_distance(points.row(i), points.row(j)) <= r2) adj[i].push_back(j);
    }
  }
  return adj;
}

// ------------------------------------------------------------ DistanceIndex

std::size_t DistanceIndex::CellHash::operator()(const CellKey& k) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto c : k.c) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

DistanceIndex::DistanceIndex(const PointCloud& points, IndexMode mode, double cell_size)
    : points_(&points), mode_(mode) {
  const std::size_t n = points.size();
  if (mode_ == IndexMode::Auto) {
    mode_ = n < kGridThreshold ? IndexMode::BruteForce : IndexMode::Grid;
  }
  if (mode_ != IndexMode::Grid || n == 0) return;

  grid_dims_ = std::min<std::size_t>(points.dim, 3);
  project();
  double lo[3], hi[3];
  for (std::size_t a = 0; a < grid_dims_; ++a) {
    lo[a] = std::numeric_limits<double>::infinity();
    hi[a] = -lo[a];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < grid_dims_; ++a) {
      const double v = proj_[i * grid_dims_ + a];
      lo[a] = std::min(lo[a], v);
      hi[a] = std::max(hi[a], v);
    }
  }
  if (cell_size > 0.0) {
    cell_ = cell_size;
  } else {
    // Aim for about two points per occupied-box cell.
    double widest = 0.0;
    for (std::size_t a = 0; a < grid_dims_; ++a) widest = std::max(widest, hi[a] - lo[a]);
    if (widest <= 0.0) {
      cell_ = 1.0;
    } else {
      double log_vol = 0.0;
      for (std::size_t a = 0; a < grid_dims_; ++a) {
        log_vol += std::log(std::max(hi[a] - lo[a], 1e-9 * widest));
      }
      const double cells = std::max(1.0, 0.5 * static_cast<double>(n));
      cell_ = std::exp((log_vol - std::log(cells)) / static_cast<double>(grid_dims_));
    }
  }
  std::int64_t cmin[3] = {0, 0, 0}, cmax[3] = {0, 0, 0};
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey key = cell_of(i);
    cells_[key].push_back(i);
    for (std::size_t a = 0; a < grid_dims_; ++a) {
      cmin[a] = first ? key.c[a] : std::min(cmin[a], key.c[a]);
      cmax[a] = first ? key.c[a] : std::max(cmax[a], key.c[a]);
    }
    first = false;
  }
  for (std::size_t a = 0; a < grid_dims_; ++a) span_[a] = cmax[a] - cmin[a];
}

void DistanceIndex::project() {
  const PointCloud& pts = *points_;
  const std::size_t n = pts.size(), D = pts.dim, m = grid_dims_;
  proj_.assign(n * m, 0.0);
  if (D <= 3) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < m; ++a) proj_[i * m + a] = pts.row(i)[a];
    }
    return;
  }
  std::vector<double> mean(D, 0.0), cov(D * D, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < D; ++c) mean[c] += pts.row(i)[c];
  }
  for (double& v : mean) v /= static_cast<double>(n);
  std::vector<double> y(D);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < D; ++c) y[c] = pts.row(i)[c] - mean[c];
    for (std::size_t r = 0; r < D; ++r) {
      for (std::size_t c = r; c < D; ++c) cov[r * D + c] += y[r] * y[c];
    }
  }
  for (std::size_t r = 0; r < D; ++r) {
    for (std::size_t c = 0; c < r; ++c) cov[r * D + c] = cov[c * D + r];
  }
  // Subspace iteration from a fixed start, then Gram-Schmidt (twice).
  std::vector<std::vector<double>> q(m, std::vector<double>(D));
  std::uint64_t state = 0x5eedULL;
  for (auto& v : q) {
    for (double& x : v) x = static_cast<double>(splitmix64(state++) >> 11) * 0x1.0p-53 - 0.5;
  }
  const auto orthonormalize = [&] {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t a = 0; a < m; ++a) {
        double norm = 0.0;
        for (std::size_t axis = 0; axis <= D; ++axis) {
          for (std::size_t b = 0; b < a; ++b) {
            double dot = 0.0;
            for (std::size_t c = 0; c < D; ++c) dot += q[a][c] * q[b][c];
            for (std::size_t c = 0; c < D; ++c) q[a][c] -= dot * q[b][c];
          }
          norm = 0.0;
          for (double x : q[a]) norm += x * x;
          norm = std::sqrt(norm);
          if (norm > 1e-150 || axis == D) break;
          std::fill(q[a].begin(), q[a].end(), 0.0);
          q[a][axis] = 1.0;
        }
        for (double& x : q[a]) x /= norm;
      }
    }
  };
  orthonormalize();
  for (int it = 0; it < 60; ++it) {
    for (auto& v : q) {
      std::vector<double> w(D, 0.0);
      for (std::size_t r = 0; r < D; ++r) {
        for (std::size_t c = 0; c < D; ++c) w[r] += cov[r * D + c] * v[c];
      }
      v = std::move(w);
    }
    orthonormalize();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = pts.row(i);
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.0;
      for (std::size_t c = 0; c < D; ++c) s += q[a][c] * p[c];
      proj_[i * m + a] = s;
    }
  }
}

DistanceIndex::CellKey DistanceIndex::cell_of(std::size_t i) const {
  CellKey key{{0, 0, 0}};
  for (std::size_t a = 0; a < grid_dims_; ++a) {
    key.c[a] = static_cast<std::int64_t>(std::floor(proj_[i * grid_dims_ + a] / cell_));
  }
  return key;
}

double DistanceIndex::grid_kth(std::size_t i, std::size_t k) const {
  const PointCloud& pts = *points_;
  const CellKey home = cell_of(i);
  // Max-heap of the k smallest squared distances seen so far.
  std::vector<double> best;
  best.reserve(k);
  std::int64_t max_ring = 0;
  for (std::size_t a = 0; a < grid_dims_; ++a) max_ring = std::max(max_ring, span_[a]);
  const std::int64_t lim1 = grid_dims_ > 1 ? 1 : 0;
  const std::int64_t lim2 = grid_dims_ > 2 ? 1 : 0;

  const auto offer = [&](const std::vector<std::size_t>& members) {
    for (std::size_t j : members) {
      const double d2 = squared_distance(pts.row(i), pts.row(j));
      if (best.size() < k) {
        best.push_back(d2);
        std::push_heap(best.begin(), best.end());
      } else if (d2 < best.front()) {
        std::pop_heap(best.begin(), best.end());
        best.back() = d2;
        std::push_heap(best.begin(), best.end());
      }
    }
  };

  for (std::int64_t ring = 0;; ++ring) {
    const std::int64_t r1 = ring * lim1, r2 = ring * lim2;
    const double side = static_cast<double>(2 * ring + 1);
    if (side * (lim1 ? side : 1.0) * (lim2 ? side : 1.0) > static_cast<double>(cells_.size())) {
      // The remaining shells hold more cells than are occupied: sweep what is left.
      for (const auto& [key, members] : cells_) {
        std::int64_t cheb = 0;
        for (std::size_t a = 0; a < grid_dims_; ++a) {
          cheb = std::max(cheb, std::abs(key.c[a] - home.c[a]));
        }
        if (cheb >= ring) offer(members);
      }
      break;
    }
    for (std::int64_t o0 = -ring; o0 <= ring; ++o0) {
      for (std::int64_t o1 = -r1; o1 <= r1; ++o1) {
        // Off the o0/o1 faces only the two o2 faces belong to the shell.
        const bool face = std::abs(o0) == ring || (lim1 != 0 && std::abs(o1) == ring);
        if (!face && r2 == 0) continue;
        const std::int64_t step = face ? 1 : 2 * r2;
        for (std::int64_t o2 = -r2; o2 <= r2; o2 += step) {
          const auto it = cells_.find(CellKey{{home.c[0] + o0, home.c[1] + o1, home.c[2] + o2}});
          if (it != cells_.end()) offer(it->second);
        }
      }
    }
    if (ring >= max_ring) break;
    // Unvisited points differ by at least ring * cell along some projected axis.
    const double reach = static_cast<double>(ring) * cell_;
    if (best.size() == k && best.front() < reach * reach * (1.0 - 1e-9)) break;
  }
  return std::sqrt(best.front());
}

std::vector<std::size_t> DistanceIndex::grid_ball(std::size_t i, double R) const {
  const PointCloud& pts = *points_;
  const CellKey home = cell_of(i);
  const double r2 = R * R;
  std::vector<std::size_t> out;
  const double reach = std::ceil(R * (1.0 + 1e-9) / cell_);
  std::int64_t m[3] = {0, 0, 0};
  double offsets = 1.0;
  for (std::size_t a = 0; a < grid_dims_; ++a) {
    m[a] = static_cast<std::int64_t>(std::min(reach, static_cast<double>(span_[a])));
    offsets *= static_cast<double>(2 * m[a] + 1);
  }
  const auto scan = [&](const std::vector<std::size_t>& members) {
    for (std::size_t j : members) {
      if (j != i && squared_distance(pts.row(i), pts.row(j)) <= r2) out.push_back(j);
    }
  };
  if (offsets > static_cast<double>(cells_.size())) {
    for (const auto& [key, members] : cells_) {
      bool near = true;
      for (std::size_t a = 0; a < grid_dims_ && near; ++a) {
        near = std::abs(key.c[a] - home.c[a]) <= m[a];
      }
      if (near) scan(members);
    }
  } else {
    for (std::int64_t o0 = -m[0]; o0 <= m[0]; ++o0) {
      for (std::int64_t o1 = -m[1]; o1 <= m[1]; ++o1) {
        for (std::int64_t o2 = -m[2]; o2 <= m[2]; ++o2) {
          const auto it = cells_.find(CellKey{{home.c[0] + o0, home.c[1] + o1, home.c[2] + o2}});
          if (it != cells_.end()) scan(it->second);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> DistanceIndex::knn_radius(std::size_t k) const {
  const std::size_t n = points_->size();
  check_k(k, n);
  if (mode_ == IndexMode::BruteForce) return knn_radius_brute(*points_, k);
  std::vector<double> out(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) out[i] = grid_kth(i, k);
  return out;
}

Adjacency DistanceIndex::radius_neighbors(double R) const {
  if (!(R >= 0.0)) throw InvalidArgument("radius_neighbors: R must be >= 0");
  if (mode_ == IndexMode::BruteForce) return radius_neighbors_brute(*points_, R);
  const std::size_t n = points_->size();
  Adjacency adj(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) adj[i] = grid_ball(i, R);
  return adj;
}

}  // namespace mrsl
