#include "mrsl/rsl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace mrsl {

namespace {

struct Edge {
  double w;
  std::uint32_t i, j;  // i < j
};

bool edge_less(const Edge& x, const Edge& y) {
  return std::tie(x.w, x.i, x.j) < std::tie(y.w, y.i, y.j);
}

// Union-find whose root is always the minimum member.
class MinRootUnionFind {
 public:
  explicit MinRootUnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  explicit MinRootUnionFind(std::vector<std::uint32_t> parent) : parent_(std::move(parent)) {}

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  /// Joins two roots; returns the surviving (smaller) root.
  std::uint32_t link(std::uint32_t a, std::uint32_t b) {
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }
  std::vector<std::uint32_t> roots() {
    std::vector<std::uint32_t> out(parent_.size());
    for (std::size_t i = 0; i < parent_.size(); ++i) out[i] = find(static_cast<std::uint32_t>(i));
    return out;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

std::vector<Merge> merges_from_edges(std::size_t n, std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end(), edge_less);
  MinRootUnionFind uf(n);
  std::vector<Merge> merges;
  for (const Edge& e : edges) {
    const std::uint32_t ra = uf.find(e.i), rb = uf.find(e.j);
    if (ra == rb) continue;
    merges.push_back({e.w, std::min(ra, rb), std::max(ra, rb)});
    uf.link(ra, rb);
    if (merges.size() + 1 == n) break;
  }
  return merges;
}

std::vector<Edge> reference_edges(const PointCloud& points, const std::vector<double>& act,
                                  const RSLConfig& cfg) {
  std::vector<Edge> edges;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w =
          cfg.rule.edge_radius(act[i], act[j], squared_distance(points.row(i), points.row(j)));
      if (std::isfinite(w) && w <= cfg.horizon) {
        edges.push_back({w, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
  }
  return edges;
}

std::vector<Edge> sparse_edges(const PointCloud& points, const std::vector<double>& act,
                               const RSLConfig& cfg) {
  double reach = cfg.rule.reach(cfg.horizon);
  if (cfg.rule.kind == ConnectionRule::Kind::Proportional) reach *= 1.0 + 1e-12;
  const DistanceIndex index(points, cfg.index_mode);
  const Adjacency adj = index.radius_neighbors(reach);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    for (std::size_t j : adj[i]) {
      if (j <= i) continue;
      const double w =
          cfg.rule.edge_radius(act[i], act[j], squared_distance(points.row(i), points.row(j)));
      if (std::isfinite(w) && w <= cfg.horizon) {
        edges.push_back({w, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
  }
  return edges;
}

// Minimum spanning forest of the complete graph weighted by edge_radius.
std::vector<Edge> prim_forest(const PointCloud& points, const std::vector<double>& act,
                              const RSLConfig& cfg) {
  const std::size_t n = points.size();
  std::vector<double> key(n, kInfinity);
  std::vector<std::uint32_t> from(n, 0);
  std::vector<char> done(n, 0);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(act[i]) && act[i] <= cfg.horizon) {
      ++remaining;
    } else {
      done[i] = 1;
    }
  }
  std::vector<Edge> edges;
  edges.reserve(remaining);
  std::size_t u = 0;
  while (remaining > 0) {
    double best = kInfinity;
    std::size_t arg = n;
#pragma omp parallel
    {
      double local_best = kInfinity;
      std::size_t local_arg = n;
#pragma omp for schedule(static) nowait
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v]) continue;
        if (key[v] < local_best || (key[v] == local_best && v < local_arg)) {
          local_best = key[v];
          local_arg = v;
        }
      }
#pragma omp critical
      {
        if (local_best < best || (local_best == best && local_arg < arg)) {
          best = local_best;
          arg = local_arg;
        }
      }
    }
    u = arg;
    if (std::isfinite(key[u])) {
      const auto a = std::min<std::uint32_t>(from[u], static_cast<std::uint32_t>(u));
      const auto b = std::max<std::uint32_t>(from[u], static_cast<std::uint32_t>(u));
      edges.push_back({key[u], a, b});
    }
    done[u] = 1;
    --remaining;
    const auto pu = points.row(u);
    const double au = act[u];
#pragma omp parallel for schedule(static)
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      const double w = cfg.rule.edge_radius(au, act[v], squared_distance(pu, points.row(v)));
      if (w <= cfg.horizon && w < key[v]) {
        key[v] = w;
        from[v] = static_cast<std::uint32_t>(u);
      }
    }
  }
  return edges;
}

bool prefer_sparse(const PointCloud& points, const RSLConfig& cfg) {
  const double reach = cfg.rule.reach(cfg.horizon);
  if (!std::isfinite(reach)) return false;
  const std::size_t n = points.size();
  const std::size_t probes = std::min<std::size_t>(n, 256);
  const std::size_t step = std::max<std::size_t>(1, n / probes);
  const double r2 = reach * reach;
  double hits = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n && used < probes; i += step, ++used) {
    for (std::size_t j = 0; j < n; ++j) {
      if (squared_distance(points.row(i), points.row(j)) <= r2) hits += 1.0;
    }
  }
  const double est_edges = 0.5 * static_cast<double>(n) * hits / static_cast<double>(used);
  return est_edges <= 5e6;
}

}  // namespace

// ------------------------------------------------------------ ConnectionRule

double ConnectionRule::edge_radius(double ai, double aj, double dist_sq) const noexcept {
  const double act = std::max(ai, aj);
  if (kind == Kind::FixedR) return dist_sq <= value * value ? act : kInfinity;
  return std::max(act, std::sqrt(dist_sq) / value);
}

double ConnectionRule::reach(double horizon) const noexcept {
  return kind == Kind::FixedR ? value : value * horizon;
}

std::string ConnectionRule::describe() const {
  return (kind == Kind::FixedR ? "fixed R=" : "proportional c=") + format_double(value);
}

void RSLConfig::validate() const {
  if (k < 1) throw InvalidArgument("rsl: k must be >= 1");
  if (!(rule.value > 0.0)) throw InvalidArgument("rsl: R and c must be > 0");
  if (!(horizon >= 0.0)) throw InvalidArgument("rsl: horizon must be >= 0");
}

// ---------------------------------------------------------------- Dendrogram

Dendrogram::Dendrogram(std::vector<double> activation, std::vector<Merge> merges)
    : activation_(std::move(activation)), merges_(std::move(merges)) {
  const std::size_t n = activation_.size();
  if (n >= kInactive) throw InvalidArgument("Dendrogram: too many points");
  for (double a : activation_) {
    if (std::isnan(a) || a < 0.0) throw InvalidArgument("Dendrogram: bad activation radius");
  }
  const std::size_t m = merges_.size();
  stride_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(double(m)))));
  MinRootUnionFind uf(n);
  checkpoints_.push_back(uf.roots());
  double last = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const Merge& e = merges_[t];
    if (e.a >= n || e.b >= n || e.a >= e.b) {
      throw InvalidArgument("Dendrogram: merge labels must satisfy a < b < n");
    }
    if (!(e.radius >= last) || !std::isfinite(e.radius)) {
      throw InvalidArgument("Dendrogram: merges must be sorted by finite radius");
    }
    const auto a = static_cast<std::uint32_t>(e.a), b = static_cast<std::uint32_t>(e.b);
    if (uf.find(a) != a || uf.find(b) != b) {
      throw InvalidArgument("Dendrogram: merge does not join two live components");
    }
    if (activation_[e.a] > e.radius || activation_[e.b] > e.radius) {
      throw InvalidArgument("Dendrogram: merge precedes an activation");
    }
    uf.link(a, b);
    last = e.radius;
    if ((t + 1) % stride_ == 0) checkpoints_.push_back(uf.roots());
  }
}

std::vector<std::uint32_t> Dendrogram::labels_at(double r) const {
  const std::size_t n = activation_.size();
  const auto upto = static_cast<std::size_t>(
      std::upper_bound(merges_.begin(), merges_.end(), r,
                       [](double v, const Merge& e) { return v < e.radius; }) -
      merges_.begin());
  const std::size_t c = std::min(upto / stride_, checkpoints_.size() - 1);
  MinRootUnionFind uf(checkpoints_[c]);
  for (std::size_t t = c * stride_; t < upto; ++t) {
    uf.link(uf.find(static_cast<std::uint32_t>(merges_[t].a)),
            uf.find(static_cast<std::uint32_t>(merges_[t].b)));
  }
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = activation_[i] <= r ? uf.find(static_cast<std::uint32_t>(i)) : kInactive;
  }
  return labels;
}

Partition Dendrogram::components_at(double r) const { return partition_from_labels(labels_at(r)); }

std::vector<double> Dendrogram::event_radii() const {
  std::vector<double> out;
  for (double a : activation_) {
    if (std::isfinite(a)) out.push_back(a);
  }
  for (const Merge& e : merges_) out.push_back(e.radius);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Partition partition_from_labels(std::span<const std::uint32_t> labels) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> slot(n, n);
  Partition out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t l = labels[i];
    if (l == Dendrogram::kInactive) continue;
    if (slot[l] == n) {
      slot[l] = out.size();
      out.emplace_back();
    }
    out[slot[l]].push_back(i);
  }
  return out;
}

// --------------------------------------------------------------------- sweeps

Dendrogram sweep_with_activation(const PointCloud& points, std::vector<double> activation,
                                 const RSLConfig& config) {
  config.validate();
  const std::size_t n = points.size();
  if (n == 0) throw InvalidArgument("rsl: empty point cloud");
  if (activation.size() != n) throw InvalidArgument("rsl: activation size mismatch");
  if (n >= Dendrogram::kInactive) throw InvalidArgument("rsl: too many points");

  SweepBackend backend = config.backend;
  if (backend == SweepBackend::Auto) {
    backend = prefer_sparse(points, config) ? SweepBackend::SparseKruskal : SweepBackend::DensePrim;
  }
  if (backend == SweepBackend::SparseKruskal && !std::isfinite(config.rule.reach(config.horizon))) {
    backend = SweepBackend::DensePrim;
  }
  std::vector<Edge> edges;
  switch (backend) {
    case SweepBackend::ReferenceKruskal:
      edges = reference_edges(points, activation, config);
      break;
    case SweepBackend::SparseKruskal:
      edges = sparse_edges(points, activation, config);
      break;
    default:
      edges = prim_forest(points, activation, config);
      break;
  }
  auto merges = merges_from_edges(n, std::move(edges));
  return Dendrogram(std::move(activation), std::move(merges));
}

Dendrogram rsl_sweep(const PointCloud& points, const RSLConfig& config) {
  config.validate();
  if (config.k > points.size()) throw InvalidArgument("rsl: k exceeds the number of points");
  const DistanceIndex index(points, config.index_mode);
  return sweep_with_activation(points, index.knn_radius(config.k), config);
}

// ------------------------------------------------------------------ adaptive

double vball_radius(const SphereSpec& sphere, std::span<const double> x, double V) {
  if (!sphere.contains(x, 1e-6)) throw InvalidArgument("vball_radius: x is off the sphere");
  const int d = sphere.d();
  const double tau = sphere.tau();
  const double full = sphere.surface_volume();
  if (!(V >= 0.0)) throw InvalidArgument("vball_radius: V must be >= 0");
  if (V > full * (1.0 + 1e-12)) throw InvalidArgument("vball_radius: V exceeds the sphere volume");
  if (V == 0.0) return 0.0;
  if (V >= full) return 2.0 * tau;
  double lo = 0.0, hi = 2.0 * tau;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = cap_volume_exact(d, tau, mid);
    if (std::abs(f - V) <= 1e-10 * V) return mid;
    (f < V ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * tau) break;
  }
  return 0.5 * (lo + hi);
}

double adaptive_threshold(int d, double tau, double rk) {
  if (rk <= 0.0) return 0.0;
  if (rk > 2.0 * tau) return kInfinity;
  return std::pow(cap_volume_exact(d, tau, rk) / unit_ball_volume(d), 1.0 / d);
}

std::size_t nearest_piece(std::span<const SphereSpec> pieces, std::span<const double> x,
                          double rel_tol) {
  if (pieces.empty()) throw InvalidArgument("adaptive: no sphere pieces");
  std::size_t best = 0;
  double best_res = kInfinity;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const double res = pieces[p].surface_residual(x) / pieces[p].tau();
    if (res < best_res) {
      best_res = res;
      best = p;
    }
  }
  if (best_res > rel_tol) {
    throw InvalidArgument("adaptive: point is off the manifold (relative residual " +
                          format_double(best_res) + ")");
  }
  return best;
}

std::vector<double> adaptive_activations(const PointCloud& points, std::size_t k,
                                         std::span<const SphereSpec> pieces, IndexMode mode,
                                         double rel_tol) {
  if (k < 1 || k > points.size()) throw InvalidArgument("adaptive: need 1 <= k <= n");
  std::vector<std::size_t> owner(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    owner[i] = nearest_piece(pieces, points.row(i), rel_tol);
  }
  const DistanceIndex index(points, mode);
  std::vector<double> act = index.knn_radius(k);
  for (std::size_t i = 0; i < act.size(); ++i) {
    const SphereSpec& s = pieces[owner[i]];
    act[i] = adaptive_threshold(s.d(), s.tau(), act[i]);
  }
  return act;
}

Dendrogram adaptive_rsl(const PointCloud& points, const RSLConfig& config,
                        std::span<const SphereSpec> pieces, double rel_tol) {
  config.validate();
  auto act = adaptive_activations(points, config.k, pieces, config.index_mode, rel_tol);
  return sweep_with_activation(points, std::move(act), config);
}

ConnectionRule adaptive_connection_rule(std::optional<double> theorem_r, double tau) {
  if (!theorem_r) return ConnectionRule::proportional(4.0);
  const double r = *theorem_r;
  return ConnectionRule::fixed(4.0 * r * (1.0 + 6.0 * r / tau));
}

}  // namespace mrsl
