#include "mrsl/kde.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mrsl/geometry.hpp"
#include "mrsl/neighbors.hpp"

namespace mrsl {

void KDEConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("kde: h must be > 0");
  if (mode == Exponent::Intrinsic && d < 1) {
    throw InvalidArgument("kde: intrinsic mode needs the manifold dimension d");
  }
}

int KDEConfig::exponent(std::size_t ambient_dim) const {
  return mode == Exponent::Intrinsic ? d : static_cast<int>(ambient_dim);
}

double KDEConfig::normalizer(std::size_t ambient_dim) const {
  const int m = exponent(ambient_dim);
  return std::exp(log_unit_ball_volume(m) + m * std::log(h));
}

double kde_at(const PointCloud& points, std::span<const double> x, const KDEConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw InvalidArgument("kde: empty sample");
  if (x.size() != points.dim) throw InvalidArgument("kde: dimension mismatch");
  const double h2 = cfg.h * cfg.h;
  std::size_t count = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (squared_distance(points.row(i), x) <= h2) ++count;
  }
  return static_cast<double>(count) /
         (static_cast<double>(points.size()) * cfg.normalizer(points.dim));
}

std::vector<double> kde_at_many(const PointCloud& points, const PointCloud& probes,
                                const KDEConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw InvalidArgument("kde: empty sample");
  if (probes.dim != points.dim) throw InvalidArgument("kde: dimension mismatch");
  const double denom = static_cast<double>(points.size()) * cfg.normalizer(points.dim);
  const double h2 = cfg.h * cfg.h;
  std::vector<double> out(probes.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (squared_distance(points.row(i), probes.row(p)) <= h2) ++count;
    }
    out[p] = static_cast<double>(count) / denom;
  }
  return out;
}

PopulationValue population_fh(const ManifoldDensitySpec& spec, std::span<const double> x,
                              const KDEConfig& cfg, const NoiseSpec& noise,
                              const MassOracleOptions& opts) {
  cfg.validate();
  const MassResult m = ball_mass_oracle(spec, x, cfg.h, noise, opts);
  const double norm = cfg.normalizer(spec.ambient_dim());
  return {m.mass / norm, m.monte_carlo, m.standard_error / norm};
}

DeviationReport sup_deviation(const PointCloud& points, const PopulationFn& population,
                              const KDEConfig& cfg, const PointCloud& probes, double tau) {
  cfg.validate();
  if (probes.empty()) throw InvalidArgument("sup_deviation: probe set is empty");
  DeviationReport rep;
  rep.fhat = kde_at_many(points, probes, cfg);
  rep.fh.resize(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const PopulationValue v = population(probes.row(p));
    rep.fh[p] = v.value;
    rep.monte_carlo = rep.monte_carlo || v.monte_carlo;
    const double dev = std::abs(rep.fhat[p] - v.value);
    if (dev > rep.max_deviation || p == 0) {
      rep.max_deviation = dev;
      rep.argmax = p;
    }
  }
  const int m = cfg.exponent(points.dim);
  const double n = static_cast<double>(points.size());
  rep.rate = std::sqrt(std::abs(std::log(1.0 / cfg.h)) / (n * std::pow(cfg.h, m)));
  rep.normalized = rep.rate > 0.0 ? rep.max_deviation / rep.rate : 0.0;
  rep.regime_warning =
      cfg.mode == KDEConfig::Exponent::Intrinsic && tau > 0.0 && cfg.h > tau / 8.0;
  return rep;
}

DeviationReport sup_deviation(const PointCloud& points, const ManifoldDensitySpec& spec,
                              const KDEConfig& cfg, const PointCloud& probes,
                              const NoiseSpec& noise, const MassOracleOptions& opts) {
  double tau = spec.frame().tau();
  if (const auto* lb = std::get_if<LowerBoundInstance>(&spec.variant())) tau = lb->tau;
  return sup_deviation(
      points,
      [&](std::span<const double> x) { return population_fh(spec, x, cfg, noise, opts); }, cfg,
      probes, tau);
}

PointCloud default_probes(const PointCloud& points, const ManifoldDensitySpec& spec, double h,
                          ProbeSet which, std::uint64_t seed) {
  PointCloud out(spec.ambient_dim());
  if (which != ProbeSet::Net) {
    if (points.dim != out.dim) throw InvalidArgument("default_probes: dimension mismatch");
    out.coords = points.coords;
  }
  if (which != ProbeSet::Samples) {
    const auto pieces = spec.sphere_pieces();
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      const PointCloud net = build_net(pieces[p], 0.5 * h, child_seed(seed, p));
      for (std::size_t i = 0; i < net.size(); ++i) {
        if (!spec.density_at(net.row(i)).off_support) out.push_back(net.row(i));
      }
    }
  }
  return out;
}

Partition kde_level_clusters(const PointCloud& points, const KDEConfig& cfg, double level,
                             double R) {
  cfg.validate();
  if (!(level >= 0.0)) throw InvalidArgument("kde_level_clusters: level must be >= 0");
  if (!(R > 0.0)) throw InvalidArgument("kde_level_clusters: R must be > 0");
  const std::vector<double> fhat = kde_at_many(points, points, cfg);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (fhat[i] >= level) kept.push_back(i);
  }
  PointCloud sub(points.dim);
  for (std::size_t i : kept) sub.push_back(points.row(i));
  const Adjacency adj = DistanceIndex(sub).radius_neighbors(R);
  std::vector<std::uint32_t> comp(points.size(), Dendrogram::kInactive);
  for (std::size_t s = 0; s < kept.size(); ++s) {
    if (comp[kept[s]] != Dendrogram::kInactive) continue;
    const auto label = static_cast<std::uint32_t>(kept[s]);
    std::vector<std::size_t> stack{s};
    comp[kept[s]] = label;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (comp[kept[v]] == Dendrogram::kInactive) {
          comp[kept[v]] = label;
          stack.push_back(v);
        }
      }
    }
  }
  return partition_from_labels(comp);
}

BandwidthCheck check_bandwidth_schedule(const std::vector<std::pair<std::size_t, double>>& schedule,
                                        int m, double c) {
  if (schedule.size() < 2) throw InvalidArgument("bandwidth schedule needs at least two entries");
  if (m < 1 || !(c > 0.0)) throw InvalidArgument("bandwidth schedule: need m >= 1 and c > 0");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto [n, h] = schedule[i];
    if (n < 3 || !(h > 0.0 && h < 1.0)) {
      throw InvalidArgument("bandwidth schedule: need n >= 3 and 0 < h < 1");
    }
    if (i > 0 && n <= schedule[i - 1].first) {
      throw InvalidArgument("bandwidth schedule: n must increase");
    }
  }
  BandwidthCheck out{true, true, true, true};
  std::map<std::size_t, double> by_n(schedule.begin(), schedule.end());
  const auto variance = [m](std::size_t n, double h) {
    return static_cast<double>(n) * std::pow(h, m) / std::abs(std::log(h));
  };
  const auto log_ratio = [](std::size_t n, double h) {
    return std::abs(std::log(h)) / std::log(std::log(static_cast<double>(n)));
  };
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    const auto [n0, h0] = schedule[i - 1];
    const auto [n1, h1] = schedule[i];
    if (!(h1 < h0)) out.decreasing = false;
    if (!(variance(n1, h1) > variance(n0, h0))) out.variance_growing = false;
    if (!(log_ratio(n1, h1) > log_ratio(n0, h0))) out.log_ratio_growing = false;
  }
  for (const auto& [n, h] : schedule) {
    const auto it = by_n.find(2 * n);
    if (it != by_n.end() && std::pow(h, m) > c * std::pow(it->second, m)) out.doubling_ok = false;
  }
  return out;
}

}  // namespace mrsl
