#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mrsl/common.hpp"
#include "mrsl/rsl.hpp"
#include "mrsl/samplers.hpp"

namespace mrsl {

/// Ball-kernel density estimate K(u) = 1{|u| <= 1} / v_m with m = d
/// (intrinsic) or D (ambient). The intrinsic estimate does not integrate to 1.
struct KDEConfig {
  enum class Exponent { Intrinsic, Ambient };
  double h = 0.1;
  Exponent mode = Exponent::Intrinsic;
  int d = 0;  // required in intrinsic mode

  void validate() const;
  int exponent(std::size_t ambient_dim) const;
  /// v_m h^m
  double normalizer(std::size_t ambient_dim) const;
};

double kde_at(const PointCloud& points, std::span<const double> x, const KDEConfig& cfg);
std::vector<double> kde_at_many(const PointCloud& points, const PointCloud& probes,
                                const KDEConfig& cfg);

struct PopulationValue {
  double value = 0.0;
  bool monte_carlo = false;
  double standard_error = 0.0;
};

/// f_h(x) = P(B(x, h)) / (v_m h^m).
PopulationValue population_fh(const ManifoldDensitySpec& spec, std::span<const double> x,
                              const KDEConfig& cfg, const NoiseSpec& noise = NoiseSpec::none(),
                              const MassOracleOptions& opts = {});

struct DeviationReport {
  double max_deviation = 0.0;
  std::size_t argmax = 0;
  double rate = 0.0;        // sqrt(log(1/h) / (n h^m))
  double normalized = 0.0;  // max_deviation / rate
  bool regime_warning = false;  // h > tau / 8 in intrinsic mode
  bool monte_carlo = false;
  std::vector<double> fhat;
  std::vector<double> fh;
};

using PopulationFn = std::function<PopulationValue(std::span<const double>)>;

DeviationReport sup_deviation(const PointCloud& points, const ManifoldDensitySpec& spec,
                              const KDEConfig& cfg, const PointCloud& probes,
                              const NoiseSpec& noise = NoiseSpec::none(),
                              const MassOracleOptions& opts = {});
/// Same with an arbitrary population functional; tau <= 0 skips the regime check.
DeviationReport sup_deviation(const PointCloud& points, const PopulationFn& population,
                              const KDEConfig& cfg, const PointCloud& probes, double tau);

enum class ProbeSet { Samples, Net, Both };

/// Sample points and/or an (h/2)-net of every sphere piece of the spec.
PointCloud default_probes(const PointCloud& points, const ManifoldDensitySpec& spec, double h,
                          ProbeSet which, std::uint64_t seed);

/// Heuristic level-set surrogate: components of the R-linkage graph over
/// the sample points whose estimate is at least `level`.
Partition kde_level_clusters(const PointCloud& points, const KDEConfig& cfg, double level,
                             double R);

struct BandwidthCheck {
  bool decreasing = false;          // h_n decreases to 0
  bool variance_growing = false;    // n h^m / |log h| increases
  bool log_ratio_growing = false;   // |log h| / log log n increases
  bool doubling_ok = false;         // h_n^m <= c h_{2n}^m wherever 2n is listed
  bool all() const { return decreasing && variance_growing && log_ratio_growing && doubling_ok; }
};

/// Numerical check of the bandwidth regularity conditions on a finite
/// schedule of (n, h) pairs sorted by n.
BandwidthCheck check_bandwidth_schedule(const std::vector<std::pair<std::size_t, double>>& schedule,
                                        int m, double c);

}  // namespace mrsl
