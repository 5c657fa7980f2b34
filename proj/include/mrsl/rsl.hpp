#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrsl/common.hpp"
#include "mrsl/geometry.hpp"
#include "mrsl/neighbors.hpp"

namespace mrsl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ConnectionRule {
  enum class Kind { FixedR, Proportional };
  Kind kind = Kind::Proportional;
  double value = 4.0;  // R for FixedR, c for Proportional

  static ConnectionRule fixed(double R) { return {Kind::FixedR, R}; }
  static ConnectionRule proportional(double c) { return {Kind::Proportional, c}; }

  /// Sweep radius at which an edge with squared length `dist_sq` between
  /// points with activations ai, aj appears (infinity if never).
  double edge_radius(double ai, double aj, double dist_sq) const noexcept;
  /// Longest edge that can appear at or below sweep radius `horizon`.
  double reach(double horizon) const noexcept;
  std::string describe() const;
};

enum class SweepBackend {
  Auto,              // sparse edges when few, dense Prim otherwise
  DensePrim,         // O(n^2) time, O(n) memory, OpenMP key updates
  SparseKruskal,     // edges from radius_neighbors(reach), sorted
  ReferenceKruskal,  // every pair sorted; serial test oracle
};

struct RSLConfig {
  std::size_t k = 1;
  ConnectionRule rule;
  double horizon = kInfinity;  // events above this radius are dropped
  SweepBackend backend = SweepBackend::Auto;
  IndexMode index_mode = IndexMode::Auto;

  void validate() const;
};

struct Merge {
  double radius = 0.0;
  std::size_t a = 0;  // min-index label of one component, a < b
  std::size_t b = 0;

  bool operator==(const Merge&) const = default;
};

/// Components sorted by smallest member; members ascending.
using Partition = std::vector<std::vector<std::size_t>>;

class Dendrogram {
 public:
  static constexpr std::uint32_t kInactive = std::numeric_limits<std::uint32_t>::max();

  Dendrogram() = default;
  /// Validates that merges are sorted and each joins two live components
  /// whose labels are their minimum members.
  Dendrogram(std::vector<double> activation, std::vector<Merge> merges);

  std::size_t n() const noexcept { return activation_.size(); }
  const std::vector<double>& activation() const noexcept { return activation_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }

  /// Component label (min member) per point, kInactive for inactive points.
  std::vector<std::uint32_t> labels_at(double r) const;
  Partition components_at(double r) const;
  /// All activation and merge radii, sorted and deduplicated.
  std::vector<double> event_radii() const;

 private:
  std::vector<double> activation_;
  std::vector<Merge> merges_;
  std::size_t stride_ = 1;
  std::vector<std::vector<std::uint32_t>> checkpoints_;  // roots after stride_*c merges
};

/// Groups points by label; kInactive entries are skipped.
Partition partition_from_labels(std::span<const std::uint32_t> labels);

Dendrogram rsl_sweep(const PointCloud& points, const RSLConfig& config);
/// Sweep with caller-provided activation radii (infinity = never active).
Dendrogram sweep_with_activation(const PointCloud& points, std::vector<double> activation,
                                 const RSLConfig& config);

/// Radius r_x with vol_d(B_M(x, r_x)) = V on the sphere, by bisection on
/// cap_volume_exact to 1e-10 relative in V.
double vball_radius(const SphereSpec& sphere, std::span<const double> x, double V);

/// Activation radius of the adaptive algorithm: the smallest r with
/// r_k <= vball_radius(v_d r^d). Since cap volume is increasing in the
/// radius this is (cap_volume_exact(d, tau, r_k) / v_d)^{1/d}.
double adaptive_threshold(int d, double tau, double rk);

/// Index of the sphere piece closest to x; throws InvalidArgument when x is
/// farther than rel_tol * tau from every piece.
std::size_t nearest_piece(std::span<const SphereSpec> pieces, std::span<const double> x,
                          double rel_tol);

std::vector<double> adaptive_activations(const PointCloud& points, std::size_t k,
                                         std::span<const SphereSpec> pieces,
                                         IndexMode mode = IndexMode::Auto,
                                         double rel_tol = 1e-6);

Dendrogram adaptive_rsl(const PointCloud& points, const RSLConfig& config,
                        std::span<const SphereSpec> pieces, double rel_tol = 1e-6);

/// R = 4 r_u with r_u = r (1 + 6 r / tau) when the theorem-level r is known,
/// else Proportional(4).
ConnectionRule adaptive_connection_rule(std::optional<double> theorem_r, double tau);

}  // namespace mrsl
