#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrsl/common.hpp"
#include "mrsl/geometry.hpp"

namespace mrsl {

struct UniformSphere {
  SphereSpec sphere;
};

/// Uniform background on a sphere plus equal-weight uniform caps ("bumps").
struct SphereMixture {
  SphereSpec sphere;
  std::vector<std::vector<double>> bump_axes;  // unit vectors in frame coordinates
  double bump_radius = 0.0;                    // chord radius of every bump
  double bump_weight_total = 0.0;
  double background_weight = 1.0;

  double bump_angle() const;
  double background_density() const;
  /// Density of one bump's own component on its cap (excluding background).
  double bump_excess_density() const;
};

/// Two components: C = unit-sphere band |x1| <= a glued to hemispheres of
/// radius 2 tau at x1 = +-a (a = sqrt(1 - 4 tau^2)), and a far sphere C'
/// that absorbs the residual mass. Density on C is lambda for |x1| > 1/2
/// and lambda (1 - eps) otherwise.
struct LowerBoundInstance {
  int d = 2;
  double tau = 0.2;
  double lambda = 0.0;
  double epsilon = 0.5;
  SphereSpec unit = SphereSpec::standard(2, 1.0, 3);  // frame of the construction
  std::optional<SphereSpec> far_sphere;
  double far_density = 0.0;

  enum Piece : int { kTop = 0, kBottom = 1, kBandHigh = 2, kBandLow = 3, kFar = 4 };

  double seam() const;  // a
  SphereSpec hemisphere(bool top) const;
  double low_volume() const;
  double high_band_volume() const;  // both signs of x1
  double hemisphere_volume() const;
  double component_volume() const;  // vol_d(C)
  double piece_mass(Piece p) const;
};

struct DensityValue {
  double value = 0.0;
  bool off_support = false;
};

struct MassResult {
  double mass = 0.0;
  bool monte_carlo = false;
  double standard_error = 0.0;
};

struct MassOracleOptions {
  std::size_t mc_samples = 200000;
  std::uint64_t seed = 0x5eed;
};

class ManifoldDensitySpec {
 public:
  using Variant = std::variant<UniformSphere, SphereMixture, LowerBoundInstance>;

  explicit ManifoldDensitySpec(Variant v);

  static ManifoldDensitySpec uniform_sphere(int d, double tau, std::size_t ambient_dim);
  /// Well-separated equal-weight caps with centers from farthest-point
  /// traversal of a dense sample; bump chord radius is a quarter of the
  /// smallest center separation.
  static ManifoldDensitySpec salient_mixture(int d, double tau, std::size_t ambient_dim,
                                             int clusters = 10, double bump_weight_total = 0.7,
                                             std::uint64_t layout_seed = 7);
  /// Density lambda on the polar caps |x1| > tau/2 and lambda (1 - eps) on the band.
  static ManifoldDensitySpec two_level_sphere(int d, double tau, std::size_t ambient_dim,
                                              double epsilon);
  /// lambda <= 0 selects lambda = 1 / vol_d(C).
  static ManifoldDensitySpec lower_bound(int d, double tau, std::size_t ambient_dim,
                                         double epsilon, double lambda = 0.0);

  const Variant& variant() const noexcept { return v_; }
  int d() const;
  std::size_t ambient_dim() const;
  /// Sphere whose frame defines "intrinsic" coordinates for cluster predicates.
  const SphereSpec& frame() const;
  /// Density level of the salient clusters.
  double cluster_level() const;
  /// Every sphere that carries mass (pieces of glued instances as full spheres).
  std::vector<SphereSpec> sphere_pieces() const;
  /// Distance from the frame center enclosing the whole support.
  double support_radius() const;
  std::string description() const;

  DensityValue density_at(std::span<const double> x, double rel_tol = 1e-9) const;
  /// Draws one point from P; returns the origin tag (piece / bump id).
  std::vector<double> draw(Rng& rng, int& origin) const;
  MassResult manifold_mass(std::span<const double> center, double r,
                           const MassOracleOptions& opts = {}) const;

 private:
  Variant v_;
};

struct NoiseSpec {
  enum class Kind { None, Clutter, Additive };
  Kind kind = Kind::None;
  double pi = 1.0;              // weight of P in the clutter mixture
  double box_half_width = 0.0;  // <= 0: max(2, support radius)
  double theta = 0.0;           // additive noise radius
  bool shell = false;           // additive noise on the sphere of radius theta

  static NoiseSpec none() { return {}; }
  static NoiseSpec clutter(double pi, double half_width = 0.0) {
    return {Kind::Clutter, pi, half_width, 0.0, false};
  }
  static NoiseSpec additive(double theta, bool shell = false) {
    return {Kind::Additive, 1.0, 0.0, theta, shell};
  }
  double resolved_half_width(const ManifoldDensitySpec& spec) const;
  std::string description(const ManifoldDensitySpec& spec) const;
};

struct LabeledSample {
  static constexpr int kClutter = -1;

  PointCloud observed;
  std::optional<PointCloud> latent;  // present under additive noise
  std::vector<int> origin;
  std::string fingerprint;

  std::size_t size() const noexcept { return observed.size(); }
  const PointCloud& latent_or_observed() const noexcept { return latent ? *latent : observed; }
};

LabeledSample sample(const ManifoldDensitySpec& spec, const NoiseSpec& noise, std::size_t n,
                     std::uint64_t seed);

DensityValue density_at(const ManifoldDensitySpec& spec, std::span<const double> x);

/// Probability of B(center, r) under the observed-data distribution.
MassResult ball_mass_oracle(const ManifoldDensitySpec& spec, std::span<const double> center,
                            double r, const NoiseSpec& noise = NoiseSpec::none(),
                            const MassOracleOptions& opts = {});

}  // namespace mrsl
