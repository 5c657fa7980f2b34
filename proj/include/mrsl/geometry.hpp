#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mrsl/common.hpp"

namespace mrsl {

using Rng = std::mt19937_64;

/// A d-sphere of radius tau embedded in R^D through an orthonormal
/// (d+1)-frame. Frame coordinates y in R^{d+1} map to center + basis * y.
class SphereSpec {
 public:
  SphereSpec(int d, double tau, std::vector<double> center, std::vector<std::vector<double>> basis);

  /// Sphere centered at `center` (origin when empty) spanning the first d+1 axes.
  static SphereSpec standard(int d, double tau, std::size_t ambient_dim,
                             std::vector<double> center = {});
  /// Same, with a uniformly random orthonormal frame.
  static SphereSpec random_frame(int d, double tau, std::size_t ambient_dim, std::uint64_t seed,
                                 std::vector<double> center = {});

  int d() const noexcept { return d_; }
  double tau() const noexcept { return tau_; }
  std::size_t ambient_dim() const noexcept { return center_.size(); }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<std::vector<double>>& basis() const noexcept { return basis_; }

  std::vector<double> embed(std::span<const double> frame_coords) const;
  std::vector<double> frame_coords(std::span<const double> x) const;
  /// Distance from x to the (d+1)-flat containing the sphere.
  double off_flat_distance(std::span<const double> x) const;
  /// max(| |x - c| - tau |, off-flat distance): zero on the sphere.
  double surface_residual(std::span<const double> x) const;
  bool contains(std::span<const double> x, double rel_tol = 1e-9) const;
  double surface_volume() const;

 private:
  int d_;
  double tau_;
  std::vector<double> center_;
  std::vector<std::vector<double>> basis_;  // d+1 columns, each of length D
};

struct VolumeBounds {
  double lower = 0.0;
  double upper = 0.0;
  double r1 = 0.0;
  int d = 0;
  double tau = 0.0;
  double r = 0.0;

  /// True iff r <= eps * tau / (72 d), where the bounds tighten to 1 -+ eps/6.
  bool epsilon_regime(double eps) const noexcept;
};

/// A cap of a sphere: frame-coordinate points u with u . axis >= cos_theta.
struct SphereCap {
  std::vector<double> axis;  // unit vector in frame coordinates
  double theta = 0.0;        // polar half-angle in [0, pi]
  bool empty() const noexcept { return theta <= 0.0; }
};

double unit_ball_volume(int d);
double log_unit_ball_volume(int d);
/// Surface volume of the d-sphere of radius tau: (d+1) v_{d+1} tau^d.
double sphere_surface_volume(int d, double tau);

/// Surface volume of the polar cap of half-angle theta on S^d(tau).
double cap_volume_angle(int d, double tau, double theta);
/// vol_d(B(x, r) cap S^d(tau)) for x on the sphere, via quadrature of the
/// incomplete-beta integrand after the substitution u = sin^2(phi).
double cap_volume_exact(int d, double tau, double r);
/// Second-order expansion v_d r^d (1 - c_d r^2 / tau^2); the O(r^4/tau^4)
/// remainder is dropped. Only valid for r / tau <= 0.25.
double cap_volume_series(int d, double tau, double r);
double cap_series_coefficient(int d);
/// Polar half-angle of the cap cut by a ball of chord radius r centered on the sphere.
double chord_to_angle(double tau, double r);

VolumeBounds ball_volume_bounds(int d, double tau, double r);

double geodesic_distance(const SphereSpec& sphere, std::span<const double> p,
                         std::span<const double> q);

/// Intersection of B(x, r) with the sphere, for arbitrary ambient x.
SphereCap ball_sphere_cap(const SphereSpec& sphere, std::span<const double> x, double r);

/// Surface volume of {u in cap : t_lo <= u . direction <= t_hi} on S^d(tau),
/// with u and direction unit vectors in frame coordinates. Computed as a
/// one-dimensional quadrature over the level sets of u . direction.
double cap_band_volume(int d, double tau, const SphereCap& cap, std::span<const double> direction,
                       double t_lo, double t_hi);

std::uint64_t covering_number_bound(double vol_m, int d, double tau, double s);

/// Greedy s-net over a dense uniform sample of the sphere: points are kept
/// in sample order unless a kept point lies within s. Every sample point
/// ends within s of the net and net points are more than s apart.
/// sample_count = 0 picks a size from the covering-number bound.
PointCloud build_net(const SphereSpec& sphere, double s, std::uint64_t seed,
                     std::size_t sample_count = 0);

/// Indices of `count` points chosen by greedy farthest-point traversal
/// starting from index 0.
std::vector<std::size_t> farthest_point_order(const PointCloud& points, std::size_t count);

// Random variates on spheres, in frame coordinates of S^{m-1} in R^m.
std::vector<double> random_unit_vector(Rng& rng, std::size_t m);
/// Uniform point in the cap {u : angle(u, axis) <= theta} of the unit sphere
/// S^{m-1}, by rejection on the polar angle.
std::vector<double> random_in_cap(Rng& rng, std::span<const double> axis, double theta);
/// Uniform point in the Euclidean ball B(0, radius) of R^m.
std::vector<double> random_in_ball(Rng& rng, std::size_t m, double radius);
double uniform01(Rng& rng);

}  // namespace mrsl
