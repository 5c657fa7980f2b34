#include "mrsl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "mrsl/quadrature.hpp"

namespace mrsl {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_dim(int d) {
  if (d < 1) throw InvalidArgument("dimension must be a positive integer");
}

void orthonormalize(std::vector<std::vector<double>>& cols) {
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double p = dot(cols[j], cols[i]);
        for (std::size_t t = 0; t < cols[j].size(); ++t) cols[j][t] -= p * cols[i][t];
      }
      const double nrm = norm(cols[j]);
      if (nrm < 1e-300) throw InvalidArgument("orthonormalize: degenerate frame");
      for (double& v : cols[j]) v /= nrm;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- SphereSpec

SphereSpec::SphereSpec(int d, double tau, std::vector<double> center,
                       std::vector<std::vector<double>> basis)
    : d_(d), tau_(tau), center_(std::move(center)), basis_(std::move(basis)) {
  require_dim(d_);
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw InvalidArgument("SphereSpec: tau must be > 0");
  const std::size_t D = center_.size();
  if (D < static_cast<std::size_t>(d_) + 1) throw InvalidArgument("SphereSpec: need D >= d + 1");
  if (basis_.size() != static_cast<std::size_t>(d_) + 1) {
    throw InvalidArgument("SphereSpec: basis must have d + 1 columns");
  }
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i].size() != D) throw InvalidArgument("SphereSpec: basis column length != D");
    for (std::size_t j = 0; j <= i; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(dot(basis_[i], basis_[j]) - expect) > 1e-12) {
        throw InvalidArgument("SphereSpec: basis is not orthonormal");
      }
    }
  }
}

SphereSpec SphereSpec::standard(int d, double tau, std::size_t ambient_dim,
                                std::vector<double> center) {
  require_dim(d);
  if (center.empty()) center.assign(ambient_dim, 0.0);
  std::vector<std::vector<double>> basis(static_cast<std::size_t>(d) + 1,
                                         std::vector<double>(ambient_dim, 0.0));
  for (std::size_t i = 0; i < basis.size() && i < ambient_dim; ++i) basis[i][i] = 1.0;
  return SphereSpec(d, tau, std::move(center), std::move(basis));
}

SphereSpec SphereSpec::random_frame(int d, double tau, std::size_t ambient_dim,
                                    std::uint64_t seed, std::vector<double> center) {
  require_dim(d);
  if (center.empty()) center.assign(ambient_dim, 0.0);
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> basis(static_cast<std::size_t>(d) + 1,
                                         std::vector<double>(ambient_dim));
  for (auto& col : basis) {
    for (double& v : col) v = gauss(rng);
  }
  orthonormalize(basis);
  return SphereSpec(d, tau, std::move(center), std::move(basis));
}

std::vector<double> SphereSpec::embed(std::span<const double> y) const {
  std::vector<double> x = center_;
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    for (std::size_t t = 0; t < x.size(); ++t) x[t] += y[j] * basis_[j][t];
  }
  return x;
}

std::vector<double> SphereSpec::frame_coords(std::span<const double> x) const {
  std::vector<double> rel(x.begin(), x.end());
  for (std::size_t t = 0; t < rel.size(); ++t) rel[t] -= center_[t];
  std::vector<double> y(basis_.size());
  for (std::size_t j = 0; j < basis_.size(); ++j) y[j] = dot(basis_[j], rel);
  return y;
}

double SphereSpec::off_flat_distance(std::span<const double> x) const {
  std::vector<double> rel(x.begin(), x.end());
  for (std::size_t t = 0; t < rel.size(); ++t) rel[t] -= center_[t];
  for (const auto& col : basis_) {
    const double p = dot(col, rel);
    for (std::size_t t = 0; t < rel.size(); ++t) rel[t] -= p * col[t];
  }
  return norm(rel);
}

double SphereSpec::surface_residual(std::span<const double> x) const {
  if (x.size() != center_.size()) throw InvalidArgument("SphereSpec: point dimension mismatch");
  return std::max(std::abs(distance(x, center_) - tau_), off_flat_distance(x));
}

bool SphereSpec::contains(std::span<const double> x, double rel_tol) const {
  return surface_residual(x) <= rel_tol * tau_;
}

double SphereSpec::surface_volume() const { return sphere_surface_volume(d_, tau_); }

bool VolumeBounds::epsilon_regime(double eps) const noexcept {
  return r <= eps * tau / (72.0 * d);
}

// ------------------------------------------------------------------ volumes

double unit_ball_volume(int d) {
  if (d < 0) throw InvalidArgument("unit_ball_volume: d must be >= 1");
  if (d == 0) throw InvalidArgument("unit_ball_volume: d must be >= 1");
  // v_d = v_{d-2} * 2 pi / d from v_0 = 1, v_1 = 2.
  double v = (d % 2 == 0) ? 1.0 : 2.0;
  for (int k = (d % 2 == 0) ? 2 : 3; k <= d; k += 2) v *= 2.0 * kPi / k;
  return v;
}

double log_unit_ball_volume(int d) {
  require_dim(d);
  return 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0);
}

double sphere_surface_volume(int d, double tau) {
  require_dim(d);
  return (d + 1) * unit_ball_volume(d + 1) * std::pow(tau, d);
}

double chord_to_angle(double tau, double r) {
  return 2.0 * std::asin(std::min(1.0, r / (2.0 * tau)));
}

double cap_volume_angle(int d, double tau, double theta) {
  require_dim(d);
  if (!(tau > 0.0)) throw InvalidArgument("cap_volume_angle: tau must be > 0");
  if (theta < 0.0 || theta > kPi) throw InvalidArgument("cap_volume_angle: theta outside [0, pi]");
  if (theta == 0.0) return 0.0;
  const double scale = d * unit_ball_volume(d) * std::pow(tau, d);
  if (d == 1) return scale * theta;
  const auto integrand = [d](double phi) { return std::pow(std::sin(phi), d - 1); };
  // A half-range plus its mirror keeps the relative error small near theta = pi.
  if (theta > 0.5 * kPi) {
    const double half = integrate_gk15(integrand, 0.0, 0.5 * kPi, 1e-13).value;
    const double tail = integrate_gk15(integrand, 0.0, kPi - theta, 1e-13).value;
    return scale * (2.0 * half - tail);
  }
  return scale * integrate_gk15(integrand, 0.0, theta, 1e-13).value;
}

namespace {

// int_0^theta sin^k(phi) dphi by the standard reduction formula.
double sin_power_integral(int k, double theta) {
  if (k == 0) return theta;
  if (k == 1) return 1.0 - std::cos(theta);
  const double s = std::sin(theta);
  return -std::pow(s, k - 1) * std::cos(theta) / k +
         (k - 1.0) / k * sin_power_integral(k - 2, theta);
}

// Fraction of S^m with w . e >= c.
double sphere_fraction_above(int m, double c) {
  if (c >= 1.0) return 0.0;
  if (c <= -1.0) return 1.0;
  if (m == 0) return 0.5;
  return sin_power_integral(m - 1, std::acos(c)) / sin_power_integral(m - 1, kPi);
}

}  // namespace

double cap_band_volume(int d, double tau, const SphereCap& cap, std::span<const double> direction,
                       double t_lo, double t_hi) {
  require_dim(d);
  if (cap.axis.size() != direction.size()) throw InvalidArgument("cap_band_volume: dimension mismatch");
  if (cap.empty() || t_hi < t_lo) return 0.0;
  const double u0 = std::clamp(dot(cap.axis, direction), -1.0, 1.0);
  const double su = std::sqrt(std::max(0.0, 1.0 - u0 * u0));
  const double beta = std::acos(u0);
  const double cos_theta = std::cos(cap.theta);
  // Level t = cos(phi); the cap covers phi in [beta - theta, beta + theta].
  const double phi_a = std::max({0.0, beta - cap.theta, std::acos(std::clamp(t_hi, -1.0, 1.0))});
  const double phi_b = std::min({kPi, beta + cap.theta, std::acos(std::clamp(t_lo, -1.0, 1.0))});
  if (!(phi_b > phi_a)) return 0.0;
  const auto integrand = [&](double phi) {
    const double t = std::cos(phi), st = std::sin(phi);
    const double denom = st * su;
    double frac;
    if (denom <= 1e-300) {
      frac = t * u0 >= cos_theta ? 1.0 : 0.0;
    } else {
      frac = sphere_fraction_above(d - 1, (cos_theta - t * u0) / denom);
    }
    return std::pow(st, d - 1) * frac;
  };
  std::vector<double> cuts{phi_a, phi_b};
  for (double k : {cap.theta - beta, 2.0 * kPi - cap.theta - beta, beta}) {
    if (k > phi_a && k < phi_b) cuts.push_back(k);
  }
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    sum += integrate_gk15(integrand, cuts[i], cuts[i + 1], 1e-11, 1e-15, 4000).value;
  }
  return d * unit_ball_volume(d) * std::pow(tau, d) * sum;
}

double cap_volume_exact(int d, double tau, double r) {
  require_dim(d);
  if (!(tau > 0.0)) throw InvalidArgument("cap_volume_exact: tau must be > 0");
  if (r < 0.0 || r > 2.0 * tau) throw InvalidArgument("cap_volume_exact: r outside [0, 2 tau]");
  if (r == 0.0) return 0.0;
  if (r == 2.0 * tau) return sphere_surface_volume(d, tau);
  return cap_volume_angle(d, tau, chord_to_angle(tau, r));
}

double cap_series_coefficient(int d) {
  require_dim(d);
  return d * (d - 2.0) / (8.0 * (d + 2.0));
}

double cap_volume_series(int d, double tau, double r) {
  require_dim(d);
  if (!(tau > 0.0) || r < 0.0) throw InvalidArgument("cap_volume_series: bad tau or r");
  if (r / tau > 0.25) throw RegimeViolation("cap_volume_series: requires r / tau <= 0.25");
  const double ratio = r / tau;
  return unit_ball_volume(d) * std::pow(r, d) * (1.0 - cap_series_coefficient(d) * ratio * ratio);
}

VolumeBounds ball_volume_bounds(int d, double tau, double r) {
  require_dim(d);
  if (!(tau > 0.0)) throw InvalidArgument("ball_volume_bounds: tau must be > 0");
  if (!(r > 0.0)) throw InvalidArgument("ball_volume_bounds: r must be > 0");
  if (r >= 0.5 * tau) throw RegimeViolation("ball_volume_bounds: requires r < tau / 2");
  VolumeBounds b;
  b.d = d;
  b.tau = tau;
  b.r = r;
  const double vd = unit_ball_volume(d);
  b.lower = std::pow(1.0 - r * r / (4.0 * tau * tau), 0.5 * d) * vd * std::pow(r, d);
  b.r1 = tau - tau * std::sqrt(1.0 - 2.0 * r / tau);
  // tau / (tau - 2 r1) blows up once r1 reaches tau / 2 (r >= 3 tau / 8).
  const double denom = tau - 2.0 * b.r1;
  b.upper = denom > 0.0 ? vd * std::pow(tau / denom, d) * std::pow(b.r1, d)
                        : std::numeric_limits<double>::infinity();
  return b;
}

double geodesic_distance(const SphereSpec& sphere, std::span<const double> p,
                         std::span<const double> q) {
  if (!sphere.contains(p) || !sphere.contains(q)) {
    throw InvalidArgument("geodesic_distance: point is off the sphere");
  }
  return 2.0 * sphere.tau() * std::asin(std::min(1.0, distance(p, q) / (2.0 * sphere.tau())));
}

SphereCap ball_sphere_cap(const SphereSpec& sphere, std::span<const double> x, double r) {
  SphereCap cap;
  cap.axis.assign(static_cast<std::size_t>(sphere.d()) + 1, 0.0);
  cap.axis[0] = 1.0;
  if (r <= 0.0) return cap;
  const double tau = sphere.tau();
  const double to_center_sq = squared_distance(x, sphere.center());
  std::vector<double> w = sphere.frame_coords(x);
  const double wn = norm(w);
  // |p - x|^2 = tau^2 + |x - c|^2 - 2 tau (u . w) for p = c + tau B u.
  const double q = (tau * tau + to_center_sq - r * r) / (2.0 * tau);
  if (wn <= 1e-300) {
    cap.theta = q <= 0.0 ? kPi : 0.0;
    return cap;
  }
  for (std::size_t j = 0; j < w.size(); ++j) cap.axis[j] = w[j] / wn;
  const double c = q / wn;
  if (c >= 1.0) {
    cap.theta = 0.0;
  } else if (c <= -1.0) {
    cap.theta = kPi;
  } else {
    cap.theta = std::acos(c);
  }
  return cap;
}

std::uint64_t covering_number_bound(double vol_m, int d, double tau, double s) {
  require_dim(d);
  if (!(s > 0.0) || !(tau > 0.0) || vol_m < 0.0) {
    throw InvalidArgument("covering_number_bound: need s > 0, tau > 0, vol >= 0");
  }
  if (s > 2.0 * tau) throw RegimeViolation("covering_number_bound: requires s <= 2 tau");
  const double c = std::cos(std::asin(s / (4.0 * tau)));
  const double bound = vol_m / (std::pow(c, d) * unit_ball_volume(d) * std::pow(0.5 * s, d));
  const double ceiled = std::ceil(bound);
  if (ceiled >= 9.2e18) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(ceiled);
}

// -------------------------------------------------------------------- nets

std::vector<std::size_t> farthest_point_order(const PointCloud& points, std::size_t count) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order;
  if (n == 0 || count == 0) return order;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (order.size() < std::min(count, n)) {
    order.push_back(next);
    const std::size_t last = next;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], squared_distance(points.row(i), points.row(last)));
      if (best[i] > far) {
        far = best[i];
        next = i;
      }
    }
  }
  return order;
}

PointCloud build_net(const SphereSpec& sphere, double s, std::uint64_t seed,
                     std::size_t sample_count) {
  if (!(s > 0.0)) throw InvalidArgument("build_net: s must be > 0");
  const double tau = sphere.tau();
  const int d = sphere.d();
  if (sample_count == 0) {
    const std::uint64_t bound =
        covering_number_bound(sphere.surface_volume(), d, tau, std::min(s, 2.0 * tau));
    const double want = 40.0 * static_cast<double>(bound);
    sample_count = static_cast<std::size_t>(std::clamp(want, 2000.0, 200000.0));
  }
  Rng rng(seed);
  PointCloud dense(sphere.ambient_dim());
  dense.coords.reserve(sample_count * dense.dim);
  for (std::size_t i = 0; i < sample_count; ++i) {
    auto u = random_unit_vector(rng, static_cast<std::size_t>(d) + 1);
    for (double& v : u) v *= tau;
    dense.push_back(sphere.embed(u));
  }

  // Greedy pass in sample order: keep a point unless a kept point lies
  // within s. Kept points are bucketed by frame coordinates in cells of side s.
  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (std::int64_t v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };
  const std::size_t m = static_cast<std::size_t>(d) + 1;
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> cells;
  std::vector<std::vector<double>> kept_frame;
  PointCloud net(sphere.ambient_dim());
  const double s2 = s * s;
  std::vector<std::int64_t> key(m), probe(m);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const auto u = sphere.frame_coords(dense.row(i));
    for (std::size_t j = 0; j < m; ++j) key[j] = static_cast<std::int64_t>(std::floor(u[j] / s));
    bool covered = false;
    std::size_t combos = 1;
    for (std::size_t j = 0; j < m; ++j) combos *= 3;
    for (std::size_t c = 0; c < combos && !covered; ++c) {
      std::size_t rest = c;
      for (std::size_t j = 0; j < m; ++j) {
        probe[j] = key[j] + static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      const auto it = cells.find(probe);
      if (it == cells.end()) continue;
      for (std::size_t q : it->second) {
        if (squared_distance(kept_frame[q], u) <= s2) {
          covered = true;
          break;
        }
      }
    }
    if (covered) continue;
    cells[key].push_back(kept_frame.size());
    kept_frame.push_back(u);
    net.push_back(dense.row(i));
  }
  return net;
}

// ----------------------------------------------------------------- variates

double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

std::vector<double> random_unit_vector(Rng& rng, std::size_t m) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(m);
  for (;;) {
    for (double& x : v) x = gauss(rng);
    const double nrm = norm(v);
    if (nrm > 1e-12) {
      for (double& x : v) x /= nrm;
      return v;
    }
  }
}

std::vector<double> random_in_cap(Rng& rng, std::span<const double> axis, double theta) {
  const std::size_t m = axis.size();
  const int d = static_cast<int>(m) - 1;
  theta = std::clamp(theta, 0.0, kPi);
  const double smax = theta <= 0.5 * kPi ? std::sin(theta) : 1.0;
  double phi = 0.0;
  for (;;) {
    phi = theta * uniform01(rng);
    if (d == 1 || smax <= 0.0) break;
    const double accept = std::pow(std::sin(phi) / smax, d - 1);
    if (uniform01(rng) < accept) break;
  }
  // Direction orthogonal to the axis.
  std::vector<double> w;
  for (;;) {
    w = random_unit_vector(rng, m);
    const double p = dot(w, axis);
    for (std::size_t j = 0; j < m; ++j) w[j] -= p * axis[j];
    const double nrm = norm(w);
    if (nrm > 1e-8) {
      for (double& x : w) x /= nrm;
      break;
    }
  }
  std::vector<double> u(m);
  const double c = std::cos(phi), s = std::sin(phi);
  for (std::size_t j = 0; j < m; ++j) u[j] = c * axis[j] + s * w[j];
  return u;
}

std::vector<double> random_in_ball(Rng& rng, std::size_t m, double radius) {
  auto v = random_unit_vector(rng, m);
  const double scale = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(m));
  for (double& x : v) x *= scale;
  return v;
}

}  // namespace mrsl
