#include "mrsl/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace mrsl {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double angle_between(std::span<const double> a, std::span<const double> b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

std::string sphere_text(const SphereSpec& s) {
  std::ostringstream os;
  os << "d=" << s.d() << " tau=" << format_double(s.tau()) << " D=" << s.ambient_dim();
  std::string frame;
  for (double c : s.center()) frame += format_double(c) + ",";
  for (const auto& col : s.basis()) {
    for (double c : col) frame += format_double(c) + ",";
  }
  os << " frame=" << to_hex(fnv1a64(frame));
  return os.str();
}

void accumulate(MassResult& total, const MassResult& part) {
  total.mass += part.mass;
  total.monte_carlo = total.monte_carlo || part.monte_carlo;
  total.standard_error = std::hypot(total.standard_error, part.standard_error);
}

void require_ambient(int d, std::size_t D) {
  if (d < 1) throw InvalidSpec("intrinsic dimension must be >= 1");
  if (D < static_cast<std::size_t>(d) + 1) throw InvalidSpec("ambient dimension must be >= d + 1");
}

void validate(const UniformSphere&) {}

void validate(const SphereMixture& m) {
  if (m.bump_axes.empty() && m.bump_weight_total > 0.0) {
    throw InvalidSpec("mixture: bump weight without bumps");
  }
  if (m.bump_weight_total < 0.0 || m.background_weight < 0.0 ||
      std::abs(m.bump_weight_total + m.background_weight - 1.0) > 1e-12) {
    throw InvalidSpec("mixture: weights must be non-negative and sum to 1");
  }
  if (!m.bump_axes.empty() && !(m.bump_radius > 0.0 && m.bump_radius <= 2.0 * m.sphere.tau())) {
    throw InvalidSpec("mixture: bump radius must lie in (0, 2 tau]");
  }
  for (const auto& a : m.bump_axes) {
    if (a.size() != static_cast<std::size_t>(m.sphere.d()) + 1 || std::abs(norm(a) - 1.0) > 1e-9) {
      throw InvalidSpec("mixture: bump axes must be unit vectors in frame coordinates");
    }
  }
}

void validate(const LowerBoundInstance& lb) {
  if (!(lb.tau > 0.0 && lb.tau < std::sqrt(3.0) / 4.0)) {
    throw InvalidSpec("lower-bound instance: tau must lie in (0, sqrt(3)/4)");
  }
  if (!(lb.epsilon > 0.0 && lb.epsilon < 1.0)) {
    throw InvalidSpec("lower-bound instance: epsilon must lie in (0, 1)");
  }
  if (!(lb.lambda > 0.0)) throw InvalidSpec("lower-bound instance: lambda must be > 0");
  if (lb.lambda * lb.component_volume() > 1.0 + 1e-12) {
    throw InvalidSpec("lower-bound instance: lambda * vol(C) exceeds 1");
  }
}

}  // namespace

// ------------------------------------------------------------ SphereMixture

double SphereMixture::bump_angle() const { return chord_to_angle(sphere.tau(), bump_radius); }

double SphereMixture::background_density() const {
  return background_weight / sphere.surface_volume();
}

double SphereMixture::bump_excess_density() const {
  if (bump_axes.empty()) return 0.0;
  const double per = bump_weight_total / static_cast<double>(bump_axes.size());
  return per / cap_volume_angle(sphere.d(), sphere.tau(), bump_angle());
}

// ------------------------------------------------------- LowerBoundInstance

double LowerBoundInstance::seam() const { return std::sqrt(1.0 - 4.0 * tau * tau); }

SphereSpec LowerBoundInstance::hemisphere(bool top) const {
  std::vector<double> y(static_cast<std::size_t>(d) + 1, 0.0);
  y[0] = top ? seam() : -seam();
  return SphereSpec(d, 2.0 * tau, unit.embed(y), unit.basis());
}

double LowerBoundInstance::low_volume() const {
  return sphere_surface_volume(d, 1.0) - 2.0 * cap_volume_angle(d, 1.0, kPi / 3.0);
}

double LowerBoundInstance::high_band_volume() const {
  return 2.0 * (cap_volume_angle(d, 1.0, kPi / 3.0) - cap_volume_angle(d, 1.0, std::acos(seam())));
}

double LowerBoundInstance::hemisphere_volume() const {
  return 0.5 * sphere_surface_volume(d, 2.0 * tau);
}

double LowerBoundInstance::component_volume() const {
  return low_volume() + high_band_volume() + 2.0 * hemisphere_volume();
}

double LowerBoundInstance::piece_mass(Piece p) const {
  switch (p) {
    case kTop:
    case kBottom:
      return lambda * hemisphere_volume();
    case kBandHigh:
      return lambda * high_band_volume();
    case kBandLow:
      return lambda * (1.0 - epsilon) * low_volume();
    case kFar:
      return far_sphere ? far_density * far_sphere->surface_volume() : 0.0;
  }
  return 0.0;
}

// ------------------------------------------------------ ManifoldDensitySpec

ManifoldDensitySpec::ManifoldDensitySpec(Variant v) : v_(std::move(v)) {
  std::visit([](const auto& s) { validate(s); }, v_);
}

ManifoldDensitySpec ManifoldDensitySpec::uniform_sphere(int d, double tau, std::size_t D) {
  require_ambient(d, D);
  if (!(tau > 0.0)) throw InvalidSpec("tau must be > 0");
  return ManifoldDensitySpec(UniformSphere{SphereSpec::standard(d, tau, D)});
}

ManifoldDensitySpec ManifoldDensitySpec::salient_mixture(int d, double tau, std::size_t D,
                                                         int clusters, double bump_weight_total,
                                                         std::uint64_t layout_seed) {
  require_ambient(d, D);
  if (!(tau > 0.0)) throw InvalidSpec("tau must be > 0");
  if (clusters < 2) throw InvalidSpec("mixture: need at least two clusters");
  if (!(bump_weight_total > 0.0 && bump_weight_total <= 1.0)) {
    throw InvalidSpec("mixture: bump weight must lie in (0, 1]");
  }
  const std::size_t m = static_cast<std::size_t>(d) + 1;
  Rng rng(layout_seed);
  PointCloud dense(m);
  for (int i = 0; i < 20000; ++i) dense.push_back(random_unit_vector(rng, m));
  const auto order = farthest_point_order(dense, static_cast<std::size_t>(clusters));

  SphereMixture mix{SphereSpec::standard(d, tau, D), {}, 0.0, bump_weight_total,
                    1.0 - bump_weight_total};
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto row = dense.row(order[i]);
    mix.bump_axes.emplace_back(row.begin(), row.end());
    for (std::size_t j = 0; j < i; ++j) {
      min_sep = std::min(min_sep, distance(row, dense.row(order[j])));
    }
  }
  mix.bump_radius = 0.25 * min_sep * tau;
  return ManifoldDensitySpec(std::move(mix));
}

ManifoldDensitySpec ManifoldDensitySpec::two_level_sphere(int d, double tau, std::size_t D,
                                                          double epsilon) {
  require_ambient(d, D);
  if (!(tau > 0.0)) throw InvalidSpec("tau must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidSpec("epsilon must lie in (0, 1)");
  const std::size_t m = static_cast<std::size_t>(d) + 1;
  std::vector<double> north(m, 0.0), south(m, 0.0);
  north[0] = 1.0;
  south[0] = -1.0;
  const double surface = sphere_surface_volume(d, tau);
  const double cap = cap_volume_angle(d, tau, kPi / 3.0);
  const double lambda = 1.0 / ((1.0 - epsilon) * surface + 2.0 * epsilon * cap);
  const double bumps = 2.0 * lambda * epsilon * cap;
  SphereMixture mix{SphereSpec::standard(d, tau, D), {north, south}, tau, bumps, 1.0 - bumps};
  return ManifoldDensitySpec(std::move(mix));
}

ManifoldDensitySpec ManifoldDensitySpec::lower_bound(int d, double tau, std::size_t D,
                                                     double epsilon, double lambda) {
  require_ambient(d, D);
  LowerBoundInstance lb;
  lb.d = d;
  lb.tau = tau;
  lb.epsilon = epsilon;
  lb.unit = SphereSpec::standard(d, 1.0, D);
  if (!(tau > 0.0 && tau < std::sqrt(3.0) / 4.0)) {
    throw InvalidSpec("lower-bound instance: tau must lie in (0, sqrt(3)/4)");
  }
  lb.lambda = lambda > 0.0 ? lambda : 1.0 / lb.component_volume();
  const double on_c = lb.piece_mass(LowerBoundInstance::kTop) +
                      lb.piece_mass(LowerBoundInstance::kBottom) +
                      lb.piece_mass(LowerBoundInstance::kBandHigh) +
                      lb.piece_mass(LowerBoundInstance::kBandLow);
  const double residual = 1.0 - on_c;
  if (residual > 1e-12) {
    lb.far_density = lb.lambda;
    const double vol = residual / lb.far_density;
    const double radius = std::pow(vol / sphere_surface_volume(d, 1.0), 1.0 / d);
    std::vector<double> y(static_cast<std::size_t>(d) + 1, 0.0);
    y[1] = 1.0 + 10.0 * tau + radius;
    lb.far_sphere = SphereSpec(d, radius, lb.unit.embed(y), lb.unit.basis());
  }
  return ManifoldDensitySpec(std::move(lb));
}

int ManifoldDensitySpec::d() const { return frame().d(); }

std::size_t ManifoldDensitySpec::ambient_dim() const { return frame().ambient_dim(); }

const SphereSpec& ManifoldDensitySpec::frame() const {
  return std::visit(
      [](const auto& s) -> const SphereSpec& {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LowerBoundInstance>) {
          return s.unit;
        } else {
          return s.sphere;
        }
      },
      v_);
}

double ManifoldDensitySpec::cluster_level() const {
  if (const auto* u = std::get_if<UniformSphere>(&v_)) return 1.0 / u->sphere.surface_volume();
  if (const auto* m = std::get_if<SphereMixture>(&v_)) {
    return m->background_density() + m->bump_excess_density();
  }
  return std::get<LowerBoundInstance>(v_).lambda;
}

std::vector<SphereSpec> ManifoldDensitySpec::sphere_pieces() const {
  if (const auto* lb = std::get_if<LowerBoundInstance>(&v_)) {
    std::vector<SphereSpec> out{lb->hemisphere(true), lb->hemisphere(false), lb->unit};
    if (lb->far_sphere) out.push_back(*lb->far_sphere);
    return out;
  }
  return {frame()};
}

double ManifoldDensitySpec::support_radius() const {
  if (const auto* lb = std::get_if<LowerBoundInstance>(&v_)) {
    double r = std::max(1.0, lb->seam() + 2.0 * lb->tau);
    if (lb->far_sphere) r = std::max(r, 1.0 + 10.0 * lb->tau + 2.0 * lb->far_sphere->tau());
    return r;
  }
  return frame().tau();
}

std::string ManifoldDensitySpec::description() const {
  std::ostringstream os;
  if (const auto* u = std::get_if<UniformSphere>(&v_)) {
    os << "uniform_sphere " << sphere_text(u->sphere);
  } else if (const auto* m = std::get_if<SphereMixture>(&v_)) {
    std::string axes;
    for (const auto& a : m->bump_axes) {
      for (double c : a) axes += format_double(c) + ",";
    }
    os << "sphere_mixture " << sphere_text(m->sphere) << " bumps=" << m->bump_axes.size()
       << " bump_radius=" << format_double(m->bump_radius)
       << " bump_weight=" << format_double(m->bump_weight_total)
       << " background=" << format_double(m->background_weight) << " axes=" << to_hex(fnv1a64(axes));
  } else {
    const auto& lb = std::get<LowerBoundInstance>(v_);
    os << "lower_bound " << sphere_text(lb.unit) << " tau=" << format_double(lb.tau)
       << " lambda=" << format_double(lb.lambda) << " epsilon=" << format_double(lb.epsilon);
    if (lb.far_sphere) os << " far_radius=" << format_double(lb.far_sphere->tau());
  }
  return os.str();
}

DensityValue ManifoldDensitySpec::density_at(std::span<const double> x, double rel_tol) const {
  if (x.size() != ambient_dim()) throw InvalidArgument("density_at: dimension mismatch");
  if (const auto* u = std::get_if<UniformSphere>(&v_)) {
    if (!u->sphere.contains(x, rel_tol)) return {0.0, true};
    return {1.0 / u->sphere.surface_volume(), false};
  }
  if (const auto* m = std::get_if<SphereMixture>(&v_)) {
    if (!m->sphere.contains(x, rel_tol)) return {0.0, true};
    auto y = m->sphere.frame_coords(x);
    const double yn = norm(y);
    for (double& v : y) v /= yn;
    double value = m->background_density();
    const double cos_b = std::cos(m->bump_angle());
    const double excess = m->bump_excess_density();
    for (const auto& a : m->bump_axes) {
      if (dot(y, a) >= cos_b) value += excess;
    }
    return {value, false};
  }
  const auto& lb = std::get<LowerBoundInstance>(v_);
  const double a = lb.seam();
  const auto y = lb.unit.frame_coords(x);
  if (lb.unit.contains(x, rel_tol) && std::abs(y[0]) <= a + rel_tol) {
    return {std::abs(y[0]) > 0.5 ? lb.lambda : lb.lambda * (1.0 - lb.epsilon), false};
  }
  for (bool top : {true, false}) {
    const auto h = lb.hemisphere(top);
    if (h.contains(x, rel_tol) && (top ? y[0] >= a - rel_tol : y[0] <= -a + rel_tol)) {
      return {lb.lambda, false};
    }
  }
  if (lb.far_sphere && lb.far_sphere->contains(x, rel_tol)) return {lb.far_density, false};
  return {0.0, true};
}

std::vector<double> ManifoldDensitySpec::draw(Rng& rng, int& origin) const {
  const std::size_t m = static_cast<std::size_t>(d()) + 1;
  if (const auto* u = std::get_if<UniformSphere>(&v_)) {
    auto y = random_unit_vector(rng, m);
    for (double& v : y) v *= u->sphere.tau();
    origin = 0;
    return u->sphere.embed(y);
  }
  if (const auto* mix = std::get_if<SphereMixture>(&v_)) {
    const double t = uniform01(rng);
    const std::size_t k = mix->bump_axes.size();
    std::vector<double> y;
    if (t < mix->background_weight || k == 0) {
      y = random_unit_vector(rng, m);
      origin = static_cast<int>(k);
    } else {
      const double per = mix->bump_weight_total / static_cast<double>(k);
      const auto j = std::min(k - 1, static_cast<std::size_t>((t - mix->background_weight) / per));
      y = random_in_cap(rng, mix->bump_axes[j], mix->bump_angle());
      origin = static_cast<int>(j);
    }
    for (double& v : y) v *= mix->sphere.tau();
    return mix->sphere.embed(y);
  }
  const auto& lb = std::get<LowerBoundInstance>(v_);
  const double a = lb.seam();
  double t = uniform01(rng);
  int piece = LowerBoundInstance::kFar;
  for (int p = LowerBoundInstance::kTop; p <= LowerBoundInstance::kBandLow; ++p) {
    const double w = lb.piece_mass(static_cast<LowerBoundInstance::Piece>(p));
    if (t < w) {
      piece = p;
      break;
    }
    t -= w;
  }
  if (piece == LowerBoundInstance::kFar && !lb.far_sphere) piece = LowerBoundInstance::kBandLow;
  origin = piece;
  std::vector<double> y;
  switch (piece) {
    case LowerBoundInstance::kTop:
    case LowerBoundInstance::kBottom: {
      y = random_unit_vector(rng, m);
      const double sign = piece == LowerBoundInstance::kTop ? 1.0 : -1.0;
      y[0] = sign * std::abs(y[0]);
      for (double& v : y) v *= 2.0 * lb.tau;
      y[0] += sign * a;
      return lb.unit.embed(y);
    }
    case LowerBoundInstance::kBandHigh:
      do {
        y = random_unit_vector(rng, m);
      } while (!(std::abs(y[0]) > 0.5 && std::abs(y[0]) <= a));
      return lb.unit.embed(y);
    case LowerBoundInstance::kBandLow:
      do {
        y = random_unit_vector(rng, m);
      } while (!(std::abs(y[0]) <= 0.5));
      return lb.unit.embed(y);
    default:
      y = random_unit_vector(rng, m);
      for (double& v : y) v *= lb.far_sphere->tau();
      return lb.far_sphere->embed(y);
  }
}

MassResult ManifoldDensitySpec::manifold_mass(std::span<const double> center, double r,
                                              const MassOracleOptions&) const {
  if (center.size() != ambient_dim()) throw InvalidArgument("ball mass: dimension mismatch");
  if (r < 0.0) throw InvalidArgument("ball mass: r must be >= 0");
  const int dd = d();
  MassResult total;
  if (const auto* u = std::get_if<UniformSphere>(&v_)) {
    const auto cap = ball_sphere_cap(u->sphere, center, r);
    total.mass = cap.empty() ? 0.0
                             : cap_volume_angle(dd, u->sphere.tau(), cap.theta) /
                                   u->sphere.surface_volume();
    return total;
  }
  if (const auto* mix = std::get_if<SphereMixture>(&v_)) {
    const auto cap = ball_sphere_cap(mix->sphere, center, r);
    if (cap.empty()) return total;
    const double tau = mix->sphere.tau();
    const double cap_vol = cap_volume_angle(dd, tau, cap.theta);
    total.mass = mix->background_density() * cap_vol;
    const double tb = mix->bump_angle();
    const double cos_b = std::cos(tb);
    const double excess = mix->bump_excess_density();
    const double per = mix->bump_weight_total / static_cast<double>(mix->bump_axes.size());
    for (std::size_t j = 0; j < mix->bump_axes.size(); ++j) {
      const auto& b = mix->bump_axes[j];
      const double gamma = angle_between(cap.axis, b);
      if (gamma >= cap.theta + tb) continue;
      if (gamma + cap.theta <= tb) {
        total.mass += excess * cap_vol;
      } else if (gamma + tb <= cap.theta) {
        total.mass += per;
      } else {
        total.mass += excess * cap_band_volume(dd, tau, cap, b, cos_b, 1.0);
      }
    }
    return total;
  }

  const auto& lb = std::get<LowerBoundInstance>(v_);
  const double a = lb.seam();
  const double lam = lb.lambda;
  const double low = lam * (1.0 - lb.epsilon);
  std::vector<double> e0(static_cast<std::size_t>(dd) + 1, 0.0);
  e0[0] = 1.0;
  {
    const auto cap = ball_sphere_cap(lb.unit, center, r);
    if (!cap.empty()) {
      total.mass += low * cap_band_volume(dd, 1.0, cap, e0, -0.5, 0.5);
      total.mass += lam * (cap_band_volume(dd, 1.0, cap, e0, 0.5, a) +
                           cap_band_volume(dd, 1.0, cap, e0, -a, -0.5));
    }
  }
  for (bool top : {true, false}) {
    const auto h = lb.hemisphere(top);
    const auto cap = ball_sphere_cap(h, center, r);
    if (cap.empty()) continue;
    total.mass += lam * (top ? cap_band_volume(dd, h.tau(), cap, e0, 0.0, 1.0)
                             : cap_band_volume(dd, h.tau(), cap, e0, -1.0, 0.0));
  }
  if (lb.far_sphere) {
    const auto cap = ball_sphere_cap(*lb.far_sphere, center, r);
    if (!cap.empty()) {
      total.mass += lb.far_density * cap_volume_angle(dd, lb.far_sphere->tau(), cap.theta);
    }
  }
  return total;
}

// ---------------------------------------------------------------- NoiseSpec

double NoiseSpec::resolved_half_width(const ManifoldDensitySpec& spec) const {
  return box_half_width > 0.0 ? box_half_width : std::max(2.0, 1.05 * spec.support_radius());
}

std::string NoiseSpec::description(const ManifoldDensitySpec& spec) const {
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Clutter:
      return "clutter pi=" + format_double(pi) +
             " half_width=" + format_double(resolved_half_width(spec));
    case Kind::Additive:
      return std::string(shell ? "additive_shell" : "additive_ball") +
             " theta=" + format_double(theta);
  }
  return "none";
}

// ----------------------------------------------------------------- sampling

LabeledSample sample(const ManifoldDensitySpec& spec, const NoiseSpec& noise, std::size_t n,
                     std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample: n must be >= 1");
  const std::size_t D = spec.ambient_dim();
  const std::vector<double>& c = spec.frame().center();
  double half_width = 0.0;
  if (noise.kind == NoiseSpec::Kind::Clutter) {
    if (!(noise.pi > 0.0 && noise.pi <= 1.0)) throw InvalidSpec("clutter: pi must lie in (0, 1]");
    half_width = noise.resolved_half_width(spec);
    if (half_width < spec.support_radius()) {
      throw InvalidSpec("clutter: box does not contain the manifold");
    }
  }
  if (noise.kind == NoiseSpec::Kind::Additive &&
      !(noise.theta >= 0.0 && std::isfinite(noise.theta))) {
    throw InvalidSpec("additive noise: theta must be finite and >= 0");
  }

  LabeledSample out;
  out.observed = PointCloud(D);
  out.observed.coords.reserve(n * D);
  out.origin.reserve(n);
  if (noise.kind == NoiseSpec::Kind::Additive) {
    out.latent = PointCloud(D);
    out.latent->coords.reserve(n * D);
  }
  Rng rng(seed);
  std::vector<double> x(D);
  for (std::size_t i = 0; i < n; ++i) {
    int origin = 0;
    if (noise.kind == NoiseSpec::Kind::Clutter && uniform01(rng) >= noise.pi) {
      for (std::size_t t = 0; t < D; ++t) x[t] = c[t] + half_width * (2.0 * uniform01(rng) - 1.0);
      origin = LabeledSample::kClutter;
    } else {
      x = spec.draw(rng, origin);
    }
    if (noise.kind == NoiseSpec::Kind::Additive) {
      out.latent->push_back(x);
      auto e = noise.shell ? random_unit_vector(rng, D) : random_in_ball(rng, D, noise.theta);
      if (noise.shell) {
        for (double& v : e) v *= noise.theta;
      }
      for (std::size_t t = 0; t < D; ++t) x[t] += e[t];
    }
    out.observed.push_back(x);
    out.origin.push_back(origin);
  }
  std::ostringstream key;
  key << spec.description() << "|" << noise.description(spec) << "|n=" << n << "|seed=" << seed;
  out.fingerprint = to_hex(fnv1a64(key.str()));
  return out;
}

DensityValue density_at(const ManifoldDensitySpec& spec, std::span<const double> x) {
  return spec.density_at(x);
}

MassResult ball_mass_oracle(const ManifoldDensitySpec& spec, std::span<const double> center,
                            double r, const NoiseSpec& noise, const MassOracleOptions& opts) {
  if (noise.kind == NoiseSpec::Kind::None) return spec.manifold_mass(center, r, opts);
  const std::size_t D = spec.ambient_dim();
  if (center.size() != D) throw InvalidArgument("ball mass: dimension mismatch");

  if (noise.kind == NoiseSpec::Kind::Additive) {
    const auto draws = sample(spec, noise, std::max<std::size_t>(opts.mc_samples, 2),
                              child_seed(opts.seed, "additive-oracle"));
    const double r2 = r * r;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
      if (squared_distance(draws.observed.row(i), center) <= r2) ++hits;
    }
    const double n = static_cast<double>(draws.size());
    const double p = static_cast<double>(hits) / n;
    return {p, true, std::sqrt(p * (1.0 - p) / n)};
  }

  MassResult total = spec.manifold_mass(center, r, opts);
  total.mass *= noise.pi;
  total.standard_error *= noise.pi;
  const double w = noise.resolved_half_width(spec);
  const auto& c = spec.frame().center();
  bool inside = true;
  double outside_sq = 0.0;
  for (std::size_t t = 0; t < D; ++t) {
    const double off = std::abs(center[t] - c[t]);
    if (off + r > w) inside = false;
    if (off > w) outside_sq += (off - w) * (off - w);
  }
  const double clutter = 1.0 - noise.pi;
  if (clutter <= 0.0 || outside_sq >= r * r) return total;
  // log[(1 - pi) v_D r^D / (2w)^D]
  const int Di = static_cast<int>(D);
  const double log_ball = std::log(clutter) + log_unit_ball_volume(Di) +
                          Di * (std::log(r) - std::log(2.0 * w));
  if (inside) {
    total.mass += std::exp(log_ball);
    return total;
  }
  Rng rng(child_seed(opts.seed, "clutter-oracle"));
  const std::size_t n = std::max<std::size_t>(opts.mc_samples, 2);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = random_in_ball(rng, D, r);
    bool in = true;
    for (std::size_t t = 0; t < D && in; ++t) in = std::abs(center[t] + v[t] - c[t]) <= w;
    if (in) ++hits;
  }
  const double f = static_cast<double>(hits) / static_cast<double>(n);
  const double scale = std::exp(log_ball);
  accumulate(total, {scale * f, true, scale * std::sqrt(f * (1.0 - f) / static_cast<double>(n))});
  return total;
}

}  // namespace mrsl
