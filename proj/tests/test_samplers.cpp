#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mrsl/samplers.hpp"

using namespace mrsl;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> frame_point(const SphereSpec& s, std::vector<double> y) {
  return s.embed(y);
}

double empirical_mass(const PointCloud& pts, std::span<const double> c, double r) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (squared_distance(pts.row(i), c) <= r * r) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pts.size());
}

}  // namespace

TEST(Sample, UniformSphereSupport) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(2, 1.0, 3);
  const LabeledSample s = sample(spec, NoiseSpec::none(), 1000, 1);
  ASSERT_EQ(s.size(), 1000u);
  EXPECT_FALSE(s.latent.has_value());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(norm(s.observed.row(i)), 1.0, 1e-9);
}

TEST(Sample, ClutterFraction) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(2, 1.0, 3);
  const LabeledSample s = sample(spec, NoiseSpec::clutter(0.8), 10000, 2);
  std::size_t clutter = 0;
  const double w = NoiseSpec::clutter(0.8).resolved_half_width(spec);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.origin[i] == LabeledSample::kClutter) {
      ++clutter;
      for (double v : s.observed.row(i)) EXPECT_LE(std::abs(v), w);
    }
  }
  EXPECT_NEAR(static_cast<double>(clutter) / 10000.0, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / 10000.0));
}

TEST(Sample, AdditiveNoiseIsBounded) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(2, 1.0, 4);
  for (bool shell : {false, true}) {
    const LabeledSample s = sample(spec, NoiseSpec::additive(0.01, shell), 2000, 3);
    ASSERT_TRUE(s.latent.has_value());
    ASSERT_EQ(s.latent->size(), s.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = distance(s.observed.row(i), s.latent->row(i));
      worst = std::max(worst, e);
      if (shell) {
        EXPECT_NEAR(e, 0.01, 1e-12);
      }
      EXPECT_NEAR(norm(s.latent->row(i)), 1.0, 1e-9);
    }
    EXPECT_LE(worst, 0.01 + 1e-15);
  }
}

TEST(Sample, SeedDeterminism) {
  const auto spec = ManifoldDensitySpec::salient_mixture(2, 1.0, 5);
  const auto a = sample(spec, NoiseSpec::clutter(0.9), 500, 7);
  const auto b = sample(spec, NoiseSpec::clutter(0.9), 500, 7);
  const auto c = sample(spec, NoiseSpec::clutter(0.9), 500, 8);
  EXPECT_EQ(a.observed, b.observed);
  EXPECT_EQ(a.origin, b.origin);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  EXPECT_NE(a.observed, c.observed);
  EXPECT_NE(a.fingerprint, c.fingerprint);
}

TEST(Sample, RejectsBadInput) {
  EXPECT_THROW(ManifoldDensitySpec::uniform_sphere(2, 1.0, 2), InvalidSpec);
  EXPECT_THROW(ManifoldDensitySpec::lower_bound(2, 0.5, 3, 0.3), InvalidSpec);
  const auto spec = ManifoldDensitySpec::lower_bound(2, 0.2, 3, 0.4);
  EXPECT_THROW(sample(spec, NoiseSpec::clutter(0.8, 1.0), 10, 1), InvalidSpec);
}

TEST(Density, LowerBoundLevels) {
  const auto spec = ManifoldDensitySpec::lower_bound(2, 0.2, 3, 0.4);
  const auto& lb = std::get<LowerBoundInstance>(spec.variant());
  const double x1 = 0.9;
  const auto high = frame_point(lb.unit, {x1, std::sqrt(1.0 - x1 * x1), 0.0});
  const auto mid = frame_point(lb.unit, {0.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(spec.density_at(high).value, lb.lambda);
  EXPECT_DOUBLE_EQ(spec.density_at(mid).value, lb.lambda * 0.6);
  const auto off = frame_point(lb.unit, {0.0, 0.0, 1.5});
  EXPECT_TRUE(spec.density_at(off).off_support);
  EXPECT_EQ(spec.density_at(off).value, 0.0);
  // Top of the glued hemisphere.
  const auto cap_top = frame_point(lb.unit, {lb.seam() + 2.0 * lb.tau, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(spec.density_at(cap_top).value, lb.lambda);
}

TEST(Density, UniformIsInverseVolume) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(3, 2.0, 5);
  const LabeledSample s = sample(spec, NoiseSpec::none(), 20, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_DOUBLE_EQ(spec.density_at(s.observed.row(i)).value,
                     1.0 / sphere_surface_volume(3, 2.0));
  }
}

TEST(LowerBoundInstance, Normalization) {
  for (int d : {1, 2, 3, 4}) {
    for (double tau : {0.1, 0.2, 0.4}) {
      const auto spec = ManifoldDensitySpec::lower_bound(d, tau, static_cast<std::size_t>(d) + 2, 0.4);
      const auto& lb = std::get<LowerBoundInstance>(spec.variant());
      EXPECT_LE(lb.lambda * lb.component_volume(), 1.0 + 1e-12);
      double total = 0.0;
      for (int p = 0; p <= 4; ++p) total += lb.piece_mass(static_cast<LowerBoundInstance::Piece>(p));
      EXPECT_NEAR(total, 1.0, 1e-12);
      // Every piece inside one big ball: total mass 1.
      const auto& c = spec.frame().center();
      EXPECT_NEAR(ball_mass_oracle(spec, c, 10.0 * spec.support_radius()).mass, 1.0, 1e-9);
    }
  }
}

TEST(SphereMixture, WeightsAndLayout) {
  const auto spec = ManifoldDensitySpec::salient_mixture(2, 1.0, 20);
  const auto& m = std::get<SphereMixture>(spec.variant());
  ASSERT_EQ(m.bump_axes.size(), 10u);
  EXPECT_NEAR(m.bump_weight_total + m.background_weight, 1.0, 1e-15);
  EXPECT_NEAR(m.bump_weight_total, 0.7, 1e-15);
  double min_sep = 10.0;
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = a + 1; b < 10; ++b) {
      min_sep = std::min(min_sep, distance(m.bump_axes[a], m.bump_axes[b]));
    }
  }
  // Bumps are disjoint with room between them.
  EXPECT_LT(2.0 * m.bump_radius, min_sep);
  EXPECT_NEAR(ball_mass_oracle(spec, spec.frame().center(), 3.0).mass, 1.0, 1e-12);
  EXPECT_GT(spec.cluster_level(), m.background_density());
}

TEST(MassOracle, Examples) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(2, 1.0, 3);
  const std::vector<double> pole{1.0, 0.0, 0.0};
  EXPECT_NEAR(ball_mass_oracle(spec, pole, 0.5).mass, 1.0 / 16.0, 1e-13);
  EXPECT_EQ(ball_mass_oracle(spec, pole, 0.0).mass, 0.0);
  EXPECT_FALSE(ball_mass_oracle(spec, pole, 0.5).monte_carlo);
}

TEST(MassOracle, ClutterDecomposition) {
  const auto spec = ManifoldDensitySpec::uniform_sphere(2, 1.0, 3);
  const NoiseSpec noise = NoiseSpec::clutter(0.8);
  const double w = noise.resolved_half_width(spec);
  const std::vector<double> c{0.6, 0.8, 0.0};
  const double r = 0.4;
  const MassResult m = ball_mass_oracle(spec, c, r, noise);
  const double manifold = ball_mass_oracle(spec, c, r).mass;
  const double box = 0.2 * (4.0 / 3.0) * kPi * r * r * r / std::pow(2.0 * w, 3);
  EXPECT_NEAR(m.mass, 0.8 * manifold + box, 1e-14);
  // Ball that leaves the box: Monte Carlo inside the oracle, checked against sampling.
  const std::vector<double> edge{w - 0.1, 0.0, 0.0};
  const MassResult me = ball_mass_oracle(spec, edge, 0.5, noise);
  EXPECT_TRUE(me.monte_carlo);
  const LabeledSample s = sample(spec, noise, 400000, 5);
  const double p = empirical_mass(s.observed, edge, 0.5);
  const double se = std::hypot(std::sqrt(p * (1.0 - p) / 400000.0), me.standard_error);
  EXPECT_LE(std::abs(p - me.mass), 3.0 * se + 1e-12);
}

TEST(MassOracle, ExactAcrossLowerBoundSeams) {
  const auto spec = ManifoldDensitySpec::lower_bound(2, 0.2, 3, 0.4);
  const auto& lb = std::get<LowerBoundInstance>(spec.variant());
  const LabeledSample s = sample(spec, NoiseSpec::none(), 400000, 9);
  const double a = lb.seam();
  const std::vector<std::vector<double>> centers{
      frame_point(lb.unit, {0.5, std::sqrt(0.75), 0.0}),     // density step
      frame_point(lb.unit, {a, std::sqrt(1.0 - a * a), 0.0}),  // glued seam
      frame_point(lb.unit, {a + 2.0 * lb.tau, 0.0, 0.0}),    // cap top
      frame_point(lb.unit, {0.0, 1.0, 0.0})};
  for (const auto& c : centers) {
    for (double r : {0.05, 0.15, 0.3}) {
      const MassResult m = ball_mass_oracle(spec, c, r);
      EXPECT_FALSE(m.monte_carlo);
      const double p = empirical_mass(s.observed, c, r);
      const double se = std::sqrt(std::max(m.mass, 1e-6) * (1.0 - m.mass) / 400000.0);
      EXPECT_LE(std::abs(p - m.mass), 4.0 * se) << r;
    }
  }
}

TEST(MassOracle, ExactAcrossMixtureBumpEdges) {
  const auto spec = ManifoldDensitySpec::salient_mixture(2, 1.0, 3);
  const auto& mix = std::get<SphereMixture>(spec.variant());
  const LabeledSample s = sample(spec, NoiseSpec::none(), 400000, 10);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 8; ++i) {
    const auto& axis = mix.bump_axes[static_cast<std::size_t>(i)];
    // Center near the bump rim so the ball straddles it.
    auto y = random_in_cap(rng, axis, 1.2 * mix.bump_angle());
    const auto c = mix.sphere.embed(y);
    const double r = 0.6 * mix.bump_radius;
    const MassResult m = ball_mass_oracle(spec, c, r);
    EXPECT_FALSE(m.monte_carlo);
    const double p = empirical_mass(s.observed, c, r);
    EXPECT_LE(std::abs(p - m.mass), 4.0 * std::sqrt(m.mass * (1.0 - m.mass) / 400000.0) + 1e-6);
  }
}

TEST(MassOracle, EmpiricalVersusOracleFrequency) {
  const auto spec = ManifoldDensitySpec::lower_bound(2, 0.2, 4, 0.4);
  std::mt19937_64 rng(12);
  const std::size_t n = 4000;
  const LabeledSample balls = sample(spec, NoiseSpec::none(), 100, 77);
  std::size_t ok = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LabeledSample s = sample(spec, NoiseSpec::none(), n, seed);
    for (std::size_t b = 0; b < balls.size(); ++b) {
      const double r = 0.02 + 0.3 * uniform01(rng);
      const double P = ball_mass_oracle(spec, balls.observed.row(b), r).mass;
      const double Pn = empirical_mass(s.observed, balls.observed.row(b), r);
      ++total;
      if (std::abs(Pn - P) <= 4.0 * std::sqrt(P / n) + 4.0 / n) ++ok;
    }
  }
  EXPECT_GE(static_cast<double>(ok) / total, 0.95);
}

TEST(LowerBoundInstance, PieceFrequenciesAndSeparator) {
  const auto spec = ManifoldDensitySpec::lower_bound(2, 0.2, 3, 0.4);
  const auto& lb = std::get<LowerBoundInstance>(spec.variant());
  const std::size_t n = 50000;
  const LabeledSample s = sample(spec, NoiseSpec::none(), n, 4);
  std::vector<std::size_t> counts(5, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int o = s.origin[i];
    ASSERT_GE(o, 0);
    ASSERT_LE(o, 4);
    ++counts[static_cast<std::size_t>(o)];
    const auto y = lb.unit.frame_coords(s.observed.row(i));
    if (o == LowerBoundInstance::kTop) {
      EXPECT_GE(y[0], lb.seam() - 1e-9);
    }
    if (o == LowerBoundInstance::kBottom) {
      EXPECT_LE(y[0], -lb.seam() + 1e-9);
    }
    if (o == LowerBoundInstance::kBandHigh) {
      EXPECT_GT(std::abs(y[0]), 0.5 - 1e-12);
    }
    if (o == LowerBoundInstance::kBandLow) {
      EXPECT_LE(std::abs(y[0]), 0.5 + 1e-12);
    }
    EXPECT_FALSE(spec.density_at(s.observed.row(i)).off_support);
  }
  for (int p = 0; p <= 4; ++p) {
    const double w = lb.piece_mass(static_cast<LowerBoundInstance::Piece>(p));
    EXPECT_NEAR(counts[static_cast<std::size_t>(p)] / static_cast<double>(n), w,
                4.0 * std::sqrt(w * (1.0 - w) / n) + 1e-9)
        << p;
  }
  // Any path inside C from x1 > 0 to x1 < 0 passes the equator, where the
  // density is lambda (1 - eps): walk great circles between sampled pairs.
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p{0.6 + 0.3 * uniform01(rng), 0.0, 0.0};
    p[1] = std::sqrt(1.0 - p[0] * p[0]);
    std::vector<double> q{-p[0], -p[1], 0.0};
    double min_abs = 1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double s_ = k / 1000.0;
      std::vector<double> v{(1 - s_) * p[0] + s_ * q[0], (1 - s_) * p[1] + s_ * q[1] + 1e-3, 0.0};
      const double nv = norm(v);
      min_abs = std::min(min_abs, std::abs(v[0] / nv));
    }
    EXPECT_LT(min_abs, 1e-2);
  }
}
