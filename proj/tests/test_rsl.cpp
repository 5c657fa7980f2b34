#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mrsl/geometry.hpp"
#include "mrsl/io.hpp"
#include "mrsl/rsl.hpp"

using namespace mrsl;

namespace {

PointCloud line(std::vector<double> xs) { return PointCloud(1, std::move(xs)); }

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t D, bool lattice) {
  PointCloud p(D);
  std::vector<double> x(D);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = lattice ? static_cast<double>(rng() % 4) * 0.5 : uniform01(rng);
    p.push_back(x);
  }
  return p;
}

// Rebuilds G_{r,R} from scratch and returns its components by DFS.
Partition brute_components(const PointCloud& p, std::size_t k, const ConnectionRule& rule,
                           double r) {
  const std::size_t n = p.size();
  std::vector<double> rk(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(std::sqrt(squared_distance(p.row(i), p.row(j))));
    std::sort(row.begin(), row.end());
    rk[i] = row[k - 1];
  }
  const bool fixed = rule.kind == ConnectionRule::Kind::FixedR;
  std::vector<char> seen(n, 0);
  Partition out;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s] || rk[s] > r) continue;
    std::vector<std::size_t> comp, stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (seen[v] || rk[v] > r) continue;
        const double dist = std::sqrt(squared_distance(p.row(u), p.row(v)));
        // Proportional: ||X_i - X_j|| <= c r, tested as ||X_i - X_j|| / c <= r.
        if (fixed ? dist <= rule.value : dist / rule.value <= r) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  return out;
}

std::vector<double> probe_radii(const Dendrogram& dg) {
  std::vector<double> ev = dg.event_radii(), out = ev;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) out.push_back(0.5 * (ev[i] + ev[i + 1]));
  if (!ev.empty()) {
    out.push_back(ev.front() * 0.5);
    out.push_back(ev.back() * 2.0 + 1.0);
  }
  return out;
}

Partition sorted_blocks(Partition p) {
  for (auto& b : p) std::sort(b.begin(), b.end());
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

TEST(RslSweep, FourPointExample) {
  const PointCloud p = line({0.0, 0.1, 5.0, 5.1});
  RSLConfig cfg;
  cfg.k = 2;
  cfg.rule = ConnectionRule::fixed(1.0);
  const Dendrogram dg = rsl_sweep(p, cfg);
  for (double a : dg.activation()) EXPECT_NEAR(a, 0.1, 1e-12);
  EXPECT_EQ(dg.components_at(0.1000001), (Partition{{0, 1}, {2, 3}}));
  EXPECT_EQ(dg.merges().size(), 2u);
  EXPECT_EQ(dg.components_at(1e9), (Partition{{0, 1}, {2, 3}}));
  EXPECT_TRUE(dg.components_at(0.05).empty());

  cfg.rule = ConnectionRule::proportional(4.0);
  const Dendrogram prop = rsl_sweep(p, cfg);
  ASSERT_EQ(prop.merges().size(), 3u);
  for (int m = 0; m < 2; ++m) {
    const Merge& e = prop.merges()[m];
    EXPECT_EQ(e.radius, std::max(prop.activation()[e.a], prop.activation()[e.b]));
  }
  EXPECT_DOUBLE_EQ(prop.merges()[2].radius, 4.9 / 4.0);
  EXPECT_DOUBLE_EQ(ConnectionRule::proportional(4.0).edge_radius(0.1, 0.1, 0.01), 0.1);
}

TEST(RslSweep, SinglePointAndErrors) {
  RSLConfig cfg;
  const Dendrogram dg = rsl_sweep(line({3.0}), cfg);
  EXPECT_EQ(dg.activation(), std::vector<double>{0.0});
  EXPECT_TRUE(dg.merges().empty());
  cfg.k = 2;
  EXPECT_THROW(rsl_sweep(line({3.0}), cfg), InvalidArgument);
}

TEST(RslSweep, SingletonsBetweenActivationAndMerge) {
  const PointCloud p = line({0.0, 1.0, 3.0});
  RSLConfig cfg;
  cfg.k = 1;
  cfg.rule = ConnectionRule::proportional(1.0);
  const Dendrogram dg = rsl_sweep(p, cfg);
  EXPECT_EQ(dg.components_at(0.5), (Partition{{0}, {1}, {2}}));
  EXPECT_EQ(dg.components_at(1.0), (Partition{{0, 1}, {2}}));
  EXPECT_EQ(dg.components_at(2.0), (Partition{{0, 1, 2}}));
}

TEST(RslSweep, BruteForceOracle) {
  std::mt19937_64 rng(11);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 60, D = 1 + rng() % 5;
    const PointCloud p = random_cloud(rng, n, D, t % 5 == 0);
    RSLConfig cfg;
    cfg.k = 1 + rng() % std::min<std::size_t>(n, 8);
    cfg.rule = t % 2 == 0 ? ConnectionRule::fixed(0.1 + uniform01(rng))
                          : ConnectionRule::proportional(0.5 + 4.0 * uniform01(rng));
    cfg.backend = static_cast<SweepBackend>(1 + t % 3);
    const Dendrogram dg = rsl_sweep(p, cfg);
    for (double r : probe_radii(dg)) {
      if (dg.components_at(r) != brute_components(p, cfg.k, cfg.rule, r)) ++mismatches;
    }
  }
  EXPECT_EQ(mismatches, 0u);
}

TEST(RslSweep, BackendsAgree) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 40; ++t) {
    const PointCloud p = random_cloud(rng, 50 + rng() % 150, 1 + rng() % 4, t % 3 == 0);
    RSLConfig cfg;
    cfg.k = 1 + rng() % 6;
    cfg.rule = t % 2 ? ConnectionRule::fixed(0.3) : ConnectionRule::proportional(4.0);
    cfg.horizon = t % 4 == 0 ? kInfinity : 0.2;
    cfg.backend = SweepBackend::ReferenceKruskal;
    const Dendrogram ref = rsl_sweep(p, cfg);
    for (SweepBackend b : {SweepBackend::DensePrim, SweepBackend::SparseKruskal, SweepBackend::Auto}) {
      cfg.backend = b;
      const Dendrogram other = rsl_sweep(p, cfg);
      for (double r : probe_radii(ref)) {
        ASSERT_EQ(other.components_at(r), ref.components_at(r)) << t;
      }
    }
  }
}

TEST(RslSweep, PermutationInvariance) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng() % 60;
    const PointCloud p = random_cloud(rng, n, 2, false);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointCloud q(2);
    for (std::size_t i : perm) q.push_back(p.row(i));
    RSLConfig cfg;
    cfg.k = 2;
    const Dendrogram a = rsl_sweep(p, cfg), b = rsl_sweep(q, cfg);
    EXPECT_EQ(a.event_radii(), b.event_radii());
    for (double r : probe_radii(a)) {
      Partition mapped;
      for (const auto& block : b.components_at(r)) {
        std::vector<std::size_t> m;
        for (std::size_t i : block) m.push_back(perm[i]);
        mapped.push_back(m);
      }
      ASSERT_EQ(sorted_blocks(mapped), sorted_blocks(a.components_at(r)));
    }
  }
}

TEST(RslSweep, ScaleEquivariance) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 30; ++t) {
    const PointCloud p = random_cloud(rng, 2 + rng() % 50, 3, false);
    const double s = 4.0;  // power of two keeps every distance exact
    PointCloud q = p;
    for (double& v : q.coords) v *= s;
    RSLConfig cfg;
    cfg.k = 3 <= p.size() ? 3 : 1;
    cfg.rule = ConnectionRule::fixed(0.4);
    const Dendrogram a = rsl_sweep(p, cfg);
    cfg.rule = ConnectionRule::fixed(0.4 * s);
    const Dendrogram b = rsl_sweep(q, cfg);
    const auto ea = a.event_radii(), eb = b.event_radii();
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_DOUBLE_EQ(eb[i], s * ea[i]);
    for (double r : probe_radii(a)) EXPECT_EQ(a.components_at(r), b.components_at(s * r));
  }
}

TEST(RslSweep, MonotoneCoarsening) {
  std::mt19937_64 rng(15);
  const PointCloud p = random_cloud(rng, 200, 2, false);
  RSLConfig cfg;
  cfg.k = 4;
  const Dendrogram dg = rsl_sweep(p, cfg);
  const auto radii = probe_radii(dg);
  for (std::size_t t = 0; t + 1 < radii.size(); t += 7) {
    const double r1 = radii[t], r2 = radii[t + 1] > r1 ? radii[t + 1] : r1 * 1.5;
    const auto l2 = dg.labels_at(std::max(r1, r2));
    for (const auto& block : dg.components_at(r1)) {
      for (std::size_t i : block) EXPECT_EQ(l2[i], l2[block.front()]);
    }
  }
}

TEST(Dendrogram, RejectsBadMerges) {
  EXPECT_THROW(Dendrogram({0.0, 0.0}, {{1.0, 1, 0}}), InvalidArgument);
  EXPECT_THROW(Dendrogram({0.0, 0.0, 0.0}, {{2.0, 0, 1}, {1.0, 0, 2}}), InvalidArgument);
  EXPECT_THROW(Dendrogram({0.0, 0.0, 0.0}, {{1.0, 0, 1}, {2.0, 1, 2}}), InvalidArgument);
  EXPECT_THROW(Dendrogram({0.0, 3.0}, {{1.0, 0, 1}}), InvalidArgument);
}

TEST(Dendrogram, IoRoundTrip) {
  std::mt19937_64 rng(16);
  const PointCloud p = random_cloud(rng, 120, 3, true);
  RSLConfig cfg;
  cfg.k = 3;
  const Dendrogram dg = rsl_sweep(p, cfg);
  std::stringstream ss;
  write_dendrogram(ss, dg);
  const Dendrogram back = read_dendrogram(ss);
  EXPECT_EQ(back.activation(), dg.activation());
  EXPECT_EQ(back.merges(), dg.merges());
}

TEST(Vball, Examples) {
  const auto s2 = SphereSpec::standard(2, 1.0, 3);
  const std::vector<double> north{0.0, 0.0, 1.0};
  EXPECT_EQ(vball_radius(s2, north, 0.0), 0.0);
  EXPECT_NEAR(vball_radius(s2, north, M_PI / 4.0), 0.5, 1e-9);
  const auto s3 = SphereSpec::standard(3, 1.0, 4);
  const std::vector<double> pole{0.0, 0.0, 0.0, 1.0};
  const double r = 0.05;
  const double rx = vball_radius(s3, pole, unit_ball_volume(3) * r * r * r);
  EXPECT_GE(rx, r * (1 - 6 * r));
  EXPECT_LE(rx, r * (1 + 6 * r));
  EXPECT_THROW(vball_radius(s2, north, 100.0), InvalidArgument);
  const std::vector<double> off{0.0, 0.0, 2.0};
  EXPECT_THROW(vball_radius(s2, off, 0.1), InvalidArgument);
}

TEST(Vball, RoundTrip) {
  std::mt19937_64 rng(17);
  for (int d = 1; d <= 4; ++d) {
    const auto s = SphereSpec::standard(d, 0.7, d + 1);
    std::vector<double> x(d + 1, 0.0);
    x[d] = 0.7;
    for (int t = 0; t < 50; ++t) {
      const double r = 1.3 * uniform01(rng) + 0.01;
      const double V = cap_volume_exact(d, 0.7, r);
      EXPECT_NEAR(vball_radius(s, x, V), r, 1e-7) << d;
    }
  }
}

TEST(Adaptive, ThresholdIsSmallestFeasibleR) {
  std::mt19937_64 rng(18);
  const auto s = SphereSpec::standard(3, 1.0, 4);
  const std::vector<double> x{0.0, 0.0, 0.0, 1.0};
  for (int t = 0; t < 50; ++t) {
    const double rk = 0.8 * uniform01(rng) + 1e-3;
    const double a = adaptive_threshold(3, 1.0, rk);
    const auto feasible = [&](double r) {
      return rk <= vball_radius(s, x, unit_ball_volume(3) * std::pow(r, 3));
    };
    EXPECT_TRUE(feasible(a * (1 + 1e-8)));
    EXPECT_FALSE(feasible(a * (1 - 1e-6)));
  }
  EXPECT_EQ(adaptive_threshold(2, 1.0, 0.0), 0.0);
}

TEST(Adaptive, MatchesPlainOnTwoSphere) {
  Rng rng(19);
  const auto s = SphereSpec::standard(2, 1.0, 3);
  PointCloud p(3);
  for (int i = 0; i < 300; ++i) p.push_back(s.embed(random_unit_vector(rng, 3)));
  RSLConfig cfg;
  cfg.k = 5;
  cfg.rule = ConnectionRule::fixed(0.3);
  const std::vector<SphereSpec> pieces{s};
  const Dendrogram plain = rsl_sweep(p, cfg), adaptive = adaptive_rsl(p, cfg, pieces);
  ASSERT_EQ(plain.merges().size(), adaptive.merges().size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(plain.activation()[i], adaptive.activation()[i], 1e-9);
  }
  for (std::size_t m = 0; m < plain.merges().size(); ++m) {
    EXPECT_NEAR(plain.merges()[m].radius, adaptive.merges()[m].radius, 1e-9);
  }
}

TEST(Adaptive, OffManifoldRejected) {
  const auto s = SphereSpec::standard(2, 1.0, 3);
  const PointCloud p(3, {0.0, 0.0, 1.0, 0.0, 0.0, 1.5});
  RSLConfig cfg;
  EXPECT_THROW(adaptive_rsl(p, cfg, std::vector<SphereSpec>{s}), InvalidArgument);
}
