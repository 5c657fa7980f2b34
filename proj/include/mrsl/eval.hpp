#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrsl/kde.hpp"
#include "mrsl/params.hpp"
#include "mrsl/rsl.hpp"
#include "mrsl/samplers.hpp"

namespace mrsl {

/// Ground-truth clusters restricted to a sample: members[j] lists the
/// sample indices whose latent point lies in cluster j. Clutter points
/// never belong to a cluster.
struct ClusterSet {
  std::vector<std::vector<std::size_t>> members;
  double sigma = 0.0;
  std::string separator;

  std::size_t size() const noexcept { return members.size(); }
};

/// Lower-bound instance: A = {x1 >= cos(pi/3 - sigma)}, A' its mirror
/// image, separated by the equator band. Mixture: cluster j = latent
/// points within chord (b - sigma) of bump j, b the bump chord radius.
ClusterSet ground_truth_clusters(const ManifoldDensitySpec& spec, const LabeledSample& sample,
                                 double sigma);
/// Separation scale used when the caller gives none.
double default_sigma(const ManifoldDensitySpec& spec);

struct Verdict {
  bool vacuous = false;
  std::vector<bool> connected;  // per cluster
  bool all_connected = false;
  bool separated = false;
  bool success = false;
};

Verdict check_consistency(const Dendrogram& dendrogram, const ClusterSet& clusters, double r);

/// Radii at which the verdict is a success: the half-open interval
/// [lo, hi) (empty when lo >= hi).
struct ScanResult {
  bool vacuous = false;
  double lo = kInfinity;  // every cluster active and internally connected
  double hi = kInfinity;  // first merge joining two clusters
  bool success() const noexcept { return !vacuous && lo < hi; }
};

ScanResult scan_consistency(const Dendrogram& dendrogram, const ClusterSet& clusters);

/// Operational form of the separation and connectedness lemmas on the
/// lower-bound instance: inside points present, separator band absent.
struct LemmaRegionCheck {
  std::size_t inside_total = 0;
  std::size_t inside_missing = 0;  // points of A_{sigma-r} u A'_{sigma-r} inactive at r
  std::size_t band_total = 0;
  std::size_t band_present = 0;    // points of S_{sigma-r} active at r
  bool ok() const noexcept { return inside_missing == 0 && band_present == 0; }
};

LemmaRegionCheck lemma_region_check(const Dendrogram& dendrogram, const ManifoldDensitySpec& spec,
                                    const LabeledSample& sample, double sigma, double r);

struct UniformConvergenceReport {
  std::size_t centers = 0;
  std::size_t violations[3] = {0, 0, 0};
  double mu = 0.0;  // 1 + log n + log |N|
  double thresholds[3] = {0.0, 0.0, 0.0};
  bool monte_carlo = false;
  bool k_below_mu = false;
  bool any_violation() const noexcept {
    return violations[0] + violations[1] + violations[2] > 0;
  }
};

/// Checks the three implications for every ball centered at a sample or
/// net point, over all radii. Because P_n(B(z, s)) is a step function and
/// P(B(z, s)) is continuous and nondecreasing in s, each implication only
/// needs P evaluated at the nearest-sample distance and at r_k(z).
UniformConvergenceReport verify_uniform_convergence(const LabeledSample& sample,
                                                    const ManifoldDensitySpec& spec,
                                                    const PointCloud& net, std::size_t k,
                                                    double delta, double C0,
                                                    const NoiseSpec& noise = NoiseSpec::none(),
                                                    const MassOracleOptions& opts = {});

// ---------------------------------------------------------------- experiments

struct RuleChoice {
  enum class Kind { Theorem, Fixed, Proportional, AdaptiveTheorem };
  Kind kind = Kind::Proportional;
  double value = 4.0;

  static RuleChoice parse(const std::string& text);
  std::string describe() const;
};

struct ExperimentCell {
  std::string instance = "mixture";  // mixture | lower_bound | two_level
  std::size_t n = 1000;
  int d = 2;
  std::size_t D = 3;
  double epsilon = 0.25;
  double tau = 1.0;
  double sigma = 0.0;   // <= 0: default_sigma
  double lambda = 0.0;  // lower-bound instance; <= 0: 1 / vol(C)
  int clusters = 10;
  double bump_weight = 0.7;
  NoiseSpec noise;
  Regime regime = Regime::Noiseless;
  double delta = 0.05;
  UniversalConstants constants;
  std::size_t k = 0;    // 0: choose_k
  RuleChoice rule;
  bool adaptive = false;
  bool scan = false;          // verdict over all r instead of the theorem r
  bool enforce_gate = true;   // skip cells whose r exceeds rho or fails the lambda gate
  std::optional<double> accept_min;  // acceptance threshold on p_hat
  std::string label;

  std::string key() const;
};

struct TrialRecord {
  std::size_t cell = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  int d = 0;
  std::size_t D = 0;
  double epsilon = 0.0;
  Regime regime = Regime::Noiseless;
  std::size_t k = 0;
  double r = 0.0;
  double rho = 0.0;
  bool feasible = false;
  bool gate_ok = false;
  bool connected_A = false;
  bool connected_Aprime = false;
  bool all_connected = false;
  bool separated = false;
  bool success = false;
  bool vacuous = false;
  bool skipped = false;
  std::string reason;
  double scan_lo = kInfinity;
  double scan_hi = kInfinity;
  std::size_t clutter_total = 0;
  std::size_t clutter_in_clusters = 0;  // clutter points sharing a component with a cluster at r
};

struct CellAggregate {
  std::size_t cell = 0;
  std::size_t successes = 0;
  std::size_t trials = 0;   // counted (non-vacuous, non-skipped) trials
  std::size_t vacuous = 0;
  std::size_t skipped = 0;
  double p_hat = 0.0;
  double se = 0.0;
  bool acceptance_failed = false;
};

struct EvaluationReport {
  std::vector<ExperimentCell> cells;
  std::vector<TrialRecord> trials;
  std::vector<CellAggregate> aggregates;
  bool acceptance_failed() const;
};

ManifoldDensitySpec build_instance(const ExperimentCell& cell);
std::uint64_t trial_seed(std::uint64_t base_seed, const ExperimentCell& cell, std::size_t trial);
TrialRecord run_trial(const ExperimentCell& cell, std::uint64_t seed);
EvaluationReport experiment_sweep(const std::vector<ExperimentCell>& grid, std::size_t trials,
                                  std::uint64_t base_seed);

std::string trials_csv(const EvaluationReport& report);
std::string aggregate_csv(const EvaluationReport& report);

}  // namespace mrsl
