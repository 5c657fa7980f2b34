#include "mrsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace mrsl {

namespace {

constexpr double kPi = std::numbers::pi;

bool on_component_c(int origin) {
  return origin >= LowerBoundInstance::kTop && origin <= LowerBoundInstance::kBandLow;
}

std::string bool_text(bool b) { return b ? "1" : "0"; }

}  // namespace

// ----------------------------------------------------------- ground truth

double default_sigma(const ManifoldDensitySpec& spec) {
  if (const auto* m = std::get_if<SphereMixture>(&spec.variant())) return 0.5 * m->bump_radius;
  if (std::holds_alternative<LowerBoundInstance>(spec.variant())) return 0.25;
  throw InvalidArgument("the uniform sphere has no clusters");
}

ClusterSet ground_truth_clusters(const ManifoldDensitySpec& spec, const LabeledSample& sample,
                                 double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("clusters: sigma must be > 0");
  const PointCloud& latent = sample.latent_or_observed();
  ClusterSet out;
  out.sigma = sigma;
  if (const auto* m = std::get_if<SphereMixture>(&spec.variant())) {
    if (sigma >= m->bump_radius) throw InvalidArgument("clusters: sigma must be below the bump radius");
    const double tau = m->sphere.tau();
    const double reach = m->bump_radius - sigma;
    out.members.resize(m->bump_axes.size());
    out.separator = "bump boundaries at chord " + format_double(m->bump_radius);
    for (std::size_t i = 0; i < latent.size(); ++i) {
      if (sample.origin[i] == LabeledSample::kClutter) continue;
      const auto y = m->sphere.frame_coords(latent.row(i));
      for (std::size_t j = 0; j < m->bump_axes.size(); ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < y.size(); ++t) {
          const double diff = y[t] - tau * m->bump_axes[j][t];
          s += diff * diff;
        }
        if (std::sqrt(s) <= reach) {
          out.members[j].push_back(i);
          break;
        }
      }
    }
    return out;
  }
  if (const auto* lb = std::get_if<LowerBoundInstance>(&spec.variant())) {
    if (sigma >= kPi / 3.0) throw InvalidArgument("clusters: sigma must be below pi/3");
    const double cut = std::cos(kPi / 3.0 - sigma);
    out.members.resize(2);
    out.separator = "equator x1 = 0";
    for (std::size_t i = 0; i < latent.size(); ++i) {
      if (!on_component_c(sample.origin[i])) continue;
      const double y0 = lb->unit.frame_coords(latent.row(i))[0];
      if (y0 >= cut) out.members[0].push_back(i);
      if (y0 <= -cut) out.members[1].push_back(i);
    }
    return out;
  }
  throw InvalidArgument("the uniform sphere has no clusters");
}

// ----------------------------------------------------------------- verdicts

Verdict check_consistency(const Dendrogram& dendrogram, const ClusterSet& clusters, double r) {
  Verdict v;
  v.connected.assign(clusters.size(), false);
  for (const auto& m : clusters.members) {
    if (m.empty()) v.vacuous = true;
  }
  const auto labels = dendrogram.labels_at(r);
  v.all_connected = true;
  v.separated = true;
  std::unordered_map<std::uint32_t, std::size_t> owner;
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    const auto& m = clusters.members[j];
    bool connected = !m.empty();
    for (std::size_t i : m) {
      const std::uint32_t l = labels[i];
      if (l == Dendrogram::kInactive || l != labels[m.front()]) connected = false;
      if (l == Dendrogram::kInactive) continue;
      const auto [it, inserted] = owner.emplace(l, j);
      if (!inserted && it->second != j) v.separated = false;
    }
    v.connected[j] = connected;
    v.all_connected = v.all_connected && connected;
  }
  v.success = !v.vacuous && v.all_connected && v.separated;
  return v;
}

ScanResult scan_consistency(const Dendrogram& dendrogram, const ClusterSet& clusters) {
  ScanResult out;
  const std::size_t n = dendrogram.n();
  constexpr int kNone = -1, kMixed = -2;
  std::vector<int> owner(n, kNone);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::uint32_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  std::vector<double> full(clusters.size(), kInfinity);
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    const auto& m = clusters.members[j];
    if (m.empty()) out.vacuous = true;
    for (std::size_t i : m) {
      owner[i] = static_cast<int>(j);
      count[i] = 1;
    }
    if (m.size() == 1) full[j] = dendrogram.activation()[m.front()];
  }
  const auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Merge& e : dendrogram.merges()) {
    const std::uint32_t a = find(static_cast<std::uint32_t>(e.a));
    const std::uint32_t b = find(static_cast<std::uint32_t>(e.b));
    const int oa = owner[a], ob = owner[b];
    int merged = kNone;
    if (oa == kMixed || ob == kMixed || (oa >= 0 && ob >= 0 && oa != ob)) {
      merged = kMixed;
      if (oa != kMixed && ob != kMixed) out.hi = std::min(out.hi, e.radius);
    } else {
      merged = oa >= 0 ? oa : ob;
    }
    const std::uint32_t root = std::min(a, b), other = std::max(a, b);
    parent[other] = root;
    count[root] = merged >= 0 ? count[a] + count[b] : 0;
    owner[root] = merged;
    if (merged >= 0 && count[root] == clusters.members[static_cast<std::size_t>(merged)].size()) {
      full[static_cast<std::size_t>(merged)] =
          std::min(full[static_cast<std::size_t>(merged)], e.radius);
    }
  }
  out.lo = clusters.size() == 0 ? 0.0 : *std::max_element(full.begin(), full.end());
  return out;
}

LemmaRegionCheck lemma_region_check(const Dendrogram& dendrogram, const ManifoldDensitySpec& spec,
                                    const LabeledSample& sample, double sigma, double r) {
  const auto* lb = std::get_if<LowerBoundInstance>(&spec.variant());
  if (lb == nullptr) throw InvalidArgument("lemma_region_check needs the lower-bound instance");
  LemmaRegionCheck out;
  const PointCloud& latent = sample.latent_or_observed();
  const double inside_cut = std::cos(kPi / 3.0 - std::min(r, kPi / 3.0));
  const double band = sigma > r ? std::sin(sigma - r) : -1.0;
  for (std::size_t i = 0; i < latent.size(); ++i) {
    if (!on_component_c(sample.origin[i])) continue;
    const double y0 = std::abs(lb->unit.frame_coords(latent.row(i))[0]);
    const bool active = dendrogram.activation()[i] <= r;
    if (y0 >= inside_cut) {
      ++out.inside_total;
      if (!active) ++out.inside_missing;
    } else if (y0 <= band) {
      ++out.band_total;
      if (active) ++out.band_present;
    }
  }
  return out;
}

// ------------------------------------------------------- uniform convergence

UniformConvergenceReport verify_uniform_convergence(const LabeledSample& sample,
                                                    const ManifoldDensitySpec& spec,
                                                    const PointCloud& net, std::size_t k,
                                                    double delta, double C0,
                                                    const NoiseSpec& noise,
                                                    const MassOracleOptions& opts) {
  const PointCloud& X = sample.observed;
  const std::size_t n = X.size();
  if (k < 1 || k > n) throw InvalidArgument("uniform convergence: need 1 <= k <= n");
  if (!(delta > 0.0 && delta < 1.0) || !(C0 > 0.0)) {
    throw InvalidArgument("uniform convergence: need 0 < delta < 1 and C0 > 0");
  }
  if (!net.empty() && net.dim != X.dim) throw InvalidArgument("uniform convergence: net dimension");
  UniformConvergenceReport rep;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  rep.mu = 1.0 + std::log(nn) + std::log(std::max<double>(1.0, static_cast<double>(net.size())));
  rep.k_below_mu = kk < rep.mu;
  const double cd = 2.0 * C0 * std::log(2.0 / delta);
  rep.thresholds[0] = cd * rep.mu / nn;
  rep.thresholds[1] = kk / nn + cd * std::sqrt(kk * rep.mu) / nn;
  rep.thresholds[2] = kk / nn - cd * std::sqrt(kk * rep.mu) / nn;

  const std::size_t total = n + net.size();
  rep.centers = total;
  std::size_t v[3] = {0, 0, 0};
  bool mc = false;
#pragma omp parallel
  {
    std::vector<double> dist(n);
    std::size_t lv[3] = {0, 0, 0};
    bool lmc = false;
#pragma omp for schedule(dynamic, 8)
    for (std::size_t c = 0; c < total; ++c) {
      const bool is_sample = c < n;
      const auto z = is_sample ? X.row(c) : net.row(c - n);
      for (std::size_t j = 0; j < n; ++j) dist[j] = squared_distance(z, X.row(j));
      std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
      const double rk = std::sqrt(dist[k - 1]);
      const MassResult at_rk = ball_mass_oracle(spec, z, rk, noise, opts);
      lmc = lmc || at_rk.monte_carlo;
      if (at_rk.mass > rep.thresholds[1]) ++lv[1];
      if (rep.thresholds[2] > 0.0 && at_rk.mass <= rep.thresholds[2]) ++lv[2];
      if (!is_sample) {
        const double d1 = std::sqrt(*std::min_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k)));
        const MassResult at_d1 = ball_mass_oracle(spec, z, d1, noise, opts);
        lmc = lmc || at_d1.monte_carlo;
        if (at_d1.mass > rep.thresholds[0]) ++lv[0];
      }
    }
#pragma omp critical
    {
      for (int t = 0; t < 3; ++t) v[t] += lv[t];
      mc = mc || lmc;
    }
  }
  for (int t = 0; t < 3; ++t) rep.violations[t] = v[t];
  rep.monte_carlo = mc;
  return rep;
}

// ---------------------------------------------------------------- RuleChoice

RuleChoice RuleChoice::parse(const std::string& text) {
  RuleChoice out;
  if (text == "theorem") return {Kind::Theorem, 0.0};
  if (text == "adaptive") return {Kind::AdaptiveTheorem, 0.0};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidArgument("rule: expected theorem, adaptive, fixed:<R> or proportional:<c>");
  const std::string head = text.substr(0, colon);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidArgument("rule: bad number in '" + text + "'");
  }
  if (!(value > 0.0)) throw InvalidArgument("rule: value must be > 0");
  if (head == "fixed") return {Kind::Fixed, value};
  if (head == "proportional") return {Kind::Proportional, value};
  throw InvalidArgument("rule: unknown kind '" + head + "'");
}

std::string RuleChoice::describe() const {
  switch (kind) {
    case Kind::Theorem:
      return "theorem";
    case Kind::AdaptiveTheorem:
      return "adaptive";
    case Kind::Fixed:
      return "fixed:" + format_double(value);
    case Kind::Proportional:
      return "proportional:" + format_double(value);
  }
  return "theorem";
}

// -------------------------------------------------------------- experiments

std::string ExperimentCell::key() const {
  std::ostringstream os;
  os << instance << "|n=" << n << "|d=" << d << "|D=" << D << "|eps=" << format_double(epsilon)
     << "|tau=" << format_double(tau) << "|sigma=" << format_double(sigma)
     << "|lambda=" << format_double(lambda) << "|clusters=" << clusters
     << "|bump=" << format_double(bump_weight) << "|noise=" << static_cast<int>(noise.kind)
     << "," << format_double(noise.pi) << "," << format_double(noise.box_half_width) << ","
     << format_double(noise.theta) << "," << noise.shell << "|regime=" << to_string(regime)
     << "|delta=" << format_double(delta) << "|C=" << format_double(constants.C0) << ","
     << format_double(constants.C1) << "," << format_double(constants.C2) << "|k=" << k
     << "|rule=" << rule.describe() << "|adaptive=" << adaptive << "|scan=" << scan
     << "|gate=" << enforce_gate;
  return os.str();
}

ManifoldDensitySpec build_instance(const ExperimentCell& cell) {
  if (cell.instance == "mixture") {
    return ManifoldDensitySpec::salient_mixture(cell.d, cell.tau, cell.D, cell.clusters,
                                                cell.bump_weight);
  }
  if (cell.instance == "lower_bound") {
    return ManifoldDensitySpec::lower_bound(cell.d, cell.tau, cell.D, cell.epsilon, cell.lambda);
  }
  if (cell.instance == "two_level") {
    return ManifoldDensitySpec::two_level_sphere(cell.d, cell.tau, cell.D, cell.epsilon);
  }
  throw InvalidArgument("unknown instance '" + cell.instance + "'");
}

std::uint64_t trial_seed(std::uint64_t base_seed, const ExperimentCell& cell, std::size_t trial) {
  return splitmix64(base_seed + fnv1a64(cell.key()) + static_cast<std::uint64_t>(trial));
}

TrialRecord run_trial(const ExperimentCell& cell, std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  rec.n = cell.n;
  rec.d = cell.d;
  rec.D = cell.D;
  rec.epsilon = cell.epsilon;
  rec.regime = cell.regime;

  const ManifoldDensitySpec spec = build_instance(cell);
  const double sigma = cell.sigma > 0.0 ? cell.sigma : default_sigma(spec);
  SalienceParams p;
  p.sigma = sigma;
  p.epsilon = cell.epsilon;
  p.lambda = spec.cluster_level();
  p.tau = cell.tau;
  p.d = cell.d;
  p.delta = cell.delta;
  p.constants = cell.constants;
  RegimeContext ctx;
  ctx.ambient_dim = cell.D;
  if (cell.noise.kind == NoiseSpec::Kind::Clutter) ctx.pi = cell.noise.pi;

  const RhoResult rh = rho(p, cell.regime);
  rec.rho = rh.rho;
  const MuResult m = mu(cell.n, rh.rho, cell.d);
  rec.k = cell.k > 0 ? cell.k : choose_k(p, m.mu, cell.regime).k;
  if (rec.k > cell.n) {
    rec.skipped = true;
    rec.reason = "k exceeds n";
    return rec;
  }
  const RResult rr = choose_r(p, rec.k, cell.n, m.mu, cell.regime, ctx);
  rec.r = rr.r;
  rec.feasible = rr.feasible;
  rec.gate_ok = rr.gate_ok;
  if (cell.enforce_gate && !(rr.feasible && rr.gate_ok)) {
    rec.skipped = true;
    rec.reason = !rr.feasible ? "r exceeds rho (needs n >= " + std::to_string(rr.n_min) + ")"
                              : "lambda below gate";
    return rec;
  }

  NoiseSpec noise = cell.noise;
  if (noise.kind == NoiseSpec::Kind::Additive && !(noise.theta > 0.0)) {
    noise.theta = theta_gate(p, rh.rho);
  }
  const LabeledSample data = sample(spec, noise, cell.n, seed);

  RSLConfig cfg;
  cfg.k = rec.k;
  switch (cell.rule.kind) {
    case RuleChoice::Kind::Theorem:
      cfg.rule = ConnectionRule::fixed(theorem_R(rh.rho, cell.regime));
      break;
    case RuleChoice::Kind::AdaptiveTheorem:
      cfg.rule = adaptive_connection_rule(rr.r, cell.tau);
      break;
    case RuleChoice::Kind::Fixed:
      cfg.rule = ConnectionRule::fixed(cell.rule.value);
      break;
    case RuleChoice::Kind::Proportional:
      cfg.rule = ConnectionRule::proportional(cell.rule.value);
      break;
  }
  cfg.horizon = cell.scan ? kInfinity : rr.r;
  const Dendrogram dendro = cell.adaptive
                                ? adaptive_rsl(data.observed, cfg, spec.sphere_pieces())
                                : rsl_sweep(data.observed, cfg);
  const ClusterSet clusters = ground_truth_clusters(spec, data, sigma);

  double read_at = rr.r;
  if (cell.scan) {
    const ScanResult sr = scan_consistency(dendro, clusters);
    rec.scan_lo = sr.lo;
    rec.scan_hi = sr.hi;
    if (sr.success()) read_at = sr.lo;
  }
  const Verdict v = check_consistency(dendro, clusters, read_at);
  rec.vacuous = v.vacuous;
  rec.connected_A = !v.connected.empty() && v.connected[0];
  rec.connected_Aprime = v.connected.size() > 1 && v.connected[1];
  rec.all_connected = v.all_connected;
  rec.separated = v.separated;
  rec.success = v.success;
  if (cell.scan) rec.r = read_at;
  const std::vector<std::uint32_t> labels = dendro.labels_at(read_at);
  std::vector<std::uint32_t> cluster_labels;
  for (const auto& members : clusters.members) {
    for (std::size_t i : members) {
      if (labels[i] != Dendrogram::kInactive) cluster_labels.push_back(labels[i]);
    }
  }
  std::sort(cluster_labels.begin(), cluster_labels.end());
  for (std::size_t i = 0; i < data.origin.size(); ++i) {
    if (data.origin[i] != LabeledSample::kClutter) continue;
    ++rec.clutter_total;
    if (std::binary_search(cluster_labels.begin(), cluster_labels.end(), labels[i])) {
      ++rec.clutter_in_clusters;
    }
  }
  return rec;
}

bool EvaluationReport::acceptance_failed() const {
  return std::any_of(aggregates.begin(), aggregates.end(),
                     [](const CellAggregate& a) { return a.acceptance_failed; });
}

EvaluationReport experiment_sweep(const std::vector<ExperimentCell>& grid, std::size_t trials,
                                  std::uint64_t base_seed) {
  if (grid.empty()) throw InvalidArgument("experiment: empty grid");
  if (trials < 1) throw InvalidArgument("experiment: trials must be >= 1");
  EvaluationReport rep;
  rep.cells = grid;
  const std::size_t total = grid.size() * trials;
  rep.trials.resize(total);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t slot = 0; slot < total; ++slot) {
    const std::size_t c = slot / trials, t = slot % trials;
    const std::uint64_t seed = trial_seed(base_seed, grid[c], t);
    TrialRecord rec;
    try {
      rec = run_trial(grid[c], seed);
    } catch (const std::exception& e) {
      rec = TrialRecord{};
      rec.seed = seed;
      rec.n = grid[c].n;
      rec.d = grid[c].d;
      rec.D = grid[c].D;
      rec.epsilon = grid[c].epsilon;
      rec.regime = grid[c].regime;
      rec.skipped = true;
      rec.reason = e.what();
    }
    rec.cell = c;
    rec.trial = t;
    rep.trials[slot] = std::move(rec);
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    CellAggregate agg;
    agg.cell = c;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialRecord& r = rep.trials[c * trials + t];
      if (r.skipped) {
        ++agg.skipped;
      } else if (r.vacuous) {
        ++agg.vacuous;
      } else {
        ++agg.trials;
        if (r.success) ++agg.successes;
      }
    }
    if (agg.trials > 0) {
      agg.p_hat = static_cast<double>(agg.successes) / static_cast<double>(agg.trials);
      agg.se = std::sqrt(agg.p_hat * (1.0 - agg.p_hat) / static_cast<double>(agg.trials));
    }
    if (grid[c].accept_min) {
      agg.acceptance_failed = agg.trials == 0 || agg.p_hat < *grid[c].accept_min;
    }
    rep.aggregates.push_back(agg);
  }
  return rep;
}

std::string trials_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "cell,label,trial,seed,n,d,D,epsilon,regime,k,r,rho,feasible,gate_ok,connected_A,"
        "connected_Aprime,all_connected,separated,success,vacuous,skipped,scan_lo,scan_hi,clutter_total,"
        "clutter_in_clusters,reason\n";
  for (const TrialRecord& t : report.trials) {
    std::string reason = t.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    os << t.cell << "," << report.cells[t.cell].label << "," << t.trial << "," << t.seed << ","
       << t.n << "," << t.d << "," << t.D << "," << format_double(t.epsilon) << ","
       << to_string(t.regime) << "," << t.k << "," << format_double(t.r) << ","
       << format_double(t.rho) << "," << bool_text(t.feasible) << "," << bool_text(t.gate_ok)
       << "," << bool_text(t.connected_A) << "," << bool_text(t.connected_Aprime) << ","
       << bool_text(t.all_connected) << "," << bool_text(t.separated) << ","
       << bool_text(t.success) << "," << bool_text(t.vacuous) << "," << bool_text(t.skipped)
       << "," << format_double(t.scan_lo) << "," << format_double(t.scan_hi) << ","
       << t.clutter_total << "," << t.clutter_in_clusters << "," << reason
       << "\n";
  }
  return os.str();
}

std::string aggregate_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "n,d,D,epsilon,regime,successes,trials,p_hat,se,cell,label,vacuous,skipped\n";
  for (const CellAggregate& a : report.aggregates) {
    const ExperimentCell& c = report.cells[a.cell];
    os << c.n << "," << c.d << "," << c.D << "," << format_double(c.epsilon) << ","
       << to_string(c.regime) << "," << a.successes << "," << a.trials << ","
       << format_double(a.p_hat) << "," << format_double(a.se) << "," << a.cell << "," << c.label
       << "," << a.vacuous << "," << a.skipped << "\n";
  }
  return os.str();
}

}  // namespace mrsl
