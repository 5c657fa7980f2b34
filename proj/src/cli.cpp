#include "mrsl/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mrsl/eval.hpp"
#include "mrsl/experiment_config.hpp"
#include "mrsl/geometry.hpp"
#include "mrsl/io.hpp"
#include "mrsl/kde.hpp"
#include "mrsl/params.hpp"
#include "mrsl/rsl.hpp"
#include "mrsl/samplers.hpp"

namespace mrsl::cli {

namespace {

// Collected while a subcommand runs; turned into manifests at the end.
struct RunRecord {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool acceptance_failed = false;
};

using Runner = std::function<void(std::ostream&, RunRecord&)>;

struct SpecFlags {
  std::string spec = "uniform";
  int d = 2;
  std::size_t D = 3;
  double tau = 1.0;
  double lambda = 0.0;
  double epsilon = 0.25;
  int clusters = 10;
  double bump_weight = 0.7;
  std::string noise = "none";
  double pi = 1.0;
  double box = 0.0;
  double theta = 0.0;

  void add(CLI::App& app) {
    app.add_option("--spec", spec, "Density: uniform, mixture, two_level or lower_bound")
        ->check(CLI::IsMember({"uniform", "mixture", "two_level", "lower_bound"}));
    app.add_option("--d", d, "Manifold dimension")->check(CLI::PositiveNumber);
    app.add_option("--D", D, "Ambient dimension")->check(CLI::PositiveNumber);
    app.add_option("--tau", tau, "Sphere radius (condition number)");
    app.add_option("--lambda", lambda, "Lower-bound instance level; 0 normalizes");
    app.add_option("--epsilon", epsilon, "Salience epsilon");
    app.add_option("--clusters", clusters, "Mixture bump count");
    app.add_option("--bump-weight", bump_weight, "Total mixture weight of the bumps");
    app.add_option("--noise", noise, "none, clutter, additive or additive_shell")
        ->check(CLI::IsMember({"none", "clutter", "additive", "additive_shell"}));
    app.add_option("--pi", pi, "Clutter: weight of the manifold component");
    app.add_option("--box", box, "Clutter box half-width; 0 picks a default");
    app.add_option("--theta", theta, "Additive noise radius");
  }

  ManifoldDensitySpec build() const {
    if (spec == "uniform") return ManifoldDensitySpec::uniform_sphere(d, tau, D);
    if (spec == "mixture") {
      return ManifoldDensitySpec::salient_mixture(d, tau, D, clusters, bump_weight);
    }
    if (spec == "two_level") return ManifoldDensitySpec::two_level_sphere(d, tau, D, epsilon);
    return ManifoldDensitySpec::lower_bound(d, tau, D, epsilon, lambda);
  }

  NoiseSpec noise_spec() const {
    if (noise == "clutter") return NoiseSpec::clutter(pi, box);
    if (noise == "additive") return NoiseSpec::additive(theta, false);
    if (noise == "additive_shell") return NoiseSpec::additive(theta, true);
    return NoiseSpec::none();
  }
};

std::string bool_text(bool b) { return b ? "1" : "0"; }

void write_output(const std::string& path, const std::string& content, RunRecord& rec) {
  write_file(path, content);
  rec.outputs.push_back(path);
}

LabeledSample load_points(const std::string& path, RunRecord& rec) {
  std::istringstream is(read_file(path));
  rec.inputs.push_back(path);
  return read_points(is);
}

// ------------------------------------------------------------------ generate

Runner setup_generate(CLI::App& app) {
  auto flags = std::make_shared<SpecFlags>();
  auto n = std::make_shared<std::size_t>(1000);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto out = std::make_shared<std::string>();
  flags->add(app);
  app.add_option("--n", *n, "Sample size")->check(CLI::PositiveNumber);
  app.add_option("--seed", *seed, "Global seed");
  app.add_option("--out", *out, "Output points file")->required();
  return [=](std::ostream& os, RunRecord& rec) {
    rec.seed = *seed;
    const ManifoldDensitySpec spec = flags->build();
    const LabeledSample s = sample(spec, flags->noise_spec(), *n, *seed);
    std::ostringstream text;
    write_points(text, s);
    write_output(*out, text.str(), rec);
    os << "wrote " << s.size() << " points to " << *out << " fingerprint=" << s.fingerprint
       << "\n";
  };
}

// -------------------------------------------------------------------- params

Runner setup_params(CLI::App& app) {
  struct State {
    SalienceParams p;
    std::string regime = "noiseless";
    std::size_t n = 1000;
    double pi = 1.0;
    std::size_t D = 0;
    std::string out;
  };
  auto s = std::make_shared<State>();
  app.add_option("--sigma", s->p.sigma, "Separation sigma");
  app.add_option("--epsilon", s->p.epsilon, "Salience epsilon");
  app.add_option("--lambda", s->p.lambda, "Cluster density level");
  app.add_option("--tau", s->p.tau, "Condition number tau");
  app.add_option("--d", s->p.d, "Manifold dimension");
  app.add_option("--delta", s->p.delta, "Failure probability");
  app.add_option("--C0", s->p.constants.C0, "Universal constant C0");
  app.add_option("--C1", s->p.constants.C1, "Universal constant C1");
  app.add_option("--C2", s->p.constants.C2, "Universal constant C2");
  app.add_option("--regime", s->regime, "noiseless, clutter, additive, kde, adaptive or all");
  app.add_option("--n", s->n, "Sample size")->check(CLI::PositiveNumber);
  app.add_option("--pi", s->pi, "Clutter weight of the manifold component");
  app.add_option("--D", s->D, "Ambient dimension (clutter gate)");
  app.add_option("--out", s->out, "CSV output path (default: standard output)");
  return [=](std::ostream& os, RunRecord& rec) {
    std::vector<Regime> regimes;
    if (s->regime == "all") {
      regimes = {Regime::Noiseless, Regime::Clutter, Regime::Additive, Regime::Kde,
                 Regime::Adaptive};
    } else {
      regimes = {parse_regime(s->regime)};
    }
    RegimeContext ctx;
    ctx.pi = s->pi;
    ctx.ambient_dim = s->D;
    std::ostringstream csv;
    csv << "regime,n,rho,branch,mu,k,k_raw,r,feasible,lambda_gate,gate_ok,n_min,R,theta_max,"
           "n_upper,n_lower,warnings\n";
    for (Regime regime : regimes) {
      const ParamsReport rep = compute_params(s->p, s->n, regime, ctx);
      std::string warnings;
      for (const auto& w : rep.warnings) {
        if (!warnings.empty()) warnings += "; ";
        warnings += w;
      }
      std::replace(warnings.begin(), warnings.end(), ',', ';');
      csv << to_string(regime) << "," << rep.n << "," << format_double(rep.rho.rho) << ","
          << rep.rho.branch << "," << format_double(rep.mu.mu) << "," << rep.k.k << ","
          << format_double(rep.k.raw) << "," << format_double(rep.r.r) << ","
          << bool_text(rep.r.feasible) << "," << format_double(rep.r.gate_lambda) << ","
          << bool_text(rep.r.gate_ok) << "," << rep.r.n_min << "," << format_double(rep.R)
          << "," << format_double(rep.theta_max) << ","
          << format_double(rep.sizes.upper_estimate) << ","
          << format_double(rep.sizes.lower_estimate) << "," << warnings << "\n";
    }
    if (s->out.empty()) {
      os << csv.str();
    } else {
      write_output(s->out, csv.str(), rec);
    }
  };
}

// ------------------------------------------------------------------- cluster

Runner setup_cluster(CLI::App& app) {
  struct State {
    std::string in, out, sphere, backend = "auto", partition_out;
    std::size_t k = 1;
    double R = 0.0, R_mult = 0.0, horizon = kInfinity, partition_at = -1.0;
    bool adaptive = false;
  };
  auto s = std::make_shared<State>();
  app.add_option("--in", s->in, "Input points file")->required();
  app.add_option("--out", s->out, "Output dendrogram file")->required();
  app.add_option("--k", s->k, "Neighbor count")->required()->check(CLI::PositiveNumber);
  app.add_option("--R", s->R, "Fixed connection radius");
  app.add_option("--R-mult", s->R_mult, "Proportional rule: connect within c * r (default 4)");
  app.add_flag("--adaptive", s->adaptive, "Adaptive activations (needs --sphere)");
  app.add_option("--sphere", s->sphere, "d,tau of the origin-centered sphere for --adaptive");
  app.add_option("--horizon", s->horizon, "Drop events above this radius");
  app.add_option("--backend", s->backend, "auto, dense, sparse or reference")
      ->check(CLI::IsMember({"auto", "dense", "sparse", "reference"}));
  app.add_option("--partition-at", s->partition_at, "Also write the partition at this radius");
  app.add_option("--partition-out", s->partition_out, "Partition output file");
  return [=](std::ostream& os, RunRecord& rec) {
    if (s->R > 0.0 && s->R_mult > 0.0) throw InvalidArgument("give only one of --R and --R-mult");
    const LabeledSample pts = load_points(s->in, rec);
    RSLConfig cfg;
    cfg.k = s->k;
    cfg.rule = s->R > 0.0 ? ConnectionRule::fixed(s->R)
                          : ConnectionRule::proportional(s->R_mult > 0.0 ? s->R_mult : 4.0);
    cfg.horizon = s->horizon;
    if (s->backend == "dense") cfg.backend = SweepBackend::DensePrim;
    if (s->backend == "sparse") cfg.backend = SweepBackend::SparseKruskal;
    if (s->backend == "reference") cfg.backend = SweepBackend::ReferenceKruskal;
    Dendrogram dendro;
    if (s->adaptive) {
      const auto parts = split(s->sphere, ',');
      if (parts.size() != 2) throw InvalidArgument("--adaptive requires --sphere d,tau");
      const SphereSpec sphere = SphereSpec::standard(static_cast<int>(parse_size(parts[0])),
                                                     parse_double(parts[1]), pts.observed.dim);
      const std::vector<SphereSpec> pieces{sphere};
      dendro = adaptive_rsl(pts.observed, cfg, pieces);
    } else {
      dendro = rsl_sweep(pts.observed, cfg);
    }
    std::ostringstream text;
    write_dendrogram(text, dendro);
    write_output(s->out, text.str(), rec);
    const double top = dendro.event_radii().empty() ? 0.0 : dendro.event_radii().back();
    os << "n=" << dendro.n() << " merges=" << dendro.merges().size()
       << " components_at_last_event=" << dendro.components_at(top).size() << "\n";
    if (s->partition_at >= 0.0) {
      if (s->partition_out.empty()) throw InvalidArgument("--partition-at needs --partition-out");
      std::ostringstream ptext;
      write_partition(ptext, dendro.components_at(s->partition_at), dendro.n());
      write_output(s->partition_out, ptext.str(), rec);
    }
  };
}

// ----------------------------------------------------------------------- kde

Runner setup_kde(CLI::App& app) {
  struct State {
    SpecFlags spec;
    std::string in, out, mode = "intrinsic", probes = "samples", partition_out, schedule;
    double h = 0.1, level = -1.0, linkage_R = 0.0, schedule_c = 4.0;
    int kd = 0;
    std::uint64_t seed = 1;
    std::size_t mc = 200000;
  };
  auto s = std::make_shared<State>();
  s->spec.add(app);
  app.add_option("--in", s->in, "Input points file");
  app.add_option("--out", s->out, "CSV output (probe coordinates, fhat, fh, deviation)");
  app.add_option("--h", s->h, "Bandwidth");
  app.add_option("--mode", s->mode, "intrinsic or ambient")
      ->check(CLI::IsMember({"intrinsic", "ambient"}));
  app.add_option("--kernel-d", s->kd, "Intrinsic exponent; 0 uses --d");
  app.add_option("--probes", s->probes, "samples, net or both")
      ->check(CLI::IsMember({"samples", "net", "both"}));
  app.add_option("--level", s->level, "Level for the heuristic level-set partition");
  app.add_option("--linkage-R", s->linkage_R, "Linkage radius for the level-set partition");
  app.add_option("--partition-out", s->partition_out, "Partition output file");
  app.add_option("--seed", s->seed, "Seed for nets and Monte Carlo masses");
  app.add_option("--mc-samples", s->mc, "Monte Carlo samples for population masses");
  app.add_option("--check-schedule", s->schedule, "Bandwidth schedule n:h,n:h,... to check");
  app.add_option("--schedule-c", s->schedule_c, "Doubling constant for --check-schedule");
  return [=](std::ostream& os, RunRecord& rec) {
    rec.seed = s->seed;
    KDEConfig cfg;
    cfg.h = s->h;
    cfg.mode = s->mode == "ambient" ? KDEConfig::Exponent::Ambient
                                    : KDEConfig::Exponent::Intrinsic;
    cfg.d = s->kd > 0 ? s->kd : s->spec.d;
    if (!s->schedule.empty()) {
      std::vector<std::pair<std::size_t, double>> sched;
      for (const auto& item : split(s->schedule, ',')) {
        const auto nh = split(item, ':');
        if (nh.size() != 2) throw InvalidArgument("--check-schedule expects n:h pairs");
        sched.emplace_back(parse_size(nh[0]), parse_double(nh[1]));
      }
      const BandwidthCheck bc = check_bandwidth_schedule(sched, cfg.exponent(s->spec.D),
                                                         s->schedule_c);
      os << "decreasing=" << bool_text(bc.decreasing)
         << " variance_growing=" << bool_text(bc.variance_growing)
         << " log_ratio_growing=" << bool_text(bc.log_ratio_growing)
         << " doubling_ok=" << bool_text(bc.doubling_ok) << " all=" << bool_text(bc.all())
         << "\n";
      if (s->in.empty()) return;
    }
    if (s->in.empty()) throw InvalidArgument("kde: --in is required");
    const LabeledSample pts = load_points(s->in, rec);
    const ManifoldDensitySpec spec = s->spec.build();
    if (spec.ambient_dim() != pts.observed.dim) {
      throw InvalidArgument("kde: --D does not match the points file");
    }
    const ProbeSet which = s->probes == "net"    ? ProbeSet::Net
                           : s->probes == "both" ? ProbeSet::Both
                                                 : ProbeSet::Samples;
    const PointCloud probes =
        default_probes(pts.observed, spec, cfg.h, which, child_seed(s->seed, "kde-net"));
    MassOracleOptions mo;
    mo.mc_samples = s->mc;
    mo.seed = child_seed(s->seed, "kde-mass");
    const DeviationReport rep =
        sup_deviation(pts.observed, spec, cfg, probes, s->spec.noise_spec(), mo);
    os << "max_deviation=" << format_double(rep.max_deviation)
       << " rate=" << format_double(rep.rate) << " normalized=" << format_double(rep.normalized)
       << " regime_warning=" << bool_text(rep.regime_warning)
       << " monte_carlo=" << bool_text(rep.monte_carlo) << "\n";
    if (!s->out.empty()) {
      std::ostringstream csv;
      for (std::size_t j = 0; j < probes.dim; ++j) csv << "x" << j << ",";
      csv << "fhat,fh,deviation\n";
      for (std::size_t p = 0; p < probes.size(); ++p) {
        for (double v : probes.row(p)) csv << format_double(v) << ",";
        csv << format_double(rep.fhat[p]) << "," << format_double(rep.fh[p]) << ","
            << format_double(std::abs(rep.fhat[p] - rep.fh[p])) << "\n";
      }
      write_output(s->out, csv.str(), rec);
    }
    if (!s->partition_out.empty()) {
      if (s->level < 0.0 || !(s->linkage_R > 0.0)) {
        throw InvalidArgument("--partition-out needs --level and --linkage-R");
      }
      std::ostringstream ptext;
      write_partition(ptext, kde_level_clusters(pts.observed, cfg, s->level, s->linkage_R),
                      pts.size());
      write_output(s->partition_out, ptext.str(), rec);
    }
  };
}

// ------------------------------------------------------------------ evaluate

Runner setup_evaluate(CLI::App& app) {
  struct State {
    SpecFlags spec;
    std::string in, dendrogram, out;
    double sigma = 0.0, r = -1.0;
    bool scan = false;
  };
  auto s = std::make_shared<State>();
  s->spec.add(app);
  app.add_option("--in", s->in, "Points file the dendrogram was built from")->required();
  app.add_option("--dendrogram", s->dendrogram, "Dendrogram file")->required();
  app.add_option("--sigma", s->sigma, "Cluster separation; 0 uses the instance default");
  app.add_option("--r", s->r, "Radius at which to read the verdict");
  app.add_flag("--scan", s->scan, "Search all radii for a successful verdict");
  app.add_option("--out", s->out, "CSV output path (default: standard output)");
  return [=](std::ostream& os, RunRecord& rec) {
    const LabeledSample pts = load_points(s->in, rec);
    std::istringstream dtext(read_file(s->dendrogram));
    rec.inputs.push_back(s->dendrogram);
    const Dendrogram dendro = read_dendrogram(dtext);
    if (dendro.n() != pts.size()) throw InvalidArgument("evaluate: point count mismatch");
    const ManifoldDensitySpec spec = s->spec.build();
    const double sigma = s->sigma > 0.0 ? s->sigma : default_sigma(spec);
    const ClusterSet clusters = ground_truth_clusters(spec, pts, sigma);
    ScanResult sr;
    double at = s->r;
    if (s->scan) {
      sr = scan_consistency(dendro, clusters);
      if (sr.success()) at = sr.lo;
    }
    if (at < 0.0) {
      if (!s->scan) throw InvalidArgument("evaluate: give --r or --scan");
      const auto radii = dendro.event_radii();
      at = std::isfinite(sr.lo) ? sr.lo : (radii.empty() ? 0.0 : radii.back());
    }
    const Verdict v = check_consistency(dendro, clusters, at);
    std::ostringstream csv;
    csv << "r,sigma,clusters,vacuous,all_connected,separated,success,scan_lo,scan_hi\n";
    csv << format_double(at) << "," << format_double(sigma) << "," << clusters.size() << ","
        << bool_text(v.vacuous) << "," << bool_text(v.all_connected) << ","
        << bool_text(v.separated) << "," << bool_text(v.success) << ","
        << format_double(sr.lo) << "," << format_double(sr.hi) << "\n";
    if (s->out.empty()) {
      os << csv.str();
    } else {
      write_output(s->out, csv.str(), rec);
    }
  };
}

// ---------------------------------------------------------------- experiment

Runner setup_experiment(CLI::App& app) {
  struct State {
    std::string grid, out_trials, out_aggregate;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
  };
  auto s = std::make_shared<State>();
  app.add_option("--grid", s->grid, "Experiment grid file")->required();
  app.add_option("--trials", s->trials, "Trials per cell; 0 uses the grid file");
  app.add_option("--seed", s->seed, "Base seed; 0 uses the grid file");
  app.add_option("--out-trials", s->out_trials, "Per-trial CSV")->required();
  app.add_option("--out-aggregate", s->out_aggregate, "Aggregate CSV")->required();
  return [=](std::ostream& os, RunRecord& rec) {
    rec.inputs.push_back(s->grid);
    const ExperimentPlan plan = parse_experiment_config(read_file(s->grid));
    const std::size_t trials = s->trials > 0 ? s->trials : plan.trials;
    const std::uint64_t seed = s->seed > 0 ? s->seed : plan.seed;
    rec.seed = seed;
    const EvaluationReport rep = experiment_sweep(plan.cells, trials, seed);
    write_output(s->out_trials, trials_csv(rep), rec);
    write_output(s->out_aggregate, aggregate_csv(rep), rec);
    for (const CellAggregate& a : rep.aggregates) {
      const ExperimentCell& c = rep.cells[a.cell];
      os << "cell " << a.cell << (c.label.empty() ? "" : " [" + c.label + "]")
         << ": p_hat=" << format_double(a.p_hat) << " se=" << format_double(a.se) << " ("
         << a.successes << "/" << a.trials << ", vacuous " << a.vacuous << ", skipped "
         << a.skipped << ")" << (a.acceptance_failed ? " ACCEPTANCE FAILED" : "") << "\n";
    }
    rec.acceptance_failed = rep.acceptance_failed();
  };
}

// ------------------------------------------------------------------- volumes

Runner setup_volumes(CLI::App& app) {
  struct State {
    int d = 2;
    double tau = 1.0;
    std::string r = "0.1";
    std::string out;
  };
  auto s = std::make_shared<State>();
  app.add_option("--d", s->d, "Manifold dimension")->check(CLI::PositiveNumber);
  app.add_option("--tau", s->tau, "Sphere radius");
  app.add_option("--r", s->r, "Comma-separated chord radii");
  app.add_option("--out", s->out, "CSV output path (default: standard output)");
  return [=](std::ostream& os, RunRecord& rec) {
    std::ostringstream csv;
    csv << "d,tau,r,lower,exact,series,upper\n";
    for (const auto& item : split(s->r, ',')) {
      const double r = parse_double(item);
      // nan where a formula is outside its range (bounds r < tau/2, series r <= tau/4).
      double lower = std::nan(""), upper = std::nan(""), series = std::nan("");
      if (r < s->tau / 2.0) {
        const VolumeBounds b = ball_volume_bounds(s->d, s->tau, r);
        lower = b.lower;
        upper = b.upper;
        if (r <= s->tau / 4.0) series = cap_volume_series(s->d, s->tau, r);
      }
      csv << s->d << "," << format_double(s->tau) << "," << format_double(r) << ","
          << format_double(lower) << "," << format_double(cap_volume_exact(s->d, s->tau, r))
          << "," << format_double(series) << "," << format_double(upper) << "\n";
    }
    if (s->out.empty()) {
      os << csv.str();
    } else {
      write_output(s->out, csv.str(), rec);
    }
  };
}

// ------------------------------------------------------------ configuration

using Sections = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

Sections parse_ini(const std::string& text) {
  Sections out;
  std::string section;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw InvalidArgument("config line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    out[section].emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

std::string env_name(const std::string& option) {
  std::string out = "MRSL_";
  for (char c : option) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

std::vector<std::string> long_names(const CLI::App& app) {
  std::vector<std::string> out;
  for (const CLI::Option* opt : app.get_options()) {
    for (const auto& name : opt->get_lnames()) {
      if (name != "help" && name != "config") out.push_back(name);
    }
  }
  return out;
}

std::string find_config_path(const std::vector<std::string>& args, bool use_env) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  if (use_env) {
    if (const char* v = std::getenv("MRSL_CONFIG")) return v;
  }
  return "";
}

std::vector<std::string> config_args(const std::string& path, const std::string& subcommand,
                                     const std::vector<std::string>& names) {
  std::vector<std::string> out;
  if (path.empty()) return out;
  const Sections sections = parse_ini(read_file(path));
  const auto known = [&](const std::string& key) {
    return std::find(names.begin(), names.end(), key) != names.end();
  };
  if (const auto it = sections.find(""); it != sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (known(key)) out.push_back("--" + key + "=" + value);
    }
  }
  if (const auto it = sections.find(subcommand); it != sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (!known(key)) {
        throw InvalidArgument("config file: unknown key '" + key + "' in [" + subcommand + "]");
      }
      out.push_back("--" + key + "=" + value);
    }
  }
  return out;
}

std::vector<std::string> env_args(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& name : names) {
    if (name == "jobs") continue;
    if (const char* v = std::getenv(env_name(name).c_str())) out.push_back("--" + name + "=" + v);
  }
  return out;
}

void write_manifest(const std::string& subcommand, const std::vector<std::string>& effective,
                    const CLI::App& app, const RunRecord& rec, double seconds) {
  std::ostringstream m;
  m << "# mrsl-manifest v1\n";
  m << "subcommand=" << subcommand << "\n";
  m << "version=" << kVersion << "\n";
  m << "seed=" << rec.seed << "\n";
  m << "seed_scheme=child(seed,label)=splitmix64(seed^fnv1a64(label))\n";
  for (const auto& p : rec.inputs) m << "input=" << p << "\n";
  for (const auto& p : rec.outputs) m << "output=" << p << "\n";
  std::istringstream resolved(app.config_to_str(true, false));
  std::string line;
  while (std::getline(resolved, line)) {
    if (!line.empty() && line[0] != '#' && line[0] != '[') m << "config." << line << "\n";
  }
  m << "arg=" << subcommand << "\n";
  for (const auto& a : effective) m << "arg=" << a << "\n";
  m << "wall_clock_seconds=" << format_double(seconds) << "\n";
  for (const auto& p : rec.outputs) write_file(p + ".manifest", m.str());
}

int run_rerun(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() != 2 || args[1].rfind("--", 0) == 0) {
    err << "usage: mrsl rerun <manifest>\n";
    return kExitUsage;
  }
  std::istringstream is(read_file(args[1]));
  std::vector<std::string> replay;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("arg=", 0) == 0) replay.push_back(line.substr(4));
  }
  if (replay.empty()) {
    err << "rerun: manifest has no arg= lines\n";
    return kExitUsage;
  }
  return dispatch(replay, out, err, DispatchOptions{false, false});
}

}  // namespace

std::string usage() {
  return "usage: mrsl <subcommand> [options]\n"
         "subcommands:\n"
         "  generate    sample a synthetic manifold density to a points file\n"
         "  params      theorem-driven parameters (rho, mu, k, r, gates) as CSV\n"
         "  cluster     robust single linkage dendrogram of a points file\n"
         "  kde         ball-kernel density estimate and deviation from f_h\n"
         "  evaluate    consistency verdict of a dendrogram against ground truth\n"
         "  experiment  run an experiment grid, write per-trial and aggregate CSVs\n"
         "  volumes     cap volume bounds, exact value and series as CSV\n"
         "  rerun       replay a manifest\n"
         "common options: --config <file>, --jobs <n>; env MRSL_<OPTION> overrides the file,\n"
         "flags override env. Run 'mrsl <subcommand> --help' for details.\n";
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchOptions& options) {
  if (args.empty()) {
    err << usage();
    return kExitUsage;
  }
  const std::string sub = args[0];
  if (sub == "--help" || sub == "-h" || sub == "help") {
    out << usage();
    return kExitOk;
  }
  try {
    if (sub == "rerun") return run_rerun(args, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"mrsl " + sub, "mrsl " + sub};
  app.set_help_flag("--help", "Print this help message and exit");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();
  Runner runner;
  if (sub == "generate") {
    runner = setup_generate(app);
  } else if (sub == "params") {
    runner = setup_params(app);
  } else if (sub == "cluster") {
    runner = setup_cluster(app);
  } else if (sub == "kde") {
    runner = setup_kde(app);
  } else if (sub == "evaluate") {
    runner = setup_evaluate(app);
  } else if (sub == "experiment") {
    runner = setup_experiment(app);
  } else if (sub == "volumes") {
    runner = setup_volumes(app);
  } else {
    err << "unknown subcommand '" << sub << "'\n" << usage();
    return kExitUsage;
  }
  std::string config_path;
  int jobs = 0;
  app.add_option("--config", config_path, "key = value file with [subcommand] sections");
  app.add_option("--jobs", jobs, "Worker threads (0: OpenMP default)");

  const std::vector<std::string> user(args.begin() + 1, args.end());
  std::vector<std::string> effective;
  try {
    const auto names = long_names(app);
    if (options.use_config_file) {
      effective = config_args(find_config_path(user, options.use_environment), sub, names);
    }
    if (options.use_environment) {
      for (auto& a : env_args(names)) effective.push_back(std::move(a));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  effective.insert(effective.end(), user.begin(), user.end());

  try {
    std::vector<std::string> reversed(effective.rbegin(), effective.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  try {
    runner(out, rec);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidSpec& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RegimeViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(sub, effective, app, rec, seconds);
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return rec.acceptance_failed ? kExitFailure : kExitOk;
}

}  // namespace mrsl::cli
