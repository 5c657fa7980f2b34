#include "mrsl/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrsl/common.hpp"
#include "mrsl/geometry.hpp"

namespace mrsl {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Noiseless:
      return "noiseless";
    case Regime::Clutter:
      return "clutter";
    case Regime::Additive:
      return "additive";
    case Regime::Kde:
      return "kde";
    case Regime::Adaptive:
      return "adaptive";
  }
  return "noiseless";
}

Regime parse_regime(const std::string& name) {
  for (Regime r : {Regime::Noiseless, Regime::Clutter, Regime::Additive, Regime::Kde,
                   Regime::Adaptive}) {
    if (to_string(r) == name) return r;
  }
  throw InvalidArgument("unknown regime '" + name + "'");
}

void SalienceParams::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(sigma > 0.0) || !(tau > 0.0) || !(lambda > 0.0)) {
    throw InvalidArgument("sigma, tau and lambda must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (d < 1) throw InvalidArgument("d must be >= 1");
  if (!(constants.C0 > 0.0 && constants.C1 > 0.0 && constants.C2 > 0.0)) {
    throw InvalidArgument("universal constants must be > 0");
  }
}

RhoResult rho(const SalienceParams& p, Regime regime) {
  p.validate();
  const double et = p.epsilon * p.tau / p.d;
  double s = 0.0, e = 0.0, t = 0.0;
  switch (regime) {
    case Regime::Noiseless:
      s = 3.0 * p.sigma / 16.0, e = et / 72.0, t = p.tau / 16.0;
      break;
    case Regime::Clutter:
      s = p.sigma / 7.0, e = et / 72.0, t = p.tau / 24.0;
      break;
    case Regime::Additive:
      s = p.sigma / 7.0, e = et / 144.0, t = p.tau / 24.0;
      break;
    case Regime::Kde:
      s = p.sigma, e = et / 72.0, t = p.tau / 8.0;
      break;
    case Regime::Adaptive:
      s = p.sigma / 10.0, e = std::numeric_limits<double>::infinity(), t = p.tau / 16.0;
      break;
  }
  RhoResult out{s, "sigma"};
  if (e < out.rho) out = {e, "epsilon"};
  if (t < out.rho) out = {t, "tau"};
  return out;
}

MuResult mu(std::size_t n, double rho_value, int d) {
  if (n < 1) throw InvalidArgument("mu: n must be >= 1");
  if (!(rho_value > 0.0)) throw InvalidArgument("mu: rho must be > 0");
  if (d < 0) throw InvalidArgument("mu: d must be >= 0");
  MuResult out;
  out.mu = std::log(static_cast<double>(n)) + d * std::log(1.0 / rho_value);
  out.negative_term = d > 0 && rho_value >= 1.0;
  return out;
}

double mu_poly(std::size_t n, double A) {
  if (n < 1) throw InvalidArgument("mu_poly: n must be >= 1");
  if (!(A > 0.0)) throw InvalidArgument("mu_poly: A must be > 0");
  return 2.0 * A * std::log(static_cast<double>(n));
}

double c_delta(const SalienceParams& p) { return 2.0 * p.constants.C0 * std::log(2.0 / p.delta); }

KResult choose_k(const SalienceParams& p, double mu_value, Regime regime) {
  if (!(p.epsilon > 0.0)) throw InvalidArgument("choose_k: epsilon must be > 0");
  if (!(p.delta > 0.0 && p.delta < 2.0)) throw InvalidArgument("choose_k: delta must lie in (0, 2)");
  if (!(mu_value >= 0.0)) throw InvalidArgument("choose_k: mu must be >= 0");
  KResult out;
  out.factor = regime == Regime::Clutter ? 144.0 : 16.0;
  const double cd = c_delta(p);
  out.raw = out.factor * cd * cd * mu_value / (p.epsilon * p.epsilon);
  const double ceiled = std::ceil(out.raw);
  if (ceiled < 1.0) {
    out.k = 1;
    out.clamped = true;
  } else {
    out.k = static_cast<std::size_t>(std::min(ceiled, 1e18));
  }
  return out;
}

double theorem_k(const SalienceParams& p, double mu_value) {
  if (!(p.epsilon > 0.0)) throw InvalidArgument("theorem_k: epsilon must be > 0");
  const double l = std::log(1.0 / p.delta);
  return p.constants.C1 * l * l * mu_value / (p.epsilon * p.epsilon);
}

namespace {

// Coefficient of the deviation term sqrt(k mu) / n in the regime's r equation.
double deviation_coefficient(const SalienceParams& p, Regime regime) {
  if (regime == Regime::Clutter || regime == Regime::Adaptive) {
    return p.constants.C2 * std::log(1.0 / p.delta);
  }
  return c_delta(p);
}

}  // namespace

double r_equation_lhs(const SalienceParams& p, double r, Regime regime, const RegimeContext& ctx) {
  const double vd = unit_ball_volume(p.d);
  const double e = p.epsilon;
  double pref = vd * p.lambda;
  switch (regime) {
    case Regime::Noiseless:
    case Regime::Kde:
      pref *= 1.0 - e / 6.0;
      break;
    case Regime::Clutter:
      if (!(ctx.pi > 0.0 && ctx.pi <= 1.0)) throw InvalidArgument("clutter: pi must lie in (0, 1]");
      pref *= ctx.pi * (1.0 - e / 6.0);
      break;
    case Regime::Additive:
      pref *= (1.0 - e / 12.0) * (1.0 - e / 6.0);
      break;
    case Regime::Adaptive:
      break;
  }
  return pref * std::pow(r, p.d);
}

double lambda_gate(const SalienceParams& p, std::size_t k, std::size_t n, double rho_value,
                   Regime regime, const RegimeContext& ctx) {
  const int d = p.d;
  const double kn = static_cast<double>(k) / static_cast<double>(n);
  double gate = 2.0 / (unit_ball_volume(d) * std::pow(rho_value, d)) * kn;
  if (regime == Regime::Clutter && ctx.pi < 1.0) {
    if (ctx.ambient_dim < static_cast<std::size_t>(d) + 1) {
      throw InvalidArgument("clutter gate: ambient dimension D must be >= d + 1");
    }
    const double D = static_cast<double>(ctx.ambient_dim);
    const double ratio = d / D;
    const double log_term = ratio * log_unit_ball_volume(static_cast<int>(ctx.ambient_dim)) +
                            ratio * std::log(1.0 - ctx.pi) - ratio * std::log(p.epsilon) +
                            (1.0 - ratio) * std::log(kn);
    const double second = 2.0 * std::exp(log_term) / (unit_ball_volume(d) * ctx.pi);
    gate = std::max(gate, second);
  }
  return gate;
}

RResult choose_r(const SalienceParams& p, std::size_t k, std::size_t n, double mu_value,
                 Regime regime, const RegimeContext& ctx) {
  p.validate();
  if (n < 1 || k < 1) throw InvalidArgument("choose_r: need n >= 1 and k >= 1");
  if (k > n) throw InvalidArgument("choose_r: k exceeds n");
  RResult out;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double coef = deviation_coefficient(p, regime);
  const double dev = coef * std::sqrt(kk * std::max(mu_value, 0.0));
  out.rhs = kk / nn + dev / nn;
  out.prefactor = r_equation_lhs(p, 1.0, regime, ctx);
  out.r = std::pow(out.rhs / out.prefactor, 1.0 / p.d);
  out.rho = rho(p, regime).rho;
  out.feasible = out.r <= out.rho;
  out.gate_lambda = lambda_gate(p, k, n, out.rho, regime, ctx);
  out.gate_ok = p.lambda >= out.gate_lambda;
  const double need = (kk + dev) / (out.prefactor * std::pow(out.rho, p.d));
  out.n_min = need >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                             : static_cast<std::uint64_t>(std::ceil(need));
  return out;
}

SampleSizeBounds sample_size_bound(const SalienceParams& p, Regime regime) {
  p.validate();
  const double rho_value = rho(p, regime).rho;
  const int d = p.d;
  SampleSizeBounds out;
  const double base =
      d / (p.lambda * p.epsilon * p.epsilon * unit_ball_volume(d) * std::pow(rho_value, d));
  out.upper_estimate = p.constants.C1 * base * std::log(std::max(base, std::exp(1.0)));
  out.lower_estimate = std::pow(d, 0.5 * d) /
                       (std::pow(p.tau, d) * p.lambda * std::pow(p.epsilon, 0.5 * d));
  return out;
}

double theta_gate(const SalienceParams& p, double rho_value) {
  return rho_value * p.epsilon / (24.0 * p.d);
}

double theorem_R(double rho_value, Regime regime) {
  return (regime == Regime::Additive ? 5.0 : 4.0) * rho_value;
}

ParamsReport compute_params(const SalienceParams& p, std::size_t n, Regime regime,
                            const RegimeContext& ctx) {
  ParamsReport rep;
  rep.regime = regime;
  rep.n = n;
  rep.rho = rho(p, regime);
  if (p.epsilon >= 0.5) rep.warnings.push_back("epsilon >= 1/2 is outside the theorems' range");
  rep.mu = mu(n, rep.rho.rho, p.d);
  if (rep.mu.negative_term) rep.warnings.push_back("rho >= 1: d log(1/rho) is not positive");
  rep.k = choose_k(p, rep.mu.mu, regime);
  if (rep.k.clamped) rep.warnings.push_back("k clamped to 1");
  if (rep.k.k > n) {
    rep.warnings.push_back("k exceeds n; r evaluated at k = n");
  }
  rep.r = choose_r(p, std::min(rep.k.k, n), n, rep.mu.mu, regime, ctx);
  if (!rep.r.feasible) {
    rep.warnings.push_back("r > rho: infeasible at this n (needs n >= " +
                           std::to_string(rep.r.n_min) + ")");
  }
  if (!rep.r.gate_ok) rep.warnings.push_back("lambda below the theorem gate");
  rep.R = theorem_R(rep.rho.rho, regime);
  rep.theta_max = theta_gate(p, rep.rho.rho);
  rep.sizes = sample_size_bound(p, regime);
  return rep;
}

}  // namespace mrsl
