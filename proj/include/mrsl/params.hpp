#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mrsl {

enum class Regime { Noiseless, Clutter, Additive, Kde, Adaptive };

std::string to_string(Regime r);
Regime parse_regime(const std::string& name);

struct UniversalConstants {
  double C0 = 1.0;
  double C1 = 64.0;  // 16 (2 C0)^2
  double C2 = 2.0;   // 2 C0
};

struct SalienceParams {
  double sigma = 1.0;
  double epsilon = 0.25;
  double lambda = 1.0;
  double tau = 1.0;
  int d = 2;
  double delta = 0.05;
  UniversalConstants constants;

  void validate() const;
};

/// Regime-specific quantities that are not part of the salience parameters.
struct RegimeContext {
  double pi = 1.0;              // clutter mixture weight
  std::size_t ambient_dim = 0;  // D, needed by the clutter gate
};

struct RhoResult {
  double rho = 0.0;
  std::string branch;  // which term attains the minimum: sigma, epsilon or tau
};

RhoResult rho(const SalienceParams& p, Regime regime);

struct MuResult {
  double mu = 0.0;
  bool negative_term = false;  // rho >= 1 makes d log(1/rho) <= 0
};

MuResult mu(std::size_t n, double rho, int d);
/// mu~ = 2 A log n for densities bounded by n^A.
double mu_poly(std::size_t n, double A);

/// C_delta = 2 C0 log(2 / delta).
double c_delta(const SalienceParams& p);

struct KResult {
  std::size_t k = 1;
  double raw = 0.0;     // value before the ceiling
  double factor = 16.0; // leading factor in front of C_delta^2
  bool clamped = false;
};

/// k = ceil(factor C_delta^2 mu / eps^2) with factor 144 under clutter, 16 otherwise.
KResult choose_k(const SalienceParams& p, double mu, Regime regime);
/// Theorem-level k = C1 log^2(1/delta) mu / eps^2 (not rounded).
double theorem_k(const SalienceParams& p, double mu);

struct RResult {
  double r = 0.0;
  double rho = 0.0;
  double rhs = 0.0;        // k/n + deviation term
  double prefactor = 0.0;  // r^d coefficient of the defining equation
  bool feasible = false;   // r <= rho
  bool gate_ok = false;    // lambda >= gate_lambda
  double gate_lambda = 0.0;
  std::uint64_t n_min = 0; // smallest n with r <= rho at this k and mu
};

RResult choose_r(const SalienceParams& p, std::size_t k, std::size_t n, double mu, Regime regime,
                 const RegimeContext& ctx = {});
/// Left-hand side of the regime's defining equation: prefactor * r^d.
double r_equation_lhs(const SalienceParams& p, double r, Regime regime,
                      const RegimeContext& ctx = {});

/// Lower bound on lambda required by the regime's theorem.
double lambda_gate(const SalienceParams& p, std::size_t k, std::size_t n, double rho,
                   Regime regime, const RegimeContext& ctx = {});

struct SampleSizeBounds {
  double upper_estimate = 0.0;  // C1 (d / (lambda eps^2 v_d rho^d)) log(same)
  double lower_estimate = 0.0;  // d^{d/2} / (tau^d lambda eps^{d/2})
};

SampleSizeBounds sample_size_bound(const SalienceParams& p, Regime regime);

/// Largest admissible additive-noise radius, rho eps / (24 d).
double theta_gate(const SalienceParams& p, double rho);

/// Connection radius prescribed for the regime: 4 rho (5 rho under additive noise).
double theorem_R(double rho, Regime regime);

struct ParamsReport {
  Regime regime = Regime::Noiseless;
  std::size_t n = 0;
  RhoResult rho;
  MuResult mu;
  KResult k;
  RResult r;
  double R = 0.0;
  double theta_max = 0.0;
  SampleSizeBounds sizes;
  std::vector<std::string> warnings;
};

ParamsReport compute_params(const SalienceParams& p, std::size_t n, Regime regime,
                            const RegimeContext& ctx = {});

}  // namespace mrsl
