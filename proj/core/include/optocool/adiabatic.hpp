#pragma once

#include "optocool/model.hpp"
#include "optocool/spectra.hpp"

namespace optocool {

/// Cavity-dressed single-mode oscillator: the mechanical response near
/// resonance with shifted frequency and modified damping.
struct EffectiveOscillator {
  double omega_eff_ratio = 1.0;  // effective frequency / omega_m
  double gamma_eff_ratio = 1.0;  // effective damping / gamma; <= 0 means heating instability
  double q_eff = 0.0;            // effective frequency / effective damping

  bool stable() const { return gamma_eff_ratio > 0.0; }
};

struct CoolingDecomposition {
  double f = 0.0;
  double eta = 0.0;
  double dq2_thermal = 0.0;
  double dq2_radiation = 0.0;
  double dq2 = 0.0;
};

struct RegimeThresholds {
  double min_damping_enhancement = 10.0;  // gamma_eff / gamma must exceed this
  double max_gamma_eff_over_kappa = 0.5;
  double max_breakdown_ratio = 1.0;  // phi_nl b / 2
};

struct RegimeReport {
  bool adiabatic_ok = false;
  double gamma_eff_over_gamma = 0.0;
  double gamma_eff_over_kappa = 0.0;
  double phi_nl_omega_over_2kappa = 0.0;
};

/// f = 4 phi b / ((1 - b^2 + phi^2)^2 + 4 b^2)
double coupling_shape(double b, double phi);

/// 1 + 2 phi phi_nl Q Im[1 / D(omega_m)]; always defined.
double effective_damping_ratio(const NormalizedParams& params);

EffectiveOscillator effective_rates(const NormalizedParams& params);

VarianceResult approx_variance(const NormalizedParams& params);

CoolingDecomposition decompose(const NormalizedParams& params);

/// Detuning maximizing f at fixed b.
double optimal_detuning(double b);

RegimeReport regime_validity(const NormalizedParams& params, const RegimeThresholds& thresholds = {});

struct OperatingPointSearch {
  double b_min = 1.0;
  double b_max = 10.0;
  int b_points = 19;
  double phi_nl = 0.1;
  double q_factor = 1e4;
  double n_t_i = 100.0;
  bool lock_phi_to_b = false;
  int phi_points = 25;  // coarse log grid over [phi*/3, 3 phi*]
  double rel_tol = 1e-5;
  ThermalNoiseModel noise_model = ThermalNoiseModel::QuantumCoth;
  QuadratureOptions quadrature{};
};

struct OperatingPoint {
  double b_opt = 0.0;
  double phi_opt = 0.0;
  double n_t_f_min = 0.0;
  VarianceResult variances{};
  int evaluations = 0;
};

/// Minimizes the exact-spectrum final occupancy over (b, phi).
OperatingPoint optimize_operating_point(const OperatingPointSearch& search);

}  // namespace optocool
