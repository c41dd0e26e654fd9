#pragma once

#include <complex>
#include <vector>

#include "optocool/model.hpp"

namespace optocool {

/// Thermal force spectrum of the mechanical bath.
///  - QuantumCoth: 2 w coth(x w) / Q with x = hbar omega_m / (2 k_B T).
///  - MarkovFlat: the flat high-temperature limit 2 (2 n + 1) / Q, which is
///    what the time-domain moment equations use.
enum class ThermalNoiseModel { QuantumCoth, MarkovFlat };

enum class VarianceMethod { ExactSpectrum, Adiabatic, Lyapunov };

const char* to_string(ThermalNoiseModel model) noexcept;
const char* to_string(VarianceMethod method) noexcept;

struct SpectrumSample {
  double omega = 0.0;  // Omega / omega_m
  double s_q = 0.0;
};

struct VarianceResult {
  double dq2 = 0.0;
  double dp2 = 0.0;
  double n_t_f = 0.0;
  VarianceMethod method = VarianceMethod::ExactSpectrum;
  ThermalNoiseModel noise_model = ThermalNoiseModel::MarkovFlat;
  double quadrature_error = 0.0;
  // dp2 grows by cutoff_log_slope * ln(w2 / w1) when the cutoff moves from
  // w1 to w2. Zero whenever dp2 is integrated to infinity.
  double cutoff_log_slope = 0.0;
};

/// Occupancy from the two normalized variances, (dq2 + dp2 - 2) / 4.
double occupancy_from_variances(double dq2, double dp2);

/// x = (1/2) ln(1 + 1/n); +inf for n = 0.
double coth_argument(double n_t_i);

/// D = (1 - i b w)^2 + phi^2.
std::complex<double> cavity_response(double omega, double b, double phi);

/// M omega_m^2 times the effective susceptibility at normalized frequency w.
std::complex<double> effective_susceptibility(double omega, const NormalizedParams& params);

SpectrumSample noise_spectrum(double omega, const NormalizedParams& params,
                              ThermalNoiseModel model);

/// Roots in w of D(w) (1 - w^2 - i w / Q) - 2 phi phi_nl; the system is
/// dynamically stable iff all lie strictly in the lower half plane.
std::vector<std::complex<double>> spectrum_poles(const NormalizedParams& params);

struct QuadratureOptions {
  double omega_max = 100.0;
  double rel_tol = 1e-8;
};

VarianceResult integrate_variances(const NormalizedParams& params, ThermalNoiseModel model,
                                   const QuadratureOptions& options = {});

/// Sorted interior subdivision points in (0, omega_max) used by
/// integrate_variances. Exposed for tests and diagnostics.
std::vector<double> spectrum_breakpoints(const NormalizedParams& params, double omega_max);

}  // namespace optocool
