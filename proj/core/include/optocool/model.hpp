#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace optocool {

/// Laboratory parameters. Rates are angular (rad/s), signed detuning
/// delta_c = omega_c - omega_laser.
struct PhysicalParams {
  double omega_m = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double mass = 0.0;
  double cavity_length = 0.0;
  double omega_c = 0.0;
  double delta_c = 0.0;
  double drive_intensity = 0.0;  // |mean input amplitude|^2, photons/s
  double temperature = 0.0;      // K

  /// Every violated invariant, empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;
};

/// Dimensionless operating point. All figures are drawn in these coordinates.
struct NormalizedParams {
  double b = 1.0;         // omega_m / kappa
  double phi = 0.0;       // effective detuning / kappa
  double phi_nl = 0.0;    // radiation-pressure shift / kappa
  double q_factor = 1e4;  // omega_m / gamma
  double n_t_i = 0.0;     // initial (bath) thermal occupancy

  std::vector<std::string> violations() const;
  void validate() const;
};

struct Branch {
  double u = 0.0;        // phi_nl on this branch
  double phi_eff = 0.0;  // phi_c - u
  bool stable = false;
  bool marginal = false;
};

struct SteadyState {
  double phi_c = 0.0;
  double drive = 0.0;
  std::vector<Branch> branches;  // ascending in u

  std::size_t stable_count() const;
};

struct StabilityReport {
  bool stable = false;
  double margin = 0.0;
};

namespace branch {
struct Lowest {};
struct Highest {};
/// Stable branch whose u is closest to the target.
struct Closest {
  double u = 0.0;
};
}  // namespace branch
using BranchSelection = std::variant<branch::Lowest, branch::Highest, branch::Closest>;

/// Optomechanical coupling G = (omega_c / L) sqrt(hbar / (M omega_m)), in 1/s.
double coupling_constant(const PhysicalParams& p);

/// Bose occupancy 1 / (exp(hbar omega_m / k_B T) - 1); exactly zero at T = 0.
double thermal_occupancy(double temperature, double omega_m);

/// Normalized drive P = 2 G^2 |a_in|^2 / (omega_m kappa^2).
double normalized_drive(const PhysicalParams& p);

/// Real roots u >= 0 of u (1 + (phi_c - u)^2) = drive, classified and sorted.
SteadyState solve_steady_state(double phi_c, double drive);

/// Static stability expression 1 + phi^2 + 2 phi phi_nl.
double static_margin(double phi, double phi_nl);

StabilityReport stability_check(const NormalizedParams& params);

NormalizedParams normalize(const PhysicalParams& p,
                           const BranchSelection& selection = branch::Lowest{});

/// Inverse of normalize given the fixed physical scales (omega_m, mass,
/// cavity_length, omega_c) taken from `scales`; the remaining fields of
/// `scales` are ignored.
PhysicalParams denormalize(const NormalizedParams& params, const PhysicalParams& scales);

}  // namespace optocool
