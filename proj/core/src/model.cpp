#include "optocool/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "optocool/constants.hpp"
#include "optocool/error.hpp"
#include "optocool/polynomial.hpp"

namespace optocool {

namespace {

void throw_if_invalid(const std::vector<std::string>& violations, const char* what) {
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << what << ":";
  for (const auto& v : violations) msg << " " << v << ";";
  throw Error(ErrorKind::InvalidParams, msg.str());
}

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

// Residual of the normalized steady-state cubic.
double cubic_residual(double phi_c, double drive, double u) {
  const double phi = phi_c - u;
  return u * (1.0 + phi * phi) - drive;
}

double cubic_slope(double phi_c, double u) {
  return 3.0 * u * u - 4.0 * phi_c * u + 1.0 + phi_c * phi_c;
}

constexpr double kResidualTol = 1e-10;

}  // namespace

std::vector<std::string> PhysicalParams::violations() const {
  std::vector<std::string> out;
  if (!finite_all({omega_m, kappa, gamma, mass, cavity_length, omega_c, delta_c,
                   drive_intensity, temperature})) {
    out.emplace_back("all fields must be finite");
  }
  if (!(omega_m > 0.0)) out.emplace_back("omega_m must be > 0");
  if (!(kappa > 0.0)) out.emplace_back("kappa must be > 0");
  if (!(gamma > 0.0)) out.emplace_back("gamma must be > 0");
  if (!(mass > 0.0)) out.emplace_back("mass must be > 0");
  if (!(cavity_length > 0.0)) out.emplace_back("cavity_length must be > 0");
  if (!(omega_c > 0.0)) out.emplace_back("omega_c must be > 0");
  if (!(drive_intensity >= 0.0)) out.emplace_back("drive_intensity must be >= 0");
  if (!(temperature >= 0.0)) out.emplace_back("temperature must be >= 0");
  if (gamma > 0.0 && omega_m > 0.0 && !(gamma < omega_m)) {
    out.emplace_back("gamma must be < omega_m (underdamped oscillator)");
  }
  return out;
}

void PhysicalParams::validate() const { throw_if_invalid(violations(), "PhysicalParams"); }

std::vector<std::string> NormalizedParams::violations() const {
  std::vector<std::string> out;
  if (!finite_all({b, phi, phi_nl, q_factor, n_t_i})) out.emplace_back("all fields must be finite");
  if (!(b > 0.0)) out.emplace_back("b must be > 0");
  if (!(phi_nl >= 0.0)) out.emplace_back("phi_nl must be >= 0");
  if (!(q_factor > 1.0)) out.emplace_back("q_factor must be > 1");
  if (!(n_t_i >= 0.0)) out.emplace_back("n_t_i must be >= 0");
  return out;
}

void NormalizedParams::validate() const { throw_if_invalid(violations(), "NormalizedParams"); }

std::size_t SteadyState::stable_count() const {
  return static_cast<std::size_t>(
      std::count_if(branches.begin(), branches.end(), [](const Branch& br) { return br.stable; }));
}

double coupling_constant(const PhysicalParams& p) {
  return (p.omega_c / p.cavity_length) * std::sqrt(constants::hbar / (p.mass * p.omega_m));
}

double thermal_occupancy(double temperature, double omega_m) {
  if (!(omega_m > 0.0) || !(temperature >= 0.0)) {
    throw Error(ErrorKind::InvalidParams, "thermal_occupancy: need omega_m > 0 and T >= 0");
  }
  if (temperature == 0.0) return 0.0;
  const double x = constants::hbar * omega_m / (constants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double normalized_drive(const PhysicalParams& p) {
  const double g = coupling_constant(p);
  return 2.0 * g * g * p.drive_intensity / (p.omega_m * p.kappa * p.kappa);
}

SteadyState solve_steady_state(double phi_c, double drive) {
  if (!std::isfinite(phi_c) || !std::isfinite(drive) || drive < 0.0) {
    throw Error(ErrorKind::InvalidParams, "solve_steady_state: need finite phi_c and drive >= 0");
  }
  SteadyState out{phi_c, drive, {}};
  if (drive == 0.0) {
    // u = 0 is the only real root; static margin 1 + phi_c^2 > 0.
    out.branches.push_back({0.0, phi_c, true, false});
    return out;
  }

  // u^3 - 2 phi_c u^2 + (1 + phi_c^2) u - P = 0
  const std::array<std::complex<double>, 4> coeffs{
      std::complex<double>{-drive, 0.0}, std::complex<double>{1.0 + phi_c * phi_c, 0.0},
      std::complex<double>{-2.0 * phi_c, 0.0}, std::complex<double>{1.0, 0.0}};
  const auto roots = polynomial_roots(coeffs);

  const double scale = std::max({1.0, std::abs(phi_c), std::cbrt(drive)});
  std::vector<double> real_roots;
  for (const auto& z : roots) {
    // A double root splits into a pair with |Im| ~ sqrt(eps) * scale.
    if (std::abs(z.imag()) > 1e-6 * scale) continue;
    double u = z.real();
    for (int iter = 0; iter < 4; ++iter) {
      const double slope = cubic_slope(phi_c, u);
      const double r = cubic_residual(phi_c, drive, u);
      if (slope == 0.0 || r == 0.0) break;
      const double next = u - r / slope;
      if (std::abs(cubic_residual(phi_c, drive, next)) >= std::abs(r)) break;
      u = next;
    }
    real_roots.push_back(std::max(u, 0.0));
  }
  if (real_roots.empty()) {
    throw Error(ErrorKind::SolverFailure, "solve_steady_state: no real root found");
  }
  std::sort(real_roots.begin(), real_roots.end());

  const double residual_scale = std::max(1.0, drive);
  // A double root sits on a critical point of the cubic; the eigenvalue
  // pair only finds it to ~sqrt(eps), the critical point is exact.
  const double crit_disc = 4.0 * phi_c * phi_c - 3.0 * (1.0 + phi_c * phi_c);
  if (crit_disc >= 0.0) {
    for (double crit : {(2.0 * phi_c - std::sqrt(crit_disc)) / 3.0,
                        (2.0 * phi_c + std::sqrt(crit_disc)) / 3.0}) {
      if (std::abs(cubic_residual(phi_c, drive, crit)) > kResidualTol * residual_scale) continue;
      for (double& u : real_roots) {
        if (std::abs(u - crit) < 1e-6 * scale) u = crit;
      }
    }
  }

  const double slope_tol = 1e-7 * (1.0 + phi_c * phi_c);
  for (std::size_t i = 0; i < real_roots.size(); ++i) {
    const double u = real_roots[i];
    if (std::abs(cubic_residual(phi_c, drive, u)) > kResidualTol * residual_scale) {
      std::ostringstream msg;
      msg << "solve_steady_state: residual " << cubic_residual(phi_c, drive, u) << " at u = " << u;
      throw Error(ErrorKind::SolverFailure, msg.str());
    }
    const bool coincident =
        (i > 0 && std::abs(u - real_roots[i - 1]) < 1e-6 * scale) ||
        (i + 1 < real_roots.size() && std::abs(real_roots[i + 1] - u) < 1e-6 * scale);
    const double slope = cubic_slope(phi_c, u);
    const bool marginal = coincident || std::abs(slope) <= slope_tol;

    Branch br;
    br.u = u;
    br.phi_eff = phi_c - u;
    br.marginal = marginal;
    br.stable = !marginal && slope > 0.0 && static_margin(br.phi_eff, u) > 0.0;
    out.branches.push_back(br);
  }
  return out;
}

double static_margin(double phi, double phi_nl) { return 1.0 + phi * phi + 2.0 * phi * phi_nl; }

StabilityReport stability_check(const NormalizedParams& params) {
  const double margin = static_margin(params.phi, params.phi_nl);
  return {margin > 0.0, margin};
}

NormalizedParams normalize(const PhysicalParams& p, const BranchSelection& selection) {
  p.validate();
  const double phi_c = p.delta_c / p.kappa;
  const SteadyState ss = solve_steady_state(phi_c, normalized_drive(p));

  const Branch* chosen = nullptr;
  for (const auto& br : ss.branches) {
    if (!br.stable) continue;
    if (std::holds_alternative<branch::Lowest>(selection)) {
      if (chosen == nullptr) chosen = &br;
    } else if (std::holds_alternative<branch::Highest>(selection)) {
      chosen = &br;
    } else {
      const double target = std::get<branch::Closest>(selection).u;
      if (chosen == nullptr || std::abs(br.u - target) < std::abs(chosen->u - target)) chosen = &br;
    }
  }
  if (chosen == nullptr) {
    throw Error(ErrorKind::NoStableBranch, "normalize: every steady-state branch is unstable");
  }

  NormalizedParams out;
  out.b = p.omega_m / p.kappa;
  out.q_factor = p.omega_m / p.gamma;
  out.phi_nl = chosen->u;
  out.phi = chosen->phi_eff;
  out.n_t_i = thermal_occupancy(p.temperature, p.omega_m);
  return out;
}

PhysicalParams denormalize(const NormalizedParams& params, const PhysicalParams& scales) {
  params.validate();
  if (!(scales.omega_m > 0.0) || !(scales.mass > 0.0) || !(scales.cavity_length > 0.0) ||
      !(scales.omega_c > 0.0)) {
    throw Error(ErrorKind::InvalidParams,
                "denormalize: scales need positive omega_m, mass, cavity_length, omega_c");
  }
  PhysicalParams p = scales;
  p.kappa = p.omega_m / params.b;
  p.gamma = p.omega_m / params.q_factor;
  const double delta_nl = params.phi_nl * p.kappa;
  const double delta = params.phi * p.kappa;
  p.delta_c = delta + delta_nl;

  const double g = coupling_constant(p);
  const double mean_intensity = delta_nl * p.omega_m / (g * g);  // |a|^2
  p.drive_intensity = mean_intensity * (p.kappa * p.kappa + delta * delta) / (2.0 * p.kappa);

  if (params.n_t_i == 0.0) {
    p.temperature = 0.0;
  } else {
    const double x = std::log1p(1.0 / params.n_t_i);
    p.temperature = constants::hbar * p.omega_m / (constants::boltzmann * x);
  }
  return p;
}

}  // namespace optocool
