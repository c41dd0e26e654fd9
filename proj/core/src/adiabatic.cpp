#include "optocool/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "optocool/error.hpp"

namespace optocool {

namespace {

std::complex<double> inverse_response_at_resonance(const NormalizedParams& p) {
  return 1.0 / cavity_response(1.0, p.b, p.phi);
}

constexpr double kInvGolden = 0.6180339887498949;

// Golden-section minimization of a unimodal-in-bracket function. Returns
// the best (x, f) seen, including the bracket ends passed in.
template <typename F>
std::pair<double, double> golden_minimize(F&& f, double lo, double hi, double f_lo, double f_hi,
                                          double abs_tol) {
  double best_x = f_lo <= f_hi ? lo : hi;
  double best_f = std::min(f_lo, f_hi);
  double c = hi - kInvGolden * (hi - lo);
  double d = lo + kInvGolden * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > abs_tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvGolden * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvGolden * (hi - lo);
      fd = f(d);
    }
  }
  for (auto [x, fx] : {std::pair{c, fc}, std::pair{d, fd}}) {
    if (fx < best_f || (fx == best_f && x < best_x)) {
      best_x = x;
      best_f = fx;
    }
  }
  return {best_x, best_f};
}

}  // namespace

double coupling_shape(double b, double phi) {
  const double a = 1.0 - b * b + phi * phi;
  return 4.0 * phi * b / (a * a + 4.0 * b * b);
}

double effective_damping_ratio(const NormalizedParams& p) {
  return 1.0 + 2.0 * p.phi * p.phi_nl * p.q_factor * inverse_response_at_resonance(p).imag();
}

EffectiveOscillator effective_rates(const NormalizedParams& params) {
  params.validate();
  const auto inv = inverse_response_at_resonance(params);
  const double arg = 1.0 - 2.0 * params.phi * params.phi_nl * inv.real();
  if (!(arg > 0.0)) {
    std::ostringstream msg;
    msg << "effective_rates: squared frequency ratio " << arg << " <= 0";
    throw Error(ErrorKind::ImaginaryFrequency, msg.str());
  }
  EffectiveOscillator out;
  out.omega_eff_ratio = std::sqrt(arg);
  out.gamma_eff_ratio = effective_damping_ratio(params);
  out.q_eff = out.omega_eff_ratio * params.q_factor / out.gamma_eff_ratio;
  return out;
}

VarianceResult approx_variance(const NormalizedParams& params) {
  params.validate();
  const double gamma_ratio = effective_damping_ratio(params);
  if (!(gamma_ratio > 0.0)) {
    std::ostringstream msg;
    msg << "approx_variance: effective damping ratio " << gamma_ratio << " <= 0";
    throw Error(ErrorKind::Unstable, msg.str());
  }
  const double b2 = params.b * params.b;
  const double phi2 = params.phi * params.phi;
  const double a = 1.0 - b2 + phi2;
  const double bracket = 2.0 * params.n_t_i + 1.0 +
                         2.0 * params.phi_nl * params.q_factor * (1.0 + b2 + phi2) / (a * a + 4.0 * b2);
  VarianceResult out;
  out.dq2 = bracket / gamma_ratio;
  out.dp2 = out.dq2;
  out.n_t_f = (out.dq2 - 1.0) / 2.0;
  out.method = VarianceMethod::Adiabatic;
  out.noise_model = ThermalNoiseModel::MarkovFlat;
  return out;
}

CoolingDecomposition decompose(const NormalizedParams& params) {
  params.validate();
  if (!(params.phi > 0.0)) {
    throw Error(ErrorKind::InvalidRegime, "decompose: requires phi > 0 (cooling side)");
  }
  CoolingDecomposition out;
  out.f = coupling_shape(params.b, params.phi);
  const double coop = out.f * params.phi_nl * params.q_factor;
  out.eta = coop / (1.0 + coop);
  out.dq2_thermal = 1.0 + 2.0 * params.n_t_i;
  out.dq2_radiation =
      (1.0 + params.b * params.b + params.phi * params.phi) / (2.0 * params.phi * params.b);
  out.dq2 = (1.0 - out.eta) * out.dq2_thermal + out.eta * out.dq2_radiation;
  return out;
}

double optimal_detuning(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorKind::InvalidParams, "optimal_detuning: b must be finite and > 0");
  }
  const double b2 = b * b;
  return std::sqrt((b2 - 1.0 + 2.0 * std::sqrt(1.0 + b2 + b2 * b2)) / 3.0);
}

RegimeReport regime_validity(const NormalizedParams& params, const RegimeThresholds& thresholds) {
  RegimeReport out;
  out.gamma_eff_over_gamma = effective_damping_ratio(params);
  // kappa / gamma = Q / b
  out.gamma_eff_over_kappa = out.gamma_eff_over_gamma * params.b / params.q_factor;
  out.phi_nl_omega_over_2kappa = params.phi_nl * params.b / 2.0;
  out.adiabatic_ok = out.gamma_eff_over_gamma > thresholds.min_damping_enhancement &&
                     out.gamma_eff_over_kappa < thresholds.max_gamma_eff_over_kappa &&
                     out.phi_nl_omega_over_2kappa < thresholds.max_breakdown_ratio;
  return out;
}

OperatingPoint optimize_operating_point(const OperatingPointSearch& s) {
  if (!(s.b_min > 0.0) || !(s.b_max >= s.b_min) || s.b_points < 1 || s.phi_points < 3) {
    throw Error(ErrorKind::InvalidParams, "optimize_operating_point: empty or invalid search range");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();

  OperatingPoint best_point;
  int evaluations = 0;
  auto objective = [&](double b, double phi) {
    ++evaluations;
    try {
      const NormalizedParams p{b, phi, s.phi_nl, s.q_factor, s.n_t_i};
      return integrate_variances(p, s.noise_model, s.quadrature).n_t_f;
    } catch (const Error&) {
      return kInf;
    }
  };

  // Best phi for a fixed b, with its objective value.
  auto best_phi = [&](double b) -> std::pair<double, double> {
    if (s.lock_phi_to_b) return {b, objective(b, b)};
    const double center = optimal_detuning(b);
    const double lo = center / 3.0;
    const double ratio = std::pow(9.0, 1.0 / (s.phi_points - 1));
    std::vector<double> grid(static_cast<std::size_t>(s.phi_points));
    std::vector<double> values(grid.size());
    std::size_t arg = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = lo * std::pow(ratio, static_cast<double>(i));
      values[i] = objective(b, grid[i]);
      if (values[i] < values[arg]) arg = i;
    }
    if (!std::isfinite(values[arg])) return {grid[arg], kInf};
    const std::size_t left = arg == 0 ? 0 : arg - 1;
    const std::size_t right = std::min(arg + 1, grid.size() - 1);
    auto f = [&](double phi) { return objective(b, phi); };
    const auto refined = golden_minimize(f, grid[left], grid[right], values[left], values[right],
                                         s.rel_tol * center);
    if (refined.second <= values[arg]) return refined;
    return {grid[arg], values[arg]};
  };

  std::vector<double> b_grid(static_cast<std::size_t>(s.b_points));
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    b_grid[i] = s.b_points == 1 ? s.b_min
                                : s.b_min + (s.b_max - s.b_min) * static_cast<double>(i) /
                                                static_cast<double>(s.b_points - 1);
  }
  std::vector<std::pair<double, double>> inner(b_grid.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    inner[i] = best_phi(b_grid[i]);
    if (inner[i].second < inner[arg].second) arg = i;
  }
  if (!std::isfinite(inner[arg].second)) {
    throw Error(ErrorKind::OptimizationFailure,
                "optimize_operating_point: every probed operating point is unstable");
  }

  double b_opt = b_grid[arg];
  double phi_opt = inner[arg].first;
  double value = inner[arg].second;
  if (b_grid.size() > 1) {
    const std::size_t left = arg == 0 ? 0 : arg - 1;
    const std::size_t right = std::min(arg + 1, b_grid.size() - 1);
    auto f = [&](double b) { return best_phi(b).second; };
    const auto [b_ref, v_ref] = golden_minimize(f, b_grid[left], b_grid[right],
                                                inner[left].second, inner[right].second,
                                                s.rel_tol * b_grid[arg]);
    if (v_ref < value) {
      b_opt = b_ref;
      value = v_ref;
      phi_opt = best_phi(b_ref).first;
    }
  }

  best_point.b_opt = b_opt;
  best_point.phi_opt = phi_opt;
  best_point.variances =
      integrate_variances({b_opt, phi_opt, s.phi_nl, s.q_factor, s.n_t_i}, s.noise_model,
                          s.quadrature);
  best_point.n_t_f_min = best_point.variances.n_t_f;
  best_point.evaluations = evaluations;
  return best_point;
}

}  // namespace optocool
