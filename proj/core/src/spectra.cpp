#include "optocool/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "optocool/adiabatic.hpp"
#include "optocool/constants.hpp"
#include "optocool/error.hpp"
#include "optocool/polynomial.hpp"

namespace optocool {

namespace {

using cd = std::complex<double>;

double thermal_weight(double omega, const NormalizedParams& p, ThermalNoiseModel model) {
  if (model == ThermalNoiseModel::MarkovFlat) return 2.0 * (2.0 * p.n_t_i + 1.0) / p.q_factor;
  const double w = std::abs(omega);
  if (p.n_t_i == 0.0) return 2.0 * w / p.q_factor;
  const double x = coth_argument(p.n_t_i);
  const double xw = x * w;
  // w coth(x w) -> 1/x + x w^2 / 3 near zero
  const double w_coth = xw < 1e-6 ? 1.0 / x + x * w * w / 3.0 : w / std::tanh(xw);
  return 2.0 * w_coth / p.q_factor;
}

double spectral_density(double omega, const NormalizedParams& p, ThermalNoiseModel model) {
  const cd d = cavity_response(omega, p.b, p.phi);
  const cd mech{1.0 - omega * omega, -omega / p.q_factor};
  const cd denom = d * mech - 2.0 * p.phi * p.phi_nl;
  const double denom2 = std::norm(denom);
  const double scale = std::norm(d) * (std::norm(mech) + 1.0);
  if (!(denom2 > 1e-28 * scale)) {
    std::ostringstream msg;
    msg << "noise_spectrum: response denominator vanishes at w = " << omega;
    throw Error(ErrorKind::SingularResponse, msg.str());
  }
  const double radiation = 4.0 * p.phi_nl * (1.0 + p.phi * p.phi + p.b * p.b * omega * omega);
  return (thermal_weight(omega, p, model) * std::norm(d) + radiation) / denom2;
}

void require_static_stability(const NormalizedParams& p, const char* where) {
  const auto st = stability_check(p);
  if (!st.stable) {
    std::ostringstream msg;
    msg << where << ": static stability margin " << st.margin << " <= 0";
    throw Error(ErrorKind::Unstable, msg.str());
  }
}

void add_seed(std::vector<double>& pts, double center, double width) {
  static constexpr std::array<double, 9> kOffsets{-64.0, -16.0, -4.0, -1.0, 0.0,
                                                  1.0,   4.0,   16.0, 64.0};
  if (!(width > 0.0) || !std::isfinite(center) || !std::isfinite(width)) return;
  for (double k : kOffsets) pts.push_back(center + k * width);
}

constexpr std::size_t kSubintervals = 2000;

struct Workspace {
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(kSubintervals);
  Workspace() {
    static const bool handler_off = [] {
      gsl_set_error_handler_off();
      return true;
    }();
    (void)handler_off;
  }
  ~Workspace() { gsl_integration_workspace_free(w); }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
};

template <typename F>
gsl_function as_gsl(F& f) {
  return {[](double x, void* ctx) { return (*static_cast<F*>(ctx))(x); }, &f};
}

void check_status(int status, double err, const char* what) {
  if (status == GSL_SUCCESS) return;
  std::ostringstream msg;
  msg << "integrate_variances: " << what << ": " << gsl_strerror(status) << " (error estimate "
      << err << ")";
  throw Error(ErrorKind::QuadratureFailure, msg.str());
}

// Global adaptive 21-point Gauss-Kronrod over [edges.front(), edges.back()]
// with forced subdivision at the interior edges: the interval with the
// largest error estimate is bisected until the summed estimate meets
// rel_tol relative to the summed value.
template <typename F>
std::pair<double, double> integrate_with_breakpoints(F& f, const std::vector<double>& edges,
                                                     double rel_tol) {
  struct Piece {
    double a, b, value, err;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  gsl_function fn = as_gsl(f);
  auto eval = [&fn](double a, double b) {
    Piece p{a, b, 0.0, 0.0};
    double resabs = 0.0, resasc = 0.0;
    gsl_integration_qk21(&fn, a, b, &p.value, &p.err, &resabs, &resasc);
    return p;
  };

  std::priority_queue<Piece> heap;
  double value = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const Piece p = eval(edges[i], edges[i + 1]);
    value += p.value;
    err += p.err;
    heap.push(p);
  }
  while (err > rel_tol * std::abs(value)) {
    if (heap.size() >= kSubintervals) {
      std::ostringstream msg;
      msg << "integrate_variances: " << kSubintervals << " subintervals exhausted, error estimate "
          << err << " for value " << value;
      throw Error(ErrorKind::QuadratureFailure, msg.str());
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw Error(ErrorKind::QuadratureFailure, "integrate_variances: interval cannot be bisected");
    }
    const Piece left = eval(worst.a, mid);
    const Piece right = eval(mid, worst.b);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
  }
  // Recompute the sums to shed accumulated cancellation.
  value = 0.0;
  err = 0.0;
  for (; !heap.empty(); heap.pop()) {
    value += heap.top().value;
    err += heap.top().err;
  }
  return {value, err};
}

template <typename F>
std::pair<double, double> integrate_tail(F& f, double from, double abs_tol, Workspace& ws) {
  gsl_function fn = as_gsl(f);
  double value = 0.0;
  double err = 0.0;
  const int status =
      gsl_integration_qagiu(&fn, from, abs_tol, 0.0, kSubintervals, ws.w, &value, &err);
  check_status(status, err, "tail");
  return {value, err};
}

}  // namespace

const char* to_string(ThermalNoiseModel model) noexcept {
  return model == ThermalNoiseModel::QuantumCoth ? "QuantumCoth" : "MarkovFlat";
}

const char* to_string(VarianceMethod method) noexcept {
  switch (method) {
    case VarianceMethod::ExactSpectrum: return "ExactSpectrum";
    case VarianceMethod::Adiabatic: return "Adiabatic";
    case VarianceMethod::Lyapunov: return "Lyapunov";
  }
  return "Unknown";
}

double occupancy_from_variances(double dq2, double dp2) { return (dq2 + dp2 - 2.0) / 4.0; }

double coth_argument(double n_t_i) {
  if (n_t_i == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * std::log1p(1.0 / n_t_i);
}

std::complex<double> cavity_response(double omega, double b, double phi) {
  const cd c{1.0, -b * omega};
  return c * c + phi * phi;
}

std::complex<double> effective_susceptibility(double omega, const NormalizedParams& params) {
  const cd d = cavity_response(omega, params.b, params.phi);
  if (std::abs(d) == 0.0) {
    throw Error(ErrorKind::SingularResponse, "effective_susceptibility: D(w) = 0");
  }
  const cd inverse = cd{1.0 - omega * omega, -omega / params.q_factor} -
                     2.0 * params.phi * params.phi_nl / d;
  if (std::abs(inverse) < 1e-14 * (1.0 + omega * omega)) {
    throw Error(ErrorKind::SingularResponse, "effective_susceptibility: inverse response vanishes");
  }
  return 1.0 / inverse;
}

SpectrumSample noise_spectrum(double omega, const NormalizedParams& params,
                              ThermalNoiseModel model) {
  params.validate();
  require_static_stability(params, "noise_spectrum");
  return {omega, spectral_density(omega, params, model)};
}

std::vector<std::complex<double>> spectrum_poles(const NormalizedParams& p) {
  // D(w) = d0 + d1 w + d2 w^2, M(w) = 1 - i w / Q - w^2
  const cd d0{1.0 + p.phi * p.phi, 0.0};
  const cd d1{0.0, -2.0 * p.b};
  const cd d2{-p.b * p.b, 0.0};
  const cd m0{1.0, 0.0};
  const cd m1{0.0, -1.0 / p.q_factor};
  const cd m2{-1.0, 0.0};
  const std::array<cd, 5> coeffs{d0 * m0 - 2.0 * p.phi * p.phi_nl, d0 * m1 + d1 * m0,
                                 d0 * m2 + d1 * m1 + d2 * m0, d1 * m2 + d2 * m1, d2 * m2};
  return polynomial_roots(coeffs);
}

std::vector<double> spectrum_breakpoints(const NormalizedParams& p, double omega_max) {
  std::vector<double> pts;
  for (const auto& z : spectrum_poles(p)) add_seed(pts, std::abs(z.real()), std::abs(z.imag()));

  const double gamma_ratio = effective_damping_ratio(p);
  if (gamma_ratio > 0.0) {
    double center = 1.0;
    try {
      center = effective_rates(p).omega_eff_ratio;
    } catch (const Error&) {
    }
    add_seed(pts, center, gamma_ratio / (2.0 * p.q_factor));
  }
  add_seed(pts, std::abs(p.phi) / p.b, 1.0 / p.b);
  pts.push_back(1.0);
  pts.push_back(2.0);

  std::vector<double> out;
  for (double x : pts) {
    if (x > 0.0 && x < omega_max) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double x : out) {
    if (unique.empty() || x - unique.back() > 1e-12 * x) unique.push_back(x);
  }
  return unique;
}

VarianceResult integrate_variances(const NormalizedParams& params, ThermalNoiseModel model,
                                   const QuadratureOptions& options) {
  params.validate();
  if (!(options.omega_max > 2.0)) {
    throw Error(ErrorKind::InvalidParams, "integrate_variances: omega_max must exceed 2");
  }
  if (!(options.rel_tol > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "integrate_variances: rel_tol must be > 0");
  }
  require_static_stability(params, "integrate_variances");
  for (const auto& z : spectrum_poles(params)) {
    if (z.imag() >= 0.0) {
      std::ostringstream msg;
      msg << "integrate_variances: dynamically unstable, response pole at w = " << z;
      throw Error(ErrorKind::Unstable, msg.str());
    }
  }

  std::vector<double> edges{0.0};
  const auto interior = spectrum_breakpoints(params, options.omega_max);
  edges.insert(edges.end(), interior.begin(), interior.end());
  edges.push_back(options.omega_max);

  auto s_q = [&](double w) { return spectral_density(w, params, model); };
  auto w2_s_q = [&](double w) { return w * w * spectral_density(w, params, model); };

  Workspace ws;
  const double eps = 0.5 * options.rel_tol;
  auto [dq, err_q] = integrate_with_breakpoints(s_q, edges, eps);
  auto [dp, err_p] = integrate_with_breakpoints(w2_s_q, edges, eps);
  const auto tail_q = integrate_tail(s_q, options.omega_max, eps * 1e-3 * dq, ws);
  dq += tail_q.first;
  err_q += tail_q.second;

  VarianceResult out;
  if (model == ThermalNoiseModel::MarkovFlat) {
    const auto tail_p = integrate_tail(w2_s_q, options.omega_max, eps * 1e-3 * dp, ws);
    dp += tail_p.first;
    err_p += tail_p.second;
  } else {
    // w^2 S_q -> 2 / (Q w): logarithmically divergent tail.
    out.cutoff_log_slope = 2.0 / (constants::pi * params.q_factor);
  }

  // Even integrand: the full-line integral over dw / (2 pi) is (1/pi) x half-line.
  out.dq2 = dq / constants::pi;
  out.dp2 = dp / constants::pi;
  const double err_dq = err_q / constants::pi;
  const double err_dp = err_p / constants::pi;
  out.quadrature_error = std::max(err_dq, err_dp);
  out.n_t_f = occupancy_from_variances(out.dq2, out.dp2);
  out.method = VarianceMethod::ExactSpectrum;
  out.noise_model = model;

  if (!(err_dq <= options.rel_tol * std::abs(out.dq2)) ||
      !(err_dp <= options.rel_tol * std::abs(out.dp2))) {
    std::ostringstream msg;
    msg << "integrate_variances: error estimate (" << err_dq << ", " << err_dp
        << ") exceeds rel_tol " << options.rel_tol;
    throw Error(ErrorKind::QuadratureFailure, msg.str());
  }
  return out;
}

}  // namespace optocool
