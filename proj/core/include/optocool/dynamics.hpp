#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "optocool/model.hpp"
#include "optocool/spectra.hpp"

namespace optocool {

// Quadrature ordering of every 4-vector and 4x4 matrix in this header.
enum Quadrature : int { kQ = 0, kP = 1, kX = 2, kY = 3 };

/// Linearized field-mirror fluctuations dz = A z dt + noise, in units where
/// omega_m = 1 (kappa = 1/b, gamma = 1/Q). Vacuum variance is 1.
struct LinearSystem {
  Eigen::Matrix4d drift = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d diffusion = Eigen::Matrix4d::Zero();
  NormalizedParams params{};
  double coupling = 0.0;  // g = sqrt(2 phi_nl / b)

  double kappa() const { return 1.0 / params.b; }
  /// Factor converting times in 1/gamma to times in 1/omega_m.
  double time_scale() const { return params.q_factor; }
};

/// Symmetrized covariance of (dq, dp, dx, dy) at time t (units of 1/gamma).
struct CovarianceState {
  double t = 0.0;
  Eigen::Matrix4d v = Eigen::Matrix4d::Identity();
};

using Trajectory = std::vector<CovarianceState>;

LinearSystem build_system(const NormalizedParams& params);

/// Same physics with the field quadratures rotated by `theta`; used to
/// check that mirror observables do not depend on the field phase gauge.
LinearSystem rotate_field_phase(const LinearSystem& sys, double theta);

/// Largest real part of the drift eigenvalues, in units of omega_m.
double max_drift_real_part(const LinearSystem& sys);

/// diag(2n+1, 2n+1, 1, 1): thermal mirror, vacuum cavity.
CovarianceState thermal_initial_state(const NormalizedParams& params);

/// Smallest eigenvalue of V + iJ with J the [q, p] = 2i symplectic form.
/// Negative values mean the state violates the uncertainty relation.
double physicality_margin(const Eigen::Matrix4d& v);

struct EvolveOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // Output times (1/gamma units). When empty, `samples` evenly spaced
  // points over [0, t_end] are stored.
  std::vector<double> sample_times{};
  int samples = 201;
  double physicality_tol = 1e-9;
};

/// Integrates dV/dt = A V + V A^T + D from v0. The trajectory always
/// contains v0 and V(t_end).
Trajectory evolve_covariance(const LinearSystem& sys, const CovarianceState& v0, double t_end,
                             const EvolveOptions& options = {});

/// Solves A V + V A^T + D = 0 directly; t of the result is +inf.
CovarianceState lyapunov_steady_state(const LinearSystem& sys);

/// Mirror block of the Lyapunov solution as a VarianceResult.
VarianceResult lyapunov_variances(const NormalizedParams& params);

/// Output quadrature X(t) = cos(c t + theta) x_out - sin(c t + theta) y_out
/// with carrier c in units of omega_m. c = 0 gives the laser-frame
/// quadratures; c = phi / b demodulates at the cavity resonance.
struct OutputQuadrature {
  double carrier = 0.0;
  double phase = 0.0;

  static OutputQuadrature x_out() { return {0.0, 0.0}; }
  static OutputQuadrature y_out() { return {0.0, -1.5707963267948966}; }
  static OutputQuadrature cavity_frame(const NormalizedParams& p, double phase = 0.0) {
    return {p.phi / p.b, phase};
  }

  std::string label() const;
};

struct TimePair {
  double t = 0.0;
  double t_prime = 0.0;
};

/// Smooth part of the symmetrized output-field correlation <X(t) X(t')>,
/// i.e. with the shot-noise delta(t - t') removed.
struct TwoTimeGrid {
  OutputQuadrature quadrature{};
  std::vector<TimePair> pairs;  // units of 1/gamma
  std::vector<double> values;   // C / kappa
  // Optional quadrature weights over the half plane t' >= t (1/gamma^2
  // units), with the window [0, window] they cover in t.
  std::vector<double> weights;
  double window = 0.0;
  double kappa_over_gamma = 0.0;
};

/// Composite Gauss-Legendre nodes over t in [0, window], lag s = t' - t in
/// [0, window], flattened row-major as (t_i, t_i + s_j).
struct MatchedFilterLayout {
  double window = 0.0;
  std::vector<double> t_nodes;
  std::vector<double> t_weights;
  std::vector<double> lag_nodes;
  std::vector<double> lag_weights;

  std::vector<TimePair> pairs() const;
  std::vector<double> weights() const;
  /// Times at which the covariance trajectory must be sampled.
  std::vector<double> sample_times() const;
};

/// The (t, lag) grid has (8 panels)^2 nodes, so panels is capped.
inline constexpr int kMaxMatchedFilterPanels = 1024;

MatchedFilterLayout matched_filter_layout(double window, int panels);

/// Panel count that resolves the drift and carrier oscillations of `sys`
/// over `window` (1/gamma units).
int default_panel_count(const LinearSystem& sys, const OutputQuadrature& quadrature, double window);

TwoTimeGrid two_time_correlations(const LinearSystem& sys, const Trajectory& trajectory,
                                  const OutputQuadrature& quadrature,
                                  std::span<const TimePair> pairs);

TwoTimeGrid two_time_correlations(const LinearSystem& sys, const Trajectory& trajectory,
                                  const OutputQuadrature& quadrature,
                                  const MatchedFilterLayout& layout);

struct HomodyneResult {
  double dx_m2 = 1.0;
  double lo_rate = 0.0;  // units of gamma
  double window = 0.0;   // units of 1 / lo_rate
  double truncation_bound = 0.0;
};

/// Variance of the output quadrature integrated against the unit-norm mode
/// E(t) = sqrt(2 r) exp(-r t), r = lo_rate (units of gamma). Shot noise is 1.
HomodyneResult homodyne_variance(const TwoTimeGrid& grid, double lo_rate);

}  // namespace optocool
