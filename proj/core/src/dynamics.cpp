#include "optocool/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "optocool/error.hpp"

namespace optocool {

namespace {

namespace odeint = boost::numeric::odeint;

// Upper triangle of a symmetric 4x4, row-major.
using Packed = std::array<double, 10>;

constexpr std::array<std::pair<int, int>, 10> kPackedIndex{{{0, 0},
                                                            {0, 1},
                                                            {0, 2},
                                                            {0, 3},
                                                            {1, 1},
                                                            {1, 2},
                                                            {1, 3},
                                                            {2, 2},
                                                            {2, 3},
                                                            {3, 3}}};

Packed pack(const Eigen::Matrix4d& m) {
  Packed out{};
  for (std::size_t k = 0; k < kPackedIndex.size(); ++k) {
    out[k] = m(kPackedIndex[k].first, kPackedIndex[k].second);
  }
  return out;
}

Eigen::Matrix4d unpack(const Packed& p) {
  Eigen::Matrix4d m;
  for (std::size_t k = 0; k < kPackedIndex.size(); ++k) {
    const auto [i, j] = kPackedIndex[k];
    m(i, j) = p[k];
    m(j, i) = p[k];
  }
  return m;
}

void require_stable_drift(const LinearSystem& sys, const char* where) {
  const double growth = max_drift_real_part(sys);
  if (!(growth < 0.0)) {
    std::ostringstream msg;
    msg << where << ": drift eigenvalue with real part " << growth << " >= 0";
    throw Error(ErrorKind::Unstable, msg.str());
  }
}

}  // namespace

LinearSystem build_system(const NormalizedParams& params) {
  params.validate();
  const auto st = stability_check(params);
  if (!st.stable) {
    std::ostringstream msg;
    msg << "build_system: static stability margin " << st.margin << " <= 0";
    throw Error(ErrorKind::Unstable, msg.str());
  }

  LinearSystem sys;
  sys.params = params;
  // The mean intracavity amplitude is taken real: radiation pressure then
  // couples through dx only, and the mirror drives dy. From
  // Delta_nl = G^2 |a|^2 / omega_m, g = sqrt(2) G |a| / omega_m = sqrt(2 phi_nl / b).
  const double g = std::sqrt(2.0 * params.phi_nl / params.b);
  sys.coupling = g;
  const double kappa = 1.0 / params.b;
  const double delta = params.phi / params.b;
  const double gamma = 1.0 / params.q_factor;

  auto& a = sys.drift;
  a << 0.0, 1.0, 0.0, 0.0,
       -1.0, -gamma, g, 0.0,
       0.0, 0.0, -kappa, delta,
       g, 0.0, -delta, -kappa;

  sys.diffusion.diagonal() << 0.0, 2.0 * gamma * (2.0 * params.n_t_i + 1.0), 2.0 * kappa,
      2.0 * kappa;

  require_stable_drift(sys, "build_system");
  return sys;
}

LinearSystem rotate_field_phase(const LinearSystem& sys, double theta) {
  Eigen::Matrix4d r = Eigen::Matrix4d::Identity();
  r(kX, kX) = std::cos(theta);
  r(kX, kY) = -std::sin(theta);
  r(kY, kX) = std::sin(theta);
  r(kY, kY) = std::cos(theta);
  LinearSystem out = sys;
  out.drift = r * sys.drift * r.transpose();
  out.diffusion = r * sys.diffusion * r.transpose();
  return out;
}

double max_drift_real_part(const LinearSystem& sys) {
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(sys.drift, false);
  return solver.eigenvalues().real().maxCoeff();
}

CovarianceState thermal_initial_state(const NormalizedParams& params) {
  CovarianceState s;
  s.t = 0.0;
  s.v.setIdentity();
  s.v(kQ, kQ) = 2.0 * params.n_t_i + 1.0;
  s.v(kP, kP) = 2.0 * params.n_t_i + 1.0;
  return s;
}

double physicality_margin(const Eigen::Matrix4d& v) {
  Eigen::Matrix4cd h = v.cast<std::complex<double>>();
  const std::complex<double> i{0.0, 1.0};
  for (int block : {0, 2}) {
    h(block, block + 1) += i;
    h(block + 1, block) -= i;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Trajectory evolve_covariance(const LinearSystem& sys, const CovarianceState& v0, double t_end,
                             const EvolveOptions& options) {
  if (!(t_end > v0.t)) {
    throw Error(ErrorKind::InvalidParams, "evolve_covariance: t_end must exceed the initial time");
  }
  if (physicality_margin(v0.v) < -options.physicality_tol) {
    throw Error(ErrorKind::NonPhysical, "evolve_covariance: initial covariance is not physical");
  }

  std::vector<double> times;
  if (options.sample_times.empty()) {
    const int n = std::max(options.samples, 2);
    for (int k = 0; k < n; ++k) {
      times.push_back(v0.t + (t_end - v0.t) * static_cast<double>(k) / (n - 1));
    }
  } else {
    times = options.sample_times;
  }
  times.push_back(v0.t);
  times.push_back(t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.front() < v0.t || times.back() > t_end) {
    throw Error(ErrorKind::GridMismatch, "evolve_covariance: sample times outside [t0, t_end]");
  }

  const Eigen::Matrix4d a = sys.drift;
  const Eigen::Matrix4d d = sys.diffusion;
  auto rhs = [&a, &d](const Packed& x, Packed& dxdt, double /*t*/) {
    const Eigen::Matrix4d v = unpack(x);
    dxdt = pack(a * v + v * a.transpose() + d);
  };

  // Integrate in omega_m units; observers report in 1/gamma.
  const double scale = sys.time_scale();
  std::vector<double> internal(times.size());
  std::transform(times.begin(), times.end(), internal.begin(),
                 [scale](double t) { return t * scale; });

  Trajectory out;
  out.reserve(times.size());
  auto observer = [&](const Packed& x, double /*t*/) {
    CovarianceState s;
    s.t = times[out.size()];
    s.v = unpack(x);
    const double margin = physicality_margin(s.v);
    if (margin < -options.physicality_tol) {
      std::ostringstream msg;
      msg << "evolve_covariance: physicality margin " << margin << " at t = " << s.t;
      throw Error(ErrorKind::NonPhysical, msg.str());
    }
    out.push_back(s);
  };

  const double max_dt = 0.1 / sys.kappa();
  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, max_dt,
                                         odeint::runge_kutta_dopri5<Packed>());
  Packed x = pack(v0.v);
  const double dt0 = std::min(max_dt, 1e-3);
  try {
    odeint::integrate_times(stepper, rhs, x, internal.begin(), internal.end(), dt0, observer,
                            odeint::max_step_checker(100000));
  } catch (const odeint::odeint_error& e) {
    throw Error(ErrorKind::StepSizeUnderflow, std::string("evolve_covariance: ") + e.what());
  }
  return out;
}

CovarianceState lyapunov_steady_state(const LinearSystem& sys) {
  require_stable_drift(sys, "lyapunov_steady_state");
  const Eigen::Matrix4d& a = sys.drift;

  // Row k of the 10x10 operator is the packed (i, j) entry of A V + V A^T.
  Eigen::Matrix<double, 10, 10> op = Eigen::Matrix<double, 10, 10>::Zero();
  for (std::size_t col = 0; col < kPackedIndex.size(); ++col) {
    Packed unit{};
    unit[col] = 1.0;
    const Eigen::Matrix4d v = unpack(unit);
    const Packed image = pack(a * v + v * a.transpose());
    for (std::size_t row = 0; row < kPackedIndex.size(); ++row) {
      op(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = image[row];
    }
  }
  const Packed rhs_packed = pack(-sys.diffusion);
  const Eigen::Map<const Eigen::Matrix<double, 10, 1>> rhs(rhs_packed.data());
  const auto lu = op.fullPivLu();
  Eigen::Matrix<double, 10, 1> sol = lu.solve(rhs);
  sol += lu.solve(rhs - op * sol);  // one refinement step

  CovarianceState out;
  out.t = std::numeric_limits<double>::infinity();
  Packed packed{};
  std::copy(sol.data(), sol.data() + 10, packed.begin());
  out.v = unpack(packed);

  const double residual = (a * out.v + out.v * a.transpose() + sys.diffusion).norm();
  const double scale = sys.diffusion.norm() + 2.0 * a.norm() * out.v.norm();
  if (!(residual <= 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "lyapunov_steady_state: residual " << residual << " relative to " << scale;
    throw Error(ErrorKind::SolverFailure, msg.str());
  }
  return out;
}

VarianceResult lyapunov_variances(const NormalizedParams& params) {
  const auto ss = lyapunov_steady_state(build_system(params));
  VarianceResult out;
  out.dq2 = ss.v(kQ, kQ);
  out.dp2 = ss.v(kP, kP);
  out.n_t_f = occupancy_from_variances(out.dq2, out.dp2);
  out.method = VarianceMethod::Lyapunov;
  out.noise_model = ThermalNoiseModel::MarkovFlat;
  return out;
}

}  // namespace optocool
