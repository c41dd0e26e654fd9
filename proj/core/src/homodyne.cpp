#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "optocool/dynamics.hpp"
#include "optocool/error.hpp"

namespace optocool {

namespace {

constexpr int kGaussOrder = 8;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};    // on [-1, 1]
  std::array<double, kGaussOrder> weights{};
};

const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, kGaussOrder>;
    GaussRule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    std::size_t k = 0;
    for (std::size_t i = a.size(); i-- > 0;) {
      r.nodes[k] = -a[i];
      r.weights[k++] = w[i];
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.nodes[k] = a[i];
      r.weights[k++] = w[i];
    }
    return r;
  }();
  return rule;
}

void composite_gauss(double length, int panels, std::vector<double>& nodes,
                     std::vector<double>& weights) {
  const auto& rule = gauss_rule();
  const double h = length / panels;
  nodes.clear();
  weights.clear();
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int k = 0; k < kGaussOrder; ++k) {
      nodes.push_back(mid + 0.5 * h * rule.nodes[k]);
      weights.push_back(0.5 * h * rule.weights[k]);
    }
  }
}

const CovarianceState& find_state(const Trajectory& trajectory, double t) {
  const auto it = std::lower_bound(trajectory.begin(), trajectory.end(), t,
                                   [](const CovarianceState& s, double x) { return s.t < x; });
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  for (auto candidate : {it, it == trajectory.begin() ? it : std::prev(it)}) {
    if (candidate != trajectory.end() && std::abs(candidate->t - t) <= tol) return *candidate;
  }
  std::ostringstream msg;
  msg << "two_time_correlations: trajectory has no sample at t = " << t;
  throw Error(ErrorKind::GridMismatch, msg.str());
}

Eigen::Vector2d quadrature_weights(const OutputQuadrature& q, double t_internal) {
  const double angle = q.carrier * t_internal + q.phase;
  return {std::cos(angle), -std::sin(angle)};
}

}  // namespace

std::string OutputQuadrature::label() const {
  if (carrier == 0.0 && phase == 0.0) return "x_out";
  if (carrier == 0.0 && std::abs(phase + 1.5707963267948966) < 1e-15) return "y_out";
  std::ostringstream out;
  out << "demodulated(carrier=" << carrier << ",phase=" << phase << ")";
  return out.str();
}

std::vector<TimePair> MatchedFilterLayout::pairs() const {
  std::vector<TimePair> out;
  out.reserve(t_nodes.size() * lag_nodes.size());
  for (double t : t_nodes) {
    for (double s : lag_nodes) out.push_back({t, t + s});
  }
  return out;
}

std::vector<double> MatchedFilterLayout::weights() const {
  std::vector<double> out;
  out.reserve(t_weights.size() * lag_weights.size());
  for (double wt : t_weights) {
    for (double ws : lag_weights) out.push_back(wt * ws);
  }
  return out;
}

std::vector<double> MatchedFilterLayout::sample_times() const {
  std::vector<double> out(t_nodes);
  out.push_back(0.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MatchedFilterLayout matched_filter_layout(double window, int panels) {
  if (!(window > 0.0) || panels < 1) {
    throw Error(ErrorKind::InvalidParams, "matched_filter_layout: need window > 0 and panels >= 1");
  }
  if (panels > kMaxMatchedFilterPanels) {
    std::ostringstream msg;
    msg << "matched_filter_layout: " << panels << " panels exceeds the limit of "
        << kMaxMatchedFilterPanels << "; shorten the window or raise the LO rate";
    throw Error(ErrorKind::InvalidParams, msg.str());
  }
  MatchedFilterLayout out;
  out.window = window;
  composite_gauss(window, panels, out.t_nodes, out.t_weights);
  composite_gauss(window, panels, out.lag_nodes, out.lag_weights);
  return out;
}

int default_panel_count(const LinearSystem& sys, const OutputQuadrature& quadrature,
                        double window) {
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(sys.drift, false);
  const double fastest = solver.eigenvalues().cwiseAbs().maxCoeff() + std::abs(quadrature.carrier);
  // About two radians of the fastest oscillation per 8-point panel.
  const double panel = 2.0 / std::max(fastest, 1e-12);
  return std::max(4, static_cast<int>(std::ceil(window * sys.time_scale() / panel)));
}

TwoTimeGrid two_time_correlations(const LinearSystem& sys, const Trajectory& trajectory,
                                  const OutputQuadrature& quadrature,
                                  std::span<const TimePair> pairs) {
  TwoTimeGrid grid;
  grid.quadrature = quadrature;
  grid.pairs.assign(pairs.begin(), pairs.end());
  grid.values.reserve(pairs.size());
  grid.kappa_over_gamma = sys.params.q_factor / sys.params.b;

  const double scale = sys.time_scale();
  const Eigen::Matrix4d at = sys.drift.transpose();
  std::map<double, Eigen::Matrix4d> propagators;

  for (const auto& pr : pairs) {
    if (!(pr.t >= 0.0) || !(pr.t_prime >= 0.0)) {
      throw Error(ErrorKind::GridMismatch, "two_time_correlations: times must be >= 0");
    }
    const double early = std::min(pr.t, pr.t_prime);
    const double late = std::max(pr.t, pr.t_prime);
    const double lag = late - early;

    auto it = propagators.find(lag);
    if (it == propagators.end()) {
      it = propagators.emplace(lag, (at * (lag * scale)).exp()).first;
    }
    const CovarianceState& state = find_state(trajectory, early);
    // 2 kappa [(V - I) exp(A^T tau)] on the field block; the -I term is the
    // input-noise cross correlation allowed by causality.
    const Eigen::Matrix<double, 2, 4> excess =
        (state.v - Eigen::Matrix4d::Identity()).block<2, 4>(kX, 0);
    const Eigen::Matrix2d field = excess * it->second.block<4, 2>(0, kX);
    const Eigen::Vector2d u_early = quadrature_weights(quadrature, early * scale);
    const Eigen::Vector2d u_late = quadrature_weights(quadrature, late * scale);
    grid.values.push_back(2.0 * u_early.dot(field * u_late));
  }
  return grid;
}

TwoTimeGrid two_time_correlations(const LinearSystem& sys, const Trajectory& trajectory,
                                  const OutputQuadrature& quadrature,
                                  const MatchedFilterLayout& layout) {
  const auto pairs = layout.pairs();
  TwoTimeGrid grid = two_time_correlations(sys, trajectory, quadrature, pairs);
  grid.weights = layout.weights();
  grid.window = layout.window;
  return grid;
}

HomodyneResult homodyne_variance(const TwoTimeGrid& grid, double lo_rate) {
  if (!(lo_rate > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "homodyne_variance: lo_rate must be > 0");
  }
  if (grid.weights.size() != grid.pairs.size() || grid.values.size() != grid.pairs.size() ||
      grid.pairs.empty()) {
    throw Error(ErrorKind::GridMismatch,
                "homodyne_variance: grid needs one value and one quadrature weight per pair");
  }
  const double rw = lo_rate * grid.window;
  if (rw < 5.0) {
    std::ostringstream msg;
    msg << "homodyne_variance: window " << rw << " / lo_rate is shorter than 5";
    throw Error(ErrorKind::WindowTooShort, msg.str());
  }

  const double norm = 2.0 * lo_rate;
  double integral = 0.0;
  double c_max = 0.0;
  for (std::size_t k = 0; k < grid.pairs.size(); ++k) {
    const auto& pr = grid.pairs[k];
    const double c = grid.values[k] * grid.kappa_over_gamma;
    c_max = std::max(c_max, std::abs(c));
    integral += grid.weights[k] * norm * std::exp(-lo_rate * (pr.t + pr.t_prime)) * c;
  }
  integral *= 2.0;  // the grid covers t' >= t only

  // Mode weight outside [0, W] x [0, W] in (t, lag), times the largest |C| seen.
  const double inside = (1.0 - std::exp(-2.0 * rw)) * (1.0 - std::exp(-rw));
  const double bound = 2.0 * c_max * (1.0 - inside) / lo_rate;

  HomodyneResult out;
  out.dx_m2 = 1.0 + integral;
  out.lo_rate = lo_rate;
  out.window = rw;
  out.truncation_bound = bound;
  if (bound > 0.01 * std::abs(integral) && bound > 1e-12) {
    std::ostringstream msg;
    msg << "homodyne_variance: truncation bound " << bound << " exceeds 1% of " << integral;
    throw Error(ErrorKind::WindowTooShort, msg.str());
  }
  return out;
}

}  // namespace optocool
