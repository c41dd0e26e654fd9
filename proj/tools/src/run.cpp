#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "optocool/adiabatic.hpp"
#include "optocool/cli.hpp"
#include "optocool/dynamics.hpp"
#include "optocool/error.hpp"

namespace optocool::cli {

namespace {

using Row = std::vector<Cell>;

const Column kStable{"stable", "bool"};
const Column kError{"error", "text"};

std::vector<Column> param_columns() {
  return {{"b", "1"}, {"phi", "1"}, {"phi_nl", "1"}, {"q_factor", "1"}, {"n_t_i", "1"}};
}

Row param_cells(const NormalizedParams& p) { return {p.b, p.phi, p.phi_nl, p.q_factor, p.n_t_i}; }

double& sweep_target(NormalizedParams& p, const std::string& variable) {
  if (variable == "b") return p.b;
  if (variable == "phi") return p.phi;
  if (variable == "phi_nl") return p.phi_nl;
  if (variable == "q_factor") return p.q_factor;
  return p.n_t_i;
}

NormalizedParams base_params(const RunConfig& c) {
  return c.physical ? normalize(*c.physical, c.branch) : c.params;
}

std::vector<NormalizedParams> sweep_points(const RunConfig& c) {
  const NormalizedParams base = base_params(c);
  if (!c.sweep) return {base};
  std::vector<NormalizedParams> out;
  for (double v : c.sweep->values()) {
    NormalizedParams p = base;
    sweep_target(p, c.sweep->variable) = v;
    if (c.sweep->lock_phi_to_b) p.phi = p.b;
    out.push_back(p);
  }
  return out;
}

QuadratureOptions quadrature(const RunConfig& c) {
  return {c.tolerances.omega_max, c.tolerances.quadrature_rel};
}

bool statically_stable(const NormalizedParams& p) {
  return p.violations().empty() && stability_check(p).stable;
}

// Fills `width` result cells for one sweep point; a module error leaves them
// empty and is reported in the trailing columns.
void append_row(ResultTable& table, Row head, const NormalizedParams& p, std::size_t width,
                const std::function<void(Row&)>& compute) {
  Row results;
  std::string error;
  bool stable = statically_stable(p);
  try {
    compute(results);
  } catch (const Error& e) {
    error = to_string(e.kind());
    if (e.kind() == ErrorKind::Unstable) stable = false;
    results.clear();
  }
  results.resize(width);
  head.insert(head.end(), results.begin(), results.end());
  head.emplace_back(stable);
  head.emplace_back(error);
  table.rows.push_back(std::move(head));
}

void finish_columns(ResultTable& table) {
  table.columns.push_back(kStable);
  table.columns.push_back(kError);
}

ResultTable run_steady(const RunConfig& c) {
  double phi_c = c.phi_c;
  double drive = c.drive;
  if (c.physical) {
    c.physical->validate();
    phi_c = c.physical->delta_c / c.physical->kappa;
    drive = normalized_drive(*c.physical);
  }
  ResultTable t;
  t.columns = {{"phi_c", "1"},         {"drive", "1"},  {"u", "1"},
               {"phi_eff", "1"},       {"static_margin", "1"},
               {"branch_slope", "1"},  {"marginal", "bool"}, kStable};
  const auto ss = solve_steady_state(phi_c, drive);
  for (const auto& br : ss.branches) {
    const double slope = 1.0 + br.phi_eff * br.phi_eff - 2.0 * br.phi_eff * br.u;
    t.rows.push_back({phi_c, drive, br.u, br.phi_eff, static_margin(br.phi_eff, br.u), slope,
                      br.marginal, br.stable});
  }
  return t;
}

ResultTable run_spectrum(const RunConfig& c) {
  const NormalizedParams p = base_params(c);
  ResultTable t;
  t.columns = {{"omega", "omega_m"}, {"s_q", "1/omega_m"}};
  finish_columns(t);
  const auto& s = c.spectrum;
  for (int i = 0; i < s.points; ++i) {
    const double w = i == s.points - 1
                         ? s.omega_max
                         : s.omega_min + (s.omega_max - s.omega_min) * i / (s.points - 1);
    append_row(t, {w}, p, 1, [&](Row& r) { r.emplace_back(noise_spectrum(w, p, c.noise_model).s_q); });
  }
  return t;
}

ResultTable run_variances(const RunConfig& c) {
  ResultTable t;
  t.columns = param_columns();
  t.columns.insert(t.columns.end(), {{"dq2", "1"},
                                     {"dp2", "1"},
                                     {"n_t_f", "1"},
                                     {"quadrature_error", "1"},
                                     {"cutoff_log_slope", "1"}});
  finish_columns(t);
  for (const auto& p : sweep_points(c)) {
    append_row(t, param_cells(p), p, 5, [&](Row& r) {
      VarianceResult v;
      switch (c.method) {
        case VarianceMethod::ExactSpectrum: v = integrate_variances(p, c.noise_model, quadrature(c)); break;
        case VarianceMethod::Adiabatic: v = approx_variance(p); break;
        case VarianceMethod::Lyapunov: v = lyapunov_variances(p); break;
      }
      r = {v.dq2, v.dp2, v.n_t_f, v.quadrature_error, v.cutoff_log_slope};
    });
  }
  return t;
}

ResultTable run_adiabatic(const RunConfig& c) {
  ResultTable t;
  t.columns = param_columns();
  t.columns.insert(t.columns.end(), {{"omega_eff_ratio", "1"},
                                     {"gamma_eff_ratio", "1"},
                                     {"q_eff", "1"},
                                     {"f", "1"},
                                     {"eta", "1"},
                                     {"dq2_thermal", "1"},
                                     {"dq2_radiation", "1"},
                                     {"dq2", "1"},
                                     {"n_t_f", "1"},
                                     {"gamma_eff_over_kappa", "1"},
                                     {"phi_nl_b_over_2", "1"},
                                     {"adiabatic_ok", "bool"}});
  finish_columns(t);
  for (const auto& p : sweep_points(c)) {
    append_row(t, param_cells(p), p, 12, [&](Row& r) {
      const auto eff = effective_rates(p);
      const auto dec = decompose(p);
      const auto v = approx_variance(p);
      const auto regime = regime_validity(p);
      r = {eff.omega_eff_ratio, eff.gamma_eff_ratio, eff.q_eff,
           dec.f,               dec.eta,             dec.dq2_thermal,
           dec.dq2_radiation,   v.dq2,               v.n_t_f,
           regime.gamma_eff_over_kappa, regime.phi_nl_omega_over_2kappa, regime.adiabatic_ok};
    });
  }
  return t;
}

ResultTable run_fig1(const RunConfig& c) {
  ResultTable t;
  t.columns = {{"b", "1"}, {"phi", "1"}, {"dq2", "1"}, {"dp2", "1"}, {"n_t_f", "1"}};
  finish_columns(t);
  for (const auto& p : sweep_points(c)) {
    append_row(t, {p.b, p.phi}, p, 3, [&](Row& r) {
      const auto v = integrate_variances(p, c.noise_model, quadrature(c));
      r = {v.dq2, v.dp2, v.n_t_f};
    });
  }
  return t;
}

ResultTable run_fig2(const RunConfig& c) {
  ResultTable t;
  t.columns = {{"phi", "1"}, {"dq2_exact", "1"}, {"dq2_adiabatic", "1"}, {"n_t_f_exact", "1"}};
  finish_columns(t);
  for (const auto& p : sweep_points(c)) {
    append_row(t, {p.phi}, p, 3, [&](Row& r) {
      const auto exact = integrate_variances(p, c.noise_model, quadrature(c));
      const auto approx = approx_variance(p);
      r = {exact.dq2, approx.dq2, exact.n_t_f};
    });
  }
  return t;
}

ResultTable run_optimize(const RunConfig& c) {
  const NormalizedParams p = base_params(c);
  OperatingPointSearch s;
  s.b_min = c.optimize.b_min;
  s.b_max = c.optimize.b_max;
  s.b_points = c.optimize.b_points;
  s.phi_points = c.optimize.phi_points;
  s.rel_tol = c.optimize.rel_tol;
  s.lock_phi_to_b = c.optimize.lock_phi_to_b;
  s.phi_nl = p.phi_nl;
  s.q_factor = p.q_factor;
  s.n_t_i = p.n_t_i;
  s.noise_model = c.noise_model;
  s.quadrature = quadrature(c);
  const auto best = optimize_operating_point(s);

  ResultTable t;
  t.columns = {{"b_opt", "1"}, {"phi_opt", "1"}, {"n_t_f_min", "1"},
               {"dq2", "1"},   {"dp2", "1"},     {"evaluations", "count"}};
  t.rows.push_back({best.b_opt, best.phi_opt, best.n_t_f_min, best.variances.dq2,
                    best.variances.dp2, static_cast<long long>(best.evaluations)});
  return t;
}

double gamma_eff(const NormalizedParams& p) {
  const double ratio = effective_damping_ratio(p);
  if (!(ratio > 0.0)) {
    throw Error(ErrorKind::Unstable, "effective damping is not positive; no cooling transient");
  }
  return ratio;
}

ResultTable run_dynamics(const RunConfig& c) {
  const NormalizedParams p = base_params(c);
  const auto sys = build_system(p);
  const double t_end = c.dynamics.t_end ? *c.dynamics.t_end : 20.0 / gamma_eff(p);

  EvolveOptions opts;
  opts.rel_tol = c.tolerances.ode_rel;
  opts.samples = c.dynamics.samples;
  const auto traj = evolve_covariance(sys, thermal_initial_state(p), t_end, opts);

  std::vector<TimePair> diagonal;
  diagonal.reserve(traj.size());
  for (const auto& s : traj) diagonal.push_back({s.t, s.t});
  const auto cx = two_time_correlations(sys, traj, OutputQuadrature::x_out(), diagonal);
  const auto cy = two_time_correlations(sys, traj, OutputQuadrature::y_out(), diagonal);

  ResultTable t;
  t.columns = {{"t", "1/gamma"},     {"dq2", "1"},          {"dp2", "1"},
               {"v_xx", "1"},        {"v_yy", "1"},         {"c_x", "kappa"},
               {"c_y", "kappa"},     {"physicality_margin", "1"}};
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& v = traj[k].v;
    t.rows.push_back({traj[k].t, v(kQ, kQ), v(kP, kP), v(kX, kX), v(kY, kY), cx.values[k],
                      cy.values[k], physicality_margin(v)});
  }
  return t;
}

ResultTable run_homodyne(const RunConfig& c) {
  const NormalizedParams p = base_params(c);
  const auto sys = build_system(p);
  const double lo_rate = c.homodyne.lo_rate ? *c.homodyne.lo_rate : gamma_eff(p);
  const double window = c.homodyne.window / lo_rate;
  const OutputQuadrature q = c.homodyne.carrier == Carrier::Cavity
                                 ? OutputQuadrature::cavity_frame(p, c.homodyne.phase)
                                 : OutputQuadrature{0.0, c.homodyne.phase};
  const int panels = c.homodyne.panels ? *c.homodyne.panels : default_panel_count(sys, q, window);
  const auto layout = matched_filter_layout(window, panels);

  EvolveOptions opts;
  opts.rel_tol = c.tolerances.ode_rel;
  opts.sample_times = layout.sample_times();
  const auto traj = evolve_covariance(sys, thermal_initial_state(p), opts.sample_times.back(), opts);
  const auto grid = two_time_correlations(sys, traj, q, layout);
  const auto h = homodyne_variance(grid, lo_rate);

  const auto ss = lyapunov_variances(p);
  Cell eta;
  Cell formula;
  if (p.phi > 0.0) {
    const double e = decompose(p).eta;
    eta = e;
    formula = 1.0 + e * (p.n_t_i - ss.n_t_f) + e * (1.0 - e) * p.n_t_i;
  }

  ResultTable t;
  t.columns = {{"lo_rate", "gamma"},        {"window", "1/lo_rate"}, {"carrier", "omega_m"},
               {"phase", "rad"},            {"panels", "count"},     {"dx_m2", "1"},
               {"truncation_bound", "1"},   {"eta", "1"},            {"n_t_f", "1"},
               {"dx_m2_closed_form", "1"}};
  t.rows.push_back({h.lo_rate, h.window, q.carrier, q.phase, static_cast<long long>(panels),
                    h.dx_m2, h.truncation_bound, eta, ss.n_t_f, formula});
  return t;
}

}  // namespace

std::size_t ResultTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw Error(ErrorKind::GridMismatch, "ResultTable: no column named " + std::string(name));
}

const char* version() noexcept { return OPTOCOOL_VERSION; }

ResultTable run(const RunConfig& config) {
  const auto problems = violations(config);
  if (!problems.empty()) {
    throw Error(ErrorKind::ValidationError, "run: invalid config: " + problems.front());
  }
  ResultTable table;
  switch (config.mode) {
    case Mode::Steady: table = run_steady(config); break;
    case Mode::Spectrum: table = run_spectrum(config); break;
    case Mode::Variances: table = run_variances(config); break;
    case Mode::Adiabatic: table = run_adiabatic(config); break;
    case Mode::Optimize: table = run_optimize(config); break;
    case Mode::Dynamics:
    case Mode::Fig3: table = run_dynamics(config); break;
    case Mode::Homodyne: table = run_homodyne(config); break;
    case Mode::Fig1: table = run_fig1(config); break;
    case Mode::Fig2: table = run_fig2(config); break;
  }
  table.metadata.emplace_back("optocool", version());
  for (auto& kv : config_echo(config)) table.metadata.push_back(std::move(kv));
  return table;
}

}  // namespace optocool::cli
