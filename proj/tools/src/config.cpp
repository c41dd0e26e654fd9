#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "optocool/adiabatic.hpp"
#include "optocool/cli.hpp"
#include "optocool/dynamics.hpp"
#include "optocool/error.hpp"

namespace optocool::cli {

namespace {

struct BadValue {
  std::string what;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw BadValue{"expected a number, got '" + std::string(text) + "'"};
  }
  return value;
}

int to_int(std::string_view text) {
  int value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw BadValue{"expected an integer, got '" + std::string(text) + "'"};
  }
  return value;
}

bool to_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw BadValue{"expected true or false, got '" + std::string(text) + "'"};
}

std::optional<double> to_auto_double(std::string_view text) {
  if (text == "auto") return std::nullopt;
  return to_double(text);
}

std::string num(double v) { return format_number(v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

ThermalNoiseModel to_noise_model(std::string_view text) {
  if (text == "quantum_coth") return ThermalNoiseModel::QuantumCoth;
  if (text == "markov_flat") return ThermalNoiseModel::MarkovFlat;
  throw BadValue{"expected quantum_coth or markov_flat, got '" + std::string(text) + "'"};
}

const char* noise_model_key(ThermalNoiseModel m) {
  return m == ThermalNoiseModel::QuantumCoth ? "quantum_coth" : "markov_flat";
}

VarianceMethod to_method(std::string_view text) {
  if (text == "exact") return VarianceMethod::ExactSpectrum;
  if (text == "adiabatic") return VarianceMethod::Adiabatic;
  if (text == "lyapunov") return VarianceMethod::Lyapunov;
  throw BadValue{"expected exact, adiabatic or lyapunov, got '" + std::string(text) + "'"};
}

const char* method_key(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::ExactSpectrum: return "exact";
    case VarianceMethod::Adiabatic: return "adiabatic";
    case VarianceMethod::Lyapunov: return "lyapunov";
  }
  return "exact";
}

Sweep& sweep_of(RunConfig& c) {
  if (!c.sweep) c.sweep.emplace();
  return *c.sweep;
}

PhysicalParams& physical_of(RunConfig& c) {
  if (!c.physical) c.physical.emplace();
  return *c.physical;
}

struct KeySpec {
  std::function<void(RunConfig&, std::string_view)> apply;
  std::function<std::optional<std::string>(const RunConfig&)> echo;
};

template <typename Get>
KeySpec number_key(Get get) {
  return {[get](RunConfig& c, std::string_view v) { get(c) = to_double(v); },
          [get](const RunConfig& c) -> std::optional<std::string> {
            return num(get(c));
          }};
}

template <typename Get>
KeySpec int_key(Get get) {
  return {[get](RunConfig& c, std::string_view v) { get(c) = to_int(v); },
          [get](const RunConfig& c) -> std::optional<std::string> {
            return std::to_string(get(c));
          }};
}

template <typename Get>
KeySpec physical_key(Get get) {
  return {[get](RunConfig& c, std::string_view v) { get(physical_of(c)) = to_double(v); },
          [get](const RunConfig& c) -> std::optional<std::string> {
            if (!c.physical) return std::nullopt;
            return num(get(*c.physical));
          }};
}

template <typename Get>
KeySpec sweep_number_key(Get get) {
  return {[get](RunConfig& c, std::string_view v) { get(sweep_of(c)) = to_double(v); },
          [get](const RunConfig& c) -> std::optional<std::string> {
            if (!c.sweep) return std::nullopt;
            return num(get(*c.sweep));
          }};
}

const std::map<std::string, KeySpec, std::less<>>& key_table() {
  static const std::map<std::string, KeySpec, std::less<>> table = [] {
    std::map<std::string, KeySpec, std::less<>> t;
    t["b"] = number_key([](auto& c) -> auto& { return c.params.b; });
    t["phi"] = number_key([](auto& c) -> auto& { return c.params.phi; });
    t["phi_nl"] = number_key([](auto& c) -> auto& { return c.params.phi_nl; });
    t["q_factor"] = number_key([](auto& c) -> auto& { return c.params.q_factor; });
    t["n_t_i"] = number_key([](auto& c) -> auto& { return c.params.n_t_i; });
    t["phi_c"] = number_key([](auto& c) -> auto& { return c.phi_c; });
    t["drive"] = number_key([](auto& c) -> auto& { return c.drive; });

    t["physical.omega_m"] = physical_key([](auto& p) -> auto& { return p.omega_m; });
    t["physical.kappa"] = physical_key([](auto& p) -> auto& { return p.kappa; });
    t["physical.gamma"] = physical_key([](auto& p) -> auto& { return p.gamma; });
    t["physical.mass"] = physical_key([](auto& p) -> auto& { return p.mass; });
    t["physical.cavity_length"] =
        physical_key([](auto& p) -> auto& { return p.cavity_length; });
    t["physical.omega_c"] = physical_key([](auto& p) -> auto& { return p.omega_c; });
    t["physical.delta_c"] = physical_key([](auto& p) -> auto& { return p.delta_c; });
    t["physical.drive_intensity"] =
        physical_key([](auto& p) -> auto& { return p.drive_intensity; });
    t["physical.temperature"] =
        physical_key([](auto& p) -> auto& { return p.temperature; });
    t["physical.branch"] = {
        [](RunConfig& c, std::string_view v) {
          if (v == "lowest") {
            c.branch = branch::Lowest{};
          } else if (v == "highest") {
            c.branch = branch::Highest{};
          } else {
            c.branch = branch::Closest{to_double(v)};
          }
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.physical) return std::nullopt;
          if (std::holds_alternative<branch::Lowest>(c.branch)) return "lowest";
          if (std::holds_alternative<branch::Highest>(c.branch)) return "highest";
          return num(std::get<branch::Closest>(c.branch).u);
        }};

    t["sweep.variable"] = {
        [](RunConfig& c, std::string_view v) { sweep_of(c).variable = std::string(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.sweep) return std::nullopt;
          return c.sweep->variable;
        }};
    t["sweep.start"] = sweep_number_key([](auto& s) -> auto& { return s.start; });
    t["sweep.stop"] = sweep_number_key([](auto& s) -> auto& { return s.stop; });
    t["sweep.points"] = {
        [](RunConfig& c, std::string_view v) { sweep_of(c).points = to_int(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.sweep) return std::nullopt;
          return std::to_string(c.sweep->points);
        }};
    t["sweep.spacing"] = {
        [](RunConfig& c, std::string_view v) {
          if (v == "linear") {
            sweep_of(c).spacing = Spacing::Linear;
          } else if (v == "log") {
            sweep_of(c).spacing = Spacing::Log;
          } else {
            throw BadValue{"expected linear or log, got '" + std::string(v) + "'"};
          }
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.sweep) return std::nullopt;
          return std::string(c.sweep->spacing == Spacing::Log ? "log" : "linear");
        }};
    t["sweep.lock_phi_to_b"] = {
        [](RunConfig& c, std::string_view v) { sweep_of(c).lock_phi_to_b = to_bool(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          if (!c.sweep) return std::nullopt;
          return boolean(c.sweep->lock_phi_to_b);
        }};

    t["noise_model"] = {
        [](RunConfig& c, std::string_view v) { c.noise_model = to_noise_model(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          return std::string(noise_model_key(c.noise_model));
        }};
    t["method"] = {[](RunConfig& c, std::string_view v) { c.method = to_method(v); },
                   [](const RunConfig& c) -> std::optional<std::string> {
                     return std::string(method_key(c.method));
                   }};
    t["tolerances.quadrature_rel"] =
        number_key([](auto& c) -> auto& { return c.tolerances.quadrature_rel; });
    t["tolerances.ode_rel"] =
        number_key([](auto& c) -> auto& { return c.tolerances.ode_rel; });
    t["tolerances.omega_max"] =
        number_key([](auto& c) -> auto& { return c.tolerances.omega_max; });
    t["output_path"] = {[](RunConfig& c, std::string_view v) { c.output_path = std::string(v); },
                        [](const RunConfig& c) -> std::optional<std::string> {
                          if (c.output_path.empty()) return std::nullopt;
                          return c.output_path;
                        }};

    t["spectrum.omega_min"] =
        number_key([](auto& c) -> auto& { return c.spectrum.omega_min; });
    t["spectrum.omega_max"] =
        number_key([](auto& c) -> auto& { return c.spectrum.omega_max; });
    t["spectrum.points"] = int_key([](auto& c) -> auto& { return c.spectrum.points; });

    t["dynamics.t_end"] = {
        [](RunConfig& c, std::string_view v) { c.dynamics.t_end = to_auto_double(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.dynamics.t_end ? num(*c.dynamics.t_end) : "auto";
        }};
    t["dynamics.samples"] = int_key([](auto& c) -> auto& { return c.dynamics.samples; });

    t["homodyne.lo_rate"] = {
        [](RunConfig& c, std::string_view v) { c.homodyne.lo_rate = to_auto_double(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.homodyne.lo_rate ? num(*c.homodyne.lo_rate) : "auto";
        }};
    t["homodyne.window"] = number_key([](auto& c) -> auto& { return c.homodyne.window; });
    t["homodyne.phase"] = number_key([](auto& c) -> auto& { return c.homodyne.phase; });
    t["homodyne.carrier"] = {
        [](RunConfig& c, std::string_view v) {
          if (v == "cavity") {
            c.homodyne.carrier = Carrier::Cavity;
          } else if (v == "laser") {
            c.homodyne.carrier = Carrier::Laser;
          } else {
            throw BadValue{"expected cavity or laser, got '" + std::string(v) + "'"};
          }
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return std::string(c.homodyne.carrier == Carrier::Cavity ? "cavity" : "laser");
        }};
    t["homodyne.panels"] = {
        [](RunConfig& c, std::string_view v) {
          if (v == "auto") {
            c.homodyne.panels.reset();
          } else {
            c.homodyne.panels = to_int(v);
          }
        },
        [](const RunConfig& c) -> std::optional<std::string> {
          return c.homodyne.panels ? std::to_string(*c.homodyne.panels) : "auto";
        }};

    t["optimize.b_min"] = number_key([](auto& c) -> auto& { return c.optimize.b_min; });
    t["optimize.b_max"] = number_key([](auto& c) -> auto& { return c.optimize.b_max; });
    t["optimize.b_points"] = int_key([](auto& c) -> auto& { return c.optimize.b_points; });
    t["optimize.phi_points"] =
        int_key([](auto& c) -> auto& { return c.optimize.phi_points; });
    t["optimize.rel_tol"] = number_key([](auto& c) -> auto& { return c.optimize.rel_tol; });
    t["optimize.lock_phi_to_b"] = {
        [](RunConfig& c, std::string_view v) { c.optimize.lock_phi_to_b = to_bool(v); },
        [](const RunConfig& c) -> std::optional<std::string> {
          return boolean(c.optimize.lock_phi_to_b);
        }};
    return t;
  }();
  return table;
}

constexpr std::array<std::pair<Mode, const char*>, 10> kModes{{{Mode::Steady, "steady"},
                                                               {Mode::Spectrum, "spectrum"},
                                                               {Mode::Variances, "variances"},
                                                               {Mode::Adiabatic, "adiabatic"},
                                                               {Mode::Optimize, "optimize"},
                                                               {Mode::Dynamics, "dynamics"},
                                                               {Mode::Homodyne, "homodyne"},
                                                               {Mode::Fig1, "fig1"},
                                                               {Mode::Fig2, "fig2"},
                                                               {Mode::Fig3, "fig3"}}};

bool sweepable(Mode m) {
  return m == Mode::Variances || m == Mode::Adiabatic || m == Mode::Fig1 || m == Mode::Fig2;
}

[[noreturn]] void parse_error(const std::string& origin, std::string_view key,
                              const std::string& what) {
  std::ostringstream msg;
  msg << origin;
  if (!key.empty()) msg << ", field '" << key << "'";
  msg << ": " << what;
  throw Error(ErrorKind::ParseError, msg.str());
}

}  // namespace

const char* to_string(Mode mode) noexcept {
  for (const auto& [m, name] : kModes) {
    if (m == mode) return name;
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  for (const auto& [m, name] : kModes) {
    if (text == name) return m;
  }
  return std::nullopt;
}

bool is_figure_mode(Mode mode) noexcept {
  return mode == Mode::Fig1 || mode == Mode::Fig2 || mode == Mode::Fig3;
}

std::vector<double> Sweep::values() const {
  std::vector<double> out(static_cast<std::size_t>(std::max(points, 0)));
  if (points == 1) {
    out[0] = start;
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    if (spacing == Spacing::Log) {
      out[static_cast<std::size_t>(i)] =
          i == points - 1 ? stop : std::exp(std::log(start) + s * (std::log(stop) - std::log(start)));
    } else {
      out[static_cast<std::size_t>(i)] = i == points - 1 ? stop : start + s * (stop - start);
    }
  }
  return out;
}

RunConfig preset(Mode mode) {
  RunConfig c;
  c.mode = mode;
  const NormalizedParams sideband{10.0, 10.0, 0.1, 1e4, 100.0};
  switch (mode) {
    case Mode::Fig1:
      c.params = sideband;
      c.noise_model = ThermalNoiseModel::QuantumCoth;
      c.sweep = Sweep{"b", 1.0, 10.0, 37, Spacing::Linear, true};
      break;
    case Mode::Fig2:
      c.params = sideband;
      c.noise_model = ThermalNoiseModel::QuantumCoth;
      c.sweep = Sweep{"phi", 5.0, 20.0, 61, Spacing::Linear, false};
      break;
    case Mode::Fig3:
      c.params = sideband;
      break;
    default:
      break;
  }
  return c;
}

std::vector<ConfigEntry> parse_entries(std::string_view text) {
  std::vector<ConfigEntry> out;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string origin = "line " + std::to_string(line_no);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(origin, {}, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) parse_error(origin, {}, "empty key");
    if (value.empty()) parse_error(origin, key, "empty value");
    if (!seen.insert(std::string(key)).second) parse_error(origin, key, "duplicate key");
    out.push_back({std::string(key), std::string(value), origin});
  }
  return out;
}

RunConfig parse_config(std::string_view text, std::span<const std::string> overrides,
                       std::optional<Mode> mode) {
  auto entries = parse_entries(text);
  int set_no = 0;
  for (const auto& o : overrides) {
    ++set_no;
    const std::string origin = "--set #" + std::to_string(set_no);
    const auto eq = o.find('=');
    if (eq == std::string::npos) parse_error(origin, {}, "expected key=value, got '" + o + "'");
    const auto key = trim(std::string_view(o).substr(0, eq));
    const auto value = trim(std::string_view(o).substr(eq + 1));
    if (key.empty() || value.empty()) parse_error(origin, key, "empty key or value");
    entries.push_back({std::string(key), std::string(value), origin});
  }

  std::optional<Mode> doc_mode;
  for (const auto& e : entries) {
    if (e.key != "mode") continue;
    doc_mode = parse_mode(e.value);
    if (!doc_mode) parse_error(e.origin, e.key, "unknown mode '" + e.value + "'");
  }
  if (!mode) mode = doc_mode;
  if (!mode) throw Error(ErrorKind::ParseError, "no mode given on the command line or in the config");

  RunConfig config = preset(*mode);
  const auto& table = key_table();
  for (const auto& e : entries) {
    if (e.key == "mode") continue;
    const auto it = table.find(e.key);
    if (it == table.end()) parse_error(e.origin, e.key, "unknown key");
    try {
      it->second.apply(config, e.value);
    } catch (const BadValue& bad) {
      parse_error(e.origin, e.key, bad.what);
    }
  }

  const auto problems = violations(config);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << problems.size() << " invalid setting(s):";
    for (const auto& p : problems) msg << " " << p << ";";
    throw Error(ErrorKind::ValidationError, msg.str());
  }
  return config;
}

std::vector<std::string> violations(const RunConfig& c) {
  std::vector<std::string> out;
  auto add = [&out](bool bad, std::string what) {
    if (bad) out.push_back(std::move(what));
  };

  if (c.physical) {
    for (const auto& v : c.physical->violations()) out.push_back("physical: " + v);
  } else if (c.mode != Mode::Steady) {
    for (const auto& v : c.params.violations()) out.push_back(v);
  }
  if (c.mode == Mode::Steady && !c.physical) {
    add(!std::isfinite(c.phi_c), "phi_c must be finite");
    add(!(c.drive >= 0.0) || !std::isfinite(c.drive), "drive must be finite and >= 0");
  }

  if (c.sweep) {
    const auto& s = *c.sweep;
    static const std::set<std::string, std::less<>> allowed{"b", "phi", "phi_nl", "q_factor",
                                                            "n_t_i"};
    add(!sweepable(c.mode), std::string("sweep is not supported in mode ") + to_string(c.mode));
    add(!allowed.contains(s.variable),
        "sweep.variable must be one of b, phi, phi_nl, q_factor, n_t_i (got '" + s.variable + "')");
    add(s.points < 2, "sweep.points must be >= 2");
    add(!std::isfinite(s.start) || !std::isfinite(s.stop), "sweep.start and sweep.stop must be finite");
    add(s.spacing == Spacing::Log && !(s.start > 0.0 && s.stop > 0.0),
        "sweep.spacing = log requires sweep.start > 0 and sweep.stop > 0");
    add(s.lock_phi_to_b && s.variable != "b", "sweep.lock_phi_to_b requires sweep.variable = b");
  }

  add(!(c.tolerances.quadrature_rel > 0.0), "tolerances.quadrature_rel must be > 0");
  add(!(c.tolerances.ode_rel > 0.0), "tolerances.ode_rel must be > 0");
  add(!(c.tolerances.omega_max > 2.0), "tolerances.omega_max must be > 2");

  add(c.spectrum.points < 2, "spectrum.points must be >= 2");
  add(!(c.spectrum.omega_max > c.spectrum.omega_min), "spectrum.omega_max must exceed spectrum.omega_min");

  add(c.dynamics.samples < 2, "dynamics.samples must be >= 2");
  add(c.dynamics.t_end && !(*c.dynamics.t_end > 0.0), "dynamics.t_end must be > 0");

  add(c.homodyne.lo_rate && !(*c.homodyne.lo_rate > 0.0), "homodyne.lo_rate must be > 0");
  add(!(c.homodyne.window > 0.0), "homodyne.window must be > 0");
  add(!std::isfinite(c.homodyne.phase), "homodyne.phase must be finite");
  add(c.homodyne.panels && (*c.homodyne.panels < 1 || *c.homodyne.panels > kMaxMatchedFilterPanels),
      "homodyne.panels must be in [1, " + std::to_string(kMaxMatchedFilterPanels) + "]");

  add(!(c.optimize.b_min > 0.0), "optimize.b_min must be > 0");
  add(!(c.optimize.b_max >= c.optimize.b_min), "optimize.b_max must be >= optimize.b_min");
  add(c.optimize.b_points < 1, "optimize.b_points must be >= 1");
  add(c.optimize.phi_points < 3, "optimize.phi_points must be >= 3");
  add(!(c.optimize.rel_tol > 0.0), "optimize.rel_tol must be > 0");
  return out;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("mode", to_string(config.mode));
  for (const auto& [key, spec] : key_table()) {
    if (auto value = spec.echo(config)) out.emplace_back(key, std::move(*value));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace optocool::cli
