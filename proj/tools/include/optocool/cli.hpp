#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "optocool/model.hpp"
#include "optocool/spectra.hpp"

namespace optocool::cli {

enum class Mode { Steady, Spectrum, Variances, Adiabatic, Optimize, Dynamics, Homodyne, Fig1, Fig2, Fig3 };

const char* to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text);
bool is_figure_mode(Mode mode) noexcept;

enum class Spacing { Linear, Log };

struct Sweep {
  std::string variable = "b";  // one of b, phi, phi_nl, q_factor, n_t_i
  double start = 1.0;
  double stop = 10.0;
  int points = 2;
  Spacing spacing = Spacing::Linear;
  bool lock_phi_to_b = false;  // phi follows b when sweeping b

  std::vector<double> values() const;
};

struct Tolerances {
  double quadrature_rel = 1e-8;
  double ode_rel = 1e-9;
  double omega_max = 100.0;
};

struct SpectrumScan {
  double omega_min = 0.0;
  double omega_max = 2.0;
  int points = 401;
};

struct DynamicsSettings {
  std::optional<double> t_end{};  // 1/gamma units; unset means 20 / gamma_eff
  int samples = 401;
};

enum class Carrier { Cavity, Laser };

struct HomodyneSettings {
  std::optional<double> lo_rate{};  // gamma units; unset means gamma_eff
  double window = 10.0;             // 1 / lo_rate units
  Carrier carrier = Carrier::Cavity;
  double phase = 0.0;
  std::optional<int> panels{};
};

struct OptimizeSettings {
  double b_min = 1.0;
  double b_max = 10.0;
  int b_points = 19;
  int phi_points = 25;
  double rel_tol = 1e-5;
  bool lock_phi_to_b = false;
};

struct RunConfig {
  Mode mode = Mode::Variances;
  NormalizedParams params{};
  std::optional<PhysicalParams> physical{};  // when set, params come from normalize()
  BranchSelection branch = branch::Lowest{};
  double phi_c = 0.0;  // steady mode
  double drive = 0.0;
  std::optional<Sweep> sweep{};
  ThermalNoiseModel noise_model = ThermalNoiseModel::MarkovFlat;
  VarianceMethod method = VarianceMethod::ExactSpectrum;
  Tolerances tolerances{};
  SpectrumScan spectrum{};
  DynamicsSettings dynamics{};
  HomodyneSettings homodyne{};
  OptimizeSettings optimize{};
  std::string output_path;
};

/// Mode defaults, including the figure presets.
RunConfig preset(Mode mode);

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string origin;  // "line N" or "--set"
};

/// Splits a flat `key = value` document. '#' starts a comment anywhere.
std::vector<ConfigEntry> parse_entries(std::string_view text);

/// Builds and validates a RunConfig. `mode`, when given, overrides the
/// document's own mode key. Throws ParseError or ValidationError.
RunConfig parse_config(std::string_view text, std::span<const std::string> overrides = {},
                       std::optional<Mode> mode = std::nullopt);

std::vector<std::string> violations(const RunConfig& config);

/// Canonical key/value listing of a config, sorted by key.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config);

struct Column {
  std::string name;
  std::string unit;
};

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

struct ResultTable {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t column(std::string_view name) const;  // throws if missing
};

ResultTable run(const RunConfig& config);

/// 12 significant digits, shortest of fixed/exponent form.
std::string format_number(double value);

void emit_csv(const ResultTable& table, std::ostream& out);
void emit_csv(const ResultTable& table, const std::string& path);

const char* version() noexcept;

}  // namespace optocool::cli
