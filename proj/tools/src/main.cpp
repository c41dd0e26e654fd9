#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "optocool/cli.hpp"
#include "optocool/error.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int report(std::string_view kind, const std::string& message, int code) {
  nlohmann::json record{{"error", {{"kind", std::string(kind)}, {"message", message}, {"exit_code", code}}}};
  std::cerr << record.dump() << '\n';
  return code;
}

bool is_config_error(optocool::ErrorKind kind) {
  using optocool::ErrorKind;
  return kind == ErrorKind::ParseError || kind == ErrorKind::ValidationError;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace optocool;

  CLI::App app{"Radiation-pressure self-cooling of a mirror: spectra, dynamics and figure presets",
               "optocool"};
  app.set_version_flag("--version", cli::version());
  std::string mode_text;
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  app.add_option("mode", mode_text,
                 "steady | spectrum | variances | adiabatic | optimize | dynamics | homodyne | "
                 "fig1 | fig2 | fig3")
      ->required();
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--out", out_path, "CSV destination (default: output_path key, else stdout)");
  app.add_option("--set", overrides, "override a config key, key=value (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("ParseError", e.what(), kConfigError);
  }

  const auto mode = cli::parse_mode(mode_text);
  if (!mode) return report("ParseError", "unknown mode '" + mode_text + "'", kConfigError);

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) return report("IoError", "cannot read config " + config_path, kConfigError);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else if (!cli::is_figure_mode(*mode)) {
    return report("ParseError", "--config is required for mode " + mode_text, kConfigError);
  }

  cli::RunConfig config;
  try {
    config = cli::parse_config(text, overrides, *mode);
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), kConfigError);
  }

  try {
    const auto table = cli::run(config);
    const std::string& path = out_path.empty() ? config.output_path : out_path;
    if (path.empty() || path == "-") {
      cli::emit_csv(table, std::cout);
    } else {
      cli::emit_csv(table, path);
    }
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), is_config_error(e.kind()) ? kConfigError : kRuntimeError);
  } catch (const std::exception& e) {
    return report("Internal", e.what(), kRuntimeError);
  }
  return 0;
}
