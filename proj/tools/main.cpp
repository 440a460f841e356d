#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "photobio_app/acceptance.hpp"

namespace app = photobio::app;

namespace {

const std::vector<std::string> kCommands{"taxis",  "basic-state", "dispersion", "spectrum", "neutral", "critical",
                                         "sweep-rt", "sweep-le", "fields",   "phase",    "repro"};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("photobio");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("PHOTOBIO_LOG")) {
    level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") level = spdlog::level::warn;
  }
  spdlog::set_level(level);
}

int report_error(const std::string& command, const std::string& kind, const std::string& message, int code,
                 const std::optional<std::string>& out_dir) {
  app::json err;
  err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}, {"command", command},
                  {"code_version", app::kCodeVersion}};
  std::cerr << err.dump() << "\n";
  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    std::ofstream f(std::filesystem::path(*out_dir) / "error.json");
    if (f) f << err.dump(2) << "\n";
  }
  return code;
}

int cmd_repro(const app::RunConfig& c, app::Workbench& wb) {
  const auto dir = app::prepare_dir(c.output_dir) / "repro";
  const auto checks = app::all_criteria();
  app::json results = app::json::array();
  bool all = true;
  for (const auto& check : checks) {
    const auto r = check(wb, dir);
    all = all && r.passed;
    std::cout << app::format_result(r) << std::endl;
    results.push_back({{"criterion", r.id}, {"passed", r.passed}, {"detail", r.detail}});
  }
  app::write_json(std::filesystem::path(c.output_dir) / "repro.json", app::make_metadata("repro", c),
                  "photobio.repro/1", results);
  return all ? app::kExitOk : app::kExitAcceptance;
}

int dispatch(const std::string& cmd, const app::RunConfig& c) {
  app::Workbench wb;
  if (cmd == "taxis") return app::cmd_taxis(c, wb);
  if (cmd == "basic-state") return app::cmd_basic_state(c, wb);
  if (cmd == "dispersion") return app::cmd_dispersion(c, wb);
  if (cmd == "spectrum") return app::cmd_spectrum(c, wb);
  if (cmd == "neutral") return app::cmd_neutral(c, wb);
  if (cmd == "critical") return app::cmd_critical(c, wb);
  if (cmd == "sweep-rt") return app::run_sweep(c, wb, true);
  if (cmd == "sweep-le") return app::run_sweep(c, wb, false);
  if (cmd == "fields") return app::cmd_fields(c, wb);
  if (cmd == "phase") return app::cmd_phase(c, wb);
  return cmd_repro(c, wb);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App cli{"Linear stability of phototactic bioconvection with heating"};
  cli.set_version_flag("--version", std::string(app::kCodeVersion));
  std::string command;
  std::optional<std::string> config_file;
  std::map<std::string, std::string> values;
  bool table = false;

  cli.add_option("command", command, "Subcommand")->required()->check(CLI::IsMember(kCommands));
  cli.add_option("-c,--config", config_file, "Flat key = value config file");
  std::map<std::string, CLI::Option*> opts;
  for (const auto& key : app::config_keys()) {
    if (key == "table") continue;
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    if (key == "output_dir") names += ",-o,--out";
    opts[key] = cli.add_option(names, values[key], "Override config key '" + key + "'");
  }
  auto* table_flag = cli.add_flag("--table", table, "Write the tabulated taxis function");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(command.empty() ? "" : command, "invalid_config", e.what(), app::kExitConfig, std::nullopt);
  }

  std::optional<std::string> out_dir;
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& key : app::config_keys()) {
    if (key == "table") {
      if (table_flag->count() > 0) overrides.emplace_back("table", table ? "true" : "false");
    } else if (opts[key]->count() > 0) {
      overrides.emplace_back(key, values[key]);
      if (key == "output_dir") out_dir = values[key];
    }
  }

  app::RunConfig cfg;
  try {
    cfg = app::build_config(config_file, overrides);
  } catch (const app::ConfigError& e) {
    return report_error(command, "invalid_config", e.what(), app::kExitConfig, out_dir);
  } catch (const photobio::Error& e) {
    return report_error(command, photobio::to_string(e.kind()), e.what(), app::kExitConfig, out_dir);
  }
  out_dir = cfg.output_dir;
  spdlog::debug("command {} -> {}", command, cfg.output_dir);

  try {
    return dispatch(command, cfg);
  } catch (const app::ConfigError& e) {
    return report_error(command, "invalid_config", e.what(), app::kExitConfig, out_dir);
  } catch (const app::PartialFailure& e) {
    return report_error(command, photobio::to_string(e.kind()), e.what(), app::kExitSolver, out_dir);
  } catch (const photobio::Error& e) {
    const int code = e.is_input_error() ? app::kExitConfig : app::kExitSolver;
    return report_error(command, photobio::to_string(e.kind()), e.what(), code, out_dir);
  } catch (const std::exception& e) {
    return report_error(command, "internal", e.what(), app::kExitSolver, out_dir);
  }
}
