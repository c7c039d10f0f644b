#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tpslab/tpslab.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 4;

int print_report(tpslab_status status, char* report, FILE* stream) {
  if (status != TPSLAB_OK) {
    std::fprintf(stderr, "tpslab: %s: %s\n", tpslab_status_name(status), tpslab_last_error());
    return status == TPSLAB_ERR_INVALID_ARGUMENT ? kExitConfig : kExitRuntime;
  }
  if (report) std::fputs(report, stream);
  tpslab_string_free(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement relative to tensor product structures: qubit, Galilean, split and scattering suites"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print the library version and exit");

  std::string run_config;
  std::optional<std::string> output;
  std::optional<std::string> format;
  auto* run = app.add_subcommand("run", "Run the suite described by a config file");
  run->add_option("config", run_config, "Config file (JSON)")->required();
  run->add_option("--output", output, "Result path, overriding output.path");
  run->add_option("--format", format, "Result format, overriding output.format")->check(CLI::IsMember({"json", "csv"}));

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", validate_config, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (show_version) {
    std::printf("tpslab %s\n", tpslab_version());
    return 0;
  }

  if (*run) {
    int exit_code = 0;
    char* report = nullptr;
    const auto status = tpslab_run_config(run_config.c_str(), output ? output->c_str() : nullptr,
                                          format ? format->c_str() : nullptr, &exit_code, &report);
    if (const int failed = print_report(status, report, exit_code == 0 || exit_code == 1 ? stdout : stderr)) return failed;
    return exit_code;
  }

  if (*validate) {
    size_t n = 0;
    char* report = nullptr;
    const auto status = tpslab_validate_config(validate_config.c_str(), &n, &report);
    if (const int failed = print_report(status, report, stderr)) return failed;
    if (n == 0) {
      std::printf("%s: ok\n", validate_config.c_str());
      return 0;
    }
    return kExitConfig;
  }

  std::fputs(app.help().c_str(), stdout);
  return 0;
}
