#pragma once

// Config-driven suite runner behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpslab/galilean.hpp"
#include "tpslab/scattering.hpp"

namespace tpslab::experiment {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitChecksFailed = 1, kExitConfig = 2, kExitGuard = 3, kExitRuntime = 4 };

enum class Suite { QubitDemo, GalileanCheck, SplitCheck, Scatter };
enum class OutputFormat { Json, Csv };

std::string to_string(Suite s);
std::string to_string(OutputFormat f);

struct QubitDemoParams {
  std::size_t rotation_samples = 50;
  std::size_t random_states = 20;
};

struct GalileanParams {
  galilean::ParticleSpec particle{};
  galilean::MomentumGrid grid{};
  std::size_t elements = 100;
  std::size_t states = 4;
  std::size_t materialize = 10;
  int max_boost_steps = 3;
  double span = 5.0;
};

struct SplitParams {
  std::vector<std::size_t> dims{8, 16, 32};
  std::vector<double> times{0.1, 1.0, 10.0};
  std::size_t trajectories = 20;
  std::size_t model_ext = 16;  // physical model built from the scatter block; 0 disables it
  std::size_t model_int = 32;
  scattering::ScatteringConfig model = scattering::ScatteringConfig::reference();
};

struct ScatterParams {
  scattering::ScatteringConfig model = scattering::ScatteringConfig::reference();
  std::size_t sample_every = 10;
  double ie_drift_bound = 1e-5;
  double energy_guard = 1e-6;
};

struct ExperimentConfig {
  Suite suite = Suite::QubitDemo;
  std::uint64_t seed = 0;
  std::string output_path;
  OutputFormat format = OutputFormat::Json;
  QubitDemoParams qubit{};
  GalileanParams galilean{};
  SplitParams split{};
  ScatterParams scatter{};

  /// Normalized echo with defaults filled in; omits the output path so that
  /// documents do not depend on where they are written.
  nlohmann::ordered_json echo() const;
};

struct Diagnostic {
  std::string location;  // JSON pointer, or "line L, column C" for parse errors
  std::string message;
};

struct ParseOutcome {
  std::optional<ExperimentConfig> config;
  std::vector<Diagnostic> diagnostics;
};

ParseOutcome parse_config(const std::string& text);
/// Reports a missing or unreadable file as a diagnostic at "".
ParseOutcome load_config(const std::filesystem::path& path);

struct Check {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;  // passes when residual > tolerance instead of <
  std::string detail;
};

struct RunResult {
  nlohmann::ordered_json document;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  bool passed = false;
};

/// Runs the configured suite. Throws Error(NumericalGuard) when a guard trips.
RunResult run_suite(const ExperimentConfig& config);

/// JSON with every double printed to 17 significant digits.
std::string render_json(const nlohmann::ordered_json& doc);
/// Long-format rows: section,name,index,field,value.
std::string render_csv(const nlohmann::ordered_json& doc);
std::string render(const nlohmann::ordered_json& doc, OutputFormat format);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& content);

struct Outcome {
  int exit_code = kExitOk;
  std::vector<Diagnostic> diagnostics;
  std::optional<RunResult> result;
  std::string message;
};

/// Load, run and write, mapping failures to exit codes. Overrides replace
/// the configured output path and format.
Outcome run_file(const std::filesystem::path& config_path, const std::optional<std::string>& output_override,
                 const std::optional<OutputFormat>& format_override);

}  // namespace tpslab::experiment
