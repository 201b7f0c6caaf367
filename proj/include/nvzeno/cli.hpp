#pragma once

// Config parsing, dispatch and serialization behind the nvzeno tool.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvzeno/experiments.hpp"

namespace nvzeno {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  std::string experiment = "ratio_sweep";
  SystemParams params;
  std::vector<SweepAxis> axes;
  Complex alpha{1.0 / 1.4142135623730951, 0.0};
  Complex beta{1.0 / 1.4142135623730951, 0.0};
  QstDirection direction = QstDirection::OneToTwo;
  double dt = 0.0;  // 0 = integrator default
  std::string output = "-";  // "-" writes to stdout
  OutputFormat format = OutputFormat::Csv;
  std::size_t threads = 1;
  bool deterministic = true;
};

// JSON object document. Axis keys of the selected experiment accept
// {"from", "to", "points"}, an explicit list, or a single number.
// ParseError (with line/column), UnknownKey, OutOfRange, UnknownExperiment.
RunConfig parse_config(std::string_view text);

// "--omega-over-g" / "omega-over-g" -> "omega_over_g"
std::string kebab_to_key(std::string_view flag);
// Config keys that are not axis names.
const std::vector<std::string>& scalar_config_keys();

SweepSpec to_sweep_spec(const RunConfig& config);

// CSV: '#'-prefixed "key: value" metadata lines, header row, rows with 12
// significant digits, '\n' endings. JSON: {"metadata", "columns", "data"}.
std::string format_csv(const SweepResult& result);
std::string format_json(const SweepResult& result);

// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

// Runs the experiment and writes its output. Returns the process exit code
// (0 ok, 2 config error, 3 numerical failure); failures print one JSON error
// line to `err`.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e) noexcept;
std::string error_line(const std::exception& e, std::string_view experiment);

// Small-grid invariant checks; one PASS/FAIL line each. Returns 0 or 3.
int selftest(std::ostream& out);

}  // namespace nvzeno
