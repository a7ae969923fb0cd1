#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rbf::harness {

/// Invalid configuration: unknown keys, malformed values, trials < 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  fpr_estimate,
  privacy_audit,
  bp_attack,
  ab_game,
  filic_distinguish,
  saturation_scan,
  error_analysis,
};

const std::vector<Experiment>& all_experiments();
std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

enum class ParamType { integer, real, choice };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::integer;
  std::string default_value;
  std::vector<std::string> choices;  // for ParamType::choice
  std::string help;
};

const std::vector<ParamSpec>& parameter_specs(Experiment e);
std::uint64_t default_trials(Experiment e);
/// Metric columns emitted after the config echo.
const std::vector<std::string>& metric_names(Experiment e);

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  Experiment experiment = Experiment::fpr_estimate;
  /// Grid values per parameter. Missing keys take the default; an empty
  /// list makes the grid empty.
  std::map<std::string, std::vector<std::string>> parameters;
  std::optional<std::uint64_t> trials;  // unset means the experiment default
  std::uint64_t master_seed = 0;
  std::string output;  // empty writes to stdout
  OutputFormat format = OutputFormat::csv;
  /// Adds an elapsed_ms column. Off by default so output is reproducible.
  bool timing = false;
};

/// Splits a comma-separated grid flag. The empty string is an empty grid.
std::vector<std::string> split_grid(const std::string& text);

/// Builds a config from a JSON object with the same keys as the CLI flags:
/// parameter names plus "experiment", "trials", "seed", "output", "format",
/// "timing". Parameter values may be scalars or arrays (grids). Unknown keys
/// throw ConfigError. `experiment` overrides the file's experiment key when
/// given; the two must agree if both are present.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& experiment = {});

/// Checks keys, value types and trials; normalizes numeric spellings.
void validate(ExperimentConfig& cfg);

using Value = std::variant<std::string, std::int64_t, double>;

struct Record {
  std::vector<std::pair<std::string, Value>> fields;
  bool failed = false;
};

/// Header of the emitted table for `cfg`.
std::vector<std::string> columns(const ExperimentConfig& cfg);

/// Runs every point of the Cartesian grid in order. The point's seed is
/// derive_seed(master_seed, tag_of(experiment name), point index). Failures
/// inside a point yield a record with failed = 1 and the message.
std::vector<Record> run_scan(const ExperimentConfig& cfg);

void write_records(const ExperimentConfig& cfg, const std::vector<Record>& records, std::ostream& out);

/// Validates, runs and writes. Exit codes: 0 ok, 1 config error, 2 when
/// any record failed or the output could not be written.
int run(ExperimentConfig cfg, std::ostream& out, std::ostream& err);

/// git describe of the source tree at configure time.
std::string build_id();

}  // namespace rbf::harness
