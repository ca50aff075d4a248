#pragma once

#include "homlab/su2.hpp"
#include "homlab/verifier.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace homlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailure = 1,  // bracket or tuple failed its checks
  kExitBudgetExhausted = 2,    // orbit optimizer or engine capacity ran out
  kExitIoError = 3,
  kExitConfigError = 4,
};

struct ExperimentConfig {
  std::string command;
  nlohmann::json bracket;   // preset, file or inline bracket
  nlohmann::json bracket2;  // second bracket for distance / lauret-gap
  std::optional<PowerLawFamily> family;
  bool normalize = false;   // collapse: rescale the whole sequence to sup |sec| = 1
  std::vector<int> n_values;
  int k_max = -1;
  int s = -1;
  int K = -1;
  std::optional<Eigen::VectorXd> y;
  std::optional<Eigen::VectorXd> w;
  double tolerance = kSubspaceTolerance;
  AlignmentBudget budget;
  std::string format = "csv";
  std::string output;
  std::filesystem::path out_dir = ".";
  std::filesystem::path base_dir = ".";  // relative bracket files resolve against this
  unsigned seed = 42;
  nlohmann::json raw;  // the config as given, echoed into reports
};

/// Throws ConfigError on schema violations.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
/// Throws IoError when the file cannot be read, ConfigError when it is not valid JSON.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds a bracket from a preset name, {"preset": ...}, {"file": ...} or inline {"q","m","coeff"}.
Bracket resolve_bracket(const nlohmann::json& spec, const std::filesystem::path& base_dir = ".");

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct Report {
  std::string command;
  int status = kExitOk;
  nlohmann::json data;
  Table table;
};

/// Runs the computation only; library errors propagate.
Report run_experiment(const ExperimentConfig& cfg);

/// Writes <out_dir>/<output>.<csv|json>; returns the written path. Throws IoError.
std::filesystem::path emit_report(const Report& r, const ExperimentConfig& cfg);

std::string to_csv(const Report& r, const ExperimentConfig& cfg);
nlohmann::json to_json(const Report& r, const ExperimentConfig& cfg);

/// run_experiment + emit_report with errors mapped to exit codes; messages go to stderr.
int run_config(const ExperimentConfig& cfg);

}  // namespace homlab
