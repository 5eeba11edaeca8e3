#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace synth {

enum class Command { fit, sample, balance, eval, difftest };

/// Every knob of one CLI invocation. Defaults match the library defaults.
struct RunConfig {
  Command command = Command::fit;

  std::vector<std::string> data;  // fit: one CSV per modality; eval: one CSV
  std::string model;
  std::string input;              // balance
  std::string out;
  std::vector<std::string> real;       // difftest: two CSVs
  std::vector<std::string> synthetic;  // difftest: two CSVs
  std::optional<std::string> label_column;
  std::optional<std::string> modality;
  std::string target;
  std::string export_splits;

  long k_s = 3;
  long k_f = 3;
  int sweeps = 500;
  double rel_tol = 1e-8;
  double ridge = 1e-8;
  bool standardize = true;

  std::string sampler;  // empty: gmm for fit/eval, the stored sampler for sample
  long components = 5;
  int gmm_iters = 200;
  double gmm_tol = 1e-8;
  long centroids = 0;
  long neighbors = 0;
  double cov_reg = 1e-6;

  long count = 1000;
  long per_class = 0;
  bool clamp = false;

  int repeats = 20;
  double split = 0.7;
  double multiplier = 10.0;
  int folds = 5;
  std::vector<double> lambda_grid;
  bool identity = false;

  std::uint64_t seed = 0;

  /// Throws ConfigError on the first out-of-range value.
  void validate() const;
  nlohmann::json to_json() const;
};

const char* to_string(Command command);

/// Parses argv (without the program name) into a RunConfig. Unknown flags
/// are rejected. The default seed comes from SYNTH_SEED when set.
RunConfig parse_command_line(const std::vector<std::string>& args);

/// Runs one command. Returns 0 on success; on failure writes a JSON error
/// document to `err` and returns nonzero.
int run_pipeline(const RunConfig& config, std::ostream& log, std::ostream& err);

/// parse_command_line + run_pipeline, with parse errors reported the same way.
int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace synth
