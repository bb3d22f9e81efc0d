#pragma once

// Experiment configuration and the generate / autocorr / diffract /
// decompose / verify-sigma / run pipeline.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "difflab/autocorr.hpp"
#include "difflab/comb.hpp"
#include "difflab/diffraction.hpp"
#include "difflab/ergodic.hpp"
#include "difflab/transfer.hpp"

namespace difflab {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInvalidConfig = 2,
  kExitModuleError = 3,
  kExitIoError = 4,
};

struct ExperimentConfig {
  std::string scenario = "lattice";
  fs::path comb_file;
  std::optional<Interval> region;        // default [-L_max, L_max], widened by sigma
  double l0 = 100.0;                     // L_n = l0 * n
  std::vector<double> n_list{10.0};
  FrequencyGrid grid{0.0, 3.0, 0.01};
  std::vector<double> candidates;        // empty: dual module frequencies
  int max_coeff = 8;
  std::optional<BoundedAtomicMeasure> sigma;
  std::vector<std::uint64_t> seeds{1};
  fs::path output_dir = "difflab_out";
  WeightLaw law = WeightLaw::bernoulli(0.5);
  std::string window_text;               // "lo,hi" in internal space
  std::string window_shift;              // decimal internal offset
  double lattice_spacing = 1.0;
  double taper = 24.0;
  std::optional<bool> scan;              // default: off for model-set scenarios
  bool identity = true;
  double phi_half_width = 1.0;
  double autocorr_max_lag = 8.0;
};

/// key=value tokens, several per line, '#' starts a comment. Unknown keys
/// and malformed values throw InvalidConfig.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const fs::path& path);
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Throws InvalidConfig on inconsistent settings (including invalid windows).
void validate(const ExperimentConfig& config);

/// Half-lengths l0 * n; lists with fewer than three entries are extended
/// downwards by halving the smallest half-length.
VanHoveSequence van_hove(const ExperimentConfig& config);
Interval sample_region(const ExperimentConfig& config);
BaseSet base_set(const ExperimentConfig& config);
RandomWeightModel weight_model(const ExperimentConfig& config);
bool is_random(const ExperimentConfig& config);
Comb generate(const ExperimentConfig& config, std::uint64_t seed);
std::vector<double> candidate_frequencies(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::string artifact;  // file backing the claim
};

struct RunResult {
  int exit_code = kExitOk;
  std::vector<CheckResult> checks;
  std::vector<fs::path> artifacts;
};

/// Executes one subcommand ("generate", "autocorr", "diffract", "decompose",
/// "verify-sigma", "run"). Module errors become exit codes with a JSON error
/// record written to `err`.
RunResult execute(const std::string& command, const ExperimentConfig& config, bool dry_run,
                  std::ostream& log, std::ostream& err);

/// Machine-readable one-line error record.
std::string error_record(const std::string& kind, const std::string& message,
                         const std::string& stage);

}  // namespace difflab
