#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace loctime {

inline constexpr const char* kToolVersion = "0.1.0";

/// Check names in dependency order.
inline const std::vector<std::string> kCheckNames{
    "spectral", "aperiodicity", "exact-law", "local-limit", "potential-kernel",
    "moments",  "occupation",   "modulus",   "levy-ks"};

struct ExperimentConfig {
  std::filesystem::path chain_file;
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> sample_counts;  // one per n, or a single shared count
  std::uint64_t seed = 0;
  std::vector<long long> x_levels;
  std::vector<long long> y_levels;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> eps_grid;
  std::vector<double> delta_grid;
  std::filesystem::path output_dir;
  std::vector<std::string> checks;
};

/// Parses the JSON config; a relative chain_file or output_dir resolves
/// against base_dir. Throws ConfigInvalid.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Throws ConfigInvalid when a selected check lacks what it needs.
void validate_config(const ExperimentConfig& config);

enum class CheckStatus { Pass, Fail, Skipped };
const char* to_string(CheckStatus status);

struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> artifacts;  // paths relative to output_dir
  std::string note;

  double metric(const std::string& key) const;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;  // one per known check, in dependency order
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  double wall_time_seconds = 0.0;
  bool spectral_auto_run = false;

  bool all_selected_pass() const;
  const CheckRecord& find(const std::string& name) const;
};

struct RunOptions {
  unsigned threads = 1;  // 0 = hardware concurrency; never changes results
  bool write_report = true;
};

/// Runs the selected checks in dependency order and writes every artifact
/// under output_dir. Throws ConfigInvalid, ChainRejected, AperiodicityRequired.
VerificationReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string report_to_json(const VerificationReport& report);

}  // namespace loctime
