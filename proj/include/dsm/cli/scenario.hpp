#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsm/dynamics.hpp"
#include "dsm/riccati.hpp"

namespace dsm::cli {

struct Scenario {
  ModelParams params;
  int n_steps = kReferenceSteps;
  Mode mode = Mode::MFG;
  bool agg_double_f = true;
  std::string b_mode = "exact";  // exact | nested
  int m_inner = 256;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int n_common_paths = 200;
  int n_players = 100;
  int n_saved_paths = 3;
  int mc_samples = 10000;
  std::vector<int> nash_n_list{5, 20, 80};
  std::string output_dir = "out";
  std::string calibration_input;
  // calibration.* keys, kept verbatim.
  std::map<std::string, std::string> calibration;
};

constexpr const char* kOutputDirEnv = "DSM_MFG_OUTPUT_DIR";

// Applies one key = value assignment; throws ConfigError naming the key.
void apply_setting(Scenario& sc, const std::string& key, const std::string& value,
                   const std::string& base_dir = ".");

// Parses key = value lines ('#' starts a comment). Relative paths resolve against base_dir.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

// Final checks: mandatory seed, parameter constraints, referenced files.
void validate_scenario(const Scenario& sc);

// Normalized text: every key, sorted, full precision.
std::string serialize_scenario(const Scenario& sc);

// Hash of the settings that determine the solved tables.
std::string solve_hash(const Scenario& sc);

std::string resolved_output_dir(const Scenario& sc);

std::string format_double(double v);

}  // namespace dsm::cli
