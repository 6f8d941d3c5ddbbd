#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "oam/estimation.hpp"
#include "oam/model.hpp"

namespace oam {

inline constexpr int kConfigSchemaVersion = 1;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline { estimate, precoder_dump, ber, se, ee, channel_dump, complexity };
std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

struct SweepSpec {
  std::vector<double> snr_db;
  std::vector<int> data_modes;         // U values, contiguous mode sets
  std::vector<int> training_modes;     // U~ values, contiguous mode sets
  std::vector<int> training_carriers;  // W~ values
  std::vector<double> transmit_power;  // per-carrier P_t in watts
  std::vector<int> rx_elements;        // complexity sweep over M
  std::vector<int> rings;              // complexity sweep over ring count
  bool operator==(const SweepSpec&) const = default;
};

struct ExperimentSpec {
  std::string name;
  SystemConfig scenario;
  Pipeline pipeline = Pipeline::estimate;
  SweepSpec sweep;
  int trials = 1;
  std::uint64_t seed = 1;
  bool exact_channel = false;
  EstimationOptions estimation;
  double ee_reference_snr_db = 15.0;
  double ee_reference_power = 1.0;
};

// Scenario only. Angles are read from "<key>_deg" or "<key>_rad"; radii carry
// a "unit" of "m" or "lambda" (wavelengths at the base frequency).
SystemConfig parse_config(const std::string& json_text);
std::string serialize_config(const SystemConfig& config);

// Top level {"schema_version", "scenario", "experiment", "estimation"}.
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::string& path);
std::string serialize_experiment(const ExperimentSpec& spec);

// FNV-1a over the serialized scenario.
std::uint64_t config_hash(const SystemConfig& config);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
ExperimentSpec preset(const std::string& name);

}  // namespace oam
