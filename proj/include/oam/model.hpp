#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oam {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

enum class ConfigErrorKind {
  dimension_mismatch,
  mode_unresolvable,
  near_field_violation,
  ring_mismatch,
  missing_zero_mode,
  invalid_value,
};

const char* to_string(ConfigErrorKind kind);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ConfigErrorKind kind() const { return kind_; }

 private:
  ConfigErrorKind kind_;
};

struct UcaGeometry {
  double radius = 0.0;
  int element_count = 0;
  double initial_angle = 0.0;

  // Zero-based index i -> 2*pi*i/count + initial_angle.
  double element_azimuth(int i) const;
  bool operator==(const UcaGeometry&) const = default;
};

// A UCA is a UCCA with one ring.
struct UccaGeometry {
  std::vector<UcaGeometry> rings;

  int ring_count() const { return static_cast<int>(rings.size()); }
  int element_count() const { return rings.empty() ? 0 : rings.front().element_count; }
  bool operator==(const UccaGeometry&) const = default;
};

struct SbsPlacement {
  double range = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
  bool operator==(const SbsPlacement&) const = default;
};

struct CarrierGrid {
  double base_frequency = 0.0;
  double spacing = 0.0;
  int data_count = 0;
  int training_count = 0;
  std::vector<double> wave_numbers;

  double k(int w) const { return wave_numbers[static_cast<std::size_t>(w)]; }
  std::vector<double> training_wave_numbers() const;
  double wavelength() const { return kSpeedOfLight / base_frequency; }
  bool operator==(const CarrierGrid&) const = default;
};

struct ModeSet {
  std::vector<int> data_modes;
  std::vector<int> training_modes;
  bool operator==(const ModeSet&) const = default;
};

// Contiguous modes -floor(U/2) .. U-1-floor(U/2), e.g. U=20 -> -10..9.
std::vector<int> contiguous_modes(int count);

struct NoiseModel {
  double snr_db = 20.0;
  bool operator==(const NoiseModel&) const = default;
};

struct PowerModel {
  double pa_efficiency = 0.35;
  double p_bb = 0.2;
  double p_rf = 0.25;
  double p_lna = 0.02;
  double p_t = 1.0;
  double bandwidth = 190e6;
  bool operator==(const PowerModel&) const = default;
};

struct UserConfig {
  UccaGeometry array;
  SbsPlacement placement;
  bool operator==(const UserConfig&) const = default;
};

struct SystemConfig {
  UccaGeometry tx;
  std::vector<UserConfig> users;
  CarrierGrid carriers;
  ModeSet modes;
  double beta = 1.0;
  NoiseModel noise;
  PowerModel power;
  int coherence_symbols = 512;
  int training_symbols = 0;  // 0 -> number of training modes
  double far_field_factor = 10.0;
  bool elevation_estimation = true;

  int user_count() const { return static_cast<int>(users.size()); }
  int tx_elements() const { return tx.element_count(); }
  int rx_elements() const { return users.empty() ? 0 : users.front().array.element_count(); }
  int ring_count() const { return tx.ring_count(); }
  int data_mode_count() const { return static_cast<int>(modes.data_modes.size()); }
  int training_mode_count() const { return static_cast<int>(modes.training_modes.size()); }
  int effective_training_symbols() const;
  std::vector<SbsPlacement> placements() const;
  bool operator==(const SystemConfig&) const = default;
};

struct ValidationOptions {
  bool near_field_is_error = false;
};

struct ValidationWarning {
  ConfigErrorKind kind;
  std::string message;
};

// Throws ConfigError on violation. Near-field violations become warnings
// unless options.near_field_is_error.
SystemConfig validate_config(const SystemConfig& config,
                             const ValidationOptions& options = {},
                             std::vector<ValidationWarning>* warnings = nullptr);

CarrierGrid build_carrier_grid(double f, double spacing, int data_count, int training_count);

double deg2rad(double deg);
double rad2deg(double rad);

}  // namespace oam
