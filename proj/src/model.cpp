#include "oam/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace oam {

const char* to_string(ConfigErrorKind kind) {
  switch (kind) {
    case ConfigErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ConfigErrorKind::mode_unresolvable: return "mode-unresolvable";
    case ConfigErrorKind::near_field_violation: return "near-field-violation";
    case ConfigErrorKind::ring_mismatch: return "ring-mismatch";
    case ConfigErrorKind::missing_zero_mode: return "missing-zero-mode";
    case ConfigErrorKind::invalid_value: return "invalid-value";
  }
  return "unknown";
}

double UcaGeometry::element_azimuth(int i) const {
  return 2.0 * kPi * static_cast<double>(i) / static_cast<double>(element_count) + initial_angle;
}

std::vector<double> CarrierGrid::training_wave_numbers() const {
  return {wave_numbers.begin(), wave_numbers.begin() + training_count};
}

std::vector<int> contiguous_modes(int count) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int u = 0; u < count; ++u) out.push_back(u - count / 2);
  return out;
}

int SystemConfig::effective_training_symbols() const {
  return training_symbols > 0 ? training_symbols : training_mode_count();
}

std::vector<SbsPlacement> SystemConfig::placements() const {
  std::vector<SbsPlacement> out;
  for (const auto& u : users) out.push_back(u.placement);
  return out;
}

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

namespace {

[[noreturn]] void fail(ConfigErrorKind kind, const std::string& msg) {
  throw ConfigError(kind, std::string(to_string(kind)) + ": " + msg);
}

void check_array(const UccaGeometry& a, const char* who) {
  if (a.rings.empty()) fail(ConfigErrorKind::invalid_value, std::string(who) + " has no rings");
  for (std::size_t i = 0; i < a.rings.size(); ++i) {
    const auto& r = a.rings[i];
    if (!(r.radius > 0.0) || !std::isfinite(r.radius))
      fail(ConfigErrorKind::invalid_value, std::string(who) + " radius must be positive");
    if (r.element_count < 2)
      fail(ConfigErrorKind::invalid_value, std::string(who) + " needs at least 2 elements");
    if (r.element_count != a.rings.front().element_count)
      fail(ConfigErrorKind::ring_mismatch, std::string(who) + " rings differ in element count");
    if (i > 0 && !(r.radius > a.rings[i - 1].radius))
      fail(ConfigErrorKind::invalid_value, std::string(who) + " ring radii must increase");
  }
}

void check_modes(const std::vector<int>& modes, int M, const char* which) {
  if (modes.empty()) fail(ConfigErrorKind::invalid_value, std::string(which) + " mode list empty");
  std::set<int> residues;
  for (int l : modes) {
    if (2 * std::abs(l) >= M) {
      std::ostringstream os;
      os << which << " mode " << l << " not below M/2 = " << M / 2.0;
      fail(ConfigErrorKind::mode_unresolvable, os.str());
    }
    if (!residues.insert(((l % M) + M) % M).second)
      fail(ConfigErrorKind::mode_unresolvable, std::string(which) + " modes repeat modulo M");
  }
}

}  // namespace

CarrierGrid build_carrier_grid(double f, double spacing, int data_count, int training_count) {
  if (!(f > 0.0) || !(spacing > 0.0))
    fail(ConfigErrorKind::invalid_value, "frequency and spacing must be positive");
  if (training_count < 1 || training_count > data_count)
    fail(ConfigErrorKind::invalid_value, "need 1 <= training_count <= data_count");
  CarrierGrid g;
  g.base_frequency = f;
  g.spacing = spacing;
  g.data_count = data_count;
  g.training_count = training_count;
  g.wave_numbers.resize(static_cast<std::size_t>(data_count));
  for (int w = 0; w < data_count; ++w)
    g.wave_numbers[static_cast<std::size_t>(w)] = 2.0 * kPi * (f + w * spacing) / kSpeedOfLight;
  return g;
}

SystemConfig validate_config(const SystemConfig& config, const ValidationOptions& options,
                             std::vector<ValidationWarning>* warnings) {
  check_array(config.tx, "transmit array");
  if (config.users.empty()) fail(ConfigErrorKind::invalid_value, "need at least one user");
  const int rings = config.tx.ring_count();
  const int M = config.users.front().array.element_count();
  for (const auto& u : config.users) {
    check_array(u.array, "user array");
    if (u.array.ring_count() != rings)
      fail(ConfigErrorKind::ring_mismatch, "user ring count differs from transmitter");
    if (u.array.element_count() != M)
      fail(ConfigErrorKind::dimension_mismatch, "users differ in element count");
    const auto& p = u.placement;
    if (!(p.range > 0.0)) fail(ConfigErrorKind::invalid_value, "range must be positive");
    if (!(p.elevation >= 0.0 && p.elevation < kPi / 2))
      fail(ConfigErrorKind::invalid_value, "elevation must lie in [0, pi/2)");
    if (!(p.azimuth >= -kPi && p.azimuth < kPi))
      fail(ConfigErrorKind::invalid_value, "azimuth must lie in [-pi, pi)");
  }
  const int P = config.user_count();
  const int N = config.tx.element_count();
  if (N != P * M) {
    std::ostringstream os;
    os << "N = " << N << " but P*M = " << P * M;
    fail(ConfigErrorKind::dimension_mismatch, os.str());
  }
  const auto& g = config.carriers;
  if (!(g.base_frequency > 0.0) || !(g.spacing > 0.0))
    fail(ConfigErrorKind::invalid_value, "frequency and spacing must be positive");
  if (g.training_count < 1 || g.training_count > g.data_count)
    fail(ConfigErrorKind::invalid_value, "need 1 <= training_count <= data_count");
  if (static_cast<int>(g.wave_numbers.size()) != g.data_count)
    fail(ConfigErrorKind::invalid_value, "wave number grid has wrong length");
  check_modes(config.modes.data_modes, M, "data");
  check_modes(config.modes.training_modes, M, "training");
  if (config.elevation_estimation &&
      std::find(config.modes.training_modes.begin(), config.modes.training_modes.end(), 0) ==
          config.modes.training_modes.end())
    fail(ConfigErrorKind::missing_zero_mode, "training modes must include mode 0");
  if (!(config.beta >= 0.0)) fail(ConfigErrorKind::invalid_value, "beta must be >= 0");
  const auto& pw = config.power;
  if (!(pw.pa_efficiency > 0.0 && pw.pa_efficiency <= 1.0))
    fail(ConfigErrorKind::invalid_value, "pa_efficiency must lie in (0, 1]");
  if (pw.p_bb < 0 || pw.p_rf < 0 || pw.p_lna < 0 || pw.p_t < 0 || pw.bandwidth < 0)
    fail(ConfigErrorKind::invalid_value, "powers and bandwidth must be >= 0");
  if (config.coherence_symbols < 1) fail(ConfigErrorKind::invalid_value, "T_c must be >= 1");
  if (config.training_symbols < 0 || config.effective_training_symbols() > config.coherence_symbols)
    fail(ConfigErrorKind::invalid_value, "need 0 <= T_t <= T_c");
  if (!(config.far_field_factor > 0.0))
    fail(ConfigErrorKind::invalid_value, "far_field_factor must be positive");

  const double rt = config.tx.rings.back().radius;
  for (std::size_t i = 0; i < config.users.size(); ++i) {
    const auto& u = config.users[i];
    const double limit = config.far_field_factor * std::max(rt, u.array.rings.back().radius);
    if (u.placement.range < limit) {
      std::ostringstream os;
      os << "user " << i + 1 << " range " << u.placement.range << " m below far-field limit "
         << limit << " m";
      if (options.near_field_is_error) fail(ConfigErrorKind::near_field_violation, os.str());
      if (warnings) warnings->push_back({ConfigErrorKind::near_field_violation, os.str()});
    }
  }
  return config;
}

}  // namespace oam
