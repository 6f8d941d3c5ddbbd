#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oam/channel.hpp"
#include "oam/model.hpp"

namespace oam {

// Pilot symbols s'(l_u, k_w), shape (U~ x W~).
CMat unit_pilots(int modes, int carriers);
CMat qpsk_pilots(int modes, int carriers, std::uint64_t seed);

struct TrainingObservation {
  std::vector<double> wave_numbers;  // W~ training carriers
  std::vector<int> modes;            // U~ training modes
  std::vector<CMat> Y;               // per carrier, N x U~
  CMat combined;                     // U~ x W~, x'_t(l_u, k_w)
  CMat zero_mode;                    // N x W~, y^n_t(k_w)
  CMat pilots;                       // U~ x W~
  double noise_variance = 0.0;       // per element and sample
  int zero_mode_index = -1;
};

// snr_db = +inf disables noise. Noise variance is the mean noiseless power
// per element and sample divided by the linear SNR.
TrainingObservation synth_uplink_training(const SystemConfig& config,
                                          const std::vector<SbsPlacement>& placements,
                                          const CMat& pilots, double snr_db, std::uint64_t seed,
                                          ChannelMode mode = ChannelMode::farfield);

// Row u, column w: x'/|sigma| * conj(s')/|s'| * i^{l_u}.
CMat normalize_mode_samples(const CMat& combined, const CMat& pilots,
                            const std::vector<int>& modes, const std::vector<double>& ks,
                            const SystemConfig& config);

// y^n / |sigma'| * conj(s')/|s'| with sigma' = M beta s' / (2k), shape N x W~.
CMat normalize_zero_mode(const CMat& zero_mode, const CMat& pilots, int zero_mode_index,
                         const std::vector<double>& ks, const SystemConfig& config);

struct RangeAzimuthPeak {
  double range = 0.0;
  double azimuth = 0.0;
  double magnitude = 0.0;
};

struct RangeAzimuthResult {
  std::vector<RangeAzimuthPeak> peaks;
  bool degraded = false;
};

struct SpectrumOptions {
  int zero_pad = 16;
  double min_range_separation = 6.0;  // metres; weaker peaks closer in range are dropped
};

RangeAzimuthResult estimate_range_azimuth(const CMat& x_tilde, const std::vector<double>& ks,
                                          const std::vector<int>& modes, int users,
                                          const SpectrumOptions& options = {});

struct XiEstimate {
  std::vector<double> xi;  // sorted by peak strength
  bool resolvable = true;
};

XiEstimate estimate_xi(const Eigen::RowVectorXcd& samples, const std::vector<double>& ks, int users,
                       int zero_pad = 16, double tolerance = 1e-5);

struct ElevationCandidates {
  // value(i, q): candidate from xi peak i paired with user estimate q.
  Eigen::MatrixXd value;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
  bool singular_element = false;
};

ElevationCandidates elevation_candidates(const std::vector<double>& xi,
                                         const std::vector<RangeAzimuthPeak>& estimates,
                                         double element_azimuth, double tx_radius,
                                         double singular_threshold = 1e-3);

struct MatchResult {
  Eigen::MatrixXd element_elevation;  // P x N, NaN when unused
  std::vector<double> residual;       // per element, NaN when no valid pairing
  std::vector<double> elevation;      // per user, mean over used elements
  std::vector<int> used_elements;     // per user
};

MatchResult match_and_average(const std::vector<ElevationCandidates>& candidates,
                              const CMat& zero_mode_normalized,
                              const std::vector<RangeAzimuthPeak>& estimates,
                              const SystemConfig& config, const std::vector<double>& ks,
                              double outlier_factor = 5.0);

struct UserEstimate {
  double range = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
};

struct Nmse {
  double range = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
};

struct EstimationOptions {
  SpectrumOptions spectrum;
  double outlier_factor = 5.0;
  bool refine = true;
  double max_elevation = 45.0 * kPi / 180.0;
  double grid_oversampling = 4.0;  // grid points per main-lobe width
};

struct EstimationReport {
  std::vector<UserEstimate> users;     // final estimates
  std::vector<UserEstimate> pipeline;  // FFT / xi / matching / averaging outputs
  Eigen::MatrixXd element_elevation;   // P x N
  std::vector<double> matching_residual;
  bool refined = false;
  bool degraded = false;
  std::vector<std::string> diagnostics;
  std::vector<Nmse> nmse;              // filled when truth is supplied
  std::vector<Nmse> pipeline_nmse;
};

EstimationReport estimate_positions(const SystemConfig& config, const TrainingObservation& obs,
                                    const EstimationOptions& options = {},
                                    const std::vector<SbsPlacement>* truth = nullptr);

// Uplink training from the config's true placements at snr_db, then
// estimate_positions; final estimates returned in config user order.
std::vector<SbsPlacement> estimate_placements(const SystemConfig& config, double snr_db,
                                              std::uint64_t seed,
                                              ChannelMode mode = ChannelMode::farfield,
                                              const EstimationOptions& options = {});

Nmse nmse_of(const UserEstimate& est, const SbsPlacement& truth);
double wrap_angle(double a);

}  // namespace oam
