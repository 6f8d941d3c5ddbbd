#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oam/channel.hpp"
#include "oam/model.hpp"
#include "oam/precoding.hpp"
#include "oam/transform.hpp"

namespace oam {

// Gray-mapped QPSK with unit average energy. Bit 0 rides on the real part,
// bit 1 on the imaginary part; a 0 bit maps to the positive half axis.
cplx qpsk_modulate(int bits);
int qpsk_demodulate(cplx x);
double q_function(double x);
// Bit error rate of Gray QPSK at per-symbol SNR E_s/N0.
double qpsk_ber(double es_over_n0);

// Mode-domain stream vector (ring, q, v) to transmit element vector (ring, n)
// using the grouped column map.
CVec spiralize(const CVec& modes, const ModeTransform& t, int users, int rings);

// Received vectors y_p of length rings*M, indexed [w][p].
using DownlinkSignal = std::vector<std::vector<CVec>>;

// y_p = H_p F P s + z_p. `symbols` holds one stream vector per carrier with
// rows (p, ring, u). noise_variance <= 0 disables noise.
DownlinkSignal transmit_downlink(const std::vector<CVec>& symbols, const PrecodingSet& precoder,
                                 const ModeTransform& t, const ChannelTensor& h,
                                 double noise_variance, std::mt19937_64& gen);

// x_p = (I_rings (x) F_U^H) y_p.
CVec detect_symbols(const CVec& y, const ModeTransform& t, int rings);

struct UserCovariances {
  CMat inter;  // (H^p P_p - I)(H^p P_p - I)^H E_s
  CMat co;     // sum_{q != p} H^p P_q (H^p P_q)^H E_s
  CMat noise;  // M sigma^2 I
};

// Indexed [w][p].
std::vector<std::vector<UserCovariances>> interference_covariances(const EffectiveOamChannel& h_oam,
                                                                   const PrecodingSet& precoder,
                                                                   double symbol_power,
                                                                   double noise_variance,
                                                                   int rx_elements);

struct SinrTable {
  int carriers = 0;
  int users = 0;
  int rings = 1;
  int modes = 0;
  std::vector<double> values;  // index ((w * users + p) * rings + ring) * modes + u

  double& at(int w, int p, int ring, int u) {
    return values[static_cast<std::size_t>(((w * users + p) * rings + ring) * modes + u)];
  }
  double at(int w, int p, int ring, int u) const {
    return values[static_cast<std::size_t>(((w * users + p) * rings + ring) * modes + u)];
  }
};

// E_s / ([R_inter]_kk + [R_co]_kk + [R_z]_kk).
SinrTable sinr(double symbol_power, const std::vector<std::vector<UserCovariances>>& cov, int rings);

// Diagonal-gain SINR: |a_kk|^2 E_s over the remaining row energy plus noise,
// with a = H^p P. Used when the chain is not normalized to unit gain.
SinrTable sinr_diagonal_gain(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                             double symbol_power, double noise_variance, int rx_elements);

// Mean received power per receive element after projection onto the span of
// F_U, averaged over carriers, users and rings.
double projected_received_power(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                                double symbol_power, int rx_elements);

// Noise variance per receive element so that projected power / sigma^2 = SNR.
double noise_variance_for_snr(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                              double symbol_power, double snr_db, int rx_elements);

double training_overhead_factor(int training_symbols, int coherence_symbols, int carriers,
                                int training_carriers);

// Ring 0 carries the overhead factor, further rings do not.
double spectral_efficiency(const SinrTable& table, double overhead_factor);

double circuit_power(const PowerModel& power, int users, int rx_elements, int rings = 1);
double energy_efficiency(double se, const PowerModel& power, int carriers, int users,
                         int rx_elements, int rings = 1);

// True channel and transform on the data carriers.
struct DownlinkChain {
  ChannelTensor channel;
  ModeTransform transform;
  EffectiveOamChannel h_oam;
  int rx_elements = 0;
};

// UCCA assembly when the config has more than one ring.
DownlinkChain make_downlink_chain(const SystemConfig& config, ChannelMode mode);

// Precoder designed from the far-field model at `design` placements.
PrecodingSet design_precoder(const SystemConfig& config, const std::vector<SbsPlacement>& design,
                             const PrecoderOptions& options = {});

struct SeResult {
  double se = 0.0;
  double noise_variance = 0.0;
  SinrTable sinr;
};

// Noise from the chain's own projected received power. diagonal_gain selects
// sinr_diagonal_gain instead of the covariance form.
SeResult evaluate_se(const SystemConfig& config, const DownlinkChain& chain,
                     const PrecodingSet& precoder, double snr_db, bool diagonal_gain = false);

enum class PositionSource { truth, estimated };
std::string to_string(PositionSource s);

struct BerPoint {
  double snr_db = 0.0;
  std::vector<double> per_user;
  double pooled = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double analytic = 0.0;  // mean over streams of the Gray QPSK BER at the stream SINR
  // No precoder could be built from the estimates; the point reports 0.5.
  bool precoder_failed = false;
};

struct BerOptions {
  ChannelMode channel_mode = ChannelMode::farfield;
  std::vector<SbsPlacement> estimated;  // overrides estimation when non-empty
};

// One trial = one OFDM symbol on every data carrier. Estimated positions are
// drawn once per SNR point from uplink training at the same SNR.
// An ill-conditioned estimated design yields a precoder_failed point.
std::vector<BerPoint> ber_monte_carlo(const SystemConfig& config, const std::vector<double>& snr_db,
                                      PositionSource source, int trials, std::uint64_t seed,
                                      const BerOptions& options = {});

struct BaselineResult {
  double se = 0.0;
  double overhead_factor = 0.0;
  int streams = 0;
  double max_condition = 0.0;
  std::vector<std::string> metadata;
};

// Zero-forcing MU-MIMO over the same UCCA channel with perfect CSI.
BaselineResult mu_mimo_baseline_se(const SystemConfig& config, const ChannelTensor& h,
                                   double snr_db);

struct ComplexityTable {
  double oam_estimation = 0.0;      // W~ U~ log2(W~ U~)
  double oam_preprocessing = 0.0;   // W P^4 R^3 U^3
  double mimo_estimation = 0.0;     // W P^3 R^3 M^3
  double mimo_preprocessing = 0.0;  // W P^4 R^3 M^3
  double oam_total() const { return oam_estimation + oam_preprocessing; }
  double mimo_total() const { return mimo_estimation + mimo_preprocessing; }
};

ComplexityTable complexity_estimates(int carriers, int training_carriers, int modes,
                                     int training_modes, int users, int rings, int rx_elements);

}  // namespace oam
