#pragma once

#include <vector>

#include "oam/channel.hpp"
#include "oam/model.hpp"

namespace oam {

// Integer-order Bessel function of the first kind, any sign of n and x.
double bessel_j(int n, double x);

// Entries e^{-i 2 pi l m / M}, m = 0..M-1.
Eigen::RowVectorXcd mode_steering_vector(int l, int M);

struct ModeTransform {
  int M = 0;
  int P = 1;
  int rings = 1;
  std::vector<int> modes;
  CMat FU;  // M x U, column u = f(l_u)^H

  int U() const { return static_cast<int>(modes.size()); }
  // F = I_P (x) F_U, shape (P*M x P*U).
  CMat block() const;
  // I_R (x) F, shape (R*P*M x R*P*U).
  CMat ucca_block() const;
};

ModeTransform build_mode_transform(const std::vector<int>& modes, int M, int P, int rings = 1);

// Rows (p, ring, u); columns (ring, q, v). Block size per user is rings*U.
struct EffectiveOamChannel {
  std::vector<CMat> per_carrier;
  int users = 0;
  int rings = 1;
  int modes = 0;

  int block() const { return rings * modes; }
  int carrier_count() const { return static_cast<int>(per_carrier.size()); }
  CMat user_slice(int w, int p) const {
    return per_carrier[static_cast<std::size_t>(w)].middleRows(p * block(), block());
  }
};

EffectiveOamChannel effective_oam_channel(const ChannelTensor& h, const ModeTransform& t);

// Direct double-sum evaluation of one far-field effective entry for the
// inner-ring UCA (zero-based p, q, u, v).
cplx effective_oam_entry(int p, int q, int u, int v, double k, const SystemConfig& config,
                         const SbsPlacement& placement, const std::vector<int>& modes);

// Closed-form combined training signal for mode l at wave number k with
// unit-modulus pilot value `pilot`, using J_l(k R_r sin t) J_0(k R_t sin t).
cplx bessel_combined_signal(int l, double k, const std::vector<SbsPlacement>& placements,
                            const SystemConfig& config, cplx pilot = 1.0);

// Scale sigma(l, k) = M N beta i^{-l} pilot / (2k).
cplx combined_signal_scale(int l, double k, const SystemConfig& config, cplx pilot = 1.0);

}  // namespace oam
