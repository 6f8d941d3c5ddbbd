#pragma once

#include <vector>

#include "oam/model.hpp"

namespace oam {

enum class ChannelMode { exact, farfield };

const char* to_string(ChannelMode mode);

// Row index ((p*rings + ring_rx)*M + m), column index (ring_tx*N + n).
// Columns are in natural element order; grouping is applied by the
// effective-channel transform.
struct ChannelTensor {
  std::vector<CMat> per_carrier;
  std::vector<double> wave_numbers;
  ChannelMode mode = ChannelMode::farfield;
  int users = 0;
  int rings = 1;
  int rx_elements = 0;
  int tx_elements = 0;

  int carrier_count() const { return static_cast<int>(per_carrier.size()); }
  // Rows of user p (all rings).
  CMat user_rows(int w, int p) const;
};

// Indices are zero-based.
double exact_distance(int n, int m, const UcaGeometry& tx, const UcaGeometry& rx,
                      const SbsPlacement& placement);
double farfield_distance(int n, int m, const UcaGeometry& tx, const UcaGeometry& rx,
                         const SbsPlacement& placement);
cplx channel_coefficient(double k, double d, double r_amp, double beta);

// Transmit columns of group q (zero-based): q, q+P, ..., q+P(M-1).
std::vector<int> group_columns(int q, int P, int M);
// Concatenation of group_columns(q) for q = 0..P-1.
std::vector<int> grouped_column_order(int P, int M);

// Inner-ring (UCA) channel, shape (P*M x N) per carrier.
ChannelTensor assemble_channel(const SystemConfig& config,
                               const std::vector<SbsPlacement>& placements, ChannelMode mode,
                               const std::vector<double>& wave_numbers);

// Full UCCA channel, shape (P*R*M x R*N) per carrier.
ChannelTensor assemble_ucca_channel(const SystemConfig& config,
                                    const std::vector<SbsPlacement>& placements,
                                    ChannelMode mode, const std::vector<double>& wave_numbers);

// Uplink matrix of user p for Y' = sum_p H_p^T F S' (reciprocal channel).
CMat uplink_matrix(const ChannelTensor& h, int w, int p);

}  // namespace oam
