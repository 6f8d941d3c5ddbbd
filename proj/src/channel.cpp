#include "oam/channel.hpp"

#include <cmath>

namespace oam {

const char* to_string(ChannelMode mode) {
  return mode == ChannelMode::exact ? "exact" : "farfield";
}

CMat ChannelTensor::user_rows(int w, int p) const {
  const int rows = rings * rx_elements;
  return per_carrier[static_cast<std::size_t>(w)].middleRows(p * rows, rows);
}

double exact_distance(int n, int m, const UcaGeometry& tx, const UcaGeometry& rx,
                      const SbsPlacement& placement) {
  const double rt = tx.radius, rr = rx.radius, r = placement.range;
  const double st = std::sin(placement.elevation);
  const double phin = tx.element_azimuth(n), alpham = rx.element_azimuth(m);
  const double phi = placement.azimuth;
  const double d2 = rt * rt + rr * rr + r * r + 2.0 * r * rr * st * std::cos(phi - alpham) -
                    2.0 * r * rt * st * std::cos(phi - phin) -
                    2.0 * rt * rr * std::cos(alpham - phin);
  return std::sqrt(d2);
}

double farfield_distance(int n, int m, const UcaGeometry& tx, const UcaGeometry& rx,
                         const SbsPlacement& placement) {
  const double rt = tx.radius, rr = rx.radius, r = placement.range;
  const double st = std::sin(placement.elevation);
  const double phin = tx.element_azimuth(n), alpham = rx.element_azimuth(m);
  const double phi = placement.azimuth;
  return r + rr * st * std::cos(phi - alpham) - rt * st * std::cos(phi - phin) -
         (rt * rr / r) * std::cos(alpham - phin);
}

cplx channel_coefficient(double k, double d, double r_amp, double beta) {
  return (beta / (2.0 * k * r_amp)) * std::polar(1.0, -k * d);
}

std::vector<int> group_columns(int q, int P, int M) {
  std::vector<int> cols(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) cols[static_cast<std::size_t>(j)] = q + P * j;
  return cols;
}

std::vector<int> grouped_column_order(int P, int M) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(P * M));
  for (int q = 0; q < P; ++q)
    for (int c : group_columns(q, P, M)) out.push_back(c);
  return out;
}

namespace {

ChannelTensor assemble(const SystemConfig& config, const std::vector<SbsPlacement>& placements,
                       ChannelMode mode, const std::vector<double>& ks, int rings) {
  if (placements.size() != config.users.size())
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "placement count differs from users");
  for (const auto& u : config.users)
    if (u.array.ring_count() < rings || config.tx.ring_count() < rings)
      throw ConfigError(ConfigErrorKind::ring_mismatch, "ring count mismatch");
  ChannelTensor out;
  out.mode = mode;
  out.users = config.user_count();
  out.rings = rings;
  out.rx_elements = config.rx_elements();
  out.tx_elements = config.tx_elements();
  out.wave_numbers = ks;
  const int P = out.users, M = out.rx_elements, N = out.tx_elements;

  // Distances do not depend on the carrier; compute once.
  const int rows = P * rings * M, cols = rings * N;
  Eigen::MatrixXd dist(rows, cols), amp_r(rows, cols);
  for (int p = 0; p < P; ++p) {
    const auto& user = config.users[static_cast<std::size_t>(p)];
    const auto& pl = placements[static_cast<std::size_t>(p)];
    for (int a = 0; a < rings; ++a) {
      const auto& rx = user.array.rings[static_cast<std::size_t>(a)];
      for (int b = 0; b < rings; ++b) {
        const auto& tx = config.tx.rings[static_cast<std::size_t>(b)];
        for (int m = 0; m < M; ++m) {
          for (int n = 0; n < N; ++n) {
            const int row = (p * rings + a) * M + m, col = b * N + n;
            if (mode == ChannelMode::exact) {
              const double d = exact_distance(n, m, tx, rx, pl);
              dist(row, col) = d;
              amp_r(row, col) = d;
            } else {
              dist(row, col) = farfield_distance(n, m, tx, rx, pl);
              amp_r(row, col) = pl.range;
            }
          }
        }
      }
    }
  }
  out.per_carrier.resize(ks.size());
  for (std::size_t w = 0; w < ks.size(); ++w) {
    CMat h(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r)
        h(r, c) = channel_coefficient(ks[w], dist(r, c), amp_r(r, c), config.beta);
    out.per_carrier[w] = std::move(h);
  }
  return out;
}

}  // namespace

ChannelTensor assemble_channel(const SystemConfig& config,
                               const std::vector<SbsPlacement>& placements, ChannelMode mode,
                               const std::vector<double>& wave_numbers) {
  return assemble(config, placements, mode, wave_numbers, 1);
}

ChannelTensor assemble_ucca_channel(const SystemConfig& config,
                                    const std::vector<SbsPlacement>& placements,
                                    ChannelMode mode, const std::vector<double>& wave_numbers) {
  for (const auto& u : config.users)
    if (u.array.ring_count() != config.tx.ring_count())
      throw ConfigError(ConfigErrorKind::ring_mismatch, "user and transmitter ring counts differ");
  return assemble(config, placements, mode, wave_numbers, config.tx.ring_count());
}

CMat uplink_matrix(const ChannelTensor& h, int w, int p) {
  return h.user_rows(w, p).transpose();
}

}  // namespace oam
