#include "oam/transform.hpp"

#include <cmath>

namespace oam {

double bessel_j(int n, double x) {
  const int an = std::abs(n);
  double sign = 1.0;
  if (n < 0 && (an % 2)) sign = -sign;
  if (x < 0.0) {
    x = -x;
    if (an % 2) sign = -sign;
  }
  return sign * std::cyl_bessel_j(static_cast<double>(an), x);
}

Eigen::RowVectorXcd mode_steering_vector(int l, int M) {
  if (2 * std::abs(l) >= M)
    throw ConfigError(ConfigErrorKind::mode_unresolvable, "mode-unresolvable: |l| >= M/2");
  Eigen::RowVectorXcd f(M);
  for (int m = 0; m < M; ++m) {
    // Reduce the phase index modulo M to keep arguments small.
    const long long idx = (static_cast<long long>(l) * m) % M;
    f(m) = std::polar(1.0, -2.0 * kPi * static_cast<double>(idx) / M);
  }
  return f;
}

ModeTransform build_mode_transform(const std::vector<int>& modes, int M, int P, int rings) {
  ModeTransform t;
  t.M = M;
  t.P = P;
  t.rings = rings;
  t.modes = modes;
  t.FU.resize(M, static_cast<Eigen::Index>(modes.size()));
  for (std::size_t u = 0; u < modes.size(); ++u)
    t.FU.col(static_cast<Eigen::Index>(u)) = mode_steering_vector(modes[u], M).adjoint();
  return t;
}

CMat ModeTransform::block() const {
  CMat F = CMat::Zero(P * M, P * U());
  for (int q = 0; q < P; ++q) F.block(q * M, q * U(), M, U()) = FU;
  return F;
}

CMat ModeTransform::ucca_block() const {
  const CMat F = block();
  CMat out = CMat::Zero(rings * F.rows(), rings * F.cols());
  for (int r = 0; r < rings; ++r) out.block(r * F.rows(), r * F.cols(), F.rows(), F.cols()) = F;
  return out;
}

EffectiveOamChannel effective_oam_channel(const ChannelTensor& h, const ModeTransform& t) {
  const int P = h.users, R = h.rings, M = h.rx_elements, N = h.tx_elements, U = t.U();
  if (t.M != M || N != P * M || t.FU.rows() != M)
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "transform does not match channel");
  EffectiveOamChannel out;
  out.users = P;
  out.rings = R;
  out.modes = U;
  const auto order = grouped_column_order(P, M);
  const CMat FUh = t.FU.adjoint();
  out.per_carrier.reserve(h.per_carrier.size());
  for (const auto& H : h.per_carrier) {
    CMat heff(P * R * U, R * P * U);
    CMat sub(M, M);
    for (int rb = 0; rb < P * R; ++rb) {
      for (int ring = 0; ring < R; ++ring) {
        for (int q = 0; q < P; ++q) {
          for (int j = 0; j < M; ++j)
            sub.col(j) = H.block(rb * M, ring * N + order[static_cast<std::size_t>(q * M + j)], M, 1);
          heff.block(rb * U, (ring * P + q) * U, U, U).noalias() = FUh * sub * t.FU;
        }
      }
    }
    out.per_carrier.push_back(std::move(heff));
  }
  return out;
}

cplx effective_oam_entry(int p, int q, int u, int v, double k, const SystemConfig& config,
                         const SbsPlacement& placement, const std::vector<int>& modes) {
  const int M = config.rx_elements(), N = config.tx_elements(), P = config.user_count();
  const double rt = config.tx.rings.front().radius;
  const double rr = config.users[static_cast<std::size_t>(p)].array.rings.front().radius;
  const double r = placement.range, st = std::sin(placement.elevation), phi = placement.azimuth;
  const double lu = modes[static_cast<std::size_t>(u)], lv = modes[static_cast<std::size_t>(v)];
  const cplx delta = (config.beta / (2.0 * k * r)) * std::polar(1.0, -k * r);
  cplx acc = 0.0;
  for (int m = 0; m < M; ++m) {
    const double alpha = 2.0 * kPi * m / M;
    for (int nb = 0; nb < M; ++nb) {
      const double phi_prime = 2.0 * kPi * nb / M;
      const double phi_n = 2.0 * kPi * (nb * P + q) / N;
      const double arg = -lu * alpha + lv * phi_prime + (k * rt * rr / r) * std::cos(alpha - phi_n) +
                         k * rt * st * std::cos(phi - phi_n) - k * rr * st * std::cos(phi - alpha);
      acc += std::polar(1.0, arg);
    }
  }
  return delta * acc;
}

cplx combined_signal_scale(int l, double k, const SystemConfig& config, cplx pilot) {
  static const cplx kIPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};  // i^{-l} for l mod 4
  const double mag = config.rx_elements() * config.tx_elements() * config.beta / (2.0 * k);
  return mag * kIPow[((l % 4) + 4) % 4] * pilot;
}

cplx bessel_combined_signal(int l, double k, const std::vector<SbsPlacement>& placements,
                            const SystemConfig& config, cplx pilot) {
  const double rt = config.tx.rings.front().radius;
  cplx acc = 0.0;
  for (std::size_t p = 0; p < placements.size(); ++p) {
    const auto& pl = placements[p];
    const double rr = config.users[p].array.rings.front().radius;
    const double st = std::sin(pl.elevation);
    acc += std::polar(1.0 / pl.range, -k * pl.range + l * pl.azimuth) * bessel_j(l, k * rr * st) *
           bessel_j(0, k * rt * st);
  }
  return combined_signal_scale(l, k, config, pilot) * acc;
}

}  // namespace oam
