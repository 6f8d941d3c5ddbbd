#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "oam/model.hpp"

namespace testing {

inline double wavelength(double f) { return oam::kSpeedOfLight / f; }

// Three users at 9 GHz: 63-element transmit UCA of radius 30 lambda, 21-element
// receive UCAs of radius 15 lambda, users (12 m, 18, 2), (24 m, 10, 10),
// (36 m, 2, 18) in degrees. Further rings step the radii by the same amounts.
inline oam::SystemConfig fig7_config(int data_modes = 20, int training_modes = 20,
                                     int carriers = 64, int training_carriers = 64, int rings = 1) {
  const double f = 9e9, lam = wavelength(f);
  oam::SystemConfig c;
  for (int r = 1; r <= rings; ++r) c.tx.rings.push_back({30.0 * r * lam, 63, 0.0});
  const double range[3] = {12, 24, 36}, el[3] = {18, 10, 2}, az[3] = {2, 10, 18};
  for (int p = 0; p < 3; ++p) {
    oam::UserConfig u;
    for (int r = 1; r <= rings; ++r) u.array.rings.push_back({15.0 * r * lam, 21, 0.0});
    u.placement = {range[p], oam::deg2rad(el[p]), oam::deg2rad(az[p])};
    c.users.push_back(u);
  }
  c.carriers = oam::build_carrier_grid(f, 1.48e6, carriers, training_carriers);
  c.modes.data_modes = oam::contiguous_modes(data_modes);
  c.modes.training_modes = oam::contiguous_modes(training_modes);
  c.coherence_symbols = 512;
  return c;
}

// Single user, coaxial-capable geometry with P = 1 and M = N.
inline oam::SystemConfig single_user_config(int M, double range, double elevation, double azimuth,
                                            int modes, int carriers) {
  const double f = 9e9, lam = wavelength(f);
  oam::SystemConfig c;
  c.tx.rings.push_back({30.0 * lam, M, 0.0});
  oam::UserConfig u;
  u.array.rings.push_back({15.0 * lam, M, 0.0});
  u.placement = {range, elevation, azimuth};
  c.users.push_back(u);
  c.carriers = oam::build_carrier_grid(f, 1.48e6, carriers, carriers);
  c.modes.data_modes = oam::contiguous_modes(modes);
  c.modes.training_modes = oam::contiguous_modes(modes);
  return c;
}

struct Vec3 {
  double x, y, z;
};

inline Vec3 spherical(double r, double theta, double phi) {
  return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)};
}

inline double norm(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

// Element positions in Cartesian coordinates: transmit ring in the z = 0
// plane, receive ring parallel to it, centered at the user position.
inline double cartesian_distance(double rt, double phi_n, double rr, double alpha_m, double r,
                                 double theta, double phi) {
  const Vec3 tx{rt * std::cos(phi_n), rt * std::sin(phi_n), 0.0};
  const Vec3 c = spherical(r, theta, phi);
  const Vec3 rx{c.x + rr * std::cos(alpha_m), c.y + rr * std::sin(alpha_m), c.z};
  return norm(tx, rx);
}

// Power series of J_n(x) summed in long double.
inline double bessel_series(int n, double x) {
  const bool neg = n < 0;
  const int a = neg ? -n : n;
  const long double h = static_cast<long double>(x) / 2.0L;
  long double term = 1.0L;
  for (int i = 1; i <= a; ++i) term *= h / i;
  long double sum = term;
  const long double h2 = h * h;
  for (int k = 1; k < 400; ++k) {
    term *= -h2 / (static_cast<long double>(k) * (k + a));
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-30 * std::fabs(static_cast<double>(sum)) && k > a) break;
  }
  const double v = static_cast<double>(sum);
  return (neg && (a % 2)) ? -v : v;
}

// J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt. The integrand is
// periodic and smooth, so the trapezoid rule converges geometrically once the
// point count exceeds |x| + |n| by a margin.
inline double bessel_integral(int n, double x, int points = 4096) {
  long double acc = 0.0L;
  for (int j = 0; j < points; ++j) {
    const long double t = 2.0L * 3.14159265358979323846264338327950288L * j / points;
    acc += std::cos(static_cast<long double>(n) * t - static_cast<long double>(x) * std::sin(t));
  }
  return static_cast<double>(acc / points);
}

}  // namespace testing
