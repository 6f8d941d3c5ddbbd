#include "oam/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fft.hpp"
#include "oam/rng.hpp"
#include "oam/transform.hpp"
#include "refine.hpp"

namespace oam {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kTrainingNoiseStream = 0x7472616e;

double carrier_step(const std::vector<double>& ks) {
  return ks.size() > 1 ? ks[1] - ks[0] : 0.0;
}

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

// Vertex offset of the parabola through (-1, a), (0, b), (1, c).
double parabolic_offset(double a, double b, double c) {
  const double den = a - 2.0 * b + c;
  if (!(std::abs(den) > 0.0)) return 0.0;
  const double d = 0.5 * (a - c) / den;
  return std::clamp(d, -0.5, 0.5);
}

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }
}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

CMat unit_pilots(int modes, int carriers) { return CMat::Ones(modes, carriers); }

CMat qpsk_pilots(int modes, int carriers, std::uint64_t seed) {
  auto gen = trial_stream(seed, 0, 0x70696c6f);
  std::uniform_int_distribution<int> pick(0, 3);
  CMat out(modes, carriers);
  for (int w = 0; w < carriers; ++w)
    for (int u = 0; u < modes; ++u) out(u, w) = std::polar(1.0, kPi / 4 + kPi / 2 * pick(gen));
  return out;
}

TrainingObservation synth_uplink_training(const SystemConfig& config,
                                          const std::vector<SbsPlacement>& placements,
                                          const CMat& pilots, double snr_db, std::uint64_t seed,
                                          ChannelMode mode) {
  const auto& modes = config.modes.training_modes;
  const auto zero = std::find(modes.begin(), modes.end(), 0);
  if (config.elevation_estimation && zero == modes.end())
    throw ConfigError(ConfigErrorKind::missing_zero_mode, "missing-zero-mode: mode 0 required");
  const int U = static_cast<int>(modes.size());
  const auto ks = config.carriers.training_wave_numbers();
  const int W = static_cast<int>(ks.size());
  if (pilots.rows() != U || pilots.cols() != W)
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "pilot matrix has wrong shape");
  const int N = config.tx_elements(), M = config.rx_elements(), P = config.user_count();

  TrainingObservation obs;
  obs.wave_numbers = ks;
  obs.modes = modes;
  obs.pilots = pilots;
  obs.zero_mode_index = zero == modes.end() ? -1 : static_cast<int>(zero - modes.begin());
  const auto h = assemble_channel(config, placements, mode, ks);
  const auto t = build_mode_transform(modes, M, P);
  obs.Y.resize(static_cast<std::size_t>(W));
  double power = 0.0;
  for (int w = 0; w < W; ++w) {
    const CMat fs = t.FU * pilots.col(w).asDiagonal();
    CMat y = CMat::Zero(N, U);
    for (int p = 0; p < P; ++p) y.noalias() += uplink_matrix(h, w, p) * fs;
    power += y.squaredNorm();
    obs.Y[static_cast<std::size_t>(w)] = std::move(y);
  }
  power /= static_cast<double>(N) * U * W;
  if (std::isfinite(snr_db)) {
    obs.noise_variance = power / std::pow(10.0, snr_db / 10.0);
    auto gen = trial_stream(seed, 0, kTrainingNoiseStream);
    for (int w = 0; w < W; ++w) {
      auto& y = obs.Y[static_cast<std::size_t>(w)];
      for (int u = 0; u < U; ++u)
        for (int n = 0; n < N; ++n) y(n, u) += complex_gaussian(gen, obs.noise_variance);
    }
  }
  obs.combined.resize(U, W);
  obs.zero_mode.resize(N, std::max(W, 0));
  for (int w = 0; w < W; ++w) {
    const auto& y = obs.Y[static_cast<std::size_t>(w)];
    obs.combined.col(w) = y.colwise().sum().transpose();
    if (obs.zero_mode_index >= 0) obs.zero_mode.col(w) = y.col(obs.zero_mode_index);
  }
  if (obs.zero_mode_index < 0) obs.zero_mode.resize(0, 0);
  return obs;
}

CMat normalize_mode_samples(const CMat& combined, const CMat& pilots,
                            const std::vector<int>& modes, const std::vector<double>& ks,
                            const SystemConfig& config) {
  static const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // i^l
  CMat out(combined.rows(), combined.cols());
  for (Eigen::Index w = 0; w < combined.cols(); ++w) {
    for (Eigen::Index u = 0; u < combined.rows(); ++u) {
      const cplx s = pilots(u, w);
      if (std::abs(s) == 0.0) throw std::invalid_argument("zero pilot");
      const int l = modes[static_cast<std::size_t>(u)];
      const double sigma = std::abs(combined_signal_scale(l, ks[static_cast<std::size_t>(w)], config, s));
      out(u, w) = combined(u, w) / sigma * std::conj(s) / std::abs(s) * kIPow[((l % 4) + 4) % 4];
    }
  }
  return out;
}

CMat normalize_zero_mode(const CMat& zero_mode, const CMat& pilots, int zero_mode_index,
                         const std::vector<double>& ks, const SystemConfig& config) {
  CMat out(zero_mode.rows(), zero_mode.cols());
  const double M = config.rx_elements();
  for (Eigen::Index w = 0; w < zero_mode.cols(); ++w) {
    const cplx s = pilots(zero_mode_index, w);
    if (std::abs(s) == 0.0) throw std::invalid_argument("zero pilot");
    const double sigma = M * config.beta * std::abs(s) / (2.0 * ks[static_cast<std::size_t>(w)]);
    out.col(w) = zero_mode.col(w) / sigma * (std::conj(s) / std::abs(s));
  }
  return out;
}

RangeAzimuthResult estimate_range_azimuth(const CMat& x_tilde, const std::vector<double>& ks,
                                          const std::vector<int>& modes, int users,
                                          const SpectrumOptions& options) {
  (void)modes;
  const int U = static_cast<int>(x_tilde.rows()), W = static_cast<int>(x_tilde.cols());
  const int zu = U * options.zero_pad, zw = W * options.zero_pad;
  std::vector<cplx> buf(static_cast<std::size_t>(zu) * zw, cplx(0.0));
  for (int u = 0; u < U; ++u)
    for (int w = 0; w < W; ++w) buf[static_cast<std::size_t>(u) * zw + w] = x_tilde(u, w);
  detail::fft2_forward(buf, zu, zw);
  std::vector<double> mag(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) mag[i] = std::abs(buf[i]);
  auto at = [&](int a, int b) {
    return mag[static_cast<std::size_t>(wrap_index(a, zu)) * zw + wrap_index(b, zw)];
  };

  struct Cand { double m; int a, b; };
  std::vector<Cand> maxima;
  for (int a = 0; a < zu; ++a) {
    for (int b = 0; b < zw; ++b) {
      const double v = at(a, b);
      bool is_max = v > 0.0;
      for (int da = -1; da <= 1 && is_max; ++da)
        for (int db = -1; db <= 1 && is_max; ++db)
          if ((da || db) && at(a + da, b + db) > v) is_max = false;
      if (is_max) maxima.push_back({v, a, b});
    }
  }
  std::sort(maxima.begin(), maxima.end(), [](const Cand& x, const Cand& y) {
    if (x.m != y.m) return x.m > y.m;
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });

  const double dk = carrier_step(ks);
  const int radius =
      dk > 0.0 ? static_cast<int>(std::lround(options.min_range_separation * zw * dk / (2.0 * kPi))) : 0;
  RangeAzimuthResult res;
  std::vector<Cand> chosen;
  for (const auto& c : maxima) {
    if (static_cast<int>(chosen.size()) == users) break;
    bool near = false;
    for (const auto& o : chosen) {
      const int d = std::abs(c.b - o.b);
      if (std::min(d, zw - d) <= radius) near = true;
    }
    if (!near) chosen.push_back(c);
  }
  if (static_cast<int>(chosen.size()) < users) res.degraded = true;
  if (!(dk > 0.0)) res.degraded = true;
  for (const auto& c : chosen) {
    const double da = parabolic_offset(safe_log(at(c.a - 1, c.b)), safe_log(at(c.a, c.b)),
                                       safe_log(at(c.a + 1, c.b)));
    const double db = parabolic_offset(safe_log(at(c.a, c.b - 1)), safe_log(at(c.a, c.b)),
                                       safe_log(at(c.a, c.b + 1)));
    double rb = std::fmod(static_cast<double>(zw) - (c.b + db), static_cast<double>(zw));
    if (rb < 0) rb += zw;
    RangeAzimuthPeak pk;
    pk.range = dk > 0.0 ? 2.0 * kPi * rb / (zw * dk) : 0.0;
    pk.azimuth = wrap_angle(2.0 * kPi * (c.a + da) / zu);
    pk.magnitude = c.m;
    res.peaks.push_back(pk);
  }
  return res;
}

XiEstimate estimate_xi(const Eigen::RowVectorXcd& samples, const std::vector<double>& ks, int users,
                       int zero_pad, double tolerance) {
  const int W = static_cast<int>(samples.size());
  const int z = W * zero_pad;
  std::vector<cplx> buf(static_cast<std::size_t>(z), cplx(0.0));
  for (int w = 0; w < W; ++w) buf[static_cast<std::size_t>(w)] = samples(w);
  detail::fft1_forward(buf);
  std::vector<double> mag(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) mag[i] = std::abs(buf[i]);
  auto at = [&](int b) { return mag[static_cast<std::size_t>(wrap_index(b, z))]; };
  std::vector<std::pair<double, int>> maxima;
  for (int b = 0; b < z; ++b) {
    const double v = at(b);
    if (v > 0.0 && v >= at(b - 1) && v > at(b + 1)) maxima.push_back({v, b});
  }
  std::sort(maxima.begin(), maxima.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  XiEstimate out;
  const double dk = carrier_step(ks);
  if (!(dk > 0.0)) {
    out.resolvable = false;
    return out;
  }
  const double bin = 2.0 * kPi / (z * dk);
  const double k0 = ks.front();
  auto score = [&](double xi) {
    cplx acc = 0.0;
    for (int w = 0; w < W; ++w)
      acc += samples(w) * std::polar(1.0, (ks[static_cast<std::size_t>(w)] - k0) * xi);
    return std::abs(acc);
  };
  std::vector<std::pair<double, int>> chosen;
  for (const auto& c : maxima) {
    if (static_cast<int>(chosen.size()) == users) break;
    bool near = false;
    for (const auto& o : chosen) {
      const int d = std::abs(c.second - o.second);
      if (std::min(d, z - d) < zero_pad) near = true;
    }
    if (!near) chosen.push_back(c);
  }
  if (static_cast<int>(chosen.size()) < users) out.resolvable = false;
  if (!chosen.empty() && chosen.back().first < 0.25 * chosen.front().first &&
      static_cast<int>(chosen.size()) == users && users > 1)
    out.resolvable = false;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (const auto& c : chosen) {
    const double center = static_cast<double>((z - c.second) % z) * bin;
    double lo = center - bin, hi = center + bin;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = score(x1), f2 = score(x2);
    while (hi - lo > tolerance) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = score(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = score(x2);
      }
    }
    out.xi.push_back(0.5 * (lo + hi));
  }
  return out;
}

ElevationCandidates elevation_candidates(const std::vector<double>& xi,
                                         const std::vector<RangeAzimuthPeak>& estimates,
                                         double element_azimuth, double tx_radius,
                                         double singular_threshold) {
  const int X = static_cast<int>(xi.size()), Q = static_cast<int>(estimates.size());
  ElevationCandidates c;
  c.value = Eigen::MatrixXd::Constant(X, Q, kNaN);
  c.valid = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(X, Q, false);
  for (int q = 0; q < Q; ++q) {
    const double cs = std::cos(estimates[static_cast<std::size_t>(q)].azimuth - element_azimuth);
    if (std::abs(cs) < singular_threshold) {
      c.singular_element = true;
      continue;
    }
    for (int i = 0; i < X; ++i) {
      const double arg =
          (estimates[static_cast<std::size_t>(q)].range - xi[static_cast<std::size_t>(i)]) /
          (tx_radius * cs);
      if (std::abs(arg) <= 1.0) {
        c.value(i, q) = std::asin(arg);
        c.valid(i, q) = true;
      }
    }
  }
  return c;
}

MatchResult match_and_average(const std::vector<ElevationCandidates>& candidates,
                              const CMat& zero_mode_normalized,
                              const std::vector<RangeAzimuthPeak>& estimates,
                              const SystemConfig& config, const std::vector<double>& ks,
                              double outlier_factor) {
  const int N = static_cast<int>(candidates.size());
  const int P = static_cast<int>(estimates.size());
  const int W = static_cast<int>(ks.size());
  const double rt = config.tx.rings.front().radius;
  MatchResult res;
  res.element_elevation = Eigen::MatrixXd::Constant(P, N, kNaN);
  res.residual.assign(static_cast<std::size_t>(N), kNaN);
  res.elevation.assign(static_cast<std::size_t>(P), kNaN);
  res.used_elements.assign(static_cast<std::size_t>(P), 0);

  for (int n = 0; n < N; ++n) {
    const auto& cand = candidates[static_cast<std::size_t>(n)];
    const int X = static_cast<int>(cand.value.rows());
    if (X == 0) continue;
    const double phin = config.tx.rings.front().element_azimuth(n);
    // Assignments of xi peaks to users: permutations when enough peaks,
    // otherwise all maps with repetition.
    std::vector<std::vector<int>> assignments;
    if (X >= P) {
      std::vector<int> idx(static_cast<std::size_t>(X));
      std::iota(idx.begin(), idx.end(), 0);
      do {
        std::vector<int> a(idx.begin(), idx.begin() + P);
        if (std::find(assignments.begin(), assignments.end(), a) == assignments.end())
          assignments.push_back(a);
      } while (std::next_permutation(idx.begin(), idx.end()));
    } else {
      std::vector<int> a(static_cast<std::size_t>(P), 0);
      for (;;) {
        assignments.push_back(a);
        int d = 0;
        while (d < P && ++a[static_cast<std::size_t>(d)] == X) a[static_cast<std::size_t>(d++)] = 0;
        if (d == P) break;
      }
    }
    double best = INFINITY;
    std::vector<double> best_theta;
    for (const auto& a : assignments) {
      bool any_valid = false;
      std::vector<double> theta(static_cast<std::size_t>(P)), model_theta(static_cast<std::size_t>(P));
      for (int p = 0; p < P; ++p) {
        const int i = a[static_cast<std::size_t>(p)];
        if (cand.valid(i, p)) {
          theta[static_cast<std::size_t>(p)] = cand.value(i, p);
          model_theta[static_cast<std::size_t>(p)] = cand.value(i, p);
          any_valid = true;
        } else {
          theta[static_cast<std::size_t>(p)] = kNaN;
          model_theta[static_cast<std::size_t>(p)] = 0.0;
        }
      }
      if (!any_valid) continue;
      double r2 = 0.0;
      for (int w = 0; w < W; ++w) {
        const double k = ks[static_cast<std::size_t>(w)];
        cplx model = 0.0;
        for (int p = 0; p < P; ++p) {
          const auto& e = estimates[static_cast<std::size_t>(p)];
          const double st = std::sin(model_theta[static_cast<std::size_t>(p)]);
          const double rr = config.users[static_cast<std::size_t>(p)].array.rings.front().radius;
          model += std::polar(bessel_j(0, k * rr * st) / e.range,
                              -k * e.range + k * rt * st * std::cos(e.azimuth - phin));
        }
        r2 += std::norm(zero_mode_normalized(n, w) - model);
      }
      if (r2 < best) {
        best = r2;
        best_theta = theta;
      }
    }
    if (best_theta.empty()) continue;
    res.residual[static_cast<std::size_t>(n)] = best;
    for (int p = 0; p < P; ++p) res.element_elevation(p, n) = best_theta[static_cast<std::size_t>(p)];
  }

  std::vector<double> finite;
  for (double r : res.residual)
    if (std::isfinite(r)) finite.push_back(r);
  double median = kNaN;
  if (!finite.empty()) {
    std::sort(finite.begin(), finite.end());
    const std::size_t h = finite.size() / 2;
    median = finite.size() % 2 ? finite[h] : 0.5 * (finite[h - 1] + finite[h]);
  }
  for (int p = 0; p < P; ++p) {
    double sum = 0.0;
    int used = 0;
    for (int n = 0; n < N; ++n) {
      const double r = res.residual[static_cast<std::size_t>(n)];
      const double t = res.element_elevation(p, n);
      if (!std::isfinite(r) || !std::isfinite(t)) continue;
      if (std::isfinite(median) && median > 0.0 && r > outlier_factor * median) {
        res.element_elevation(p, n) = kNaN;
        continue;
      }
      sum += t;
      ++used;
    }
    res.used_elements[static_cast<std::size_t>(p)] = used;
    if (used > 0) res.elevation[static_cast<std::size_t>(p)] = sum / used;
  }
  return res;
}

Nmse nmse_of(const UserEstimate& est, const SbsPlacement& truth) {
  auto sq = [](double d, double x) { return d * d / (x * x); };
  Nmse n;
  n.range = sq(est.range - truth.range, truth.range);
  n.elevation = sq(est.elevation - truth.elevation, truth.elevation);
  n.azimuth = sq(wrap_angle(est.azimuth - truth.azimuth), truth.azimuth);
  return n;
}

namespace {

// Order estimates to match truth by minimal summed normalized distance.
std::vector<UserEstimate> associate(const std::vector<UserEstimate>& est,
                                    const std::vector<SbsPlacement>& truth) {
  const int P = static_cast<int>(truth.size());
  if (static_cast<int>(est.size()) != P) return est;
  std::vector<int> idx(static_cast<std::size_t>(P));
  std::iota(idx.begin(), idx.end(), 0);
  auto cost = [&](const std::vector<int>& perm) {
    double c = 0.0;
    for (int p = 0; p < P; ++p) {
      const auto& e = est[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
      const auto& t = truth[static_cast<std::size_t>(p)];
      const double dr = (e.range - t.range) / t.range;
      const double da = wrap_angle(e.azimuth - t.azimuth);
      const double de = e.elevation - t.elevation;
      c += dr * dr + 1e-2 * (std::isfinite(da) ? da * da : 0.0) +
           1e-2 * (std::isfinite(de) ? de * de : 0.0);
    }
    return c;
  };
  std::vector<int> best = idx;
  double best_cost = cost(idx);
  while (std::next_permutation(idx.begin(), idx.end())) {
    const double c = cost(idx);
    if (c < best_cost) {
      best_cost = c;
      best = idx;
    }
  }
  std::vector<UserEstimate> out;
  for (int p = 0; p < P; ++p) out.push_back(est[static_cast<std::size_t>(best[static_cast<std::size_t>(p)])]);
  return out;
}

}  // namespace

EstimationReport estimate_positions(const SystemConfig& config, const TrainingObservation& obs,
                                    const EstimationOptions& options,
                                    const std::vector<SbsPlacement>* truth) {
  const int P = config.user_count(), N = config.tx_elements();
  const auto& ks = obs.wave_numbers;
  EstimationReport rep;

  const CMat xt = normalize_mode_samples(obs.combined, obs.pilots, obs.modes, ks, config);
  const auto ra = estimate_range_azimuth(xt, ks, obs.modes, P, options.spectrum);
  if (ra.degraded) {
    rep.degraded = true;
    rep.diagnostics.push_back("fewer separable range/azimuth peaks than users");
  }
  std::vector<RangeAzimuthPeak> peaks = ra.peaks;
  std::sort(peaks.begin(), peaks.end(),
            [](const RangeAzimuthPeak& a, const RangeAzimuthPeak& b) { return a.range < b.range; });
  while (static_cast<int>(peaks.size()) < P)
    peaks.push_back(peaks.empty() ? RangeAzimuthPeak{1.0, 0.0, 0.0} : peaks.back());

  std::vector<double> theta(static_cast<std::size_t>(P), 0.0);
  rep.element_elevation = Eigen::MatrixXd::Constant(P, N, kNaN);
  if (obs.zero_mode_index >= 0) {
    const CMat yz = normalize_zero_mode(obs.zero_mode, obs.pilots, obs.zero_mode_index, ks, config);
    std::vector<ElevationCandidates> cands(static_cast<std::size_t>(N));
    int unresolved = 0;
    for (int n = 0; n < N; ++n) {
      const auto xi = estimate_xi(yz.row(n), ks, P, options.spectrum.zero_pad);
      if (!xi.resolvable) ++unresolved;
      cands[static_cast<std::size_t>(n)] =
          elevation_candidates(xi.xi, peaks, config.tx.rings.front().element_azimuth(n),
                               config.tx.rings.front().radius);
    }
    if (unresolved > 0)
      rep.diagnostics.push_back(std::to_string(unresolved) + " elements with unresolved xi peaks");
    const auto match = match_and_average(cands, yz, peaks, config, ks, options.outlier_factor);
    rep.element_elevation = match.element_elevation;
    rep.matching_residual = match.residual;
    for (int p = 0; p < P; ++p) {
      const double t = match.elevation[static_cast<std::size_t>(p)];
      if (std::isfinite(t)) {
        theta[static_cast<std::size_t>(p)] = t;
      } else {
        rep.degraded = true;
        rep.diagnostics.push_back("no valid elevation candidates for user " + std::to_string(p + 1));
      }
    }
  }
  for (int p = 0; p < P; ++p) {
    const auto& pk = peaks[static_cast<std::size_t>(p)];
    rep.pipeline.push_back({pk.range, theta[static_cast<std::size_t>(p)], pk.azimuth});
  }

  rep.users = rep.pipeline;
  if (options.refine) {
    std::vector<double> ranges;
    for (const auto& pk : peaks) ranges.push_back(pk.range);
    rep.users = detail::refine_positions(config, obs, ranges, options, rep.diagnostics);
    rep.refined = true;
  }

  if (truth) {
    rep.users = associate(rep.users, *truth);
    rep.pipeline = associate(rep.pipeline, *truth);
    for (int p = 0; p < P; ++p) {
      rep.nmse.push_back(nmse_of(rep.users[static_cast<std::size_t>(p)], (*truth)[static_cast<std::size_t>(p)]));
      rep.pipeline_nmse.push_back(
          nmse_of(rep.pipeline[static_cast<std::size_t>(p)], (*truth)[static_cast<std::size_t>(p)]));
    }
  }
  return rep;
}

std::vector<SbsPlacement> estimate_placements(const SystemConfig& config, double snr_db,
                                              std::uint64_t seed, ChannelMode mode,
                                              const EstimationOptions& options) {
  const auto truth = config.placements();
  const auto obs = synth_uplink_training(
      config, truth,
      unit_pilots(config.training_mode_count(), config.carriers.training_count), snr_db, seed, mode);
  const auto rep = estimate_positions(config, obs, options, &truth);
  std::vector<SbsPlacement> out;
  for (const auto& u : rep.users) out.push_back({u.range, u.elevation, u.azimuth});
  return out;
}

}  // namespace oam
