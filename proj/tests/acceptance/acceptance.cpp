// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
// usage: acceptance [--oamsim PATH] [--only N[,N...]] [--workdir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../common.hpp"
#include "oam/channel.hpp"
#include "oam/config_io.hpp"
#include "oam/csv.hpp"
#include "oam/estimation.hpp"
#include "oam/link.hpp"
#include "oam/precoding.hpp"
#include "oam/rng.hpp"
#include "oam/transform.hpp"

using namespace oam;

namespace {

// Criterion 1
constexpr double kDecouplingTol = 1e-9;
constexpr double kDecouplingSeconds = 10.0;
// Criterion 2
constexpr double kOnGridTol = 1e-9;
constexpr double kRangeTol = 0.02;        // m
constexpr double kAzimuthTolDeg = 0.1;
constexpr double kElevationTolDeg = 0.2;
constexpr int kOffGridCases = 20;
// Criterion 3
constexpr int kFig7Seeds = 100;
constexpr double kFig7Snr = 20.0;
constexpr double kNmseRangeMax = 1e-4;
constexpr double kNmseAzimuthMax = 1e-3;
constexpr double kNmseElevationMax = 1e-2;
constexpr double kFig7Seconds = 300.0;
// Criterion 4
constexpr int kTrendSeeds = 50;
constexpr double kTrendGridSnr = 15.0;
constexpr double kInsensitivity = 0.10;
// Criterion 5
constexpr double kBerBits = 1e6;
constexpr double kGapSigmas = 2.0;
constexpr double kAnalyticSigmas = 3.0;
// Criterion 6
constexpr int kSeTrials = 2;
// Criterion 7
constexpr double kUccaSnr = 25.0;
constexpr double kRatioLow = 1.15;
constexpr double kRatioHigh = 1.45;
constexpr double kUccaSeconds = 900.0;
// Criterion 8
constexpr double kPowerTol = 1e-12;
// Criterion 9
constexpr double kDistanceTol = 1e-12;
constexpr int kDistanceCases = 10000;
constexpr double kEffectiveTol = 1e-10;
constexpr double kClosedFormTol = 0.02;
constexpr double kCovarianceTol = 0.03;
constexpr int kCovarianceSymbols = 100000;
// Criterion 10
constexpr double kParallelTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rad2deg_abs(double a) { return std::fabs(a) * 180.0 / kPi; }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { notes.push_back("info " + what); }
};

struct Context {
  std::string oamsim;
  std::filesystem::path workdir;
};

// Per-user NMSE medians over seeds.
struct NmseStats {
  std::vector<double> range, elevation, azimuth;
};

NmseStats nmse_medians(const SystemConfig& c, double snr, int seeds) {
  const int P = c.user_count();
  std::vector<std::vector<double>> r(P), t(P), a(P);
  const auto truth = c.placements();
  for (int s = 0; s < seeds; ++s) {
    const auto est = estimate_placements(c, snr, splitmix64(0xacce97 + static_cast<std::uint64_t>(s)));
    for (int p = 0; p < P; ++p) {
      const auto& e = est[static_cast<std::size_t>(p)];
      const auto n = nmse_of({e.range, e.elevation, e.azimuth}, truth[static_cast<std::size_t>(p)]);
      r[p].push_back(n.range);
      t[p].push_back(n.elevation);
      a[p].push_back(n.azimuth);
    }
  }
  NmseStats out;
  for (int p = 0; p < P; ++p) {
    out.range.push_back(median(r[p]));
    out.elevation.push_back(median(t[p]));
    out.azimuth.push_back(median(a[p]));
  }
  return out;
}

SystemConfig with_training(SystemConfig c, int modes, int carriers) {
  c.modes.training_modes = contiguous_modes(modes);
  c.carriers = build_carrier_grid(c.carriers.base_frequency, c.carriers.spacing, c.carriers.data_count, carriers);
  return c;
}

SystemConfig with_data_modes(SystemConfig c, int modes) {
  c.modes.data_modes = contiguous_modes(modes);
  return c;
}

// SE of the estimated-position chain averaged over trials; an unbuildable
// precoder counts as zero.
double estimated_se(const SystemConfig& c, const DownlinkChain& chain, double snr, int trials) {
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto est = estimate_placements(c, snr, splitmix64(0x5e + static_cast<std::uint64_t>(t)));
    try {
      acc += evaluate_se(c, chain, design_precoder(c, est), snr).se;
    } catch (const IllConditionedError&) {
    }
  }
  return acc / trials;
}

// ---------------------------------------------------------------------------

Outcome criterion1(const Context&) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto c = testing::fig7_config();
  const auto h = assemble_channel(c, c.placements(), ChannelMode::farfield, c.carriers.wave_numbers);
  const auto heff = effective_oam_channel(h, build_mode_transform(c.modes.data_modes, 21, 3));
  const auto set = build_precoder(heff);
  const auto rep = verify_decoupling(heff, set);
  const double secs = seconds_since(t0);
  o.check(rep.max_relative_total() < kDecouplingTol,
          "max_w ||H P - I||/||I|| = " + fmt(rep.max_relative_total()) + " over " +
              std::to_string(rep.relative_total.size()) + " carriers");
  o.check(secs < kDecouplingSeconds, "runtime " + fmt(secs) + " s");
  return o;
}

Outcome criterion2(const Context&) {
  Outcome o;
  // FFT stage: a mode/carrier tone placed exactly on the padded grid.
  const auto grid = build_carrier_grid(9e9, 1.48e6, 64, 64);
  const auto ks = grid.training_wave_numbers();
  const auto modes = contiguous_modes(20);
  const double dk = ks[1] - ks[0];
  SpectrumOptions so;
  double worst_r = 0.0, worst_a = 0.0;
  for (int b : {40, 80, 333}) {
    for (int a : {-50, 32, 101}) {
      const double r = 2 * kPi * b / (64 * so.zero_pad * dk);
      const double phi = 2 * kPi * a / (20 * so.zero_pad);
      CMat x(20, 64);
      for (int u = 0; u < 20; ++u)
        for (int w = 0; w < 64; ++w) x(u, w) = std::polar(1.0, -ks[static_cast<std::size_t>(w)] * r + modes[static_cast<std::size_t>(u)] * phi);
      const auto res = estimate_range_azimuth(x, ks, modes, 1, so);
      worst_r = std::max(worst_r, std::fabs(res.peaks[0].range - r));
      worst_a = std::max(worst_a, std::fabs(wrap_angle(res.peaks[0].azimuth - phi)));
    }
  }
  o.check(worst_r < kOnGridTol && worst_a < kOnGridTol,
          "on-grid |dr| = " + fmt(worst_r) + " m, |dphi| = " + fmt(worst_a) + " rad");

  // Full pipeline with refinement, single user, noiseless, off-grid.
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> range(10.0, 40.0), el(deg2rad(1.0), deg2rad(20.0)), az(-kPi, kPi);
  double er = 0.0, ea = 0.0, et = 0.0;
  for (int i = 0; i < kOffGridCases; ++i) {
    auto c = testing::single_user_config(21, range(gen), el(gen), az(gen), 20, 64);
    const auto est = estimate_placements(c, std::numeric_limits<double>::infinity(), 1);
    const auto& t = c.users[0].placement;
    er = std::max(er, std::fabs(est[0].range - t.range));
    ea = std::max(ea, rad2deg_abs(wrap_angle(est[0].azimuth - t.azimuth)));
    et = std::max(et, rad2deg_abs(est[0].elevation - t.elevation));
  }
  o.check(er < kRangeTol, "off-grid worst |dr| = " + fmt(er) + " m over " + std::to_string(kOffGridCases) + " cases");
  o.check(ea < kAzimuthTolDeg, "off-grid worst |dphi| = " + fmt(ea) + " deg");
  o.check(et < kElevationTolDeg, "off-grid worst |dtheta| = " + fmt(et) + " deg");
  return o;
}

Outcome criterion3(const Context&) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto s = nmse_medians(testing::fig7_config(), kFig7Snr, kFig7Seeds);
  const double secs = seconds_since(t0);
  for (int p = 0; p < 3; ++p) {
    const auto i = static_cast<std::size_t>(p);
    const std::string u = "user " + std::to_string(p + 1) + ": ";
    o.check(s.range[i] < kNmseRangeMax, u + "median NMSE(r) = " + fmt(s.range[i]));
    o.check(s.azimuth[i] < kNmseAzimuthMax, u + "median NMSE(phi) = " + fmt(s.azimuth[i]));
    o.check(s.elevation[i] < kNmseElevationMax, u + "median NMSE(theta) = " + fmt(s.elevation[i]));
    o.check(s.elevation[i] > s.range[i], u + "NMSE(theta) > NMSE(r)");
  }
  o.check(secs < kFig7Seconds, "runtime " + fmt(secs) + " s");
  return o;
}

Outcome criterion4(const Context&) {
  Outcome o;
  const auto base = testing::fig7_config();
  const char* names[3] = {"r", "theta", "phi"};
  auto pick = [](const NmseStats& s, int q) -> const std::vector<double>& {
    return q == 0 ? s.range : q == 1 ? s.elevation : s.azimuth;
  };

  std::vector<NmseStats> by_snr;
  const std::vector<double> snrs{0.0, 10.0, 20.0, 30.0};
  for (double snr : snrs) by_snr.push_back(nmse_medians(base, snr, kTrendSeeds));
  for (int q = 0; q < 3; ++q)
    for (int p = 0; p < 3; ++p) {
      std::string line = "NMSE(" + std::string(names[q]) + ") user " + std::to_string(p + 1) + " vs SNR:";
      bool ok = true;
      for (std::size_t i = 0; i < snrs.size(); ++i) {
        const double v = pick(by_snr[i], q)[static_cast<std::size_t>(p)];
        line += " " + fmt(v);
        if (i > 0 && v > pick(by_snr[i - 1], q)[static_cast<std::size_t>(p)]) ok = false;
      }
      o.check(ok, line + " non-increasing");
    }

  const std::vector<int> ut{8, 12, 16, 20}, wt{16, 32, 48, 64};
  std::vector<NmseStats> by_ut, by_wt;
  for (int u : ut) by_ut.push_back(nmse_medians(with_training(base, u, 64), kTrendGridSnr, kTrendSeeds));
  for (int w : wt)
    by_wt.push_back(w == 64 ? by_ut.back() : nmse_medians(with_training(base, 20, w), kTrendGridSnr, kTrendSeeds));

  auto series = [&](const std::vector<NmseStats>& v, int q, int p) {
    std::vector<double> s;
    for (const auto& x : v) s.push_back(pick(x, q)[static_cast<std::size_t>(p)]);
    return s;
  };
  auto text = [](const std::vector<double>& s) {
    std::string t;
    for (double x : s) t += " " + fmt(x);
    return t;
  };
  auto decreasing = [](const std::vector<double>& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!(s[i] < s[i - 1])) return false;
    return true;
  };
  auto spread = [](const std::vector<double>& s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi / *lo - 1.0;
  };
  for (int p = 0; p < 3; ++p) {
    const std::string u = " user " + std::to_string(p + 1);
    const auto phi_u = series(by_ut, 2, p), phi_w = series(by_wt, 2, p);
    const auto r_w = series(by_wt, 0, p), r_u = series(by_ut, 0, p);
    o.check(decreasing(phi_u), "NMSE(phi) vs U~ {8,12,16,20}" + u + ":" + text(phi_u) + " decreasing");
    o.check(spread(phi_w) <= kInsensitivity,
            "NMSE(phi) vs W~ {16,32,48,64}" + u + ":" + text(phi_w) + " spread " + fmt(spread(phi_w)));
    o.check(decreasing(r_w), "NMSE(r) vs W~ {16,32,48,64}" + u + ":" + text(r_w) + " decreasing");
    o.check(spread(r_u) <= kInsensitivity,
            "NMSE(r) vs U~ {8,12,16,20}" + u + ":" + text(r_u) + " spread " + fmt(spread(r_u)));
  }
  return o;
}

Outcome criterion5(const Context&) {
  Outcome o;
  const auto base = preset("fig11").scenario;
  const std::vector<double> snrs{0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  std::vector<std::vector<BerPoint>> truth(2), est(2);
  const int us[2] = {20, 16};
  for (int i = 0; i < 2; ++i) {
    const auto c = with_data_modes(base, us[i]);
    const double bits_per_trial = 2.0 * c.carriers.data_count * c.user_count() * us[i];
    const int trials = static_cast<int>(std::ceil(kBerBits / bits_per_trial));
    truth[static_cast<std::size_t>(i)] = ber_monte_carlo(c, snrs, PositionSource::truth, trials, 77);
    est[static_cast<std::size_t>(i)] = ber_monte_carlo(c, snrs, PositionSource::estimated, trials, 77);
  }
  for (int i = 0; i < 2; ++i) {
    const auto& tr = truth[static_cast<std::size_t>(i)];
    const auto& es = est[static_cast<std::size_t>(i)];
    const std::string u = "U=" + std::to_string(us[i]);
    std::string line = u + " BER true/estimated:";
    bool ordered = true;
    for (std::size_t k = 0; k < snrs.size(); ++k) {
      line += " " + fmt(tr[k].pooled) + "/" + fmt(es[k].pooled);
      ordered = ordered && tr[k].pooled <= es[k].pooled;
    }
    o.check(ordered, line + " (true <= estimated)");
    const auto& t25 = tr.back();
    const auto& e25 = es.back();
    const double p = 0.5 * (t25.pooled + e25.pooled);
    const double se = std::sqrt(std::max(p * (1 - p), 1e-300) / std::max<double>(t25.bits, 1));
    o.check(std::fabs(e25.pooled - t25.pooled) < kGapSigmas * se,
            u + " gap at 25 dB " + fmt(std::fabs(e25.pooled - t25.pooled)) + " vs " + fmt(kGapSigmas) +
                " x std-error " + fmt(se) + " (" + fmt(static_cast<double>(t25.bits)) + " bits)");
    bool analytic = true;
    std::string worst;
    double worst_z = 0.0;
    for (const auto& pt : tr) {
      const double sd = std::sqrt(std::max(pt.analytic * (1 - pt.analytic), 1e-300) / pt.bits);
      const double z = std::fabs(pt.pooled - pt.analytic) / sd;
      if (pt.analytic * pt.bits < 1.0 && pt.errors == 0) continue;
      if (z > worst_z) {
        worst_z = z;
        worst = fmt(pt.snr_db) + " dB: " + fmt(pt.pooled) + " vs " + fmt(pt.analytic);
      }
      analytic = analytic && z <= kAnalyticSigmas;
    }
    o.check(analytic, u + " true-position BER vs analytic Gray QPSK, worst " + fmt(worst_z) + " sigma (" + worst + ")");
  }
  for (int src = 0; src < 2; ++src) {
    const auto& a = src == 0 ? truth : est;
    bool ok = true;
    for (std::size_t k = 0; k < snrs.size(); ++k) ok = ok && a[1][k].pooled <= a[0][k].pooled;
    o.check(ok, std::string(src == 0 ? "true" : "estimated") + "-position BER(U=16) <= BER(U=20) at every SNR");
  }
  return o;
}

Outcome criterion6(const Context&) {
  Outcome o;
  const auto base = preset("fig12").scenario;
  const std::vector<double> snrs{0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
  std::vector<std::vector<double>> est(2), ideal(2);
  const int us[2] = {16, 20};
  for (int i = 0; i < 2; ++i) {
    const auto c = with_data_modes(base, us[i]);
    const auto chain = make_downlink_chain(c, ChannelMode::farfield);
    const auto ideal_pre = design_precoder(c, c.placements());
    const auto identity = identity_precoder(chain.h_oam);
    std::string line = "U=" + std::to_string(us[i]) + " SE estimated/identity:";
    std::string info = "U=" + std::to_string(us[i]) + " SE with true positions:";
    bool ok = true;
    for (double snr : snrs) {
      const double e = estimated_se(c, chain, snr, kSeTrials);
      const double id = evaluate_se(c, chain, identity, snr, true).se;
      est[static_cast<std::size_t>(i)].push_back(e);
      ideal[static_cast<std::size_t>(i)].push_back(evaluate_se(c, chain, ideal_pre, snr).se);
      line += " " + fmt(e) + "/" + fmt(id);
      info += " " + fmt(ideal[static_cast<std::size_t>(i)].back());
      ok = ok && e >= id;
    }
    o.check(ok, line + " (preprocessing >= identity)");
    o.info(info);
  }
  bool high = true;
  std::string line = "SE(U=20) vs SE(U=16) at >= 20 dB:";
  for (std::size_t k = 0; k < snrs.size(); ++k) {
    if (snrs[k] < 20.0) continue;
    line += " " + fmt(est[1][k]) + " vs " + fmt(est[0][k]);
    high = high && est[1][k] > est[0][k];
  }
  o.check(high, line);
  return o;
}

Outcome criterion7(const Context&) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto c = preset("fig13").scenario;
  const auto chain = make_downlink_chain(c, ChannelMode::farfield);
  const double oam_est = estimated_se(c, chain, kUccaSnr, 1);
  const double oam_true = evaluate_se(c, chain, design_precoder(c, c.placements()), kUccaSnr).se;
  const auto base = mu_mimo_baseline_se(c, chain.channel, kUccaSnr);
  const double secs = seconds_since(t0);
  const double ratio = oam_est / base.se;
  o.check(ratio >= kRatioLow && ratio <= kRatioHigh,
          "SE ratio at 25 dB = " + fmt(oam_est) + " / " + fmt(base.se) + " = " + fmt(ratio) + " (estimated positions)");
  o.info("true-position ratio " + fmt(oam_true / base.se) + ", baseline overhead " + fmt(base.overhead_factor));
  o.check(secs < kUccaSeconds, "runtime " + fmt(secs) + " s");
  return o;
}

Outcome criterion8(const Context&) {
  Outcome o;
  const PowerModel pm = preset("fig14a").scenario.power;
  const double uca = circuit_power(pm, 3, 21, 1), ucca = circuit_power(pm, 3, 21, 4);
  o.check(std::fabs(uca - 33.56) <= kPowerTol * 33.56, "UCA circuit power " + fmt(uca) + " W");
  o.check(std::fabs(ucca - 131.84) <= kPowerTol * 131.84, "UCCA circuit power " + fmt(ucca) + " W");

  const auto spec = preset("fig14a");
  const auto c = with_data_modes(spec.scenario, 20);
  const auto chain = make_downlink_chain(c, ChannelMode::farfield);
  const auto pre = design_precoder(c, c.placements());
  std::vector<double> ee;
  std::string line = "EE vs P_t (true positions, Mbit/J):";
  for (double pt : spec.sweep.transmit_power) {
    PowerModel p = c.power;
    p.p_t = pt;
    const double snr = spec.ee_reference_snr_db + 10.0 * std::log10(pt / spec.ee_reference_power);
    ee.push_back(energy_efficiency(evaluate_se(c, chain, pre, snr).se, p, c.carriers.data_count, 3, 21));
    line += " " + fmt(ee.back() / 1e6);
  }
  const auto peak = std::max_element(ee.begin(), ee.end()) - ee.begin();
  bool unimodal = peak > 0 && peak + 1 < static_cast<long>(ee.size());
  for (long i = 1; i < static_cast<long>(ee.size()); ++i)
    unimodal = unimodal && (i <= peak ? ee[static_cast<std::size_t>(i)] > ee[static_cast<std::size_t>(i - 1)]
                                      : ee[static_cast<std::size_t>(i)] < ee[static_cast<std::size_t>(i - 1)]);
  o.check(unimodal, line + " unimodal with interior peak");

  const auto s13 = preset("fig14b");
  const auto cu = s13.scenario;
  const auto chu = make_downlink_chain(cu, ChannelMode::farfield);
  const double snr = s13.ee_reference_snr_db;
  const double se_oam = estimated_se(cu, chu, snr, 1);
  const double se_zf = mu_mimo_baseline_se(cu, chu.channel, snr).se;
  const int W = cu.carriers.data_count;
  const double ee_oam = energy_efficiency(se_oam, cu.power, W, 3, 21, 4);
  const double ee_zf = energy_efficiency(se_zf, cu.power, W, 3, 21, 4);
  o.check(ee_oam > ee_zf, "UCCA EE at P_t = " + fmt(cu.power.p_t) + " W: OAM " + fmt(ee_oam / 1e6) + " vs ZF " +
                              fmt(ee_zf / 1e6) + " Mbit/J (estimated positions)");
  return o;
}

Outcome criterion9(const Context&) {
  Outcome o;
  // (a) exact distance vs Cartesian coordinates.
  {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> rad(0.05, 2.0), range(5.0, 500.0), el(0.0, kPi / 2 - 1e-3),
        az(-kPi, kPi), init(-kPi, kPi);
    double worst = 0.0;
    for (int i = 0; i < kDistanceCases; ++i) {
      const UcaGeometry tx{rad(gen), 2 + static_cast<int>(gen() % 80), init(gen)};
      const UcaGeometry rx{rad(gen), 2 + static_cast<int>(gen() % 40), init(gen)};
      const SbsPlacement pl{range(gen), el(gen), az(gen)};
      const int n = static_cast<int>(gen() % static_cast<std::uint64_t>(tx.element_count));
      const int m = static_cast<int>(gen() % static_cast<std::uint64_t>(rx.element_count));
      const double want = testing::cartesian_distance(tx.radius, tx.element_azimuth(n), rx.radius,
                                                      rx.element_azimuth(m), pl.range, pl.elevation, pl.azimuth);
      worst = std::max(worst, std::fabs(exact_distance(n, m, tx, rx, pl) - want) / want);
    }
    o.check(worst < kDistanceTol, "(a) exact distance vs Cartesian, worst relative " + fmt(worst));
  }
  const auto c = testing::fig7_config(20, 20, 2, 2);
  const auto truth = c.placements();
  const int M = 21, P = 3, N = 63, U = 20;
  const double rt = c.tx.rings[0].radius;
  auto farfield_d = [&](int p, int n, int m) {
    const auto& pl = truth[static_cast<std::size_t>(p)];
    const double rr = c.users[static_cast<std::size_t>(p)].array.rings[0].radius;
    const double alpha = 2 * kPi * m / M, phin = 2 * kPi * n / N;
    return pl.range + rr * std::sin(pl.elevation) * std::cos(pl.azimuth - alpha) -
           rt * std::sin(pl.elevation) * std::cos(pl.azimuth - phin) - rt * rr / pl.range * std::cos(alpha - phin);
  };
  // (b) effective channel vs its defining double sum.
  {
    const auto h = assemble_channel(c, truth, ChannelMode::farfield, c.carriers.wave_numbers);
    const auto e = effective_oam_channel(h, build_mode_transform(c.modes.data_modes, M, P));
    double worst = 0.0;
    for (int w = 0; w < 2; ++w) {
      const double k = c.carriers.k(w);
      CMat oracle(P * U, P * U);
      for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
          for (int u = 0; u < U; ++u)
            for (int v = 0; v < U; ++v) {
              const int lu = c.modes.data_modes[static_cast<std::size_t>(u)];
              const int lv = c.modes.data_modes[static_cast<std::size_t>(v)];
              cplx acc = 0.0;
              for (int m = 0; m < M; ++m)
                for (int j = 0; j < M; ++j) {
                  const double r = truth[static_cast<std::size_t>(p)].range;
                  acc += std::polar(1.0 / (2 * k * r), -k * farfield_d(p, q + P * j, m) -
                                                           2 * kPi * lu * m / M + 2 * kPi * lv * j / M);
                }
              oracle(p * U + u, q * U + v) = acc;
            }
      worst = std::max(worst, (e.per_carrier[static_cast<std::size_t>(w)] - oracle).norm() / oracle.norm());
    }
    o.check(worst < kEffectiveTol, "(b) effective channel vs double sum, relative " + fmt(worst));
  }
  // (c) closed-form combined training signal vs the triple sum over users,
  // transmit elements and receive elements.
  {
    double worst = 0.0;
    int worst_mode = 0;
    const double k = c.carriers.k(0);
    for (int l = -10; l <= 9; ++l) {
      cplx acc = 0.0;
      for (int p = 0; p < P; ++p)
        for (int n = 0; n < N; ++n)
          for (int m = 0; m < M; ++m)
            acc += std::polar(1.0 / (2 * k * truth[static_cast<std::size_t>(p)].range),
                              -k * farfield_d(p, n, m) + 2 * kPi * l * m / M);
      const cplx closed = bessel_combined_signal(l, k, truth, c);
      const double rel = std::abs(closed - acc) / std::abs(acc);
      if (rel > worst) {
        worst = rel;
        worst_mode = l;
      }
    }
    o.check(worst <= kClosedFormTol,
            "(c) closed form vs triple sum, worst relative " + fmt(worst) + " at mode " + std::to_string(worst_mode));
  }
  // (d) interference covariances vs sample covariance of the detection error.
  {
    const auto c1 = testing::fig7_config(20, 20, 1, 1);
    const auto chain = make_downlink_chain(c1, ChannelMode::farfield);
    auto design = c1.placements();
    design[0].range += 2e-3;
    design[1].elevation += 1e-4;
    const auto pre = design_precoder(c1, design);
    const double sigma2 = 1e-9;
    const auto cov = interference_covariances(chain.h_oam, pre, 1.0, sigma2, M);
    auto gen = trial_stream(31, 0);
    std::uniform_int_distribution<int> bits(0, 3);
    std::vector<CMat> acc(3, CMat::Zero(U, U));
    std::vector<CVec> s(1, CVec(P * U));
    for (int i = 0; i < kCovarianceSymbols; ++i) {
      for (int j = 0; j < P * U; ++j) s[0](j) = qpsk_modulate(bits(gen));
      const auto y = transmit_downlink(s, pre, chain.transform, chain.channel, sigma2, gen);
      for (int p = 0; p < P; ++p) {
        const CVec e = detect_symbols(y[0][static_cast<std::size_t>(p)], chain.transform, 1) - s[0].segment(p * U, U);
        acc[static_cast<std::size_t>(p)].noalias() += e * e.adjoint();
      }
    }
    double worst = 0.0;
    for (int p = 0; p < P; ++p) {
      const auto& u = cov[0][static_cast<std::size_t>(p)];
      const CMat want = u.inter + u.co + u.noise;
      const CMat got = acc[static_cast<std::size_t>(p)] / kCovarianceSymbols;
      for (int k = 0; k < U; ++k)
        worst = std::max(worst, std::abs(got(k, k) - want(k, k)) / std::abs(want(k, k)));
    }
    o.check(worst <= kCovarianceTol, "(d) covariance diagonal vs Monte Carlo at " +
                                         std::to_string(kCovarianceSymbols) + " symbols, worst relative " + fmt(worst));
  }
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// CSV text without the "generated" timestamp comment.
std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# generated", 0) != 0) out += line + "\n";
  return out;
}

Outcome criterion10(const Context& ctx) {
  Outcome o;
  if (ctx.oamsim.empty()) {
    o.check(false, "no --oamsim path given");
    return o;
  }
  struct Run {
    std::string preset, pipeline, extra;
  };
  const std::vector<Run> runs{{"fig7", "estimate", ""}, {"fig11", "ber", "--trials 2"}, {"table1", "complexity", ""}};
  for (const auto& r : runs) {
    std::vector<std::string> bodies;
    for (const std::string mode : {"--single-thread", "--single-thread", "--threads 4"}) {
      const auto dir = ctx.workdir / ("det-" + r.preset + "-" + std::to_string(bodies.size()));
      std::filesystem::remove_all(dir);
      std::filesystem::create_directories(dir);
      const std::string cmd = "\"" + ctx.oamsim + "\" " + r.pipeline + " --preset " + r.preset + " --seed 5 " +
                              r.extra + " " + mode + " -q --out \"" + dir.string() + "\" > /dev/null";
      const int rc = std::system(cmd.c_str());
      const auto file = dir / (r.preset + "-" + r.pipeline + ".csv");
      if (rc != 0 || !std::filesystem::exists(file)) {
        o.check(false, r.preset + ": command failed: " + cmd);
        bodies.push_back("");
        continue;
      }
      bodies.push_back(body(read_file(file)));
    }
    o.check(!bodies[0].empty() && bodies[0] == bodies[1], r.preset + " single-thread bodies byte-identical");
    bool close = bodies[0] == bodies[2];
    if (!close && !bodies[0].empty() && !bodies[2].empty()) {
      const auto a = parse_csv(bodies[0]), b = parse_csv(bodies[2]);
      close = a.header == b.header && a.rows.size() == b.rows.size();
      for (std::size_t i = 0; close && i < a.rows.size(); ++i)
        for (std::size_t j = 0; close && j < a.rows[i].size(); ++j) {
          if (a.rows[i][j] == b.rows[i][j]) continue;
          char* e1 = nullptr;
          char* e2 = nullptr;
          const double x = std::strtod(a.rows[i][j].c_str(), &e1), y = std::strtod(b.rows[i][j].c_str(), &e2);
          close = *e1 == '\0' && *e2 == '\0' && std::fabs(x - y) <= kParallelTol * std::max(1.0, std::fabs(x));
        }
    }
    o.check(close, r.preset + " 4-thread run agrees with single-thread run (1e-12)");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  std::set<int> only;
  ctx.workdir = std::filesystem::temp_directory_path() / "oam-acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--oamsim" && i + 1 < argc) {
      ctx.oamsim = argv[++i];
    } else if (a == "--workdir" && i + 1 < argc) {
      ctx.workdir = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--oamsim PATH] [--only N[,N...]] [--workdir DIR]\n";
      return 2;
    }
  }
  std::filesystem::create_directories(ctx.workdir);

  const std::vector<std::pair<const char*, std::function<Outcome(const Context&)>>> criteria{
      {"decoupling identity with true positions", criterion1},
      {"estimator on-grid and off-grid accuracy", criterion2},
      {"three-user estimation at 20 dB over 100 seeds", criterion3},
      {"NMSE trends in SNR, training modes and training carriers", criterion4},
      {"BER properties", criterion5},
      {"SE with preprocessing vs identity and U=20 vs U=16", criterion6},
      {"UCCA SE ratio against ZF MU-MIMO", criterion7},
      {"circuit power, EE shape and EE vs baseline", criterion8},
      {"oracle suite", criterion9},
      {"CLI determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& n : out.notes) std::cout << "    " << n << "\n";
    std::cout << "CRITERION " << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ("
              << fmt(seconds_since(t0)) << " s)" << std::endl;
    failed += out.pass ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
