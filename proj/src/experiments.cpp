#include "oam/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oam/channel.hpp"
#include "oam/estimation.hpp"
#include "oam/link.hpp"
#include "oam/precoding.hpp"
#include "oam/rng.hpp"

#ifndef OAM_VERSION
#define OAM_VERSION "0.0.0"
#endif

namespace oam {

namespace {

std::string num(double x) { return format_number(x); }
std::string num(int x) { return std::to_string(x); }
std::string num(std::uint64_t x) { return std::to_string(x); }

ChannelMode channel_mode(const ExperimentSpec& spec) {
  return spec.exact_channel ? ChannelMode::exact : ChannelMode::farfield;
}

void say(const RunOptions& o, const std::string& msg) {
  if (o.progress) o.progress(msg);
}

struct Variant {
  SystemConfig config;
  std::string label;
};

// U x U~ x W~ combinations; an empty sweep axis keeps the scenario value.
std::vector<Variant> variants(const ExperimentSpec& spec, std::vector<std::string>& warnings) {
  const SystemConfig& base = spec.scenario;
  auto pick = [](const std::vector<int>& v) { return v.empty() ? std::vector<int>{0} : v; };
  std::vector<Variant> out;
  for (int u : pick(spec.sweep.data_modes))
    for (int ut : pick(spec.sweep.training_modes))
      for (int wt : pick(spec.sweep.training_carriers)) {
        SystemConfig c = base;
        if (u > 0) c.modes.data_modes = contiguous_modes(u);
        if (ut > 0) c.modes.training_modes = contiguous_modes(ut);
        if (wt > 0)
          c.carriers = build_carrier_grid(c.carriers.base_frequency, c.carriers.spacing,
                                          c.carriers.data_count, wt);
        std::vector<ValidationWarning> w;
        c = validate_config(c, {}, &w);
        Variant v;
        v.label = "U" + std::to_string(c.data_mode_count()) + "-Ut" +
                  std::to_string(c.training_mode_count()) + "-Wt" +
                  std::to_string(c.carriers.training_count);
        for (const auto& x : w) {
          const std::string line = "warning " + v.label + ": " + x.message;
          bool seen = false;
          for (const auto& s : warnings) seen = seen || s == line;
          if (!seen) warnings.push_back(line);
        }
        v.config = std::move(c);
        out.push_back(std::move(v));
      }
  return out;
}

std::vector<double> snr_list(const ExperimentSpec& spec) {
  return spec.sweep.snr_db.empty() ? std::vector<double>{spec.scenario.noise.snr_db} : spec.sweep.snr_db;
}

void run_estimate(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const auto vs = variants(spec, t.comments);
  const auto snrs = snr_list(spec);
  for (const auto& v : vs) {
    const auto& c = v.config;
    const auto truth = c.placements();
    const CMat pilots = unit_pilots(c.training_mode_count(), c.carriers.training_count);
    for (double snr : snrs) {
      say(o, "estimate " + v.label + " snr " + num(snr));
      for (int trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = trial_seed(spec.seed, trial);
        const auto obs = synth_uplink_training(c, truth, pilots, snr, seed, channel_mode(spec));
        const auto rep = estimate_positions(c, obs, spec.estimation, &truth);
        for (int p = 0; p < c.user_count(); ++p) {
          const auto& e = rep.users[static_cast<std::size_t>(p)];
          const auto& n = rep.nmse[static_cast<std::size_t>(p)];
          const auto& tr = truth[static_cast<std::size_t>(p)];
          t.rows.push_back({num(p + 1), num(tr.range), num(e.range), num(tr.elevation),
                            num(e.elevation), num(tr.azimuth), num(e.azimuth), num(n.range),
                            num(n.elevation), num(n.azimuth), num(seed), num(snr),
                            num(c.training_mode_count()), num(c.carriers.training_count),
                            num(trial), rep.degraded ? "1" : "0"});
        }
      }
    }
  }
}

void run_precoder_dump(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  for (const auto& v : variants(spec, t.comments)) {
    say(o, "precoder " + v.label);
    const auto chain = make_downlink_chain(v.config, channel_mode(spec));
    const auto pre = design_precoder(v.config, v.config.placements());
    const auto rep = verify_decoupling(chain.h_oam, pre);
    for (int w = 0; w < chain.h_oam.carrier_count(); ++w)
      for (int p = 0; p < v.config.user_count(); ++p) {
        const auto wi = static_cast<std::size_t>(w), pi = static_cast<std::size_t>(p);
        t.rows.push_back({num(w), num(p + 1), num(v.config.data_mode_count()), num(rep.inter_mode[wi][pi]),
                          num(rep.co_mode[wi][pi]), num(rep.relative_total[wi]),
                          num(pre.condition[wi][pi]), pre.extended ? "1" : "0"});
      }
  }
}

void add_metric(CsvTable& t, double snr, const std::string& user, const std::string& mode,
                const std::string& metric, double value, int trials, std::uint64_t seed) {
  t.rows.push_back({num(snr), user, mode, metric, num(value), num(trials), num(seed)});
}

void run_ber(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const auto snrs = snr_list(spec);
  BerOptions bo;
  bo.channel_mode = channel_mode(spec);
  for (const auto& v : variants(spec, t.comments)) {
    for (auto src : {PositionSource::truth, PositionSource::estimated}) {
      say(o, "ber " + v.label + " " + to_string(src));
      const auto pts = ber_monte_carlo(v.config, snrs, src, spec.trials, spec.seed, bo);
      const std::string tag = to_string(src);
      for (const auto& pt : pts) {
        add_metric(t, pt.snr_db, "all", v.label, "ber_" + tag, pt.pooled, spec.trials, spec.seed);
        for (std::size_t p = 0; p < pt.per_user.size(); ++p)
          add_metric(t, pt.snr_db, num(static_cast<int>(p) + 1), v.label, "ber_" + tag, pt.per_user[p],
                     spec.trials, spec.seed);
        add_metric(t, pt.snr_db, "all", v.label, "ber_analytic_" + tag, pt.analytic, spec.trials, spec.seed);
        add_metric(t, pt.snr_db, "all", v.label, "bits_" + tag, static_cast<double>(pt.bits), spec.trials,
                   spec.seed);
        add_metric(t, pt.snr_db, "all", v.label, "errors_" + tag, static_cast<double>(pt.errors),
                   spec.trials, spec.seed);
        if (pt.precoder_failed)
          add_metric(t, pt.snr_db, "all", v.label, "precoder_failed_" + tag, 1.0, spec.trials, spec.seed);
      }
    }
  }
}

struct LinkPoint {
  double ideal = 0.0;
  double identity = 0.0;
  std::vector<double> estimated;  // per trial, 0 when no precoder could be built
  int failures = 0;
  double baseline = NAN;
};

// SE of the ideal, identity and estimated-position chains at one SNR.
LinkPoint link_point(const ExperimentSpec& spec, const SystemConfig& c, const DownlinkChain& chain,
                     const PrecodingSet& ideal, const PrecodingSet& identity, double snr) {
  LinkPoint lp;
  lp.ideal = evaluate_se(c, chain, ideal, snr).se;
  lp.identity = evaluate_se(c, chain, identity, snr, true).se;
  for (int trial = 0; trial < spec.trials; ++trial) {
    const auto est = estimate_placements(c, snr, trial_seed(spec.seed, trial), channel_mode(spec),
                                         spec.estimation);
    try {
      lp.estimated.push_back(evaluate_se(c, chain, design_precoder(c, est), snr).se);
    } catch (const IllConditionedError&) {
      lp.estimated.push_back(0.0);
      ++lp.failures;
    }
  }
  if (c.ring_count() > 1) lp.baseline = mu_mimo_baseline_se(c, chain.channel, snr).se;
  return lp;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? NAN : s / static_cast<double>(v.size());
}

void run_se(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const auto snrs = snr_list(spec);
  for (const auto& v : variants(spec, t.comments)) {
    const auto& c = v.config;
    const auto chain = make_downlink_chain(c, channel_mode(spec));
    const auto ideal = design_precoder(c, c.placements());
    const auto identity = identity_precoder(chain.h_oam);
    for (double snr : snrs) {
      say(o, "se " + v.label + " snr " + num(snr));
      const auto lp = link_point(spec, c, chain, ideal, identity, snr);
      add_metric(t, snr, "all", v.label, "se_ideal", lp.ideal, spec.trials, spec.seed);
      add_metric(t, snr, "all", v.label, "se_identity", lp.identity, spec.trials, spec.seed);
      for (int trial = 0; trial < spec.trials; ++trial)
        add_metric(t, snr, "all", v.label, "se_estimated", lp.estimated[static_cast<std::size_t>(trial)],
                   spec.trials, trial_seed(spec.seed, trial));
      add_metric(t, snr, "all", v.label, "se_estimated_mean", mean(lp.estimated), spec.trials, spec.seed);
      if (lp.failures > 0)
        add_metric(t, snr, "all", v.label, "precoder_failures", lp.failures, spec.trials, spec.seed);
      if (c.ring_count() > 1)
        add_metric(t, snr, "all", v.label, "se_zf_mimo", lp.baseline, spec.trials, spec.seed);
    }
  }
  if (spec.scenario.ring_count() > 1)
    t.comments.push_back("baseline se_zf_mimo: zero-forcing pseudo-inverse per carrier, perfect CSI, "
                         "overhead 1 - P*rings*M/T_c");
}

void run_ee(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const std::vector<double> powers =
      spec.sweep.transmit_power.empty() ? std::vector<double>{spec.scenario.power.p_t} : spec.sweep.transmit_power;
  t.comments.push_back("snr_db = " + num(spec.ee_reference_snr_db) + " + 10 log10(transmit_power_w / " +
                       num(spec.ee_reference_power) + ")");
  for (const auto& v : variants(spec, t.comments)) {
    SystemConfig c = v.config;
    const auto chain = make_downlink_chain(c, channel_mode(spec));
    const auto ideal = design_precoder(c, c.placements());
    const auto identity = identity_precoder(chain.h_oam);
    const int W = c.carriers.data_count, P = c.user_count(), M = c.rx_elements(), R = c.ring_count();
    for (double pt : powers) {
      const double snr = spec.ee_reference_snr_db + 10.0 * std::log10(pt / spec.ee_reference_power);
      say(o, "ee " + v.label + " p_t " + num(pt));
      c.power.p_t = pt;
      const auto lp = link_point(spec, c, chain, ideal, identity, snr);
      auto ee = [&](double se) { return energy_efficiency(se, c.power, W, P, M, R); };
      auto put = [&](const std::string& metric, double value, std::uint64_t seed) {
        t.rows.push_back({num(snr), "all", v.label, metric, num(value), num(spec.trials), num(seed), num(pt)});
      };
      put("circuit_power_w", circuit_power(c.power, P, M, R), spec.seed);
      put("se_ideal", lp.ideal, spec.seed);
      put("ee_ideal", ee(lp.ideal), spec.seed);
      put("ee_identity", ee(lp.identity), spec.seed);
      std::vector<double> ees;
      for (int trial = 0; trial < spec.trials; ++trial) {
        ees.push_back(ee(lp.estimated[static_cast<std::size_t>(trial)]));
        put("ee_estimated", ees.back(), trial_seed(spec.seed, trial));
      }
      put("se_estimated_mean", mean(lp.estimated), spec.seed);
      put("ee_estimated_mean", mean(ees), spec.seed);
      if (lp.failures > 0) put("precoder_failures", lp.failures, spec.seed);
      if (R > 1) {
        put("se_zf_mimo", lp.baseline, spec.seed);
        put("ee_zf_mimo", ee(lp.baseline), spec.seed);
      }
    }
  }
}

void run_channel_dump(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const auto vs = variants(spec, t.comments);
  const auto& c = vs.front().config;
  say(o, "channel " + vs.front().label);
  const auto truth = c.placements();
  const auto h = c.ring_count() > 1
                     ? assemble_ucca_channel(c, truth, channel_mode(spec), c.carriers.wave_numbers)
                     : assemble_channel(c, truth, channel_mode(spec), c.carriers.wave_numbers);
  for (int w = 0; w < h.carrier_count(); ++w) {
    const CMat& m = h.per_carrier[static_cast<std::size_t>(w)];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index col = 0; col < m.cols(); ++col)
        t.rows.push_back({num(w), num(static_cast<int>(r)), num(static_cast<int>(col)), num(m(r, col).real()),
                          num(m(r, col).imag())});
  }
}

void run_complexity(const ExperimentSpec& spec, CsvTable& t, const RunOptions& o) {
  const auto& c = spec.scenario;
  say(o, "complexity");
  const auto rings = spec.sweep.rings.empty() ? std::vector<int>{c.ring_count()} : spec.sweep.rings;
  const auto ms = spec.sweep.rx_elements.empty() ? std::vector<int>{c.rx_elements()} : spec.sweep.rx_elements;
  const auto us = spec.sweep.data_modes.empty() ? std::vector<int>{c.data_mode_count()} : spec.sweep.data_modes;
  const auto uts = spec.sweep.training_modes.empty() ? std::vector<int>{c.training_mode_count()}
                                                     : spec.sweep.training_modes;
  const auto wts = spec.sweep.training_carriers.empty() ? std::vector<int>{c.carriers.training_count}
                                                        : spec.sweep.training_carriers;
  const int W = c.carriers.data_count, P = c.user_count();
  for (int u : us)
    for (int ut : uts)
      for (int wt : wts)
        for (int r : rings)
          for (int m : ms) {
            const auto ct = complexity_estimates(W, wt, u, ut, P, r, m);
            t.rows.push_back({num(W), num(wt), num(u), num(ut), num(P), num(r), num(m),
                              num(ct.oam_estimation), num(ct.oam_preprocessing), num(ct.mimo_estimation),
                              num(ct.mimo_preprocessing), num(ct.oam_total()), num(ct.mimo_total())});
          }
}

std::string hex(std::uint64_t x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

std::vector<std::string> pipeline_columns(Pipeline p) {
  switch (p) {
    case Pipeline::estimate:
      return {"user", "r_true", "r_hat", "theta_true", "theta_hat", "phi_true", "phi_hat", "nmse_r",
              "nmse_theta", "nmse_phi", "seed", "snr_db", "training_modes", "training_carriers", "trial",
              "degraded"};
    case Pipeline::precoder_dump:
      return {"w", "user", "data_modes", "inter_mode_residual", "co_mode_residual", "relative_total",
              "condition", "extended_precision"};
    case Pipeline::ber:
    case Pipeline::se:
      return {"snr_db", "user", "mode", "metric", "value", "trials", "seed"};
    case Pipeline::ee:
      return {"snr_db", "user", "mode", "metric", "value", "trials", "seed", "transmit_power_w"};
    case Pipeline::channel_dump:
      return {"w", "row", "col", "re", "im"};
    case Pipeline::complexity:
      return {"carriers", "training_carriers", "modes", "training_modes", "users", "rings", "rx_elements",
              "oam_estimation", "oam_preprocessing", "mimo_estimation", "mimo_preprocessing", "oam_total",
              "mimo_total"};
  }
  return {};
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(trial) + 0x5eedULL));
}

CsvTable run_pipeline(const ExperimentSpec& spec, const RunOptions& options) {
  for (double s : spec.sweep.snr_db)
    if (!std::isfinite(s)) throw ParseError("sweep snr_db values must be finite");
  if (spec.trials < 1) throw ParseError("trials must be at least 1");

  CsvTable t;
  t.header = pipeline_columns(spec.pipeline);
  t.comments = {
      std::string("oamsim ") + OAM_VERSION,
      "pipeline: " + to_string(spec.pipeline),
      "name: " + spec.name,
      "config_hash: " + hex(config_hash(spec.scenario)),
      "seed: " + num(spec.seed),
      "trials: " + num(spec.trials),
      std::string("channel: ") + to_string(channel_mode(spec)),
  };
  if (spec.pipeline == Pipeline::estimate)
    t.comments.push_back("units: ranges in m, angles in rad");
  switch (spec.pipeline) {
    case Pipeline::estimate: run_estimate(spec, t, options); break;
    case Pipeline::precoder_dump: run_precoder_dump(spec, t, options); break;
    case Pipeline::ber: run_ber(spec, t, options); break;
    case Pipeline::se: run_se(spec, t, options); break;
    case Pipeline::ee: run_ee(spec, t, options); break;
    case Pipeline::channel_dump: run_channel_dump(spec, t, options); break;
    case Pipeline::complexity: run_complexity(spec, t, options); break;
  }
  return t;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                 const RunOptions& options) {
  namespace fs = std::filesystem;
  const std::string name = spec.name.empty() ? "experiment" : spec.name;
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  const fs::path final_path = dir / (name + "-" + to_string(spec.pipeline) + ".csv");
  const fs::path tmp_path = fs::path(final_path.string() + ".partial");

  ExperimentSummary summary;
  try {
    CsvTable t = run_pipeline(spec, options);
    char stamp[64];
    const std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    t.comments.push_back(std::string("generated: ") + stamp);
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + tmp_path.string());
      write_csv(out, t);
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + tmp_path.string());
    }
    fs::rename(tmp_path, final_path);
    summary.rows = t.rows.size();
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp_path, ec);
    throw;
  }
  summary.path = final_path.string();
  return summary;
}

}  // namespace oam
