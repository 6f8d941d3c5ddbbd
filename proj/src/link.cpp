#include "oam/link.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "oam/estimation.hpp"
#include "oam/parallel.hpp"
#include "oam/rng.hpp"

namespace oam {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr std::uint64_t kBerStream = 0x626572;
constexpr std::uint64_t kEstimateStream = 0x657374;
}  // namespace

cplx qpsk_modulate(int bits) {
  return {(bits & 1) ? -kInvSqrt2 : kInvSqrt2, (bits & 2) ? -kInvSqrt2 : kInvSqrt2};
}

int qpsk_demodulate(cplx x) { return (x.real() < 0.0 ? 1 : 0) | (x.imag() < 0.0 ? 2 : 0); }

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qpsk_ber(double es_over_n0) { return q_function(std::sqrt(std::max(es_over_n0, 0.0))); }

CVec spiralize(const CVec& modes, const ModeTransform& t, int users, int rings) {
  const int M = t.M, U = t.U(), N = users * M;
  if (modes.size() != rings * users * U)
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "stream vector has wrong length");
  const auto order = grouped_column_order(users, M);
  CVec out = CVec::Zero(rings * N);
  for (int ring = 0; ring < rings; ++ring) {
    for (int q = 0; q < users; ++q) {
      const CVec elem = t.FU * modes.segment((ring * users + q) * U, U);
      for (int j = 0; j < M; ++j) out(ring * N + order[static_cast<std::size_t>(q * M + j)]) = elem(j);
    }
  }
  return out;
}

DownlinkSignal transmit_downlink(const std::vector<CVec>& symbols, const PrecodingSet& precoder,
                                 const ModeTransform& t, const ChannelTensor& h,
                                 double noise_variance, std::mt19937_64& gen) {
  const int W = h.carrier_count(), P = h.users, R = h.rings, M = h.rx_elements;
  if (static_cast<int>(symbols.size()) != W || precoder.carrier_count() != W)
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "carrier count mismatch");
  DownlinkSignal out(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    const auto& s = symbols[static_cast<std::size_t>(w)];
    const auto& pw = precoder.P[static_cast<std::size_t>(w)];
    if (s.size() != pw.cols())
      throw ConfigError(ConfigErrorKind::dimension_mismatch, "stream vector has wrong length");
    const CVec x = spiralize(pw * s, t, P, R);
    const CVec y = h.per_carrier[static_cast<std::size_t>(w)] * x;
    auto& users = out[static_cast<std::size_t>(w)];
    for (int p = 0; p < P; ++p) {
      CVec yp = y.segment(p * R * M, R * M);
      if (noise_variance > 0.0)
        for (Eigen::Index i = 0; i < yp.size(); ++i) yp(i) += complex_gaussian(gen, noise_variance);
      users.push_back(std::move(yp));
    }
  }
  return out;
}

CVec detect_symbols(const CVec& y, const ModeTransform& t, int rings) {
  const int M = t.M, U = t.U();
  if (y.size() != rings * M)
    throw ConfigError(ConfigErrorKind::dimension_mismatch, "received vector has wrong length");
  CVec x(rings * U);
  for (int ring = 0; ring < rings; ++ring)
    x.segment(ring * U, U) = t.FU.adjoint() * y.segment(ring * M, M);
  return x;
}

std::vector<std::vector<UserCovariances>> interference_covariances(const EffectiveOamChannel& h_oam,
                                                                   const PrecodingSet& precoder,
                                                                   double symbol_power,
                                                                   double noise_variance,
                                                                   int rx_elements) {
  const int P = h_oam.users, B = h_oam.block();
  std::vector<std::vector<UserCovariances>> out(static_cast<std::size_t>(h_oam.carrier_count()));
  for (int w = 0; w < h_oam.carrier_count(); ++w) {
    const CMat& pw = precoder.P[static_cast<std::size_t>(w)];
    for (int p = 0; p < P; ++p) {
      const CMat a = h_oam.user_slice(w, p) * pw;
      UserCovariances c;
      const CMat d = a.middleCols(p * B, B) - CMat::Identity(B, B);
      c.inter = symbol_power * d * d.adjoint();
      c.co = CMat::Zero(B, B);
      for (int q = 0; q < P; ++q) {
        if (q == p) continue;
        const auto aq = a.middleCols(q * B, B);
        c.co.noalias() += symbol_power * aq * aq.adjoint();
      }
      c.noise = CMat::Identity(B, B) * (rx_elements * noise_variance);
      out[static_cast<std::size_t>(w)].push_back(std::move(c));
    }
  }
  return out;
}

SinrTable sinr(double symbol_power, const std::vector<std::vector<UserCovariances>>& cov, int rings) {
  SinrTable t;
  t.carriers = static_cast<int>(cov.size());
  t.users = cov.empty() ? 0 : static_cast<int>(cov.front().size());
  t.rings = rings;
  const int B = t.users > 0 ? static_cast<int>(cov.front().front().inter.rows()) : 0;
  t.modes = B / rings;
  t.values.assign(static_cast<std::size_t>(t.carriers) * t.users * B, 0.0);
  for (int w = 0; w < t.carriers; ++w)
    for (int p = 0; p < t.users; ++p) {
      const auto& c = cov[static_cast<std::size_t>(w)][static_cast<std::size_t>(p)];
      for (int k = 0; k < B; ++k) {
        const double den = c.inter(k, k).real() + c.co(k, k).real() + c.noise(k, k).real();
        t.at(w, p, k / t.modes, k % t.modes) = den > 0.0 ? symbol_power / den : INFINITY;
      }
    }
  return t;
}

SinrTable sinr_diagonal_gain(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                             double symbol_power, double noise_variance, int rx_elements) {
  SinrTable t;
  t.carriers = h_oam.carrier_count();
  t.users = h_oam.users;
  t.rings = h_oam.rings;
  t.modes = h_oam.modes;
  const int B = h_oam.block();
  t.values.assign(static_cast<std::size_t>(t.carriers) * t.users * B, 0.0);
  for (int w = 0; w < t.carriers; ++w)
    for (int p = 0; p < t.users; ++p) {
      const CMat a = h_oam.user_slice(w, p) * precoder.P[static_cast<std::size_t>(w)];
      for (int k = 0; k < B; ++k) {
        const double own = std::norm(a(k, p * B + k));
        const double rest = a.row(k).squaredNorm() - own;
        t.at(w, p, k / t.modes, k % t.modes) =
            own * symbol_power / (rest * symbol_power + rx_elements * noise_variance);
      }
    }
  return t;
}

double projected_received_power(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                                double symbol_power, int rx_elements) {
  const int P = h_oam.users, R = h_oam.rings;
  double acc = 0.0;
  for (int w = 0; w < h_oam.carrier_count(); ++w) {
    const CMat a = h_oam.per_carrier[static_cast<std::size_t>(w)] * precoder.P[static_cast<std::size_t>(w)];
    acc += a.squaredNorm();
  }
  const double blocks = static_cast<double>(h_oam.carrier_count()) * P * R;
  const double m = rx_elements;
  return symbol_power * acc / blocks / (m * m);
}

double noise_variance_for_snr(const EffectiveOamChannel& h_oam, const PrecodingSet& precoder,
                              double symbol_power, double snr_db, int rx_elements) {
  return projected_received_power(h_oam, precoder, symbol_power, rx_elements) /
         std::pow(10.0, snr_db / 10.0);
}

double training_overhead_factor(int training_symbols, int coherence_symbols, int carriers,
                                int training_carriers) {
  const double f = 1.0 - static_cast<double>(training_symbols) * training_carriers /
                             (static_cast<double>(coherence_symbols) * carriers);
  return std::max(f, 0.0);
}

double spectral_efficiency(const SinrTable& table, double overhead_factor) {
  double acc = 0.0;
  for (int w = 0; w < table.carriers; ++w)
    for (int p = 0; p < table.users; ++p)
      for (int ring = 0; ring < table.rings; ++ring) {
        double s = 0.0;
        for (int u = 0; u < table.modes; ++u) s += std::log2(1.0 + table.at(w, p, ring, u));
        acc += (ring == 0 ? overhead_factor : 1.0) * s;
      }
  return table.carriers > 0 ? acc / table.carriers : 0.0;
}

double circuit_power(const PowerModel& power, int users, int rx_elements, int rings) {
  const double mp = static_cast<double>(rings) * rx_elements * users;
  return (1.0 + users) * power.p_bb + 2.0 * mp * power.p_rf + mp * power.p_lna;
}

double energy_efficiency(double se, const PowerModel& power, int carriers, int users,
                         int rx_elements, int rings) {
  const double den = static_cast<double>(carriers) * rings * power.p_t / power.pa_efficiency +
                     circuit_power(power, users, rx_elements, rings);
  if (!(den > 0.0)) throw std::invalid_argument("zero total power");
  return power.bandwidth * se / den;
}

std::string to_string(PositionSource s) { return s == PositionSource::truth ? "true" : "estimated"; }

DownlinkChain make_downlink_chain(const SystemConfig& config, ChannelMode mode) {
  DownlinkChain c;
  const auto truth = config.placements();
  const int R = config.ring_count();
  c.channel = R > 1 ? assemble_ucca_channel(config, truth, mode, config.carriers.wave_numbers)
                    : assemble_channel(config, truth, mode, config.carriers.wave_numbers);
  c.rx_elements = config.rx_elements();
  c.transform = build_mode_transform(config.modes.data_modes, c.rx_elements, config.user_count(), R);
  c.h_oam = effective_oam_channel(c.channel, c.transform);
  return c;
}

PrecodingSet design_precoder(const SystemConfig& config, const std::vector<SbsPlacement>& design,
                             const PrecoderOptions& options) {
  const int R = config.ring_count();
  const auto h = R > 1 ? assemble_ucca_channel(config, design, ChannelMode::farfield,
                                               config.carriers.wave_numbers)
                       : assemble_channel(config, design, ChannelMode::farfield,
                                          config.carriers.wave_numbers);
  const auto t = build_mode_transform(config.modes.data_modes, config.rx_elements(),
                                      config.user_count(), R);
  return build_precoder(effective_oam_channel(h, t), options);
}

SeResult evaluate_se(const SystemConfig& config, const DownlinkChain& chain,
                     const PrecodingSet& precoder, double snr_db, bool diagonal_gain) {
  SeResult r;
  r.noise_variance = noise_variance_for_snr(chain.h_oam, precoder, 1.0, snr_db, chain.rx_elements);
  if (diagonal_gain) {
    r.sinr = sinr_diagonal_gain(chain.h_oam, precoder, 1.0, r.noise_variance, chain.rx_elements);
  } else {
    const auto cov =
        interference_covariances(chain.h_oam, precoder, 1.0, r.noise_variance, chain.rx_elements);
    r.sinr = sinr(1.0, cov, chain.h_oam.rings);
  }
  const double overhead = training_overhead_factor(
      config.effective_training_symbols(), config.coherence_symbols, config.carriers.data_count,
      config.carriers.training_count);
  r.se = spectral_efficiency(r.sinr, overhead);
  return r;
}

std::vector<BerPoint> ber_monte_carlo(const SystemConfig& config, const std::vector<double>& snr_db,
                                      PositionSource source, int trials, std::uint64_t seed,
                                      const BerOptions& options) {
  const auto chain = make_downlink_chain(config, options.channel_mode);
  const int W = chain.channel.carrier_count(), P = config.user_count(), R = config.ring_count();
  const int U = chain.transform.U(), B = R * U;
  const PrecodingSet truth_precoder =
      source == PositionSource::truth ? build_precoder(chain.h_oam) : PrecodingSet{};

  std::vector<BerPoint> out;
  for (std::size_t i = 0; i < snr_db.size(); ++i) {
    const double snr = snr_db[i];
    PrecodingSet est_precoder;
    if (source == PositionSource::estimated) {
      const auto design = options.estimated.empty()
                              ? estimate_placements(config, snr,
                                                    splitmix64(seed ^ (kEstimateStream + i)),
                                                    options.channel_mode)
                              : options.estimated;
      try {
        est_precoder = design_precoder(config, design);
      } catch (const IllConditionedError&) {
        BerPoint pt;
        pt.snr_db = snr;
        pt.per_user.assign(static_cast<std::size_t>(P), 0.5);
        pt.pooled = pt.analytic = 0.5;
        pt.precoder_failed = true;
        out.push_back(std::move(pt));
        continue;
      }
    }
    const PrecodingSet& pre = source == PositionSource::truth ? truth_precoder : est_precoder;
    const double sigma2 = noise_variance_for_snr(chain.h_oam, pre, 1.0, snr, chain.rx_elements);

    std::vector<std::vector<std::uint64_t>> errors(static_cast<std::size_t>(trials),
                                                   std::vector<std::uint64_t>(static_cast<std::size_t>(P), 0));
    parallel_for(trials, [&](int trial) {
      auto gen = trial_stream(seed, (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(trial),
                              kBerStream);
      std::uniform_int_distribution<int> pick(0, 3);
      std::vector<CVec> symbols(static_cast<std::size_t>(W));
      std::vector<std::vector<int>> bits(static_cast<std::size_t>(W));
      for (int w = 0; w < W; ++w) {
        auto& s = symbols[static_cast<std::size_t>(w)];
        auto& b = bits[static_cast<std::size_t>(w)];
        s.resize(P * B);
        b.resize(static_cast<std::size_t>(P * B));
        for (int j = 0; j < P * B; ++j) {
          b[static_cast<std::size_t>(j)] = pick(gen);
          s(j) = qpsk_modulate(b[static_cast<std::size_t>(j)]);
        }
      }
      const auto y = transmit_downlink(symbols, pre, chain.transform, chain.channel, sigma2, gen);
      auto& e = errors[static_cast<std::size_t>(trial)];
      for (int w = 0; w < W; ++w)
        for (int p = 0; p < P; ++p) {
          const CVec x = detect_symbols(y[static_cast<std::size_t>(w)][static_cast<std::size_t>(p)],
                                        chain.transform, R);
          for (int k = 0; k < B; ++k) {
            const int diff = qpsk_demodulate(x(k)) ^ bits[static_cast<std::size_t>(w)][static_cast<std::size_t>(p * B + k)];
            e[static_cast<std::size_t>(p)] += static_cast<std::uint64_t>((diff & 1) + ((diff >> 1) & 1));
          }
        }
    });

    BerPoint pt;
    pt.snr_db = snr;
    const std::uint64_t bits_per_user = static_cast<std::uint64_t>(trials) * W * B * 2;
    for (int p = 0; p < P; ++p) {
      std::uint64_t e = 0;
      for (const auto& t : errors) e += t[static_cast<std::size_t>(p)];
      pt.errors += e;
      pt.per_user.push_back(bits_per_user ? static_cast<double>(e) / bits_per_user : 0.0);
    }
    pt.bits = bits_per_user * P;
    pt.pooled = pt.bits ? static_cast<double>(pt.errors) / pt.bits : 0.0;
    const auto table = sinr(1.0, interference_covariances(chain.h_oam, pre, 1.0, sigma2, chain.rx_elements), R);
    double acc = 0.0;
    for (double v : table.values) acc += qpsk_ber(v);
    pt.analytic = table.values.empty() ? 0.0 : acc / table.values.size();
    out.push_back(std::move(pt));
  }
  return out;
}

BaselineResult mu_mimo_baseline_se(const SystemConfig& config, const ChannelTensor& h,
                                   double snr_db) {
  BaselineResult res;
  const int S = h.users * h.rings * h.rx_elements;
  const int W = h.carrier_count();
  res.streams = S;
  res.overhead_factor = std::max(0.0, 1.0 - static_cast<double>(S) / config.coherence_symbols);
  res.metadata = {
      "precoder=zero-forcing pseudo-inverse per carrier",
      "csi=perfect",
      "streams=" + std::to_string(S) + " per carrier, unit symbol power",
      "noise=received power per element / SNR",
      "overhead=1 - P*rings*M/T_c applied to every stream",
  };
  if (res.overhead_factor <= 0.0) return res;
  std::vector<double> per_carrier(static_cast<std::size_t>(W), 0.0);
  std::vector<double> power(static_cast<std::size_t>(W), 0.0);
  std::vector<double> cond(static_cast<std::size_t>(W), 0.0);
  std::vector<CMat> products(static_cast<std::size_t>(W));
  parallel_for(W, [&](int w) {
    const CMat& H = h.per_carrier[static_cast<std::size_t>(w)];
    Eigen::BDCSVD<CMat> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double c = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    cond[static_cast<std::size_t>(w)] = c;
    CVec inv = sv.cast<cplx>();
    for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = sv(i) > 0.0 ? 1.0 / sv(i) : 0.0;
    const CMat V = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
    CMat a = H * V;
    power[static_cast<std::size_t>(w)] = a.squaredNorm() / S;
    products[static_cast<std::size_t>(w)] = std::move(a);
  });
  res.max_condition = *std::max_element(cond.begin(), cond.end());
  if (res.max_condition > kMaxPrecoderCondition)
    throw IllConditionedError("zero-forcing channel inverse is ill-conditioned", res.max_condition);
  double mean_power = 0.0;
  for (double p : power) mean_power += p;
  mean_power /= W;
  const double sigma2 = mean_power / std::pow(10.0, snr_db / 10.0);
  double acc = 0.0;
  for (int w = 0; w < W; ++w) {
    const CMat& a = products[static_cast<std::size_t>(w)];
    for (int k = 0; k < S; ++k) {
      const double own = std::norm(a(k, k));
      const double rest = a.row(k).squaredNorm() - own;
      acc += std::log2(1.0 + own / (rest + sigma2));
    }
  }
  res.se = res.overhead_factor * acc / W;
  std::ostringstream os;
  os << "max_condition=" << res.max_condition;
  res.metadata.push_back(os.str());
  return res;
}

ComplexityTable complexity_estimates(int carriers, int training_carriers, int modes,
                                     int training_modes, int users, int rings, int rx_elements) {
  if (carriers <= 0 || training_carriers <= 0 || modes <= 0 || training_modes <= 0 || users <= 0 ||
      rings <= 0 || rx_elements <= 0)
    throw std::invalid_argument("dimensions must be positive");
  const double W = carriers, Wt = training_carriers, U = modes, Ut = training_modes, P = users,
               R = rings, M = rx_elements;
  ComplexityTable t;
  t.oam_estimation = Wt * Ut * std::log2(Wt * Ut);
  t.oam_preprocessing = W * std::pow(P, 4) * std::pow(R, 3) * std::pow(U, 3);
  t.mimo_estimation = W * std::pow(P, 3) * std::pow(R, 3) * std::pow(M, 3);
  t.mimo_preprocessing = W * std::pow(P, 4) * std::pow(R, 3) * std::pow(M, 3);
  return t;
}

}  // namespace oam
