#include "refine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "oam/parallel.hpp"

namespace oam::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct UserGeometry {
  double rt = 0.0, rr = 0.0;
  VectorXd alpha, phi;  // receive and transmit element azimuths
  MatrixXd cross;       // cos(alpha_m - phi_n)
};

// Zero-mode samples and non-zero-mode combined samples, pilots removed,
// stacked per carrier. Combined entries are weighted by 1/sqrt(N) so both
// blocks carry equal noise variance.
class FeatureModel {
 public:
  FeatureModel(const SystemConfig& config, const TrainingObservation& obs) : config_(config) {
    ks_ = obs.wave_numbers;
    W_ = static_cast<int>(ks_.size());
    N_ = config.tx_elements();
    M_ = config.rx_elements();
    zero_ = obs.zero_mode_index;
    nz_ = zero_ >= 0 ? N_ : 0;
    for (int u = 0; u < static_cast<int>(obs.modes.size()); ++u)
      if (u != zero_) comb_.push_back(u);
    uc_ = static_cast<int>(comb_.size());
    weight_ = 1.0 / std::sqrt(static_cast<double>(N_));
    fu_.resize(uc_, M_);
    for (int j = 0; j < uc_; ++j) {
      const int l = obs.modes[static_cast<std::size_t>(comb_[static_cast<std::size_t>(j)])];
      for (int m = 0; m < M_; ++m) fu_(j, m) = std::polar(weight_, 2.0 * kPi * l * m / M_);
    }
    data_.resize(length());
    for (int w = 0; w < W_; ++w) {
      const int off = w * stride();
      if (zero_ >= 0) {
        const cplx s = obs.pilots(zero_, w);
        for (int n = 0; n < N_; ++n) data_(off + n) = obs.zero_mode(n, w) / s;
      }
      for (int j = 0; j < uc_; ++j) {
        const int u = comb_[static_cast<std::size_t>(j)];
        data_(off + nz_ + j) = weight_ * obs.combined(u, w) / obs.pilots(u, w);
      }
    }
    for (int w = 2; w < W_; ++w)
      if (std::abs((ks_[w] - ks_[w - 1]) - (ks_[1] - ks_[0])) > 1e-12 * ks_[w]) uniform_ = false;
    const auto& tx = config.tx.rings.front();
    for (const auto& user : config.users) {
      const auto& rx = user.array.rings.front();
      UserGeometry g;
      g.rt = tx.radius;
      g.rr = rx.radius;
      g.alpha.resize(M_);
      g.phi.resize(N_);
      for (int m = 0; m < M_; ++m) g.alpha(m) = rx.element_azimuth(m);
      for (int n = 0; n < N_; ++n) g.phi(n) = tx.element_azimuth(n);
      g.cross.resize(M_, N_);
      for (int m = 0; m < M_; ++m)
        for (int n = 0; n < N_; ++n) g.cross(m, n) = std::cos(g.alpha(m) - g.phi(n));
      geo_.push_back(std::move(g));
    }
  }

  int stride() const { return nz_ + uc_; }
  int length() const { return W_ * stride(); }
  int users() const { return static_cast<int>(geo_.size()); }
  const CVec& data() const { return data_; }
  double mean_k() const {
    double s = 0.0;
    for (double k : ks_) s += k;
    return s / W_;
  }
  const std::vector<double>& ks() const { return ks_; }

  // Column 0: features of user p at (r, theta, phi). Columns 1..3: partial
  // derivatives with respect to r, theta, phi.
  void user_features(int p, const Eigen::Vector3d& x, CMat& out, bool derivs) const {
    const auto& g = geo_[static_cast<std::size_t>(p)];
    const double r = x(0), st = std::sin(x(1)), ct = std::cos(x(1)), ph = x(2);
    const int cols = derivs ? 4 : 1;
    const int MN = M_ * N_;
    out.setZero(length(), cols);
    std::vector<double> cra(M_), sra(M_), ctn(N_), stn(N_);
    for (int m = 0; m < M_; ++m) {
      cra[m] = std::cos(ph - g.alpha(m));
      sra[m] = std::sin(ph - g.alpha(m));
    }
    for (int n = 0; n < N_; ++n) {
      ctn[n] = std::cos(ph - g.phi(n));
      stn[n] = std::sin(ph - g.phi(n));
    }
    // Distance and its partials per element pair, n-major.
    std::vector<double> dist(MN), dr(MN), dt(MN), dp(MN);
    const double cross_scale = g.rt * g.rr / r;
    for (int n = 0; n < N_; ++n) {
      for (int m = 0; m < M_; ++m) {
        const int i = n * M_ + m;
        const double c = g.cross(m, n);
        dist[i] = r + g.rr * st * cra[m] - g.rt * st * ctn[n] - cross_scale * c;
        dr[i] = 1.0 + cross_scale / r * c;
        dt[i] = ct * (g.rr * cra[m] - g.rt * ctn[n]);
        dp[i] = st * (g.rt * stn[n] - g.rr * sra[m]);
      }
    }
    std::vector<cplx> phase(MN), step(MN);
    const double dk = W_ > 1 ? ks_[1] - ks_[0] : 0.0;
    for (int i = 0; i < MN; ++i) {
      phase[i] = std::polar(1.0, -ks_[0] * dist[i]);
      step[i] = std::polar(1.0, -dk * dist[i]);
    }
    CMat colsum(N_, cols), rowsum(M_, cols);
    for (int w = 0; w < W_; ++w) {
      const double k = ks_[static_cast<std::size_t>(w)];
      if (w > 0) {
        if (uniform_) {
          for (int i = 0; i < MN; ++i) phase[i] *= step[i];
        } else {
          for (int i = 0; i < MN; ++i) phase[i] = std::polar(1.0, -k * dist[i]);
        }
      }
      colsum.setZero();
      rowsum.setZero();
      for (int n = 0; n < N_; ++n) {
        const int base = n * M_;
        if (derivs) {
          cplx c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
          for (int m = 0; m < M_; ++m) {
            const int i = base + m;
            const cplx e = phase[i];
            const cplx er = e * dr[i], et = e * dt[i], ep = e * dp[i];
            c0 += e;
            c1 += er;
            c2 += et;
            c3 += ep;
            rowsum(m, 0) += e;
            rowsum(m, 1) += er;
            rowsum(m, 2) += et;
            rowsum(m, 3) += ep;
          }
          colsum(n, 0) = c0;
          colsum(n, 1) = c1;
          colsum(n, 2) = c2;
          colsum(n, 3) = c3;
        } else {
          cplx c0 = 0.0;
          for (int m = 0; m < M_; ++m) {
            c0 += phase[base + m];
            rowsum(m, 0) += phase[base + m];
          }
          colsum(n, 0) = c0;
        }
      }
      // h = A e^{-ikd}: dh/dx = A (-ik e dd/dx), plus -h/r for the amplitude.
      const double amp = config_.beta / (2.0 * k * r);
      const cplx mik(0.0, -k);
      auto finish = [&](CMat& s) {
        if (derivs) {
          s.col(1) = amp * (mik * s.col(1) - s.col(0) / r);
          s.col(2) *= amp * mik;
          s.col(3) *= amp * mik;
        }
        s.col(0) *= amp;
      };
      finish(colsum);
      finish(rowsum);
      const int off = w * stride();
      if (nz_ > 0) out.block(off, 0, N_, cols) = colsum;
      if (uc_ > 0) out.block(off + nz_, 0, uc_, cols) = fu_ * rowsum;
    }
  }

  // Range-gated correlation score over a grid of direction cosines for one
  // user. Returns the best (theta, phi).
  std::pair<double, double> gated_search(int p, double range, double max_sin, double step) const {
    const auto& g = geo_[static_cast<std::size_t>(p)];
    const double kc = mean_k();
    CVec d = CVec::Zero(stride());
    for (int w = 0; w < W_; ++w)
      d += data_.segment(w * stride(), stride()) * std::polar(1.0, ks_[static_cast<std::size_t>(w)] * range);
    CMat c(M_, N_);
    const double kappa = kc * g.rt * g.rr / range;
    for (int m = 0; m < M_; ++m)
      for (int n = 0; n < N_; ++n) c(m, n) = std::polar(1.0, kappa * g.cross(m, n));
    const int half = static_cast<int>(std::floor(max_sin / step));
    const int side = 2 * half + 1;
    std::vector<double> score(static_cast<std::size_t>(side) * side, -1.0);
    parallel_for(side, [&](int i) {
      Eigen::VectorXcd a(M_), b(N_), mu(stride());
      for (int j = 0; j < side; ++j) {
        const double u = (i - half) * step, v = (j - half) * step;
        const double s = std::hypot(u, v);
        if (s > max_sin) continue;
        const double ph = std::atan2(v, u);
        for (int m = 0; m < M_; ++m) a(m) = std::polar(1.0, -kc * g.rr * s * std::cos(ph - g.alpha(m)));
        for (int n = 0; n < N_; ++n) b(n) = std::polar(1.0, kc * g.rt * s * std::cos(ph - g.phi(n)));
        if (nz_ > 0) mu.head(N_) = b.cwiseProduct(c.transpose() * a);
        if (uc_ > 0) mu.tail(uc_) = fu_ * a.cwiseProduct(c * b);
        const double nn = mu.squaredNorm();
        score[static_cast<std::size_t>(i) * side + j] = std::norm(mu.dot(d)) / nn;
      }
    });
    const auto best = std::max_element(score.begin(), score.end()) - score.begin();
    const double u = (static_cast<int>(best / side) - half) * step;
    const double v = (static_cast<int>(best % side) - half) * step;
    return {std::asin(std::min(std::hypot(u, v), 1.0)), std::atan2(v, u)};
  }

 private:
  const SystemConfig& config_;
  std::vector<double> ks_;
  int W_ = 0, N_ = 0, M_ = 0, zero_ = -1, nz_ = 0, uc_ = 0;
  double weight_ = 1.0;
  bool uniform_ = true;
  std::vector<int> comb_;
  CMat fu_;
  CVec data_;
  std::vector<UserGeometry> geo_;
};

using Evaluator = std::function<void(const VectorXd& x, VectorXd& res, MatrixXd* jac)>;

double half_cost(const VectorXd& r) { return r.squaredNorm(); }

VectorXd levenberg_marquardt(const Evaluator& eval, VectorXd x, int max_iter, double* cost_out) {
  VectorXd res, trial_res;
  MatrixXd jac;
  eval(x, res, &jac);
  double cost = half_cost(res);
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd grad = jac.transpose() * res;
    bool improved = false;
    for (int tries = 0; tries < 12 && !improved; ++tries) {
      MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-30);
      const VectorXd step = a.ldlt().solve(-grad);
      const VectorXd xt = x + step;
      eval(xt, trial_res, nullptr);
      const double tc = half_cost(trial_res);
      if (std::isfinite(tc) && tc < cost) {
        const double rel = (cost - tc) / std::max(cost, 1e-300);
        x = xt;
        cost = tc;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-12) {
          if (cost_out) *cost_out = cost;
          return x;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
    eval(x, res, &jac);
  }
  if (cost_out) *cost_out = cost;
  return x;
}

void stack_real(const CVec& e, VectorXd& out) {
  out.resize(2 * e.size());
  out.head(e.size()) = e.real();
  out.tail(e.size()) = e.imag();
}

void stack_real_cols(const CMat& e, MatrixXd& out, Eigen::Index col) {
  out.block(0, col, e.rows(), e.cols()) = e.real();
  out.block(e.rows(), col, e.rows(), e.cols()) = e.imag();
}

void canonicalize(double& theta, double& phi) {
  if (theta < 0.0) {
    theta = -theta;
    phi += kPi;
  }
  theta = std::min(theta, kPi / 2 - 1e-9);
  phi = wrap_angle(phi);
}

}  // namespace

std::vector<UserEstimate> refine_positions(const SystemConfig& config,
                                           const TrainingObservation& obs,
                                           const std::vector<double>& initial_ranges,
                                           const EstimationOptions& options,
                                           std::vector<std::string>& diagnostics) {
  const FeatureModel model(config, obs);
  const int P = model.users();
  const int L = model.length();
  const double kc = model.mean_k();
  const double rt = config.tx.rings.front().radius;
  const double step = 2.0 * kPi / (kc * rt * options.grid_oversampling);
  const double max_sin = std::sin(options.max_elevation);

  std::vector<Eigen::Vector3d> x(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    const double r = initial_ranges[static_cast<std::size_t>(p)];
    const auto [theta, phi] = model.gated_search(p, r, max_sin, step);
    x[static_cast<std::size_t>(p)] = {r, theta, phi};
  }

  // Free complex gain per user, eliminated by linear least squares at every
  // evaluation.
  {
    VectorXd x0(3 * P);
    for (int p = 0; p < P; ++p) x0.segment<3>(3 * p) = x[static_cast<std::size_t>(p)];
    const Evaluator eval = [&](const VectorXd& v, VectorXd& res, MatrixXd* jac) {
      CMat f(L, P);
      std::vector<CMat> parts(static_cast<std::size_t>(P));
      for (int p = 0; p < P; ++p) {
        model.user_features(p, v.segment<3>(3 * p), parts[static_cast<std::size_t>(p)], jac != nullptr);
        f.col(p) = parts[static_cast<std::size_t>(p)].col(0);
      }
      const Eigen::ColPivHouseholderQR<CMat> qr(f);
      const CVec g = qr.solve(model.data());
      stack_real(model.data() - f * g, res);
      if (jac) {
        jac->resize(2 * L, 3 * P);
        for (int p = 0; p < P; ++p) {
          const CMat dv = g(p) * parts[static_cast<std::size_t>(p)].rightCols(3);
          const CMat proj = dv - f * qr.solve(dv);
          stack_real_cols(-proj, *jac, 3 * p);
        }
      }
    };
    const VectorXd xf = levenberg_marquardt(eval, x0, 60, nullptr);
    for (int p = 0; p < P; ++p) x[static_cast<std::size_t>(p)] = xf.segment<3>(3 * p);
  }

  // Known gain: the model amplitude and phase are fully determined.
  auto known_gain = [&](const std::vector<int>& active, int iters, double* cost) {
    CVec base = model.data();
    CMat ft;
    for (int p = 0; p < P; ++p) {
      if (std::find(active.begin(), active.end(), p) != active.end()) continue;
      model.user_features(p, x[static_cast<std::size_t>(p)], ft, false);
      base -= ft.col(0);
    }
    const int A = static_cast<int>(active.size());
    VectorXd x0(3 * A);
    for (int i = 0; i < A; ++i) x0.segment<3>(3 * i) = x[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])];
    const Evaluator eval = [&](const VectorXd& v, VectorXd& res, MatrixXd* jac) {
      CVec e = base;
      if (jac) jac->resize(2 * L, 3 * A);
      CMat f;
      for (int i = 0; i < A; ++i) {
        model.user_features(active[static_cast<std::size_t>(i)], v.segment<3>(3 * i), f, jac != nullptr);
        e -= f.col(0);
        if (jac) stack_real_cols(-f.rightCols(3), *jac, 3 * i);
      }
      stack_real(e, res);
    };
    return levenberg_marquardt(eval, x0, iters, cost);
  };

  std::vector<int> all(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) all[static_cast<std::size_t>(p)] = p;
  {
    const VectorXd xj = known_gain(all, 40, nullptr);
    for (int p = 0; p < P; ++p) x[static_cast<std::size_t>(p)] = xj.segment<3>(3 * p);
  }

  const double slip = 2.0 * kPi / kc / 6.0;
  for (int p = 0; p < P; ++p) {
    const Eigen::Vector3d start = x[static_cast<std::size_t>(p)];
    double best_cost = INFINITY;
    Eigen::Vector3d best = start;
    for (int j = -3; j <= 3; ++j) {
      x[static_cast<std::size_t>(p)] = start + Eigen::Vector3d(j * slip, 0.0, 0.0);
      double cost = INFINITY;
      const VectorXd r = known_gain({p}, 20, &cost);
      if (cost < best_cost) {
        best_cost = cost;
        best = r;
      }
    }
    const Eigen::Vector3d fine = best;
    for (int j = -2; j <= 2; ++j) {
      if (j == 0) continue;
      x[static_cast<std::size_t>(p)] = fine + Eigen::Vector3d(6.0 * j * slip, 0.0, 0.0);
      double cost = INFINITY;
      const VectorXd r = known_gain({p}, 20, &cost);
      if (cost < best_cost) {
        best_cost = cost;
        best = r;
      }
    }
    x[static_cast<std::size_t>(p)] = best;
    if (std::abs(best(0) - start(0)) > 3.0 * slip)
      diagnostics.push_back("range of user " + std::to_string(p + 1) + " moved by a cycle-slip correction");
  }
  const VectorXd xf = known_gain(all, 40, nullptr);

  std::vector<UserEstimate> out;
  for (int p = 0; p < P; ++p) {
    double theta = xf(3 * p + 1), phi = xf(3 * p + 2);
    canonicalize(theta, phi);
    out.push_back({xf(3 * p), theta, phi});
  }
  std::sort(out.begin(), out.end(),
            [](const UserEstimate& a, const UserEstimate& b) { return a.range < b.range; });
  return out;
}

}  // namespace oam::detail
