#include "oam/precoding.hpp"

#include <cmath>
#include <sstream>

#include "oam/parallel.hpp"

namespace oam {

template <class T>
CMatT<T> stack_other_users(const CMatT<T>& h, int p, int block) {
  const int users = static_cast<int>(h.rows()) / block;
  if (users < 2) throw std::invalid_argument("stack_other_users needs at least two users");
  CMatT<T> out(static_cast<Eigen::Index>((users - 1) * block), h.cols());
  int row = 0;
  for (int q = 0; q < users; ++q) {
    if (q == p) continue;
    out.middleRows(row, block) = h.middleRows(q * block, block);
    row += block;
  }
  return out;
}

template <class T>
CMatT<T> comode_null_basis(const CMatT<T>& h_hat, int count) {
  const Eigen::Index n = h_hat.cols();
  if (h_hat.isZero(0)) return CMatT<T>::Identity(n, n).rightCols(count);
  Eigen::BDCSVD<CMatT<T>> svd(h_hat, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD did not converge");
  // Eigen sorts singular values in decreasing order, so the trailing
  // columns of V pair with the smallest ones (or span the kernel).
  return svd.matrixV().rightCols(count);
}

template <class T>
CMatT<T> intermode_inverse(const CMatT<T>& product, double* condition) {
  Eigen::BDCSVD<CMatT<T>> svd(product);
  const auto& s = svd.singularValues();
  const T smax = s(0), smin = s(s.size() - 1);
  const double cond = smin > T(0) ? static_cast<double>(smax / smin) : INFINITY;
  if (condition) *condition = cond;
  if (!(cond <= kMaxPrecoderCondition)) {
    std::ostringstream os;
    os << "ill-conditioned: condition number " << cond << " exceeds " << kMaxPrecoderCondition;
    throw IllConditionedError(os.str(), cond);
  }
  return product.partialPivLu().inverse();
}

template CMatT<double> stack_other_users(const CMatT<double>&, int, int);
template CMatT<long double> stack_other_users(const CMatT<long double>&, int, int);
template CMatT<double> comode_null_basis(const CMatT<double>&, int);
template CMatT<long double> comode_null_basis(const CMatT<long double>&, int);
template CMatT<double> intermode_inverse(const CMatT<double>&, double*);
template CMatT<long double> intermode_inverse(const CMatT<long double>&, double*);

namespace {

template <class T>
struct CarrierFactors {
  CMatT<T> E, G, P;
  std::vector<double> condition;
};

template <class T>
CarrierFactors<T> build_carrier(const CMatT<T>& h, int users, int block) {
  const int dim = users * block;
  CarrierFactors<T> f;
  f.E = CMatT<T>::Zero(dim, dim);
  f.G = CMatT<T>::Zero(dim, dim);
  f.condition.resize(static_cast<std::size_t>(users));
  for (int p = 0; p < users; ++p) {
    CMatT<T> ep;
    if (users == 1) {
      ep = CMatT<T>::Identity(dim, block);
    } else {
      ep = comode_null_basis<T>(stack_other_users<T>(h, p, block), block);
    }
    const CMatT<T> prod = h.middleRows(p * block, block) * ep;
    f.G.block(p * block, p * block, block, block) =
        intermode_inverse<T>(prod, &f.condition[static_cast<std::size_t>(p)]);
    f.E.middleCols(p * block, block) = ep;
  }
  f.P = f.E * f.G;
  return f;
}

template <class T>
CMat to_double(const CMatT<T>& m) {
  return m.template cast<cplx>();
}

}  // namespace

PrecodingSet build_precoder(const EffectiveOamChannel& h_oam, const PrecoderOptions& options) {
  PrecodingSet set;
  set.users = h_oam.users;
  set.block = h_oam.block();
  const int dim = set.users * set.block;
  set.extended = options.precision == Precision::extended ||
                 (options.precision == Precision::automatic && dim <= 96);
  const std::size_t W = h_oam.per_carrier.size();
  set.P.resize(W);
  set.condition.resize(W);
  if (options.keep_factors) {
    set.E.resize(W);
    set.G.resize(W);
  }
  if (set.extended) set.P_ext.resize(W);
  parallel_for(W, [&](std::size_t w) {
    if (set.extended) {
      const CMatL h = h_oam.per_carrier[w].cast<std::complex<long double>>();
      auto f = build_carrier<long double>(h, set.users, set.block);
      set.P[w] = to_double(f.P);
      if (options.keep_factors) {
        set.E[w] = to_double(f.E);
        set.G[w] = to_double(f.G);
      }
      set.P_ext[w] = std::move(f.P);
      set.condition[w] = std::move(f.condition);
    } else {
      auto f = build_carrier<double>(h_oam.per_carrier[w], set.users, set.block);
      set.P[w] = std::move(f.P);
      if (options.keep_factors) {
        set.E[w] = std::move(f.E);
        set.G[w] = std::move(f.G);
      }
      set.condition[w] = std::move(f.condition);
    }
  });
  return set;
}

PrecodingSet identity_precoder(const EffectiveOamChannel& h_oam) {
  PrecodingSet set;
  set.users = h_oam.users;
  set.block = h_oam.block();
  const int dim = set.users * set.block;
  for (std::size_t w = 0; w < h_oam.per_carrier.size(); ++w) {
    set.P.push_back(CMat::Identity(dim, dim));
    set.condition.emplace_back(static_cast<std::size_t>(set.users), 1.0);
  }
  return set;
}

double DecouplingReport::max_relative_total() const {
  double m = 0.0;
  for (double v : relative_total) m = std::max(m, v);
  return m;
}

namespace {

template <class T>
void residuals(const CMatT<T>& h, const CMatT<T>& p, int users, int block,
               std::vector<double>& inter, std::vector<double>& co, double& total) {
  const CMatT<T> hp = h * p;
  const int dim = users * block;
  const CMatT<T> diff = hp - CMatT<T>::Identity(dim, dim);
  total = static_cast<double>(diff.norm() / std::sqrt(static_cast<T>(dim)));
  inter.assign(static_cast<std::size_t>(users), 0.0);
  co.assign(static_cast<std::size_t>(users), 0.0);
  for (int a = 0; a < users; ++a) {
    T co2 = 0;
    for (int b = 0; b < users; ++b) {
      const auto blk = diff.block(a * block, b * block, block, block);
      if (a == b)
        inter[static_cast<std::size_t>(a)] = static_cast<double>(blk.norm());
      else
        co2 += blk.squaredNorm();
    }
    co[static_cast<std::size_t>(a)] = static_cast<double>(std::sqrt(co2));
  }
}

}  // namespace

DecouplingReport verify_decoupling(const EffectiveOamChannel& h_oam, const PrecodingSet& set) {
  DecouplingReport r;
  const std::size_t W = h_oam.per_carrier.size();
  r.inter_mode.resize(W);
  r.co_mode.resize(W);
  r.relative_total.resize(W);
  const bool ext = !set.P_ext.empty();
  parallel_for(W, [&](std::size_t w) {
    if (ext) {
      const CMatL h = h_oam.per_carrier[w].cast<std::complex<long double>>();
      residuals<long double>(h, set.P_ext[w], set.users, set.block, r.inter_mode[w],
                             r.co_mode[w], r.relative_total[w]);
    } else {
      residuals<double>(h_oam.per_carrier[w], set.P[w], set.users, set.block, r.inter_mode[w],
                        r.co_mode[w], r.relative_total[w]);
    }
  });
  return r;
}

}  // namespace oam
