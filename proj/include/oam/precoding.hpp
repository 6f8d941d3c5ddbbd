#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "oam/transform.hpp"

namespace oam {

template <class T>
using CMatT = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;
using CMatL = CMatT<long double>;

class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

inline constexpr double kMaxPrecoderCondition = 1e12;

// Rows of all users except p, ascending. `block` is the row count per user.
template <class T>
CMatT<T> stack_other_users(const CMatT<T>& h, int p, int block);

// Right-singular vectors paired with the `count` smallest singular values.
template <class T>
CMatT<T> comode_null_basis(const CMatT<T>& h_hat, int count);

// (H^p E_p)^{-1}; throws IllConditionedError when cond > 1e12 or singular.
template <class T>
CMatT<T> intermode_inverse(const CMatT<T>& product, double* condition = nullptr);

enum class Precision { automatic, standard, extended };

struct PrecoderOptions {
  Precision precision = Precision::automatic;
  bool keep_factors = true;  // store E and G besides P
};

struct PrecodingSet {
  int users = 0;
  int block = 0;  // rings * U
  bool extended = false;
  std::vector<CMat> E;        // block*users x block*users, column blocks E_p
  std::vector<CMat> G;        // block-diagonal
  std::vector<CMat> P;        // E*G
  std::vector<CMatL> P_ext;   // P in extended precision (when extended)
  std::vector<std::vector<double>> condition;  // [w][p] of H^p E_p

  int carrier_count() const { return static_cast<int>(P.size()); }
};

PrecodingSet build_precoder(const EffectiveOamChannel& h_oam, const PrecoderOptions& options = {});

// P = I for every carrier (no preprocessing).
PrecodingSet identity_precoder(const EffectiveOamChannel& h_oam);

struct DecouplingReport {
  // [w][p]
  std::vector<std::vector<double>> inter_mode;  // ||H^p P_p - I||_F
  std::vector<std::vector<double>> co_mode;     // sqrt(sum_{q != p} ||H^p P_q||_F^2)
  std::vector<double> relative_total;           // ||H P - I||_F / ||I||_F
  double max_relative_total() const;
};

DecouplingReport verify_decoupling(const EffectiveOamChannel& h_oam, const PrecodingSet& set);

}  // namespace oam
