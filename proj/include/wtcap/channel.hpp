#pragma once

// Channel model of the interference-constrained MIMO wiretap channel: the
// legitimate link H1, cooperating eavesdroppers H2i (stacked into H2), and
// primary receivers H3j whose received interference is capped.

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "wtcap/matcore.hpp"

namespace wtcap {

/// Minimum eigenvalue accepted as "positive semidefinite".
inline constexpr double kPsdTolerance = -1e-10;

class ChannelSet {
 public:
  /// Validates shapes and powers; throws ParseError on any inconsistency.
  /// An empty `prs` list is allowed (total-power-only problem).
  ChannelSet(Matrix h1, std::vector<Matrix> evs, std::vector<Matrix> prs, double total_power,
             std::vector<double> interference_powers);

  Index m() const noexcept { return h1_.cols(); }
  Index n1() const noexcept { return h1_.rows(); }
  Index n2() const noexcept { return h2_.rows(); }
  std::size_t pr_count() const noexcept { return prs_.size(); }
  std::size_t ev_count() const noexcept { return evs_.size(); }

  const Matrix& H1() const noexcept { return h1_; }
  const Matrix& H2() const noexcept { return h2_; }
  /// [H1; H2]
  const Matrix& H() const noexcept { return h_; }
  const std::vector<Matrix>& evs() const noexcept { return evs_; }
  const std::vector<Matrix>& prs() const noexcept { return prs_; }

  const Matrix& W1() const noexcept { return w1_; }
  const Matrix& W2() const noexcept { return w2_; }
  const Matrix& W3(std::size_t j) const { return w3_.at(j); }

  double total_power() const noexcept { return p_t_; }
  double interference_power(std::size_t j) const { return p_i_.at(j); }
  const std::vector<double>& interference_powers() const noexcept { return p_i_; }

  /// Barrier constraint counts: m + 1 + K for R, n1 + n2 for K.
  Index m_r() const noexcept { return m() + 1 + static_cast<Index>(pr_count()); }
  Index n_k() const noexcept { return n1() + n2(); }

  ChannelSet with_total_power(double p) const;
  ChannelSet with_interference_powers(std::vector<double> p) const;

 private:
  Matrix h1_;
  std::vector<Matrix> evs_;
  std::vector<Matrix> prs_;
  double p_t_;
  std::vector<double> p_i_;

  Matrix h2_;
  Matrix h_;
  Matrix w1_;
  Matrix w2_;
  std::vector<Matrix> w3_;
};

/// Transmit covariance R, positive semidefinite within kPsdTolerance.
class TxCovariance {
 public:
  explicit TxCovariance(SymMatrix r);
  const SymMatrix& R() const noexcept { return r_; }
  const Matrix& matrix() const noexcept { return r_.matrix(); }

 private:
  SymMatrix r_;
};

/// Structured noise covariance K = [[I, N], [N^T, I]] parameterized by the
/// n1 x n2 cross-covariance block N. K must be PSD.
class NoiseCovariance {
 public:
  explicit NoiseCovariance(Matrix n);
  static NoiseCovariance uncorrelated(Index n1, Index n2);

  const Matrix& N() const noexcept { return n_; }
  Matrix K() const;

 private:
  Matrix n_;
};

/// Builds K = [[I, N], [N^T, I]] without any definiteness check.
Matrix structured_noise(const Matrix& n);

/// Parses a channel-spec JSON document (H1, evs, prs, P_T, P_I).
ChannelSet load_channel(std::string_view json_text);
ChannelSet load_channel_file(const std::filesystem::path& path);

/// ln det(I + W1 R) - ln det(I + W2 R) in nats. May be negative.
double secrecy_rate(const ChannelSet& ch, const TxCovariance& r);

/// f(R, K) = ln det(K + H R H^T) - ln det K - ln det(I + W2 R).
/// Throws DomainError when K is not positive definite.
double minimax_objective(const ChannelSet& ch, const TxCovariance& r, const NoiseCovariance& k);

/// Non-strict: R PSD, tr R <= P_T, tr(W3j R) <= P_Ij.
/// Strict: R PD and all trace inequalities strict (barrier domain).
bool is_feasible(const ChannelSet& ch, const SymMatrix& r, bool strict);

}  // namespace wtcap
