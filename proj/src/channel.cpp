#include "wtcap/channel.hpp"

#include <cmath>
#include <string>

#include "wtcap/error.hpp"

namespace wtcap {
namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix stack_rows(const std::vector<Matrix>& blocks, Index cols) {
  Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Matrix out(rows, cols);
  Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

// ln det(I + A R A^T), the Sylvester-rotated form of ln det(I + A^T A R).
double log_det_gain(const Matrix& a, const Matrix& r) {
  if (a.rows() == 0) return 0.0;
  Matrix g = Matrix::Identity(a.rows(), a.rows()) + a * r * a.transpose();
  auto ld = log_det_spd(symmetrized(g));
  if (!ld) throw DomainError("R>=0", "I + H R H^T is not positive definite; R is not PSD");
  return *ld;
}

}  // namespace

ChannelSet::ChannelSet(Matrix h1, std::vector<Matrix> evs, std::vector<Matrix> prs,
                       double total_power, std::vector<double> interference_powers)
    : h1_(std::move(h1)),
      evs_(std::move(evs)),
      prs_(std::move(prs)),
      p_t_(total_power),
      p_i_(std::move(interference_powers)) {
  if (h1_.rows() == 0 || h1_.cols() == 0) throw ParseError("H1 must be non-empty");
  if (!all_finite(h1_)) throw ParseError("H1 has non-finite entries");
  const Index cols = h1_.cols();
  if (evs_.empty()) throw ParseError("at least one eavesdropper channel is required");
  for (std::size_t i = 0; i < evs_.size(); ++i) {
    if (evs_[i].rows() == 0) throw ParseError("evs[" + std::to_string(i) + "] has no rows");
    if (evs_[i].cols() != cols) {
      throw ParseError("dimension mismatch: evs[" + std::to_string(i) + "] has " +
                       std::to_string(evs_[i].cols()) + " columns, H1 has " +
                       std::to_string(cols));
    }
    if (!all_finite(evs_[i])) throw ParseError("evs[" + std::to_string(i) + "] has non-finite entries");
  }
  for (std::size_t j = 0; j < prs_.size(); ++j) {
    if (prs_[j].rows() == 0) throw ParseError("prs[" + std::to_string(j) + "] has no rows");
    if (prs_[j].cols() != cols) {
      throw ParseError("dimension mismatch: prs[" + std::to_string(j) + "] has " +
                       std::to_string(prs_[j].cols()) + " columns, H1 has " +
                       std::to_string(cols));
    }
    if (!all_finite(prs_[j])) throw ParseError("prs[" + std::to_string(j) + "] has non-finite entries");
  }
  if (!(p_t_ > 0.0) || !std::isfinite(p_t_)) {
    throw ParseError("P_T must be a finite positive number, got " + format_number(p_t_));
  }
  if (p_i_.size() != prs_.size()) {
    throw ParseError("P_I has " + std::to_string(p_i_.size()) + " entries but there are " +
                     std::to_string(prs_.size()) + " primary receivers");
  }
  for (std::size_t j = 0; j < p_i_.size(); ++j) {
    if (!(p_i_[j] > 0.0) || !std::isfinite(p_i_[j])) {
      throw ParseError("P_I[" + std::to_string(j) + "] must be a finite positive number");
    }
  }

  h2_ = stack_rows(evs_, cols);
  h_.resize(h1_.rows() + h2_.rows(), cols);
  h_ << h1_, h2_;
  w1_ = symmetrized(h1_.transpose() * h1_);
  w2_ = symmetrized(h2_.transpose() * h2_);
  w3_.reserve(prs_.size());
  for (const auto& h3 : prs_) w3_.push_back(symmetrized(h3.transpose() * h3));
}

ChannelSet ChannelSet::with_total_power(double p) const {
  return ChannelSet(h1_, evs_, prs_, p, p_i_);
}

ChannelSet ChannelSet::with_interference_powers(std::vector<double> p) const {
  return ChannelSet(h1_, evs_, prs_, p_t_, std::move(p));
}

TxCovariance::TxCovariance(SymMatrix r) : r_(std::move(r)) {
  if (!r_.matrix().allFinite()) throw DomainError("R>=0", "transmit covariance has non-finite entries");
  const double lo = min_eigenvalue(r_);
  if (lo < kPsdTolerance) {
    throw DomainError("R>=0", "transmit covariance is not PSD (min eigenvalue " +
                                  format_number(lo) + ")");
  }
}

Matrix structured_noise(const Matrix& n) {
  const Index n1 = n.rows();
  const Index n2 = n.cols();
  Matrix k = Matrix::Identity(n1 + n2, n1 + n2);
  k.topRightCorner(n1, n2) = n;
  k.bottomLeftCorner(n2, n1) = n.transpose();
  return k;
}

NoiseCovariance::NoiseCovariance(Matrix n) : n_(std::move(n)) {
  if (n_.rows() == 0 || n_.cols() == 0) throw DimensionError("noise cross-covariance must be non-empty");
  if (!n_.allFinite()) throw DomainError("K>=0", "noise cross-covariance has non-finite entries");
  const double lo = min_eigenvalue(SymMatrix(structured_noise(n_)));
  if (lo < kPsdTolerance) {
    throw DomainError("K>=0", "noise covariance is not PSD (min eigenvalue " + format_number(lo) + ")");
  }
}

NoiseCovariance NoiseCovariance::uncorrelated(Index n1, Index n2) {
  return NoiseCovariance(Matrix::Zero(n1, n2));
}

Matrix NoiseCovariance::K() const { return structured_noise(n_); }

double secrecy_rate(const ChannelSet& ch, const TxCovariance& r) {
  return log_det_gain(ch.H1(), r.matrix()) - log_det_gain(ch.H2(), r.matrix());
}

double minimax_objective(const ChannelSet& ch, const TxCovariance& r, const NoiseCovariance& k) {
  if (k.N().rows() != ch.n1() || k.N().cols() != ch.n2()) {
    throw DimensionError("noise cross-covariance must be n1 x n2");
  }
  const Matrix kk = k.K();
  const auto ld_k = log_det_spd(kk);
  if (!ld_k) throw DomainError("K>0", "noise covariance K is singular");
  const Matrix kq = symmetrized(kk + ch.H() * r.matrix() * ch.H().transpose());
  const auto ld_kq = log_det_spd(kq);
  if (!ld_kq) throw DomainError("K>0", "K + H R H^T is not positive definite");
  return *ld_kq - *ld_k - log_det_gain(ch.H2(), r.matrix());
}

bool is_feasible(const ChannelSet& ch, const SymMatrix& r, bool strict) {
  if (r.dim() != ch.m() || !r.matrix().allFinite()) return false;
  const double tr = r.trace();
  if (strict) {
    Eigen::LLT<Matrix> llt(r.matrix());
    if (llt.info() != Eigen::Success) return false;
    if (!(tr < ch.total_power())) return false;
    for (std::size_t j = 0; j < ch.pr_count(); ++j) {
      if (!((ch.W3(j).cwiseProduct(r.matrix())).sum() < ch.interference_power(j))) return false;
    }
    return true;
  }
  // Relative slack absorbs rounding in samples scaled exactly onto a boundary.
  constexpr double kRel = 1e-12;
  if (min_eigenvalue(r) < kPsdTolerance) return false;
  if (tr > ch.total_power() * (1.0 + kRel)) return false;
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    const double p = ch.interference_power(j);
    if ((ch.W3(j).cwiseProduct(r.matrix())).sum() > p * (1.0 + kRel)) return false;
  }
  return true;
}

}  // namespace wtcap
