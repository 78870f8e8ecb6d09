#pragma once

// Barrier-augmented max-min objective
//
//   f_t(R, K) = f(R, K) + (1/t) [ ln det R + ln(P_T - tr R)
//                                + sum_j ln(P_Ij - tr(W3j R)) - ln det K ]
//
// in the independent variables x = veh(R), y = vec(N), together with its
// analytical gradient (the residual r(z)) and Hessian blocks.

#include <vector>

#include "wtcap/channel.hpp"
#include "wtcap/matcore.hpp"

namespace wtcap {

/// Barrier weight; f_t approaches f as t grows.
class BarrierParams {
 public:
  explicit BarrierParams(double t);
  double t() const noexcept { return t_; }

 private:
  double t_;
};

/// Aggregate variable z = (x, y) with x = veh(R) and y = vec(N).
struct SaddlePoint {
  Vector x;
  Vector y;

  static SaddlePoint from(const SymMatrix& r, const Matrix& n);
  static SaddlePoint from_stacked(const Vector& z, Index nx);

  SymMatrix R() const { return sym_from_veh(x); }
  Matrix N(Index n1, Index n2) const { return y.reshaped(n1, n2); }
  Vector stacked() const;
  Index size() const noexcept { return x.size() + y.size(); }
};

/// Stacked gradient (grad_x f_t, grad_y f_t).
struct Residual {
  Vector gx;
  Vector gy;

  Vector stacked() const;
  double norm() const;
};

/// Hessian blocks of f_t. txx is negative definite and tyy positive definite
/// on the barrier domain; both are exactly symmetric.
struct HessianBlocks {
  Matrix txx;
  Matrix txy;
  Matrix tyy;

  /// Dr = [[txx, txy], [txy^T, tyy]]
  Matrix assembled() const;
};

/// Evaluates f_t and its derivatives for one channel. Holds the duplication
/// maps and constraint vectors so repeated evaluations avoid rebuilding them.
/// Immutable after construction.
class BarrierModel {
 public:
  explicit BarrierModel(ChannelSet ch);

  const ChannelSet& channel() const noexcept { return ch_; }
  Index nx() const noexcept { return veh_size(ch_.m()); }
  Index ny() const noexcept { return ch_.n1() * ch_.n2(); }

  /// True when R > 0, K > 0 and every trace constraint holds strictly.
  bool interior(const SaddlePoint& z) const;

  double value(const SaddlePoint& z, double t) const;
  Residual residual(const SaddlePoint& z, double t) const;
  HessianBlocks hessian(const SaddlePoint& z, double t) const;

  /// f(R, K) without barrier terms.
  double objective(const SaddlePoint& z) const;

 private:
  struct Terms;
  Terms terms(const SaddlePoint& z) const;

  ChannelSet ch_;
  DuplicationMap dm_;
  ReducedDuplicationMap dn_;
  Vector veh_identity_;
  std::vector<Vector> w_;  // veh(2 W3j - diag(W3j))
};

/// Free-function forms; each builds a BarrierModel for the call.
/// All throw DomainError naming the violated constraint when z is not
/// strictly interior.
double barrier_value(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t);
Residual residual(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t);
HessianBlocks hessian(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t);

}  // namespace wtcap
