#include "wtcap/barrier.hpp"

#include <cmath>
#include <string>

#include "wtcap/error.hpp"

namespace wtcap {

BarrierParams::BarrierParams(double t) : t_(t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t>0", "barrier parameter must be positive");
}

SaddlePoint SaddlePoint::from(const SymMatrix& r, const Matrix& n) {
  return {veh(r), vec(n)};
}

SaddlePoint SaddlePoint::from_stacked(const Vector& z, Index nx) {
  return {z.head(nx), z.tail(z.size() - nx)};
}

Vector SaddlePoint::stacked() const {
  Vector z(size());
  z << x, y;
  return z;
}

Vector Residual::stacked() const {
  Vector r(gx.size() + gy.size());
  r << gx, gy;
  return r;
}

double Residual::norm() const { return std::sqrt(gx.squaredNorm() + gy.squaredNorm()); }

Matrix HessianBlocks::assembled() const {
  const Index nx = txx.rows();
  const Index ny = tyy.rows();
  Matrix dr(nx + ny, nx + ny);
  dr.topLeftCorner(nx, nx) = txx;
  dr.topRightCorner(nx, ny) = txy;
  dr.bottomLeftCorner(ny, nx) = txy.transpose();
  dr.bottomRightCorner(ny, ny) = tyy;
  return dr;
}

struct BarrierModel::Terms {
  Matrix r;
  Matrix r_inv;
  Matrix k;
  Matrix k_inv;
  Matrix s;  // (K + H R H^T)^{-1}
  Matrix z1;
  Matrix z2;
  double g1;
  std::vector<double> g3;
};

BarrierModel::BarrierModel(ChannelSet ch)
    : ch_(std::move(ch)),
      dm_(duplication_matrix(ch_.m())),
      dn_(reduced_duplication_matrix(ch_.n1(), ch_.n2())),
      veh_identity_(veh(SymMatrix::identity(ch_.m()))) {
  w_.reserve(ch_.pr_count());
  for (std::size_t j = 0; j < ch_.pr_count(); ++j) {
    const Matrix& w3 = ch_.W3(j);
    Matrix off = 2.0 * w3;
    off.diagonal() = w3.diagonal();
    w_.push_back(veh(SymMatrix(off)));
  }
}

namespace {

double ipc_load(const ChannelSet& ch, std::size_t j, const Matrix& r) {
  return ch.W3(j).cwiseProduct(r).sum();
}

}  // namespace

bool BarrierModel::interior(const SaddlePoint& z) const {
  if (z.x.size() != nx() || z.y.size() != ny()) return false;
  if (!z.x.allFinite() || !z.y.allFinite()) return false;
  const SymMatrix r = z.R();
  if (!is_feasible(ch_, r, true)) return false;
  Eigen::LLT<Matrix> llt(structured_noise(z.N(ch_.n1(), ch_.n2())));
  return llt.info() == Eigen::Success;
}

BarrierModel::Terms BarrierModel::terms(const SaddlePoint& z) const {
  if (z.x.size() != nx() || z.y.size() != ny()) {
    throw DimensionError("saddle point has wrong dimensions for this channel");
  }
  Terms out;
  out.r = z.R().matrix();
  auto r_inv = inverse_spd(out.r);
  if (!r_inv) throw DomainError("R>0", "transmit covariance is not positive definite");
  out.r_inv = std::move(*r_inv);

  const double slack_t = ch_.total_power() - out.r.trace();
  if (!(slack_t > 0.0)) {
    throw DomainError("TPC", "total power constraint not strictly satisfied (slack " +
                                 format_number(slack_t) + ")");
  }
  out.g1 = 1.0 / slack_t;
  out.g3.reserve(ch_.pr_count());
  for (std::size_t j = 0; j < ch_.pr_count(); ++j) {
    const double slack = ch_.interference_power(j) - ipc_load(ch_, j, out.r);
    if (!(slack > 0.0)) {
      throw DomainError("IPC[" + std::to_string(j) + "]",
                        "interference constraint " + std::to_string(j) +
                            " not strictly satisfied (slack " + format_number(slack) + ")");
    }
    out.g3.push_back(1.0 / slack);
  }

  out.k = structured_noise(z.N(ch_.n1(), ch_.n2()));
  auto k_inv = inverse_spd(out.k);
  if (!k_inv) throw DomainError("K>0", "noise covariance is not positive definite");
  out.k_inv = std::move(*k_inv);

  const Matrix& h = ch_.H();
  auto s = inverse_spd(symmetrized(out.k + h * out.r * h.transpose()));
  if (!s) throw DomainError("K>0", "K + H R H^T is not positive definite");
  out.s = std::move(*s);

  // Push-through forms of the resolvents: (I + H^T K^-1 H R)^-1 H^T K^-1 H = H^T (K + H R H^T)^-1 H
  // and (I + W2 R)^-1 W2 = H2^T (I + H2 R H2^T)^-1 H2.
  out.z1 = symmetrized(h.transpose() * out.s * h);
  const Matrix& h2 = ch_.H2();
  auto g2 = inverse_spd(symmetrized(Matrix::Identity(h2.rows(), h2.rows()) + h2 * out.r * h2.transpose()));
  if (!g2) throw DomainError("R>0", "I + H2 R H2^T is not positive definite");
  out.z2 = symmetrized(h2.transpose() * (*g2) * h2);
  return out;
}

double BarrierModel::objective(const SaddlePoint& z) const {
  return minimax_objective(ch_, TxCovariance(z.R()), NoiseCovariance(z.N(ch_.n1(), ch_.n2())));
}

double BarrierModel::value(const SaddlePoint& z, double t) const {
  const Terms tm = terms(z);
  const auto ld_r = log_det_spd(tm.r);
  const auto ld_k = log_det_spd(tm.k);
  if (!ld_r) throw DomainError("R>0", "transmit covariance is not positive definite");
  if (!ld_k) throw DomainError("K>0", "noise covariance is not positive definite");
  double barrier = *ld_r + std::log(1.0 / tm.g1) - *ld_k;
  for (double g : tm.g3) barrier += std::log(1.0 / g);
  const double f = minimax_objective(ch_, TxCovariance(SymMatrix(tm.r)),
                                     NoiseCovariance(z.N(ch_.n1(), ch_.n2())));
  return f + barrier / t;
}

Residual BarrierModel::residual(const SaddlePoint& z, double t) const {
  const Terms tm = terms(z);
  const double it = 1.0 / t;
  Residual res;
  res.gx = dm_.D.transpose() * vec(tm.z1 - tm.z2 + it * tm.r_inv) - it * tm.g1 * veh_identity_;
  for (std::size_t j = 0; j < w_.size(); ++j) res.gx -= it * tm.g3[j] * w_[j];
  res.gy = dn_.D.transpose() * vec(tm.s - (1.0 + it) * tm.k_inv);
  return res;
}

HessianBlocks BarrierModel::hessian(const SaddlePoint& z, double t) const {
  const Terms tm = terms(z);
  const double it = 1.0 / t;
  const Matrix& d = dm_.D;
  const Matrix& dn = dn_.D;

  HessianBlocks hb;
  Matrix core = kron(tm.z1, tm.z1) - kron(tm.z2, tm.z2) + it * kron(tm.r_inv, tm.r_inv);
  hb.txx = -d.transpose() * core * d -
           it * tm.g1 * tm.g1 * veh_identity_ * veh_identity_.transpose();
  for (std::size_t j = 0; j < w_.size(); ++j) {
    hb.txx -= it * tm.g3[j] * tm.g3[j] * w_[j] * w_[j].transpose();
  }
  hb.txx = symmetrized(hb.txx);

  const Matrix a = ch_.H().transpose() * tm.s;
  hb.txy = -d.transpose() * kron(a, a) * dn;

  hb.tyy = dn.transpose() * ((1.0 + it) * kron(tm.k_inv, tm.k_inv) - kron(tm.s, tm.s)) * dn;
  hb.tyy = symmetrized(hb.tyy);
  return hb;
}

double barrier_value(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t) {
  return BarrierModel(ch).value(z, t.t());
}

Residual residual(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t) {
  return BarrierModel(ch).residual(z, t.t());
}

HessianBlocks hessian(const ChannelSet& ch, const SaddlePoint& z, const BarrierParams& t) {
  return BarrierModel(ch).hessian(z, t.t());
}

}  // namespace wtcap
