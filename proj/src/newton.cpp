#include "wtcap/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wtcap/error.hpp"

namespace wtcap {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string stage_context(double t, int k) {
  std::ostringstream os;
  os << "t=" << t << ", k=" << k;
  return os.str();
}

struct EigRange {
  double min;
  double norm;
  bool cholesky;  // positive definite at working precision
};

EigRange eig_range(const Matrix& m) {
  if (m.size() == 0) return {std::numeric_limits<double>::infinity(), 0.0, true};
  const Matrix s = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return {ev(0), ev.cwiseAbs().maxCoeff(), Eigen::LLT<Matrix>(s).info() == Eigen::Success};
}

SymMatrix round_low_rank(const SymMatrix& r, double threshold) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix());
  Vector ev = es.eigenvalues();
  const double cut = threshold * std::max(r.trace(), 0.0);
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < cut) ev(i) = 0.0;
  }
  return SymMatrix(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

void SolverConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(eta > 1.0)) throw std::invalid_argument("eta must exceed 1");
  if (!(t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(t_max >= t0)) throw std::invalid_argument("t_max must be at least t0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_newton_steps < 1) throw std::invalid_argument("max_newton_steps must be >= 1");
  if (max_backtrack_steps < 1) throw std::invalid_argument("max_backtrack_steps must be >= 1");
  if (!(low_rank_threshold >= 0.0)) throw std::invalid_argument("low_rank_threshold must be >= 0");
}

SaddlePoint initial_point(const ChannelSet& ch) {
  const double p_t = ch.total_power();
  double a = static_cast<double>(ch.m());
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    a = std::max(a, ch.W3(j).trace() * p_t / ch.interference_power(j));
  }
  a *= 2.0;
  const SymMatrix r0(Matrix::Identity(ch.m(), ch.m()) * (p_t / a));
  return SaddlePoint::from(r0, Matrix::Zero(ch.n1(), ch.n2()));
}

NewtonStep newton_step(const BarrierModel& model, const SaddlePoint& z, double t) {
  const Residual r = model.residual(z, t);
  HessianBlocks hb = model.hessian(z, t);
  const Vector rhs = -r.stacked();
  if (!rhs.allFinite()) throw NumericalError("residual has non-finite entries");
  const double norm = r.norm();
  if (norm == 0.0) {
    return {Vector::Zero(rhs.size()), 0.0, std::numeric_limits<double>::infinity(), std::move(hb)};
  }
  // Flat directions of f (inactive TPC) are curved only by the 1/t barrier, so
  // the system is legitimately ill-conditioned at large t. Any positive
  // condition estimate is accepted as long as the solve is backward stable.
  const Matrix dr = hb.assembled();
  LinearSolve sol = solve_symmetric_indefinite(dr, rhs, 0.0);
  const double backward = (dr * sol.x - rhs).norm();
  const double scale = dr.norm() * sol.x.norm() + rhs.norm();
  if (!sol.x.allFinite() || !(backward <= 1e-10 * scale)) {
    throw SingularSystemError("Newton system solve lost accuracy (backward error " +
                                  format_number(backward / scale) + ")",
                              sol.rcond);
  }
  return {std::move(sol.x), norm, sol.rcond, std::move(hb)};
}

NewtonStep newton_step(const ChannelSet& ch, const SaddlePoint& z, double t) {
  return newton_step(BarrierModel(ch), z, t);
}

Backtrack backtrack(const BarrierModel& model, const SaddlePoint& z, const Vector& delta_z, double t,
                    double alpha, double beta, int max_steps, bool unit_first_step) {
  const double r0 = model.residual(z, t).norm();
  const Vector z0 = z.stacked();
  const Index nx = model.nx();
  double s = unit_first_step ? 1.0 : beta;
  for (int trial = 1; trial <= max_steps; ++trial, s *= beta) {
    SaddlePoint cand = SaddlePoint::from_stacked(z0 + s * delta_z, nx);
    if (!model.interior(cand)) continue;
    const double rn = model.residual(cand, t).norm();
    if (std::isfinite(rn) && rn <= (1.0 - alpha * s) * r0) {
      return {s, std::move(cand), rn, trial};
    }
  }
  std::ostringstream os;
  os << "line search failed after " << max_steps << " trials (|r|=" << r0 << ")";
  throw LineSearchError(os.str());
}

SaddleSolution solve_saddle(const ChannelSet& ch, const SolverConfig& config) {
  config.validate();
  const BarrierModel model(ch);
  SaddlePoint z = initial_point(ch);
  std::vector<NewtonRecord> trace;

  auto objective_at = [&](const SaddlePoint& p, double t, int k) {
    const TxCovariance r(p.R());
    const double f = minimax_objective(ch, r, NoiseCovariance(p.N(ch.n1(), ch.n2())));
    const double c = secrecy_rate(ch, r);
    if (!std::isfinite(f) || !std::isfinite(c)) {
      NumericalError e("non-finite objective value");
      e.add_context(stage_context(t, k));
      throw e;
    }
    return std::pair{f, c};
  };

  double t = config.t0;
  double t_final = t;
  while (true) {
    int k = 0;
    double rn = model.residual(z, t).norm();
    double step = 0.0;
    while (true) {
      auto [f, c] = objective_at(z, t, k);
      NewtonRecord rec{t, k, rn, step, f, c, kNaN, kNaN, kNaN, kNaN, kNaN, false};
      if (rn <= config.epsilon) {
        trace.push_back(rec);
        break;
      }
      if (k >= config.max_newton_steps) {
        SolverError e("Newton iteration limit reached (|r|=" + format_number(rn) + ")");
        e.add_context(stage_context(t, k));
        throw e;
      }
      try {
        NewtonStep ns = newton_step(model, z, t);
        const EigRange ex = eig_range(-ns.hessian.txx);
        const EigRange ey = eig_range(ns.hessian.tyy);
        rec.min_eig_neg_txx = ex.min;
        rec.norm_txx = ex.norm;
        rec.min_eig_tyy = ey.min;
        rec.norm_tyy = ey.norm;
        rec.rcond = ns.rcond;
        rec.definite = ex.cholesky && ey.cholesky;
        trace.push_back(rec);
        Backtrack bt = backtrack(model, z, ns.delta_z, t, config.alpha, config.beta,
                                 config.max_backtrack_steps, config.unit_first_step);
        z = std::move(bt.z_next);
        rn = bt.residual_norm;
        step = bt.s;
      } catch (SolverError& e) {
        e.add_context(stage_context(t, k));
        throw;
      }
      ++k;
    }
    t_final = t;
    if (t >= config.t_max) break;
    t = std::min(t * config.eta, config.t_max);
  }

  const SymMatrix r_round = round_low_rank(z.R(), config.low_rank_threshold);
  TxCovariance r_prime(r_round);
  NoiseCovariance k_prime(z.N(ch.n1(), ch.n2()));
  const double f = minimax_objective(ch, r_prime, k_prime);
  const double c = secrecy_rate(ch, r_prime);
  const double gap = static_cast<double>(std::max(ch.m_r(), ch.n_k())) / t_final;
  return SaddleSolution{std::move(r_prime), std::move(k_prime), f, c, gap, t_final, std::move(z),
                        std::move(trace)};
}

double t_max_for_accuracy(const ChannelSet& ch, double delta_c) {
  if (!(delta_c > 0.0)) throw std::invalid_argument("delta_c must be positive");
  return static_cast<double>(std::max(ch.m_r(), ch.n_k())) / delta_c;
}

}  // namespace wtcap
