#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "wtcap/barrier.hpp"
#include "wtcap/cli.hpp"
#include "wtcap/error.hpp"

namespace wtcap::cli {
namespace {

constexpr double kFdStep = 1e-5;

double max_scale(const ChannelSet& ch, const Matrix& s) {
  double c = ch.total_power() / s.trace();
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    const double load = ch.W3(j).cwiseProduct(s).sum();
    if (load > 0.0) c = std::min(c, ch.interference_power(j) / load);
  }
  return c;
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  }
  return a;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Well-conditioned R at 20-80% of the largest feasible scale, and N with
// spectral norm below 0.7.
SaddlePoint random_interior(const ChannelSet& ch, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index m = ch.m();
  const Matrix a = gaussian(m, m, rng);
  Matrix s = symmetrized(a * a.transpose() / static_cast<double>(m)) + 0.5 * Matrix::Identity(m, m);
  s *= (0.2 + 0.6 * unif(rng)) * max_scale(ch, s);

  Matrix n = gaussian(ch.n1(), ch.n2(), rng);
  const double sn = spectral_norm(n);
  if (sn > 0.0) n *= 0.7 * unif(rng) / sn;
  return SaddlePoint::from(SymMatrix(s), n);
}

Vector fd_steps(const ChannelSet& ch, const SaddlePoint& z) {
  const double rs = z.R().trace() / static_cast<double>(ch.m());
  Vector h(z.size());
  for (Index i = 0; i < z.x.size(); ++i) h(i) = kFdStep * std::max(std::abs(z.x(i)), rs);
  for (Index i = 0; i < z.y.size(); ++i) h(z.x.size() + i) = kFdStep * std::max(std::abs(z.y(i)), 0.1);
  return h;
}

double gradient_error(const BarrierModel& model, const SaddlePoint& z, double t) {
  const Vector g = model.residual(z, t).stacked();
  const Vector z0 = z.stacked();
  const Vector h = fd_steps(model.channel(), z);
  Vector fd(g.size());
  for (Index i = 0; i < z0.size(); ++i) {
    Vector zp = z0, zm = z0;
    zp(i) += h(i);
    zm(i) -= h(i);
    fd(i) = (model.value(SaddlePoint::from_stacked(zp, model.nx()), t) -
             model.value(SaddlePoint::from_stacked(zm, model.nx()), t)) /
            (2.0 * h(i));
  }
  return (g - fd).norm() / (1.0 + g.norm());
}

double hessian_error(const BarrierModel& model, const SaddlePoint& z, double t, double txy_scale) {
  HessianBlocks hb = model.hessian(z, t);
  hb.txy *= txy_scale;
  const Matrix an = hb.assembled();
  const Vector z0 = z.stacked();
  const Vector h = fd_steps(model.channel(), z);
  Matrix fd(an.rows(), an.cols());
  for (Index j = 0; j < z0.size(); ++j) {
    Vector zp = z0, zm = z0;
    zp(j) += h(j);
    zm(j) -= h(j);
    fd.col(j) = (model.residual(SaddlePoint::from_stacked(zp, model.nx()), t).stacked() -
                 model.residual(SaddlePoint::from_stacked(zm, model.nx()), t).stacked()) /
                (2.0 * h(j));
  }
  const Index nx = model.nx();
  const Index ny = model.ny();
  auto block_err = [&](Index r0, Index c0, Index rows, Index cols) {
    if (rows == 0 || cols == 0) return 0.0;
    const Matrix a = an.block(r0, c0, rows, cols);
    return (a - fd.block(r0, c0, rows, cols)).norm() / (1.0 + a.norm());
  };
  return std::max({block_err(0, 0, nx, nx), block_err(0, nx, nx, ny), block_err(nx, 0, ny, nx),
                   block_err(nx, nx, ny, ny)});
}

Matrix unit_symmetric(Index m, std::mt19937_64& rng) {
  Matrix d = symmetrized(gaussian(m, m, rng));
  const double nrm = d.norm();
  return nrm > 0.0 ? Matrix(d / nrm) : d;
}

Matrix project_feasible(const ChannelSet& ch, const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(r));
  Matrix p = symmetrized(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                         es.eigenvectors().transpose());
  if (p.trace() > 0.0) p *= std::min(1.0, max_scale(ch, p));
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::vector<CheckResult> run_validation(const ChannelSet& ch, const RunConfig& cfg) {
  const ValidateOptions& opt = cfg.validate;
  if (opt.fd_points < 1 || opt.saddle_points < 1) throw std::invalid_argument("validation point counts must be >= 1");
  cfg.solver.validate();
  std::vector<CheckResult> out;
  const BarrierModel model(ch);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Derivative checks at random interior points and barrier weights.
  double grad_err = 0.0;
  double hess_err = 0.0;
  for (int p = 0; p < opt.fd_points; ++p) {
    const SaddlePoint z = random_interior(ch, rng);
    const double t = std::pow(10.0, 1.0 + 3.0 * unif(rng));
    grad_err = std::max(grad_err, gradient_error(model, z, t));
    hess_err = std::max(hess_err, hessian_error(model, z, t, opt.txy_scale));
  }
  out.push_back({"gradient_fd", grad_err < opt.grad_tol, grad_err, opt.grad_tol,
                 std::to_string(opt.fd_points) + " points, |r - FD| / (1 + |r|)"});
  out.push_back({"hessian_fd", hess_err < opt.hess_tol, hess_err, opt.hess_tol,
                 "worst block, |T - FD| / (1 + |T|)"});

  const SaddleSolution sol = solve_saddle(ch, cfg.solver);

  // Definiteness and contraction along every accepted iterate.
  double def_ratio = std::numeric_limits<double>::infinity();
  bool rcond_ok = true;
  bool cholesky_ok = true;
  double contraction = 0.0;
  for (std::size_t i = 0; i < sol.trace.size(); ++i) {
    const NewtonRecord& rec = sol.trace[i];
    if (std::isfinite(rec.rcond)) {
      def_ratio = std::min(def_ratio, rec.min_eig_neg_txx / std::max(rec.norm_txx, 1e-300));
      if (rec.norm_tyy > 0.0) def_ratio = std::min(def_ratio, rec.min_eig_tyy / rec.norm_tyy);
      rcond_ok = rcond_ok && rec.rcond > 0.0;
      cholesky_ok = cholesky_ok && rec.definite;
    }
    if (i > 0 && rec.k > 0 && sol.trace[i - 1].t == rec.t) {
      const double bound = (1.0 - cfg.solver.alpha * rec.step_size) * sol.trace[i - 1].residual_norm;
      contraction = std::max(contraction, rec.residual_norm / bound);
    }
  }
  out.push_back({"definiteness", cholesky_ok && rcond_ok, def_ratio, 0.0,
                 "Cholesky of -Txx and Tyy and rcond > 0 at every iterate; measured is min "
                 "lambda_min/||block||"});
  out.push_back({"residual_contraction", contraction <= 1.0, contraction, 1.0,
                 "max |r_k+1| / ((1 - alpha s)|r_k|)"});

  SolverConfig ref_cfg = cfg.solver;
  ref_cfg.t_max = std::max(opt.saddle_t_max, ref_cfg.t0);
  ref_cfg.epsilon = std::max(opt.saddle_epsilon, ref_cfg.epsilon);
  const SaddleSolution ref = solve_saddle(ch, ref_cfg);
  const double f_ref = ref.f_value;
  const double drift = std::abs(sol.f_value - f_ref);
  const double drift_tol = sol.gap_bound + ref.gap_bound;
  out.push_back({"barrier_gap", drift <= drift_tol, drift, drift_tol,
                 "|f - f_ref| against the two gap bounds, t_ref=" + fmt(ref.t_final)});

  // Saddle inequalities at the reference solution.
  const Matrix& r_star = ref.r_prime.matrix();
  const Matrix& n_star = ref.k_prime.N();
  double r_gain = -std::numeric_limits<double>::infinity();
  double k_gain = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < opt.saddle_points; ++p) {
    const double rad = opt.saddle_radius * (1.0 - unif(rng));
    const Matrix rp = project_feasible(ch, r_star + rad * unit_symmetric(ch.m(), rng));
    r_gain = std::max(r_gain, minimax_objective(ch, TxCovariance(SymMatrix(rp)), ref.k_prime) - f_ref);

    Matrix dn = gaussian(ch.n1(), ch.n2(), rng);
    if (dn.norm() > 0.0) dn *= opt.saddle_radius * (1.0 - unif(rng)) / dn.norm();
    for (int halving = 0; halving < 60; ++halving, dn *= 0.5) {
      const Matrix np = n_star + dn;
      if (!log_det_spd(structured_noise(np))) continue;
      k_gain = std::max(k_gain, f_ref - minimax_objective(ch, ref.r_prime, NoiseCovariance(np)));
      break;
    }
  }
  out.push_back({"saddle_R", r_gain <= opt.saddle_tol, r_gain, opt.saddle_tol,
                 "max f(R'+dR, K') - f(R', K') over feasible dR"});
  out.push_back({"saddle_K", k_gain <= opt.saddle_tol, k_gain, opt.saddle_tol,
                 "max f(R', K') - f(R', K'+dK) over dK with K > 0"});

  McConfig mc = cfg.mc;
  mc.threads = cfg.threads;
  const McResult best = mc_search(ch, mc);
  out.push_back({"mc_upper", best.best_rate <= f_ref + opt.mc_upper_tol, best.best_rate - f_ref,
                 opt.mc_upper_tol, "MC_rate - f_ref, MC_rate=" + fmt(best.best_rate)});
  out.push_back({"mc_slack", f_ref - best.best_rate <= opt.mc_slack, f_ref - best.best_rate, opt.mc_slack,
                 std::to_string(mc.samples) + " samples"});
  return out;
}

}  // namespace wtcap::cli
