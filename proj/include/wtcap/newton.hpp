#pragma once

// Barrier-method driver with residual-form Newton iterations for the max-min
// problem. Each barrier stage solves grad f_t = 0 jointly in (x, y) and warm
// starts the next stage at t := eta * t.

#include <vector>

#include "wtcap/barrier.hpp"
#include "wtcap/channel.hpp"

namespace wtcap {

struct SolverConfig {
  double alpha = 0.3;             // accepted fraction of linear residual decrease, (0, 0.5)
  double beta = 0.5;              // step shrink factor, (0, 1)
  double eta = 5.0;               // barrier growth factor, > 1
  double t0 = 1e2;
  double t_max = 1e5;
  double epsilon = 1e-8;          // residual norm target per barrier stage
  int max_newton_steps = 200;     // per barrier stage
  int max_backtrack_steps = 60;
  /// Eigenvalues of the final R below this fraction of tr R are zeroed.
  double low_rank_threshold = 1e-8;
  /// Start each line search at s = 1. When false the first trial is s = beta.
  bool unit_first_step = true;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// One row of the iteration trace: the state at iterate k of barrier stage t.
struct NewtonRecord {
  double t;
  int k;
  double residual_norm;
  double step_size;  // step that produced this iterate; 0 for k = 0
  double f_value;    // f(R_k, K_k)
  double c_of_r;     // C(R_k)
  // Hessian diagnostics at this iterate; NaN on the final (converged) row.
  double min_eig_neg_txx;
  double min_eig_tyy;
  double norm_txx;  // spectral norms of the blocks
  double norm_tyy;
  double rcond;
  bool definite;  // Cholesky of -Txx and Tyy both succeed; false for k with no step
};

struct SaddleSolution {
  TxCovariance r_prime;   // after low-rank rounding
  NoiseCovariance k_prime;
  double f_value;         // f(R', K')
  double c_of_r;          // C(R'), raw (may be negative)
  double gap_bound;       // max(m_R, n_K) / t_final
  double t_final;
  SaddlePoint z;          // final barrier iterate, before rounding
  std::vector<NewtonRecord> trace;
};

struct NewtonStep {
  Vector delta_z;
  double residual_norm;
  double rcond;
  HessianBlocks hessian;
};

struct Backtrack {
  double s;
  SaddlePoint z_next;
  double residual_norm;
  int trials;
};

/// Isotropic start R0 = (P_T / a) I with a = 2 max{m, tr(W3j) P_T / P_Ij}, N0 = 0.
SaddlePoint initial_point(const ChannelSet& ch);

/// Solves Dr dz = -r(z) with a symmetric indefinite factorization.
NewtonStep newton_step(const BarrierModel& model, const SaddlePoint& z, double t);
NewtonStep newton_step(const ChannelSet& ch, const SaddlePoint& z, double t);

/// Backtracking on the residual norm: largest s in {1, beta, beta^2, ...}
/// (or {beta, beta^2, ...} when unit_first_step is false) with
/// |r(z + s dz)| <= (1 - alpha s) |r(z)| and z + s dz strictly interior.
/// Throws LineSearchError after max_steps trials.
Backtrack backtrack(const BarrierModel& model, const SaddlePoint& z, const Vector& delta_z, double t,
                    double alpha, double beta, int max_steps = 60, bool unit_first_step = true);

SaddleSolution solve_saddle(const ChannelSet& ch, const SolverConfig& config = {});

/// Smallest t_max whose barrier gap bound max(m_R, n_K)/t_max is delta_c.
double t_max_for_accuracy(const ChannelSet& ch, double delta_c);

}  // namespace wtcap
