#pragma once

// Power bisection for the singular case. When the total power constraint is
// inactive at the saddle point, R' need not maximize C(R). Bisecting the
// total power down to the saturation point P0 makes the constraint active
// again, so the saddle covariance there is capacity achieving. The same search
// yields the minimum power needed to reach the capacity.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wtcap/channel.hpp"
#include "wtcap/newton.hpp"

namespace wtcap {

struct BisectConfig {
  double epsilon_rate = 1e-4;  // rate tolerance, [0, 1)
  double delta_power = 1e-3;   // power accuracy relative to P_T, (0, 1)
  SolverConfig inner;

  void validate() const;
};

struct BisectRecord {
  int k;
  double p_min;
  double p_max;
  double p;
  double f_value;  // f(R'(p), K'(p))
  double c_of_r;   // C(R'(p)), raw
};

struct CovarianceSolution {
  TxCovariance r_star;
  double c_capacity;  // f(R', K') at the full power P_T, clamped at 0
  double c_achieved;  // C(R_star), clamped at 0
  double delta_c;     // c_capacity - c_achieved
  double p_t_min;
  double delta_p;     // p_max - p_min at exit
  double final_power; // power of the last solve that produced r_star
  double final_f;     // f(R', K') of that solve
  /// Set when the full-power capacity is within its gap bound of zero; no
  /// bisection is run and r_star is the zero matrix.
  bool zero_capacity = false;
  std::vector<BisectRecord> bisect_trace;
};

CovarianceSolution solve_covariance(const ChannelSet& ch, const BisectConfig& config = {});

/// ceil(log2(1/delta)): the number of halvings until the bracket is <= delta * P_T.
int bisection_step_count(double delta_power);

struct MinPowerSolution {
  double p_min;
  TxCovariance r;
  double rate;  // C(r), clamped at 0
};

/// Minimum total power achieving the full-power capacity C(P_T) under the
/// interference constraints, i.e. min{P_T, P0}, with a covariance attaining it.
MinPowerSolution min_power_for_rate(const ChannelSet& ch, const BisectConfig& config = {});

struct CurvePoint {
  double power;
  std::optional<double> capacity;  // f(R', K') at this total power
  double c_of_r = 0.0;
  double gap_bound = 0.0;
  std::string error;  // non-empty when the solve failed
};

/// Capacity at each total power (interference powers fixed). Points are
/// independent and may be evaluated on `threads` workers; output order
/// follows `powers`.
std::vector<CurvePoint> capacity_curve(const ChannelSet& ch, std::span<const double> powers,
                                       const SolverConfig& config = {}, unsigned threads = 1);

}  // namespace wtcap
