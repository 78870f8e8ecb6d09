#include "wtcap/bisect.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "wtcap/error.hpp"
#include "wtcap/parallel.hpp"

namespace wtcap {
namespace {

SaddleSolution solve_at(const ChannelSet& ch, double power, const SolverConfig& cfg, int k) {
  try {
    return solve_saddle(ch.with_total_power(power), cfg);
  } catch (SolverError& e) {
    std::ostringstream os;
    os << "bisection k=" << k << ", P=" << power;
    e.add_context(os.str());
    throw;
  }
}

}  // namespace

void BisectConfig::validate() const {
  if (!(epsilon_rate >= 0.0 && epsilon_rate < 1.0)) {
    throw std::invalid_argument("epsilon_rate must lie in [0, 1)");
  }
  if (!(delta_power > 0.0 && delta_power < 1.0)) {
    throw std::invalid_argument("delta_power must lie in (0, 1)");
  }
  inner.validate();
}

int bisection_step_count(double delta_power) {
  if (!(delta_power > 0.0 && delta_power < 1.0)) {
    throw std::invalid_argument("delta_power must lie in (0, 1)");
  }
  int k = 0;
  for (double width = 1.0; width > delta_power; width *= 0.5) ++k;
  return k;
}

CovarianceSolution solve_covariance(const ChannelSet& ch, const BisectConfig& config) {
  config.validate();
  const double p_t = ch.total_power();

  const SaddleSolution full = solve_at(ch, p_t, config.inner, 0);
  const double capacity = full.f_value;

  if (capacity <= full.gap_bound) {
    CovarianceSolution out{TxCovariance(SymMatrix::zero(ch.m())),
                           std::max(capacity, 0.0),
                           0.0,
                           std::max(capacity, 0.0),
                           0.0,
                           p_t,
                           0.0,
                           capacity,
                           true,
                           {}};
    return out;
  }

  const double target = (1.0 - config.epsilon_rate) * capacity;
  double p_min = 0.0;
  double p_max = p_t;
  double p = 0.5 * p_t;
  double f_p = solve_at(ch, p, config.inner, 0).f_value;

  std::vector<BisectRecord> trace;
  int k = 0;
  do {
    if (f_p < target) {
      p_min = p;
    } else {
      p_max = p;
    }
    p = 0.5 * (p_min + p_max);
    ++k;
    const SaddleSolution s = solve_at(ch, p, config.inner, k);
    f_p = s.f_value;
    trace.push_back({k, p_min, p_max, p, s.f_value, s.c_of_r});
  } while (p_max - p_min > config.delta_power * p_t);

  // p_min stays at 0 only when the saturation power is below delta * P_T; the
  // smallest bracketed power with a usable solve is then p_max.
  const double final_power = p_min > 0.0 ? p_min : p_max;
  SaddleSolution fin = solve_at(ch, final_power, config.inner, k + 1);
  const double achieved = std::max(0.0, fin.c_of_r);
  const double cap = std::max(0.0, capacity);
  return CovarianceSolution{std::move(fin.r_prime),
                            cap,
                            achieved,
                            cap - achieved,
                            p_min,
                            p_max - p_min,
                            final_power,
                            fin.f_value,
                            false,
                            std::move(trace)};
}

MinPowerSolution min_power_for_rate(const ChannelSet& ch, const BisectConfig& config) {
  CovarianceSolution sol = solve_covariance(ch, config);
  if (sol.zero_capacity) return {0.0, std::move(sol.r_star), sol.c_achieved};
  MinPowerSolution best{sol.final_power, std::move(sol.r_star), sol.c_achieved};

  // The upper bracket end meets the rate target through f; its covariance is
  // used when it also achieves the higher C(R).
  const double p_max = sol.p_t_min + sol.delta_p;
  if (p_max != sol.final_power) {
    SaddleSolution upper = solve_at(ch, p_max, config.inner, static_cast<int>(sol.bisect_trace.size()) + 1);
    const double rate = std::max(0.0, upper.c_of_r);
    if (rate > best.rate) best = {p_max, std::move(upper.r_prime), rate};
  }
  return best;
}

std::vector<CurvePoint> capacity_curve(const ChannelSet& ch, std::span<const double> powers,
                                       const SolverConfig& config, unsigned threads) {
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (!(powers[i] > 0.0)) throw std::invalid_argument("capacity_curve powers must be positive");
    if (i > 0 && !(powers[i] > powers[i - 1])) {
      throw std::invalid_argument("capacity_curve powers must be strictly increasing");
    }
  }
  config.validate();
  std::vector<CurvePoint> out(powers.size());
  parallel_for(powers.size(), threads, [&](std::size_t i) {
    CurvePoint& pt = out[i];
    pt.power = powers[i];
    try {
      const SaddleSolution s = solve_saddle(ch.with_total_power(powers[i]), config);
      pt.capacity = s.f_value;
      pt.c_of_r = s.c_of_r;
      pt.gap_bound = s.gap_bound;
    } catch (const Error& e) {
      pt.error = e.what();
    }
  });
  return out;
}

}  // namespace wtcap
