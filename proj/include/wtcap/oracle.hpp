#pragma once

// Monte-Carlo random search over the feasible covariance set. Used only as an
// independent lower-bound check on solver output: the best sampled secrecy
// rate can never exceed the true capacity.

#include <cstdint>
#include <random>

#include "wtcap/channel.hpp"

namespace wtcap {

struct McConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  /// Local perturbation rounds around the incumbent after the global pass.
  int refine_rounds = 0;
  /// 0 = one worker per hardware thread. Results do not depend on this.
  unsigned threads = 1;

  void validate() const;
};

/// Independent random stream for sample `index` of a search seeded with `seed`.
/// Streams depend only on (seed, index), never on evaluation order.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

/// Draws R = c A A^T with A standard normal (m x m). With probability 1/(m+1)
/// the rank is first truncated to a uniform k in {1..m} by keeping the top-k
/// eigencomponents. The scale c = u * c_max with u uniform on (0, 1] and c_max
/// the largest scale meeting every power constraint, so the result is always
/// feasible.
TxCovariance sample_feasible_covariance(const ChannelSet& ch, std::mt19937_64& rng);

struct McResult {
  TxCovariance best_r;
  double best_rate;  // max over samples of max(0, C(R))
  std::uint64_t best_index;
};

/// Deterministic given (ch, config); ties go to the lowest sample index.
McResult mc_search(const ChannelSet& ch, const McConfig& config = {});

}  // namespace wtcap
