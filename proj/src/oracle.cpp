#include "wtcap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wtcap/parallel.hpp"

namespace wtcap {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Largest c with tr(c S) <= P_T and tr(W3j c S) <= P_Ij for all j.
double max_scale(const ChannelSet& ch, const Matrix& s) {
  double c = ch.total_power() / s.trace();
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    const double load = ch.W3(j).cwiseProduct(s).sum();
    if (load > 0.0) c = std::min(c, ch.interference_power(j) / load);
  }
  return c;
}

double clamped_rate(const ChannelSet& ch, const TxCovariance& r) {
  const double c = secrecy_rate(ch, r);
  return std::isfinite(c) ? std::max(0.0, c) : 0.0;
}

struct Candidate {
  double rate = -1.0;
  std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
  Matrix r;
};

bool better(const Candidate& a, const Candidate& b) {
  return a.rate > b.rate || (a.rate == b.rate && a.index < b.index);
}

// Evaluates `count` candidates with indices [first, first + count) in fixed
// chunks and merges chunk winners in index order.
template <typename Gen>
Candidate search_block(std::uint64_t first, std::uint64_t count, unsigned threads, Gen&& gen) {
  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<Candidate> best(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t lo = first + c * kChunk;
    const std::uint64_t hi = std::min(first + count, lo + kChunk);
    Candidate local;
    for (std::uint64_t i = lo; i < hi; ++i) {
      Candidate cand = gen(i);
      if (better(cand, local)) local = std::move(cand);
    }
    best[c] = std::move(local);
  });
  Candidate out;
  for (auto& c : best) {
    if (better(c, out)) out = std::move(c);
  }
  return out;
}

}  // namespace

void McConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("MC samples must be >= 1");
  if (refine_rounds < 0) throw std::invalid_argument("refine_rounds must be >= 0");
}

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ index));
}

TxCovariance sample_feasible_covariance(const ChannelSet& ch, std::mt19937_64& rng) {
  const Index m = ch.m();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const bool truncate = unif(rng) < 1.0 / static_cast<double>(m + 1);
  Matrix a(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = normal(rng);
  }
  Matrix s = symmetrized(a * a.transpose());
  if (truncate) {
    std::uniform_int_distribution<Index> rank_dist(1, m);
    const Index k = rank_dist(rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Matrix v = es.eigenvectors().rightCols(k);
    const Vector ev = es.eigenvalues().tail(k).cwiseMax(0.0);
    s = symmetrized(v * ev.asDiagonal() * v.transpose());
  }
  const double u = 1.0 - unif(rng);  // (0, 1]
  if (!(s.trace() > 0.0)) return TxCovariance(SymMatrix::zero(m));
  return TxCovariance(SymMatrix(u * max_scale(ch, s) * s));
}

McResult mc_search(const ChannelSet& ch, const McConfig& config) {
  config.validate();
  const Index m = ch.m();

  Candidate best = search_block(0, config.samples, config.threads, [&](std::uint64_t i) {
    auto rng = sample_stream(config.seed, i);
    TxCovariance r = sample_feasible_covariance(ch, rng);
    const double rate = clamped_rate(ch, r);
    return Candidate{rate, i, r.matrix()};
  });

  // Local rounds: symmetric Gaussian perturbations of shrinking size around
  // the incumbent, clipped to PSD and pulled back into the feasible set.
  const std::uint64_t per_round = std::max<std::uint64_t>(1, config.samples / 10);
  std::uint64_t next_index = config.samples;
  for (int round = 0; round < config.refine_rounds; ++round) {
    const Matrix center = best.r;
    const double scale = std::max(center.trace(), ch.total_power() * 1e-3) / static_cast<double>(m) *
                         std::pow(0.5, round + 1);
    Candidate cand = search_block(next_index, per_round, config.threads, [&](std::uint64_t i) {
      auto rng = sample_stream(config.seed, i);
      std::normal_distribution<double> normal(0.0, 1.0);
      Matrix b(m, m);
      for (Index jj = 0; jj < m; ++jj) {
        for (Index ii = 0; ii < m; ++ii) b(ii, jj) = normal(rng);
      }
      Matrix p = center + scale * symmetrized(b);
      Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(p));
      p = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
          es.eigenvectors().transpose();
      p = symmetrized(p);
      if (!(p.trace() > 0.0)) return Candidate{0.0, i, Matrix::Zero(m, m)};
      p *= std::min(1.0, max_scale(ch, p));
      TxCovariance r{SymMatrix(p)};
      return Candidate{clamped_rate(ch, r), i, r.matrix()};
    });
    next_index += per_round;
    if (cand.rate > best.rate) best = std::move(cand);
  }

  return McResult{TxCovariance(SymMatrix(best.r)), best.rate, best.index};
}

}  // namespace wtcap
