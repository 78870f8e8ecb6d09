#pragma once

// Test-only oracles. Nothing here calls into the barrier module: values are
// rebuilt from determinants, derivatives from central differences, and the
// resolvent forms of Z1 and Z2 are evaluated directly.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wtcap/channel.hpp"
#include "wtcap/matcore.hpp"

namespace wtcap::test {

inline std::string fixture(const std::string& name) { return std::string(WTCAP_FIXTURE_DIR) + "/" + name; }

inline ChannelSet load_fixture(const std::string& name) { return load_channel_file(fixture(name)); }

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  }
  return a;
}

inline Matrix random_symmetric(Index m, std::mt19937_64& rng) {
  const Matrix a = gaussian(m, m, rng);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_spd(Index m, std::mt19937_64& rng, double shift = 0.1) {
  const Matrix a = gaussian(m, m, rng);
  return a * a.transpose() + shift * Matrix::Identity(m, m);
}

/// Gaussian channel with m in [2, 4] antennas at every node, one or two
/// eavesdroppers and one or two primary receivers. P_T in [0, 20] dB and
/// P_Ij in [0, 10] dB.
inline ChannelSet random_channel(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ant(2, 4);
  std::uniform_int_distribution<int> count(1, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index m = ant(rng);
  const Matrix h1 = gaussian(ant(rng), m, rng);
  std::vector<Matrix> evs;
  for (int i = count(rng); i > 0; --i) evs.push_back(gaussian(ant(rng), m, rng));
  std::vector<Matrix> prs;
  std::vector<double> p_i;
  for (int j = count(rng); j > 0; --j) {
    prs.push_back(gaussian(count(rng), m, rng));
    p_i.push_back(std::pow(10.0, unif(rng)));
  }
  return ChannelSet(h1, evs, prs, std::pow(10.0, 2.0 * unif(rng)), p_i);
}

/// Strictly feasible R (20-80% of the largest feasible scale) and N with
/// spectral norm below 0.7.
inline std::pair<Matrix, Matrix> random_interior(const ChannelSet& ch, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix r = random_spd(ch.m(), rng, 0.5);
  double c = ch.total_power() / r.trace();
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    c = std::min(c, ch.interference_power(j) / (ch.W3(j) * r).trace());
  }
  r *= (0.2 + 0.6 * unif(rng)) * c;
  Matrix n = gaussian(ch.n1(), ch.n2(), rng);
  Eigen::JacobiSVD<Matrix> svd(n);
  n *= 0.7 * unif(rng) / svd.singularValues()(0);
  return {0.5 * (r + r.transpose()), n};
}

inline Matrix k_of(const Matrix& n) {
  const Index n1 = n.rows();
  const Index n2 = n.cols();
  Matrix k = Matrix::Identity(n1 + n2, n1 + n2);
  k.topRightCorner(n1, n2) = n;
  k.bottomLeftCorner(n2, n1) = n.transpose();
  return k;
}

inline double logdet(const Matrix& a) { return std::log(a.determinant()); }

/// f_t from LU determinants.
inline double ft_direct(const ChannelSet& ch, const Matrix& r, const Matrix& n, double t) {
  const Matrix k = k_of(n);
  const Index m = ch.m();
  const Matrix& h = ch.H();
  double f = logdet(k + h * r * h.transpose()) - logdet(k) - logdet(Matrix::Identity(m, m) + ch.W2() * r);
  double b = logdet(r) + std::log(ch.total_power() - r.trace()) - logdet(k);
  for (std::size_t j = 0; j < ch.pr_count(); ++j) b += std::log(ch.interference_power(j) - (ch.W3(j) * r).trace());
  return f + b / t;
}

/// Independent index bookkeeping for veh: position of (i, j), i >= j.
inline Index veh_pos(Index m, Index i, Index j) { return j * m - j * (j - 1) / 2 + (i - j); }

inline Matrix sym_from_x(const Vector& x, Index m) {
  Matrix r(m, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = j; i < m; ++i) r(i, j) = r(j, i) = x(veh_pos(m, i, j));
  }
  return r;
}

inline Vector x_from_sym(const Matrix& r) {
  const Index m = r.rows();
  Vector x(m * (m + 1) / 2);
  for (Index j = 0; j < m; ++j) {
    for (Index i = j; i < m; ++i) x(veh_pos(m, i, j)) = r(i, j);
  }
  return x;
}

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

inline Vector fd_gradient(const ScalarFn& f, const Vector& z, double h) {
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    Vector zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    g(i) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return g;
}

inline Matrix fd_jacobian(const VectorFn& f, const Vector& z, double h) {
  const Vector f0 = f(z);
  Matrix j(f0.size(), z.size());
  for (Index i = 0; i < z.size(); ++i) {
    Vector zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    j.col(i) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return j;
}

/// Z1 = (I + H^T K^-1 H R)^-1 H^T K^-1 H
inline Matrix z1_resolvent(const ChannelSet& ch, const Matrix& r, const Matrix& k) {
  const Matrix a = ch.H().transpose() * k.lu().solve(ch.H());
  return (Matrix::Identity(ch.m(), ch.m()) + a * r).lu().solve(a);
}

/// Z2 = (I + W2 R)^-1 W2
inline Matrix z2_resolvent(const ChannelSet& ch, const Matrix& r) {
  return (Matrix::Identity(ch.m(), ch.m()) + ch.W2() * r).lu().solve(ch.W2());
}

/// grad_x f_t assembled entrywise from the resolvent forms: for a symmetric
/// gradient G of a function of symmetric R, d/dx_(ij) = G_ii on the diagonal
/// and G_ij + G_ji off it.
inline Vector gx_resolvent(const ChannelSet& ch, const Matrix& r, const Matrix& n, double t) {
  const Index m = ch.m();
  const Matrix k = k_of(n);
  Matrix g = z1_resolvent(ch, r, k) - z2_resolvent(ch, r) + r.inverse() / t;
  g -= Matrix::Identity(m, m) / (t * (ch.total_power() - r.trace()));
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    g -= ch.W3(j) / (t * (ch.interference_power(j) - (ch.W3(j) * r).trace()));
  }
  Vector x(m * (m + 1) / 2);
  for (Index j = 0; j < m; ++j) {
    for (Index i = j; i < m; ++i) x(veh_pos(m, i, j)) = i == j ? g(i, i) : g(i, j) + g(j, i);
  }
  return x;
}

}  // namespace wtcap::test
