#include "wtcap/matcore.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "wtcap/error.hpp"

namespace wtcap {
SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DimensionError("SymMatrix requires a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  m_ = symmetrized(m);
}

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }

Vector veh(const SymMatrix& m) {
  const Index n = m.dim();
  Vector v(veh_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) v(k++) = m(i, j);
  }
  return v;
}

SymMatrix sym_from_veh(const Vector& v) {
  Index n = 0;
  while (veh_size(n) < v.size()) ++n;
  if (n == 0 || veh_size(n) != v.size()) {
    throw DimensionError("veh vector length " + std::to_string(v.size()) +
                         " is not a triangular number");
  }
  Matrix m(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  }
  return SymMatrix(m);
}

Vector vec(const Matrix& m) { return m.reshaped(); }

DuplicationMap duplication_matrix(Index m) {
  if (m < 1) throw DimensionError("duplication matrix needs m >= 1, got " + std::to_string(m));
  Matrix d = Matrix::Zero(m * m, veh_size(m));
  Index k = 0;
  for (Index j = 0; j < m; ++j) {
    for (Index i = j; i < m; ++i) {
      d(i + j * m, k) = 1.0;
      d(j + i * m, k) = 1.0;
      ++k;
    }
  }
  return {m, std::move(d)};
}

ReducedDuplicationMap reduced_duplication_matrix(Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) {
    throw DimensionError("reduced duplication matrix needs n1, n2 >= 1, got " +
                         std::to_string(n1) + ", " + std::to_string(n2));
  }
  const Index n = n1 + n2;
  Matrix d = Matrix::Zero(n * n, n1 * n2);
  // dN(i, j) sits at K(i, n1 + j) and, mirrored, at K(n1 + j, i).
  for (Index j = 0; j < n2; ++j) {
    for (Index i = 0; i < n1; ++i) {
      const Index col = i + j * n1;
      d(i + (n1 + j) * n, col) = 1.0;
      d((n1 + j) + i * n, col) = 1.0;
    }
  }
  return {n1, n2, std::move(d)};
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

LinearSolve solve_symmetric_indefinite(const Matrix& a, const Vector& b, double min_rcond) {
  const Index n = a.rows();
  if (n != a.cols() || n != b.size() || n == 0) {
    throw DimensionError("solve_symmetric_indefinite: shape mismatch");
  }
  // Symmetric power-of-two equilibration: solve (S A S) y = S b, x = S y.
  Vector scale(n);
  for (Index i = 0; i < n; ++i) {
    const double d = std::abs(a(i, i));
    scale(i) = (d > 0.0 && std::isfinite(d)) ? std::exp2(std::round(-0.5 * std::log2(d))) : 1.0;
  }
  // LAPACK works in place on a column-major copy.
  Matrix lu = scale.asDiagonal() * a * scale.asDiagonal();
  Vector x = scale.cwiseProduct(b);
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const auto ln = static_cast<lapack_int>(n);

  const double anorm = LAPACKE_dlansy(LAPACK_COL_MAJOR, '1', 'L', ln, lu.data(), ln);
  if (!std::isfinite(anorm)) {
    throw SingularSystemError("symmetric solve: matrix has non-finite entries",
                              std::numeric_limits<double>::quiet_NaN());
  }
  lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', ln, lu.data(), ln, ipiv.data());
  if (info < 0) throw DimensionError("dsytrf: illegal argument " + std::to_string(-info));
  if (info > 0) {
    throw SingularSystemError("symmetric solve: exactly singular pivot at " +
                                  std::to_string(info),
                              0.0);
  }
  double rcond = 0.0;
  info = LAPACKE_dsycon(LAPACK_COL_MAJOR, 'L', ln, lu.data(), ln, ipiv.data(), anorm, &rcond);
  if (info != 0) throw DimensionError("dsycon: illegal argument " + std::to_string(-info));
  if (!(rcond > min_rcond)) {
    throw SingularSystemError(
        "symmetric solve: singular to working precision (rcond=" + format_number(rcond) + ")", rcond);
  }
  info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', ln, 1, lu.data(), ln, ipiv.data(), x.data(), ln);
  if (info != 0) throw DimensionError("dsytrs: illegal argument " + std::to_string(-info));
  return {scale.cwiseProduct(x), rcond};
}

double min_eigenvalue(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::optional<double> log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    if ((diag.array() > 0.0).all()) return 2.0 * diag.array().log().sum();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) return std::nullopt;
  return ev.array().log().sum();
}

std::optional<Matrix> inverse_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  if (!inv.allFinite()) return std::nullopt;
  return symmetrized(inv);
}

}  // namespace wtcap
