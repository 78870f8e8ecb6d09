#pragma once

// Dense symmetric-matrix utilities used by the derivative formulas: half
// vectorization, duplication matrices, Kronecker products, definiteness tests
// and symmetric indefinite solves. Real double precision throughout.

#include <limits>
#include <optional>

#include <Eigen/Dense>

namespace wtcap {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Square matrix whose entries are bit-exactly symmetric.
///
/// Construction averages the input with its transpose, so entry(i,j) and
/// entry(j,i) are the same double after construction.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Index n);
  static SymMatrix zero(Index n);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// Length of veh for an m x m matrix: m(m+1)/2.
constexpr Index veh_size(Index m) { return m * (m + 1) / 2; }

/// Column-major stacking of the lower triangle, diagonal included.
Vector veh(const SymMatrix& m);

/// Inverse of veh. Throws DimensionError when the length is not triangular.
SymMatrix sym_from_veh(const Vector& v);

/// Column-major vec of a general matrix.
Vector vec(const Matrix& m);

/// D with vec(R) = D * veh(R) for every symmetric m x m R.
struct DuplicationMap {
  Index m;
  Matrix D;  // m^2 x m(m+1)/2, 0/1 entries
};

/// D with vec([[0, dN], [dN^T, 0]]) = D * vec(dN) for every n1 x n2 block dN.
/// The block layout matches the structured noise covariance K = [[I, N], [N^T, I]].
struct ReducedDuplicationMap {
  Index n1;
  Index n2;
  Matrix D;  // (n1+n2)^2 x n1*n2, 0/1 entries
};

DuplicationMap duplication_matrix(Index m);
ReducedDuplicationMap reduced_duplication_matrix(Index n1, Index n2);

Matrix kron(const Matrix& a, const Matrix& b);

struct LinearSolve {
  Vector x;
  double rcond;  // LAPACK 1-norm reciprocal condition estimate
};

/// Solves A x = b for symmetric (possibly indefinite) A with a Bunch-Kaufman
/// LDL^T factorization. Only the lower triangle of A is read.
/// Throws SingularSystemError when the condition estimate of the equilibrated
/// matrix is not above min_rcond (machine epsilon by default).
LinearSolve solve_symmetric_indefinite(const Matrix& a, const Vector& b,
                                       double min_rcond = std::numeric_limits<double>::epsilon());

double min_eigenvalue(const SymMatrix& m);

/// ln det of a symmetric positive definite matrix. Cholesky first, symmetric
/// eigenvalues as a fallback near singularity; nullopt when not PD.
std::optional<double> log_det_spd(const Matrix& m);

/// Inverse of a symmetric positive definite matrix via Cholesky; nullopt when
/// the factorization fails. The result is exactly symmetrized.
std::optional<Matrix> inverse_spd(const Matrix& m);

/// Average of m and its transpose.
inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace wtcap
