#pragma once

// Dense linear-algebra kernel shared by every other module.

#include <Eigen/Dense>

namespace interfere {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Square matrix that is exactly symmetric as stored.
///
/// Construction from an arbitrary matrix checks near-symmetry (relative
/// 1e-9) and then stores the symmetrized average, so (i,j) and (j,i) are
/// bitwise identical afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const MatrixXd& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zeros(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const MatrixXd& mat() const { return m_; }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

 private:
  MatrixXd m_;
};

struct EigenDecomposition {
  VectorXd values;   // ascending
  MatrixXd vectors;  // orthonormal columns, vectors.col(i) pairs with values(i)
};

EigenDecomposition eigh(const SymMatrix& m);

/// Moore-Penrose pseudoinverse. Eigenvalues with |lambda| <= cutoff * max|lambda|
/// are treated as zero.
SymMatrix pinv(const SymMatrix& m, double cutoff = 1e-10);

struct NnlsResult {
  VectorXd x;
  double residual = 0.0;  // ||Ax - b||_2
  int iterations = 0;
};

/// Lawson-Hanson active-set NNLS. Pivots on the largest dual variable,
/// ties resolved to the lowest column index.
NnlsResult nnls(const MatrixXd& a, const VectorXd& b);

/// True iff min eig(a - b) >= -tol.
bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol);

/// B_n = I_n - J_n / n.
MatrixXd centering(Eigen::Index n);

/// Orthonormal basis (n x (n-1)) of the orthogonal complement of 1_n.
MatrixXd contrast_basis(Eigen::Index n);

/// Kronecker product of two dense matrices.
MatrixXd kron(const MatrixXd& a, const MatrixXd& b);

}  // namespace interfere
