#include "interfere/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "interfere/errors.hpp"

namespace interfere {

namespace {

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

SymMatrix::SymMatrix(const MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch("SymMatrix: matrix must be square with dim >= 1");
  }
  require_finite(m, "SymMatrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidInput("SymMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(MatrixXd::Identity(dim, dim)); }

SymMatrix SymMatrix::zeros(Eigen::Index dim) { return SymMatrix(MatrixXd::Zero(dim, dim)); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (dim() != o.dim()) throw DimensionMismatch("SymMatrix +: dimension mismatch");
  return SymMatrix(m_ + o.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (dim() != o.dim()) throw DimensionMismatch("SymMatrix -: dimension mismatch");
  return SymMatrix(m_ - o.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }

EigenDecomposition eigh(const SymMatrix& m) {
  require_finite(m.mat(), "eigh");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("eigh: decomposition failed");
  }
  // Eigen already returns ascending eigenvalues.
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix pinv(const SymMatrix& m, double cutoff) {
  if (!(cutoff > 0.0)) throw InvalidInput("pinv: cutoff must be positive");
  const auto ed = eigh(m);
  const double radius = ed.values.cwiseAbs().maxCoeff();
  const Eigen::Index n = m.dim();
  MatrixXd out = MatrixXd::Zero(n, n);
  if (radius == 0.0) return SymMatrix(out);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = ed.values(i);
    if (std::abs(lambda) <= cutoff * radius) continue;
    out.noalias() += (1.0 / lambda) * ed.vectors.col(i) * ed.vectors.col(i).transpose();
  }
  return SymMatrix(out);
}

NnlsResult nnls(const MatrixXd& a, const VectorXd& b) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index n = a.cols();
  if (n < 1) throw InvalidInput("nnls: A needs at least one column");
  if (b.size() != rows) throw DimensionMismatch("nnls: rows of A and size of b differ");
  require_finite(a, "nnls");
  require_finite(b, "nnls");

  const double tol = 1e-13 * std::max(1.0, a.norm()) * std::max(1.0, b.norm());
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  VectorXd x = VectorXd::Zero(n);
  VectorXd w = a.transpose() * b;
  int iterations = 0;
  const int max_outer = static_cast<int>(10 * (n + 1));

  auto solve_passive = [&](VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    MatrixXd ap(rows, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    const VectorXd zp = ap.completeOrthogonalDecomposition().solve(b);
    z.setZero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
  };

  while (iterations < max_outer) {
    Eigen::Index pick = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) continue;
      if (w(j) > best) {
        best = w(j);
        pick = j;
      }
    }
    if (pick < 0) break;
    ++iterations;
    passive[static_cast<std::size_t>(pick)] = true;

    VectorXd z;
    solve_passive(z);
    if (z(pick) <= 0.0) {
      // Column cannot enter: numerically dependent on the passive set.
      passive[static_cast<std::size_t>(pick)] = false;
      w(pick) = 0.0;
      bool any = false;
      for (Eigen::Index j = 0; j < n; ++j)
        if (!passive[static_cast<std::size_t>(j)] && w(j) > tol) any = true;
      if (!any) break;
      continue;
    }

    int inner = 0;
    while (true) {
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      }
      if (!std::isfinite(alpha)) break;
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
      solve_passive(z);
      if (++inner > n + 5) break;
    }
    for (Eigen::Index j = 0; j < n; ++j) x(j) = passive[static_cast<std::size_t>(j)] ? z(j) : 0.0;
    w = a.transpose() * (b - a * x);
  }

  x = x.cwiseMax(0.0);
  return {x, (a * x - b).norm(), iterations};
}

bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) throw DimensionMismatch("loewner_geq: dimension mismatch");
  return eigh(a - b).values(0) >= -tol;
}

MatrixXd centering(Eigen::Index n) {
  return MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

MatrixXd contrast_basis(Eigen::Index n) {
  // Normalized Helmert contrasts.
  MatrixXd u = MatrixXd::Zero(n, n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j) {
    const double len = std::sqrt(static_cast<double>((j + 1) * (j + 2)));
    for (Eigen::Index i = 0; i <= j; ++i) u(i, j) = 1.0 / len;
    u(j + 1, j) = -static_cast<double>(j + 1) / len;
  }
  return u;
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace interfere
