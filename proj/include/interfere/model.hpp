#pragma once

// Covariance kernels, per-sequence information components and the quadratic
// forms that drive the minimax problem, for both neighbor-effect models.

#include <array>
#include <string>
#include <vector>

#include "interfere/numerics.hpp"
#include "interfere/sequences.hpp"

namespace interfere {

enum class ModelKind { directional, undirectional };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Within-block covariance Sigma (k x k).
struct CovarianceSpec {
  enum class Kind { identity, type_h, banded1, custom };

  int k = 0;
  Kind kind = Kind::identity;
  double a = 1.0;                 // type_h
  std::vector<double> b;          // type_h, length k (empty means zero)
  double eta = 0.0;               // banded1
  MatrixXd custom;                // custom

  static CovarianceSpec identity(int k);
  static CovarianceSpec type_h(int k, double a, std::vector<double> b = {});
  static CovarianceSpec banded1(int k, double eta);
  static CovarianceSpec custom_matrix(MatrixXd sigma);

  /// Realized Sigma. Throws InvalidCovariance on inconsistent parameters.
  MatrixXd realize() const;
};

/// Largest |eta| keeping banded1(eta) positive definite at block size k.
double banded1_eta_bound(int k);

/// The kernel B~ = S^-1 - S^-1 J S^-1 / (1' S^-1 1), S = Sigma.
struct KernelMatrix {
  SymMatrix btilde;
  bool is_type_h = false;
  double scale = 1.0;             // a, when is_type_h: B~ == B_k / a
  bool is_persymmetric = false;
  bool indefinite_sigma = false;  // built under allow_indefinite from a non-PD Sigma

  int k() const { return static_cast<int>(btilde.dim()); }
};

/// Throws InvalidCovariance when Sigma is not positive definite, unless
/// allow_indefinite is set and Sigma is nonsingular, in which case the
/// pseudoinverse stands in for Sigma^-1.
KernelMatrix build_kernel(const CovarianceSpec& spec, bool allow_indefinite = false);

struct DesignMatrices {
  MatrixXd direct;  // T: k x t, T(j, s_j) = 1
  MatrixXd left;    // L = H T, plot j sees the treatment on plot j-1
  MatrixXd right;   // R = H' T
};

DesignMatrices design_matrices(const Sequence& s);

/// C_sij = G_i' B~ G_j with G_0 = T, G_1 = L, G_2 = R.
class InfoComponents {
 public:
  InfoComponents() = default;
  explicit InfoComponents(std::array<MatrixXd, 9> c) : c_(std::move(c)) {}

  const MatrixXd& operator()(int i, int j) const { return c_[static_cast<std::size_t>(3 * i + j)]; }
  Eigen::Index t() const { return c_[0].rows(); }

  InfoComponents& operator+=(const InfoComponents& o);
  InfoComponents operator*(double s) const;

 private:
  std::array<MatrixXd, 9> c_;
};

InfoComponents info_components(const Sequence& s, const KernelMatrix& kernel);

/// Average of C_sij over the full relabeling orbit of s:
/// c_ij B_t / (t-1) + (1'C_ij 1) J_t / t^2.
InfoComponents orbit_average(const InfoComponents& c);

/// Schur complement of the nuisance (neighbor) part, using the
/// Moore-Penrose inverse:
///   directional   C = C00 - [C01 C02] [[C11 C12],[C21 C22]]^+ [C10; C20]
///   undirectional C = C00 - (C01 + C02) (C11 + C12 + C21 + C22)^+ (C10 + C20)
SymMatrix information_matrix(const InfoComponents& c, ModelKind kind);

/// q_s(x) = c00 + 2 ell'x + x'Qx together with R_s = (c_ij), c_ij = tr(B_t C_ij B_t).
struct QuadForm {
  double c00 = 0.0;
  Eigen::Vector2d ell = Eigen::Vector2d::Zero();
  Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
  Eigen::Matrix3d r3 = Eigen::Matrix3d::Zero();

  double value(const Eigen::Vector2d& x) const { return c00 + 2.0 * ell.dot(x) + x.dot(q * x); }
  Eigen::Vector2d gradient(const Eigen::Vector2d& x) const { return 2.0 * (ell + q * x); }
};

QuadForm quad_form(const Sequence& s, const KernelMatrix& kernel);

/// Univariate q~(z) = q(z, z) = q0 + q1 z + q2 z^2 of the undirectional model.
struct UniQuad {
  double q0 = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;

  double value(double z) const { return q0 + z * (q1 + z * q2); }
  double derivative(double z) const { return q1 + 2.0 * q2 * z; }
};

UniQuad undirectional(const QuadForm& f);

/// Closed-form q~ coefficients from counting statistics when B~ = B_k / a.
UniQuad type_h_coeffs(const Sequence& s, double a);
UniQuad type_h_coeffs(const Sequence& s, const KernelMatrix& kernel);

/// Model-level moments: R (3x3 directional, 2x2 undirectional) and its
/// trailing nuisance block Q (2x2 or 1x1).
struct Moments {
  MatrixXd r;
  MatrixXd q;

  double c00() const { return r(0, 0); }
  /// q* = c00 - ell' Q^-1 ell.
  double q_star() const;
};

Moments moments(const QuadForm& f, ModelKind kind);

/// Measure-level aggregate sum_s p_s R_s. weights align with forms.
struct MomentSet {
  double c00 = 0.0;
  Eigen::Vector2d ell = Eigen::Vector2d::Zero();
  Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
  Eigen::Matrix3d r3 = Eigen::Matrix3d::Zero();

  double value(const Eigen::Vector2d& x) const { return c00 + 2.0 * ell.dot(x) + x.dot(q * x); }
  double q_star() const;
};

/// Throws InvalidInput on negative weights or a total that is not 1 (+-1e-12).
MomentSet aggregate(const std::vector<double>& weights, const std::vector<QuadForm>& forms);

}  // namespace interfere
