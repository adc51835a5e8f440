#include "interfere/model.hpp"

#include <cmath>
#include <numbers>

#include "interfere/errors.hpp"

namespace interfere {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::directional ? "directional" : "undirectional";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "directional") return ModelKind::directional;
  if (name == "undirectional") return ModelKind::undirectional;
  throw InvalidInput("unknown model kind '" + name + "'");
}

CovarianceSpec CovarianceSpec::identity(int k) {
  CovarianceSpec s;
  s.k = k;
  s.kind = Kind::identity;
  return s;
}

CovarianceSpec CovarianceSpec::type_h(int k, double a, std::vector<double> b) {
  CovarianceSpec s;
  s.k = k;
  s.kind = Kind::type_h;
  s.a = a;
  s.b = std::move(b);
  return s;
}

CovarianceSpec CovarianceSpec::banded1(int k, double eta) {
  CovarianceSpec s;
  s.k = k;
  s.kind = Kind::banded1;
  s.eta = eta;
  return s;
}

CovarianceSpec CovarianceSpec::custom_matrix(MatrixXd sigma) {
  CovarianceSpec s;
  s.k = static_cast<int>(sigma.rows());
  s.kind = Kind::custom;
  s.custom = std::move(sigma);
  return s;
}

double banded1_eta_bound(int k) {
  return 1.0 / (2.0 * std::cos(std::numbers::pi / static_cast<double>(k + 1)));
}

MatrixXd CovarianceSpec::realize() const {
  if (k < 1) throw InvalidCovariance("covariance: k must be >= 1");
  switch (kind) {
    case Kind::identity:
      return MatrixXd::Identity(k, k);
    case Kind::type_h: {
      if (!(a > 0.0)) throw InvalidCovariance("type_h: a must be > 0");
      VectorXd bv = VectorXd::Zero(k);
      if (!b.empty()) {
        if (static_cast<int>(b.size()) != k) throw InvalidCovariance("type_h: b must have length k");
        for (int i = 0; i < k; ++i) bv(i) = b[static_cast<std::size_t>(i)];
      }
      const VectorXd ones = VectorXd::Ones(k);
      return a * MatrixXd::Identity(k, k) + bv * ones.transpose() + ones * bv.transpose();
    }
    case Kind::banded1: {
      MatrixXd s = MatrixXd::Identity(k, k);
      for (int i = 0; i + 1 < k; ++i) s(i, i + 1) = s(i + 1, i) = eta;
      return s;
    }
    case Kind::custom:
      if (custom.rows() != k || custom.cols() != k) throw InvalidCovariance("custom: matrix must be k x k");
      return custom;
  }
  throw InvalidCovariance("covariance: unknown kind");
}

KernelMatrix build_kernel(const CovarianceSpec& spec, bool allow_indefinite) {
  const MatrixXd sigma_raw = spec.realize();
  if (!sigma_raw.allFinite()) throw InvalidCovariance("covariance: non-finite entries");
  if ((sigma_raw - sigma_raw.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma_raw.cwiseAbs().maxCoeff())) {
    throw InvalidCovariance("covariance: matrix is not symmetric");
  }
  const SymMatrix sigma(sigma_raw);
  const int k = spec.k;

  bool indefinite = false;
  if (spec.kind == CovarianceSpec::Kind::banded1 && std::abs(spec.eta) >= banded1_eta_bound(k)) {
    indefinite = true;
  }
  const auto ed = eigh(sigma);
  const double top = ed.values.cwiseAbs().maxCoeff();
  if (!(ed.values(0) > 1e-12 * top)) indefinite = true;
  if (indefinite) {
    if (!allow_indefinite) {
      throw InvalidCovariance("covariance is not positive definite (pass allow_indefinite to proceed)");
    }
    if (ed.values.cwiseAbs().minCoeff() <= 1e-12 * top) {
      throw InvalidCovariance("covariance is singular");
    }
  }

  const MatrixXd inv = indefinite ? pinv(sigma).mat() : sigma_raw.llt().solve(MatrixXd::Identity(k, k));
  const VectorXd row = inv * VectorXd::Ones(k);
  const double total = row.sum();
  if (std::abs(total) <= 1e-12 * inv.cwiseAbs().maxCoeff()) {
    throw InvalidCovariance("covariance: 1' Sigma^-1 1 vanishes");
  }
  KernelMatrix out;
  out.btilde = SymMatrix(inv - row * row.transpose() / total);
  out.indefinite_sigma = indefinite;

  const MatrixXd& bt = out.btilde.mat();
  const double mag = std::max(1.0, bt.cwiseAbs().maxCoeff());
  if (spec.kind == CovarianceSpec::Kind::identity) {
    out.is_type_h = true;
    out.scale = 1.0;
  } else if (spec.kind == CovarianceSpec::Kind::type_h) {
    out.is_type_h = true;
    out.scale = spec.a;
  } else {
    const double tr = bt.trace();
    if (tr > 0.0) {
      const double a = static_cast<double>(k - 1) / tr;
      if ((bt - centering(k) / a).cwiseAbs().maxCoeff() <= 1e-12 * mag) {
        out.is_type_h = true;
        out.scale = a;
      }
    }
  }
  bool persym = true;
  for (int i = 0; i < k && persym; ++i)
    for (int j = 0; j < k; ++j)
      if (std::abs(bt(i, j) - bt(k - 1 - j, k - 1 - i)) > 1e-12 * mag) {
        persym = false;
        break;
      }
  out.is_persymmetric = persym;
  return out;
}

DesignMatrices design_matrices(const Sequence& s) {
  const int k = s.k();
  const int t = s.t();
  DesignMatrices d{MatrixXd::Zero(k, t), MatrixXd::Zero(k, t), MatrixXd::Zero(k, t)};
  for (int j = 0; j < k; ++j) d.direct(j, s[static_cast<std::size_t>(j)] - 1) = 1.0;
  for (int j = 1; j < k; ++j) d.left.row(j) = d.direct.row(j - 1);
  for (int j = 0; j + 1 < k; ++j) d.right.row(j) = d.direct.row(j + 1);
  return d;
}

InfoComponents& InfoComponents::operator+=(const InfoComponents& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (c_[i].size() == 0) {
      c_[i] = o.c_[i];
    } else {
      c_[i] += o.c_[i];
    }
  }
  return *this;
}

InfoComponents InfoComponents::operator*(double s) const {
  InfoComponents out = *this;
  for (auto& m : out.c_) m *= s;
  return out;
}

InfoComponents info_components(const Sequence& s, const KernelMatrix& kernel) {
  if (s.k() != kernel.k()) throw DimensionMismatch("info_components: sequence length differs from kernel size");
  const auto d = design_matrices(s);
  const std::array<const MatrixXd*, 3> g{&d.direct, &d.left, &d.right};
  const MatrixXd& bt = kernel.btilde.mat();
  std::array<MatrixXd, 9> c;
  for (int i = 0; i < 3; ++i) {
    const MatrixXd lhs = g[static_cast<std::size_t>(i)]->transpose() * bt;
    for (int j = 0; j < 3; ++j) c[static_cast<std::size_t>(3 * i + j)] = lhs * *g[static_cast<std::size_t>(j)];
  }
  return InfoComponents(std::move(c));
}

InfoComponents orbit_average(const InfoComponents& c) {
  const Eigen::Index t = c.t();
  const MatrixXd bt = centering(t);
  const MatrixXd jt = MatrixXd::Ones(t, t);
  const double td = static_cast<double>(t);
  std::array<MatrixXd, 9> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const MatrixXd& m = c(i, j);
      out[static_cast<std::size_t>(3 * i + j)] = (bt * m * bt).trace() / (td - 1.0) * bt + m.sum() / (td * td) * jt;
    }
  }
  return InfoComponents(std::move(out));
}

SymMatrix information_matrix(const InfoComponents& c, ModelKind kind) {
  const Eigen::Index t = c.t();
  if (kind == ModelKind::directional) {
    MatrixXd e01(t, 2 * t);
    e01 << c(0, 1), c(0, 2);
    MatrixXd e11(2 * t, 2 * t);
    e11 << c(1, 1), c(1, 2), c(2, 1), c(2, 2);
    const MatrixXd inv = pinv(SymMatrix(e11)).mat();
    return SymMatrix(c(0, 0) - e01 * inv * e01.transpose());
  }
  const MatrixXd e01 = c(0, 1) + c(0, 2);
  const MatrixXd e11 = c(1, 1) + c(1, 2) + c(2, 1) + c(2, 2);
  const MatrixXd inv = pinv(SymMatrix(e11)).mat();
  return SymMatrix(c(0, 0) - e01 * inv * e01.transpose());
}

QuadForm quad_form(const Sequence& s, const KernelMatrix& kernel) {
  const auto info = info_components(s, kernel);
  const MatrixXd bt = centering(s.t());
  QuadForm f;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.r3(i, j) = (bt * info(i, j) * bt).trace();
  f.r3 = 0.5 * (f.r3 + f.r3.transpose()).eval();
  f.c00 = f.r3(0, 0);
  f.ell = f.r3.block<2, 1>(1, 0);
  f.q = f.r3.block<2, 2>(1, 1);
  return f;
}

UniQuad undirectional(const QuadForm& f) {
  return {f.c00, 2.0 * (f.ell(0) + f.ell(1)), f.q(0, 0) + 2.0 * f.q(0, 1) + f.q(1, 1)};
}

UniQuad type_h_coeffs(const Sequence& s, double a) {
  if (!(a > 0.0)) throw InvalidInput("type_h_coeffs: scale must be > 0");
  const auto st = stats(s);
  const double k = s.k();
  const double t = s.t();
  const double chi = st.chi;
  const double f_first = st.freq[static_cast<std::size_t>(st.first_label - 1)];
  const double f_last = st.freq[static_cast<std::size_t>(st.last_label - 1)];
  const double ends_equal = st.first_label == st.last_label ? 1.0 : 0.0;
  UniQuad u;
  u.q0 = k - chi / k;
  // The counting formula below is the full linear coefficient of q(z, z),
  // i.e. 2 (c01 + c02), even though it is usually quoted as "c01 + c02";
  // only the doubled reading reproduces the generic path and the known
  // minimizer z* = 1 / (2 [k (k - 3) + 1 / t]) at t = k - 1.
  u.q1 = 2.0 * (2.0 * k * st.phi + f_first + f_last - 2.0 * chi) / k;
  u.q2 = 2.0 * (st.varphi + k - 1.0 - (k + t - 2.0) / (k * t)) -
         2.0 * (2.0 * chi - 2.0 * f_first - 2.0 * f_last + ends_equal) / k;
  u.q0 /= a;
  u.q1 /= a;
  u.q2 /= a;
  return u;
}

UniQuad type_h_coeffs(const Sequence& s, const KernelMatrix& kernel) {
  if (!kernel.is_type_h) throw InvalidInput("type_h_coeffs: kernel is not of type H");
  if (s.k() != kernel.k()) throw DimensionMismatch("type_h_coeffs: sequence length differs from kernel size");
  return type_h_coeffs(s, kernel.scale);
}

double Moments::q_star() const {
  const Eigen::Index n = q.rows();
  const VectorXd ell = r.block(1, 0, n, 1);
  return r(0, 0) - ell.dot(q.ldlt().solve(ell));
}

Moments moments(const QuadForm& f, ModelKind kind) {
  if (kind == ModelKind::directional) {
    return {MatrixXd(f.r3), MatrixXd(f.q)};
  }
  const UniQuad u = undirectional(f);
  MatrixXd r(2, 2);
  r << u.q0, 0.5 * u.q1, 0.5 * u.q1, u.q2;
  MatrixXd q(1, 1);
  q << u.q2;
  return {r, q};
}

double MomentSet::q_star() const { return c00 - ell.dot(q.ldlt().solve(ell)); }

MomentSet aggregate(const std::vector<double>& weights, const std::vector<QuadForm>& forms) {
  if (weights.size() != forms.size()) throw DimensionMismatch("aggregate: weights and forms differ in length");
  double total = 0.0;
  for (double p : weights) {
    if (!(p >= 0.0)) throw InvalidInput("aggregate: negative or NaN proportion");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("aggregate: proportions do not sum to 1");
  MomentSet m;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (weights[i] == 0.0) continue;
    m.r3 += weights[i] * forms[i].r3;
  }
  m.c00 = m.r3(0, 0);
  m.ell = m.r3.block<2, 1>(1, 0);
  m.q = m.r3.block<2, 2>(1, 1);
  return m;
}

}  // namespace interfere
