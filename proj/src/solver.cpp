#include "interfere/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <numeric>

#include "interfere/errors.hpp"

namespace interfere {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_singular(const MatrixXd& m) {
  const double mag = m.cwiseAbs().maxCoeff();
  if (!(mag > 0.0)) return true;
  const double det = m.determinant() / std::pow(mag, static_cast<double>(m.rows()));
  return !(std::abs(det) > 1e-14);
}

// Stacks every form's R and Q row-wise so theta for all blocks is a pair of
// mat-vec products.
struct FlatForms {
  Eigen::Index dr = 0;
  Eigen::Index dq = 0;
  MatrixXd r;  // m x dr^2
  MatrixXd q;  // m x dq^2

  explicit FlatForms(const std::vector<Moments>& forms) {
    dr = forms.front().r.rows();
    dq = forms.front().q.rows();
    const auto m = static_cast<Eigen::Index>(forms.size());
    r.resize(m, dr * dr);
    q.resize(m, dq * dq);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& f = forms[static_cast<std::size_t>(i)];
      if (f.r.rows() != dr || f.q.rows() != dq) throw DimensionMismatch("optimize_measure: mixed moment sizes");
      r.row(i) = Eigen::Map<const VectorXd>(f.r.data(), dr * dr).transpose();
      q.row(i) = Eigen::Map<const VectorXd>(f.q.data(), dq * dq).transpose();
    }
  }

  MatrixXd aggregate_r(const VectorXd& p) const {
    const VectorXd v = r.transpose() * p;
    return Eigen::Map<const MatrixXd>(v.data(), dr, dr);
  }
  MatrixXd aggregate_q(const VectorXd& p) const {
    const VectorXd v = q.transpose() * p;
    return Eigen::Map<const MatrixXd>(v.data(), dq, dq);
  }

  // Returns false when the aggregate is information-degenerate.
  bool thetas(const MatrixXd& rx, const MatrixXd& qx, VectorXd& out) const {
    if (near_singular(rx) || near_singular(qx)) return false;
    const MatrixXd rinv = rx.inverse();
    const MatrixXd qinv = qx.inverse();
    // tr(A B) = sum_ab A(a,b) B(b,a); R_s is symmetric so vec(B') works.
    const MatrixXd rinv_t = rinv.transpose();
    const MatrixXd qinv_t = qinv.transpose();
    out = r * Eigen::Map<const VectorXd>(rinv_t.data(), dr * dr) - q * Eigen::Map<const VectorXd>(qinv_t.data(), dq * dq);
    return true;
  }
};

std::vector<Eigen::Index> tied_with_max(const VectorXd& values, double top, TiePolicy policy) {
  std::vector<Eigen::Index> out;
  const double band = 1e-10 * std::max(1.0, std::abs(top));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) >= top - band) {
      out.push_back(i);
      if (policy == TiePolicy::lowest_index) break;
    }
  }
  return out;
}


double form_value(const Moments& f, const VectorXd& x) {
  const Eigen::Index d = x.size();
  return f.r(0, 0) + 2.0 * f.r.block(1, 0, d, 1).col(0).dot(x) + x.dot(f.q * x);
}

VectorXd form_gradient(const Moments& f, const VectorXd& x) {
  return 2.0 * (f.r.block(1, 0, x.size(), 1).col(0) + f.q * x);
}

VectorXd form_vertex(const Moments& f) {
  return -f.q.fullPivLu().solve(f.r.block(1, 0, f.q.rows(), 1).col(0));
}

double envelope(const std::vector<Moments>& forms, const VectorXd& x) {
  double top = -kInf;
  for (const auto& f : forms) top = std::max(top, form_value(f, x));
  return top;
}

// Minimizer of max(q_a, q_b): the maximizer over lambda of
// min_x [lambda q_a + (1 - lambda) q_b], found by bisection on the
// (decreasing) derivative q_a - q_b at the inner minimizer.
VectorXd ridge_point(const Moments& a, const Moments& b) {
  auto inner = [&](double lambda) {
    const MatrixXd q = lambda * a.q + (1.0 - lambda) * b.q;
    const VectorXd ell = lambda * a.r.block(1, 0, a.q.rows(), 1).col(0) +
                         (1.0 - lambda) * b.r.block(1, 0, b.q.rows(), 1).col(0);
    return VectorXd(-q.fullPivLu().solve(ell));
  };
  auto slope = [&](double lambda) {
    const VectorXd x = inner(lambda);
    return form_value(a, x) - form_value(b, x);
  };
  if (slope(0.0) <= 0.0) return inner(0.0);
  if (slope(1.0) >= 0.0) return inner(1.0);
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 80 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return inner(0.5 * (lo + hi));
}

// Point where three bivariate quadratics agree, by Newton from `start`.
std::optional<VectorXd> triple_point(const Moments& a, const Moments& b, const Moments& c, VectorXd x) {
  for (int it = 0; it < 40; ++it) {
    const double va = form_value(a, x);
    Eigen::Vector2d f(va - form_value(b, x), va - form_value(c, x));
    const VectorXd ga = form_gradient(a, x);
    Eigen::Matrix2d jac;
    jac.row(0) = (ga - form_gradient(b, x)).transpose();
    jac.row(1) = (ga - form_gradient(c, x)).transpose();
    if (std::abs(jac.determinant()) < 1e-14 * std::max(1.0, jac.cwiseAbs().maxCoeff() * jac.cwiseAbs().maxCoeff())) {
      return std::nullopt;
    }
    const Eigen::Vector2d dx = jac.partialPivLu().solve(f);
    x -= dx;
    if (!x.allFinite()) return std::nullopt;
    if (dx.norm() <= 1e-15 * std::max(1.0, x.norm())) break;
  }
  return x;
}

struct HullFit {
  VectorXd weights;
  double residual = 0.0;
};

// Convex combination of the columns of g closest to the origin.
HullFit hull_min_norm(const MatrixXd& g) {
  const Eigen::Index d = g.rows();
  const Eigen::Index n = g.cols();
  const double w = std::max(1.0, g.cwiseAbs().maxCoeff());
  MatrixXd a(d + 1, n);
  a.topRows(d) = g;
  a.row(d).setConstant(w);
  VectorXd b = VectorXd::Zero(d + 1);
  b(d) = w;
  auto fit = nnls(a, b);
  const double total = fit.x.sum();
  if (total > 0.0) fit.x /= total;
  return {fit.x, (g * fit.x).norm()};
}

struct Refined {
  VectorXd x;
  double value = 0.0;
  std::vector<Eigen::Index> active;
  HullFit hull;
};

// Exact minimizer of the upper envelope of strictly convex quadratics near
// x_hat. Candidates come from the blocks within `band` of the envelope at
// x_hat; the envelope is then minimized over all candidate points, which is
// exact once the true active set is among the candidates.
Refined refine_minimax(const std::vector<Moments>& forms, const VectorXd& x_hat, double band, double tol_support) {
  const auto m = static_cast<Eigen::Index>(forms.size());
  const Eigen::Index dim = x_hat.size();
  VectorXd vals(m);
  for (Eigen::Index i = 0; i < m; ++i) vals(i) = form_value(forms[static_cast<std::size_t>(i)], x_hat);
  const double top = vals.maxCoeff();
  std::vector<Eigen::Index> cand;
  for (Eigen::Index i = 0; i < m; ++i)
    if (vals(i) >= top - band) cand.push_back(i);
  std::stable_sort(cand.begin(), cand.end(), [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });
  // Blocks sharing the same quadratic add no new candidate points.
  {
    std::vector<Eigen::Index> distinct;
    for (auto i : cand) {
      const auto& fi = forms[static_cast<std::size_t>(i)];
      const double scale = 1e-12 * std::max(1.0, fi.r.cwiseAbs().maxCoeff());
      const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](Eigen::Index j) {
        return (forms[static_cast<std::size_t>(j)].r - fi.r).cwiseAbs().maxCoeff() <= scale;
      });
      if (!dup) distinct.push_back(i);
    }
    cand = std::move(distinct);
  }
  const std::size_t kMaxCandidates = dim == 1 ? 200 : 40;
  if (cand.size() > kMaxCandidates) cand.resize(kMaxCandidates);

  VectorXd best_x = x_hat;
  double best = envelope(forms, x_hat);
  auto consider = [&](const VectorXd& x) {
    if (!x.allFinite()) return;
    const double v = envelope(forms, x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  };
  auto at = [&](Eigen::Index i) -> const Moments& { return forms[static_cast<std::size_t>(i)]; };
  for (auto i : cand) consider(form_vertex(at(i)));
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = i + 1; j < cand.size(); ++j) consider(ridge_point(at(cand[i]), at(cand[j])));
  if (dim == 2) {
    const VectorXd start = best_x;
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = i + 1; j < cand.size(); ++j)
        for (std::size_t l = j + 1; l < cand.size(); ++l)
          if (auto x = triple_point(at(cand[i]), at(cand[j]), at(cand[l]), start)) consider(*x);
  }

  Refined out;
  out.x = best_x;
  out.value = best;
  const double cut = best - tol_support * std::max(1.0, std::abs(best));
  for (Eigen::Index i = 0; i < m; ++i)
    if (form_value(at(i), best_x) >= cut) out.active.push_back(i);
  MatrixXd g(dim, static_cast<Eigen::Index>(out.active.size()));
  for (std::size_t c = 0; c < out.active.size(); ++c) g.col(static_cast<Eigen::Index>(c)) = form_gradient(at(out.active[c]), best_x);
  out.hull = hull_min_norm(g);
  return out;
}

// A tightly converged measure can still leave x_hat a little off x*, so
// blocks active at x* may sit outside the first band. Widen until the
// subgradient certificate holds.
Refined refine_certified(const std::vector<Moments>& forms, const VectorXd& x_hat, double band, double tol_support) {
  Refined ref = refine_minimax(forms, x_hat, band, tol_support);
  for (int widen = 0; widen < 8 && ref.hull.residual > 1e-9 * std::max(1.0, std::abs(ref.value)); ++widen) {
    band *= 100.0;
    Refined wider = refine_minimax(forms, x_hat, band, tol_support);
    if (wider.value <= ref.value) ref = std::move(wider);
  }
  return ref;
}

}  // namespace

// ---------------------------------------------------------------------------
// Measure

Measure::Measure(std::vector<MeasureEntry> entries) : entries_(std::move(entries)) {
  double total = 0.0;
  for (const auto& e : entries_) {
    if (!(e.p >= 0.0)) throw InvalidInput("measure: negative or NaN proportion");
    total += e.p;
  }
  if (!entries_.empty() && std::abs(total - 1.0) > 1e-12) {
    throw InvalidInput("measure: proportions sum to " + std::to_string(total) + ", expected 1");
  }
}

Measure Measure::from_blocks(const std::vector<SymmetricBlock>& blocks, const std::vector<double>& weights,
                             double drop_below) {
  if (blocks.size() != weights.size()) throw DimensionMismatch("measure: blocks and weights differ in length");
  double kept = 0.0;
  for (double w : weights)
    if (w > drop_below) kept += w;
  if (!(kept > 0.0)) throw InvalidInput("measure: no positive weight");
  std::vector<MeasureEntry> entries;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (weights[i] > drop_below) entries.push_back({blocks[i].representative, weights[i] / kept, true});
  }
  // Renormalize the rounding drift of the division.
  double total = 0.0;
  for (const auto& e : entries) total += e.p;
  entries.back().p += 1.0 - total;
  return Measure(std::move(entries));
}

double Measure::block_weight(const SymmetricBlock& block) const {
  double w = 0.0;
  for (const auto& e : entries_) {
    if (canonicalize(e.seq).representative == block.representative) w += e.p;
  }
  return w;
}

void AlgorithmConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidInput("algorithm: epsilon must be > 0");
  if (!(omega > 0.0 && omega <= 2.0)) throw InvalidInput("algorithm: omega must lie in (0, 2]");
  if (max_iters < 1) throw InvalidInput("algorithm: max_iters must be >= 1");
  if (!(tol_support > 0.0)) throw InvalidInput("algorithm: tol_support must be > 0");
  if (!(max_step > 0.0 && max_step <= 1.0)) throw InvalidInput("algorithm: max_step must lie in (0, 1]");
}

// ---------------------------------------------------------------------------
// Universe

BlockUniverse BlockUniverse::build(int k, int t, const KernelMatrix& kernel) {
  if (kernel.k() != k) throw DimensionMismatch("universe: kernel size differs from k");
  BlockUniverse u;
  u.k = k;
  u.t = t;
  u.kernel = kernel;
  u.blocks = enumerate_blocks(k, t);
  u.forms.reserve(u.blocks.size());
  for (const auto& b : u.blocks) u.forms.push_back(quad_form(b.representative, kernel));
  return u;
}

std::vector<Moments> BlockUniverse::moments(ModelKind kind) const {
  std::vector<Moments> out;
  out.reserve(forms.size());
  for (const auto& f : forms) out.push_back(interfere::moments(f, kind));
  return out;
}

std::size_t BlockUniverse::index_of(const Sequence& s) const {
  if (s.k() != k || s.t() != t) throw InvalidInput("universe: sequence " + s.str() + " has the wrong shape");
  const auto rep = canonicalize(s).representative;
  const auto it = std::lower_bound(blocks.begin(), blocks.end(), rep,
                                   [](const SymmetricBlock& b, const Sequence& r) { return b.representative < r; });
  if (it == blocks.end() || !(it->representative == rep)) {
    throw InvalidInput("universe: no block for " + s.str());
  }
  return static_cast<std::size_t>(it - blocks.begin());
}

// ---------------------------------------------------------------------------
// theta and the measure algorithm

double theta(const Moments& xi, const Moments& s) {
  if (near_singular(xi.r)) {
    throw DegenerateMeasure("theta: R_xi is singular; the measure carries no information on direct effects");
  }
  if (near_singular(xi.q)) throw DegenerateMeasure("theta: Q_xi is singular");
  return (s.r * xi.r.inverse()).trace() - (s.q * xi.q.inverse()).trace();
}

Moments aggregate_moments(const std::vector<Moments>& forms, const std::vector<double>& weights) {
  if (forms.empty() || forms.size() != weights.size()) throw DimensionMismatch("aggregate_moments: size mismatch");
  Moments out{MatrixXd::Zero(forms.front().r.rows(), forms.front().r.cols()),
              MatrixXd::Zero(forms.front().q.rows(), forms.front().q.cols())};
  for (std::size_t i = 0; i < forms.size(); ++i) {
    if (weights[i] == 0.0) continue;
    out.r += weights[i] * forms[i].r;
    out.q += weights[i] * forms[i].q;
  }
  return out;
}

double theta(const Measure& xi, const SymmetricBlock& s, const BlockUniverse& universe, ModelKind kind) {
  Moments agg{MatrixXd::Zero(kind == ModelKind::directional ? 3 : 2, kind == ModelKind::directional ? 3 : 2),
              MatrixXd::Zero(kind == ModelKind::directional ? 2 : 1, kind == ModelKind::directional ? 2 : 1)};
  for (const auto& e : xi.entries()) {
    // R_s is invariant under relabeling, so orbit and sequence atoms agree.
    const auto m = interfere::moments(universe.forms[universe.index_of(e.seq)], kind);
    agg.r += e.p * m.r;
    agg.q += e.p * m.q;
  }
  return theta(agg, interfere::moments(universe.forms[universe.index_of(s.representative)], kind));
}

OptimizeResult optimize_measure(const std::vector<Moments>& forms, const AlgorithmConfig& cfg) {
  cfg.validate();
  if (forms.empty()) throw InvalidInput("optimize_measure: empty block list");
  const FlatForms flat(forms);
  const auto m = static_cast<Eigen::Index>(forms.size());

  // Step 1: the point mass with the smallest theta*.
  VectorXd start_scores = VectorXd::Constant(m, kInf);
  VectorXd th;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& f = forms[static_cast<std::size_t>(i)];
    if (flat.thetas(f.r, f.q, th)) start_scores(i) = th.maxCoeff();
  }
  const double best_start = start_scores.minCoeff();
  VectorXd p = VectorXd::Zero(m);
  if (!std::isfinite(best_start)) {
    // Every point mass is singular (e.g. k = 3, t = 2); start from uniform.
    p.setConstant(1.0 / static_cast<double>(m));
  } else {
    VectorXd neg = -start_scores;
    const auto ties = tied_with_max(neg, -best_start, cfg.tie_policy);
    for (auto i : ties) p(i) = 1.0 / static_cast<double>(ties.size());
  }

  auto to_result = [&](const VectorXd& w, double ts, long it) {
    return OptimizeResult{std::vector<double>(w.data(), w.data() + m), ts, it};
  };

  // Steps 2-3, with a support-refinement attempt at iterations 32, 64, 128, ...
  double theta_star = kInf;
  long next_refine = 32;
  for (long it = 0;; ++it) {
    const MatrixXd rx = flat.aggregate_r(p);
    const MatrixXd qx = flat.aggregate_q(p);
    if (!flat.thetas(rx, qx, th)) {
      throw DegenerateMeasure("optimize_measure: iterate became information-degenerate");
    }
    theta_star = th.maxCoeff();
    if (theta_star <= 1.0 + cfg.epsilon) return to_result(p, theta_star, it);

    if (cfg.refine_support && it == next_refine) {
      next_refine *= 2;
      const Eigen::Index d = qx.rows();
      const VectorXd x_hat = -qx.ldlt().solve(rx.block(1, 0, d, 1).col(0));
      const double q_star = rx(0, 0) - rx.block(1, 0, d, 1).col(0).dot(-x_hat);
      const double r_hat = envelope(forms, x_hat);
      const double band = std::max(1e-9 * std::abs(r_hat), 10.0 * (r_hat - q_star));
      const Refined ref = refine_certified(forms, x_hat, band, cfg.tol_support);
      VectorXd cand = VectorXd::Zero(m);
      for (std::size_t c = 0; c < ref.active.size(); ++c) cand(ref.active[c]) = ref.hull.weights(static_cast<Eigen::Index>(c));
      VectorXd cand_th;
      if (cand.sum() > 0.0 && flat.thetas(flat.aggregate_r(cand), flat.aggregate_q(cand), cand_th)) {
        const double cand_star = cand_th.maxCoeff();
        if (cand_star <= 1.0 + cfg.epsilon) return to_result(cand, cand_star, it);
        if (cand_star < theta_star) {
          p = cand;
          theta_star = cand_star;
          th = cand_th;
        }
      }
    }

    if (it >= cfg.max_iters) break;
    const double step = std::min(std::pow(theta_star - 1.0, cfg.omega), cfg.max_step);
    const auto ties = tied_with_max(th, theta_star, cfg.tie_policy);
    p *= (1.0 - step);
    for (auto i : ties) p(i) += step / static_cast<double>(ties.size());
    p /= p.sum();
  }
  throw ConvergenceError("optimize_measure: theta* did not reach 1 + epsilon", theta_star, cfg.max_iters);
}

// ---------------------------------------------------------------------------
// Minimax solution

bool MinimaxSolution::in_support(std::size_t block_index) const {
  return std::any_of(support.begin(), support.end(), [&](const SupportEntry& e) { return e.index == block_index; });
}

namespace {

struct EnvelopeMin {
  double z = 0.0;
  double value = 0.0;
};

// Exact minimizer of max_s q~_s(z): the optimum sits at a vertex of one
// parabola or at a crossing of two, so it suffices to scan those points.
EnvelopeMin univariate_envelope_min(const std::vector<UniQuad>& u) {
  std::vector<double> cands;
  cands.reserve(u.size() * u.size());
  for (const auto& f : u)
    if (f.q2 > 0.0) cands.push_back(-f.q1 / (2.0 * f.q2));
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const double a = u[i].q2 - u[j].q2;
      const double b = u[i].q1 - u[j].q1;
      const double c = u[i].q0 - u[j].q0;
      const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
      if (std::abs(a) <= 1e-14 * scale) {
        if (std::abs(b) > 1e-14 * scale) cands.push_back(-c / b);
        continue;
      }
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double qq = -0.5 * (b + std::copysign(sq, b));
      cands.push_back(qq / a);
      if (qq != 0.0) cands.push_back(c / qq);
    }
  }
  if (cands.empty()) throw DegenerateMeasure("undirectional envelope has no finite minimizer");
  EnvelopeMin best{0.0, kInf};
  for (double z : cands) {
    if (!std::isfinite(z)) continue;
    double v = -kInf;
    for (const auto& f : u) v = std::max(v, f.value(z));
    if (!std::isfinite(best.value)) {
      best = {z, v};
      continue;
    }
    const double tie = 1e-13 * std::max(1.0, std::abs(best.value));
    if (v < best.value - tie || (std::abs(v - best.value) <= tie && z < best.z)) best = {z, v};
  }
  return best;
}

}  // namespace

MinimaxSolution minimax_solve(const BlockUniverse& universe, ModelKind kind, const AlgorithmConfig& cfg) {
  cfg.validate();
  if (universe.blocks.empty()) throw InvalidInput("minimax_solve: empty block universe");
  const auto forms = universe.moments(kind);
  const OptimizeResult opt = optimize_measure(forms, cfg);
  const VectorXd w = Eigen::Map<const VectorXd>(opt.weights.data(), static_cast<Eigen::Index>(opt.weights.size()));
  const Moments agg = aggregate_moments(forms, opt.weights);

  MinimaxSolution sol;
  sol.model = kind;
  sol.k = universe.k;
  sol.t = universe.t;
  sol.iterations = opt.iterations;
  sol.residuals.theta_star = opt.theta_star;

  std::vector<Eigen::Index> active;
  VectorXd x;
  if (kind == ModelKind::directional) {
    const VectorXd x_hat = -agg.q.ldlt().solve(agg.r.block(1, 0, 2, 1).col(0));
    const double r_hat = envelope(forms, x_hat);
    const double band = std::max(1e-9 * std::abs(r_hat), 10.0 * (r_hat - agg.q_star()));
    const Refined ref = refine_certified(forms, x_hat, band, cfg.tol_support);
    x = ref.x;
    sol.y_star = ref.value;
    sol.x_star = Eigen::Vector2d(x(0), x(1));
  } else {
    std::vector<UniQuad> u;
    u.reserve(universe.forms.size());
    for (const auto& f : universe.forms) u.push_back(undirectional(f));
    const auto best = univariate_envelope_min(u);
    x = VectorXd::Constant(1, best.z);
    sol.y_star = best.value;
    sol.x_star = Eigen::Vector2d(best.z, best.z);
  }

  const double cut = sol.y_star - cfg.tol_support * std::max(1.0, std::abs(sol.y_star));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(forms.size()); ++i) {
    if (form_value(forms[static_cast<std::size_t>(i)], x) >= cut) active.push_back(i);
  }
  MatrixXd g(x.size(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) {
    g.col(static_cast<Eigen::Index>(c)) = form_gradient(forms[static_cast<std::size_t>(active[c])], x);
  }
  sol.residuals.subgradient = hull_min_norm(g).residual;

  sol.optimal_measure = Measure::from_blocks(universe.blocks, opt.weights);
  for (auto i : active) {
    const auto idx = static_cast<std::size_t>(i);
    sol.support.push_back({universe.blocks[idx], idx, form_value(forms[idx], x), w(i)});
  }
  sol.residuals.gap = sol.y_star - agg.q_star();
  sol.converged = true;
  return sol;
}

// ---------------------------------------------------------------------------
// Optimality equations


VectorXd equation_lhs(const InfoComponents& c, const Eigen::Vector2d& x, ModelKind kind) {
  const Eigen::Index t = c.t();
  const MatrixXd b = centering(t);
  MatrixXd stacked;
  if (kind == ModelKind::directional) {
    stacked.resize(3 * t, t);
    stacked.topRows(t) = c(0, 0) + x(0) * c(0, 1) * b + x(1) * c(0, 2) * b;
    stacked.middleRows(t, t) = c(1, 0) + x(0) * c(1, 1) * b + x(1) * c(1, 2) * b;
    stacked.bottomRows(t) = c(2, 0) + x(0) * c(2, 1) * b + x(1) * c(2, 2) * b;
  } else {
    const double z = x(0);
    stacked.resize(2 * t, t);
    stacked.topRows(t) = c(0, 0) + z * (c(0, 1) + c(0, 2)) * b;
    stacked.bottomRows(t) = (c(1, 0) + c(2, 0)) + z * (c(1, 1) + c(1, 2) + c(2, 1) + c(2, 2)) * b;
  }
  return Eigen::Map<const VectorXd>(stacked.data(), stacked.size());
}

VectorXd equation_rhs(int t, double y_star, ModelKind kind) {
  const Eigen::Index blocks = kind == ModelKind::directional ? 3 : 2;
  MatrixXd stacked = MatrixXd::Zero(blocks * t, t);
  stacked.topRows(t) = y_star * centering(t) / static_cast<double>(t - 1);
  return Eigen::Map<const VectorXd>(stacked.data(), stacked.size());
}


ProportionResult solve_proportions(const MinimaxSolution& sol, const BlockUniverse& universe, ProportionLevel level) {
  if (sol.support.empty()) throw InvalidInput("solve_proportions: empty support");
  const int t = universe.t;
  std::vector<Sequence> atoms;
  std::vector<VectorXd> cols;
  for (const auto& e : sol.support) {
    if (level == ProportionLevel::block) {
      atoms.push_back(e.block.representative);
      cols.push_back(equation_lhs(orbit_average(info_components(e.block.representative, universe.kernel)), sol.x_star, sol.model));
    } else {
      for (auto& s : orbit_sequences(e.block)) {
        cols.push_back(equation_lhs(info_components(s, universe.kernel), sol.x_star, sol.model));
        atoms.push_back(std::move(s));
      }
    }
  }
  const VectorXd target = equation_rhs(t, sol.y_star, sol.model);
  const auto rows = target.size();
  const auto n = static_cast<Eigen::Index>(cols.size());
  MatrixXd a(rows + 1, n);
  for (Eigen::Index j = 0; j < n; ++j) a.block(0, j, rows, 1) = cols[static_cast<std::size_t>(j)];
  const double weight = std::max(1.0, a.topRows(rows).cwiseAbs().maxCoeff());
  a.row(rows).setConstant(weight);
  VectorXd b(rows + 1);
  b.head(rows) = target;
  b(rows) = weight;

  const NnlsResult fit = nnls(a, b);
  VectorXd p = fit.x;
  const double total = p.sum();
  if (!(total > 0.0)) throw DegenerateMeasure("solve_proportions: no nonnegative solution");
  p /= total;

  std::vector<MeasureEntry> entries;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (p(j) > 0.0) entries.push_back({atoms[static_cast<std::size_t>(j)], p(j), level == ProportionLevel::block});
  }
  double sum = 0.0;
  for (const auto& e : entries) sum += e.p;
  entries.back().p += 1.0 - sum;

  ProportionResult out;
  out.residual = (a.topRows(rows) * p - target).norm();
  out.exact = out.residual <= 1e-8;
  out.measure = Measure(std::move(entries));
  return out;
}

// ---------------------------------------------------------------------------
// Verification

SymMatrix measure_information(const Measure& xi, const KernelMatrix& kernel, ModelKind kind) {
  if (xi.empty()) throw InvalidInput("measure_information: empty measure");
  InfoComponents total;
  for (const auto& e : xi.entries()) {
    const auto c = info_components(e.seq, kernel);
    total += (e.orbit ? orbit_average(c) : c) * e.p;
  }
  return information_matrix(total, kind);
}

VerifyReport verify_measure(const Measure& xi, const BlockUniverse& universe, const MinimaxSolution& sol) {
  if (xi.empty()) throw InvalidInput("verify_measure: empty measure");
  const ModelKind kind = sol.model;
  const int t = universe.t;
  VerifyReport rep;
  rep.y_star = sol.y_star;
  const SymMatrix c = measure_information(xi, universe.kernel, kind);
  rep.deviation = (c.mat() - sol.y_star * centering(t) / static_cast<double>(t - 1)).norm();
  rep.is_optimal = rep.deviation <= 1e-8 * std::abs(sol.y_star);

  const auto forms = universe.moments(kind);
  std::vector<double> w(forms.size(), 0.0);
  for (const auto& e : xi.entries()) w[universe.index_of(e.seq)] += e.p;
  const Moments agg = aggregate_moments(forms, w);
  rep.q_star = agg.q_star();
  rep.gap = sol.y_star - rep.q_star;
  rep.theta_max = -kInf;
  for (const auto& f : forms) rep.theta_max = std::max(rep.theta_max, theta(agg, f));
  return rep;
}

VerifyReport verify_measure(const Measure& xi, const BlockUniverse& universe, ModelKind kind, const AlgorithmConfig& cfg) {
  return verify_measure(xi, universe, minimax_solve(universe, kind, cfg));
}

// ---------------------------------------------------------------------------
// Closed forms for type-H covariance

ClosedForm closed_form(int k, int t) {
  if (k < 3 || t < 2) throw InvalidInput("closed_form: need k >= 3 and t >= 2");
  if (t >= k) throw Unsupported("closed_form: t >= k has no closed form here; use minimax_solve");
  ClosedForm cf;
  cf.k = k;
  cf.t = t;
  cf.u = k / t;
  cf.v = k % t;
  const double kd = k;
  const double td = t;
  if (t <= k - 2) {
    cf.z_star = 0.0;
    cf.y_star = kd * (td - 1.0) / td - static_cast<double>(cf.v * (t - cf.v)) / (kd * td);
    const int u = cf.u;
    cf.in_support = [u](const Sequence& s) {
      const auto st = stats(s);
      return std::all_of(st.freq.begin(), st.freq.end(), [u](int f) { return f == u || f == u + 1; });
    };
  } else {
    cf.adjacent_case = true;
    const double denom = kd * (kd - 3.0) + 1.0 / td;
    cf.z_star = 1.0 / (2.0 * denom);
    cf.y_star = kd - 1.0 - 2.0 / kd - 1.0 / (2.0 * kd * denom);
    std::vector<int> s0(static_cast<std::size_t>(k));
    s0[0] = 1;
    for (int i = 1; i < k; ++i) s0[static_cast<std::size_t>(i)] = i;
    const Sequence first(s0, t);
    const Sequence a = canonicalize(first).representative;
    const Sequence b = canonicalize(dual(first)).representative;
    cf.in_support = [a, b](const Sequence& s) {
      const auto rep = canonicalize(s).representative;
      return rep == a || rep == b;
    };
  }
  for (const auto& blk : enumerate_blocks(k, t)) {
    if (cf.in_support(blk.representative)) cf.support.push_back(blk);
  }
  if (cf.adjacent_case) cf.proportions.assign(cf.support.size(), 1.0 / static_cast<double>(cf.support.size()));
  return cf;
}

ConsistencyReport undirectional_consistency(const BlockUniverse& universe, const AlgorithmConfig& cfg) {
  const auto dir = minimax_solve(universe, ModelKind::directional, cfg);
  const auto und = minimax_solve(universe, ModelKind::undirectional, cfg);
  ConsistencyReport rep;
  rep.persymmetric = universe.kernel.is_persymmetric;
  rep.x_star = dir.x_star;
  rep.z_star = und.x_star(0);
  rep.y_star = dir.y_star;
  rep.y0 = und.y_star;
  rep.x_gap = std::max(std::abs(dir.x_star(0) - rep.z_star), std::abs(dir.x_star(1) - rep.z_star));
  rep.y_gap = std::abs(rep.y_star - rep.y0);
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  for (const auto& e : dir.support) a.push_back(e.index);
  for (const auto& e : und.support) b.push_back(e.index);
  rep.same_support = a == b;
  rep.consistent = rep.x_gap <= 1e-7 && rep.y_gap <= 1e-8 && rep.same_support;
  return rep;
}

}  // namespace interfere
