#pragma once

// Minimax characterization of universally optimal measures: the
// measure-optimization algorithm driven by theta, exact recovery of
// (x*, y*, support), the linear-equation system for optimal proportions,
// optimality verification and the type-H closed forms.

#include <functional>
#include <optional>
#include <vector>

#include "interfere/model.hpp"
#include "interfere/sequences.hpp"

namespace interfere {

/// One weighted atom of a measure. With `orbit` set the weight is spread
/// uniformly over the relabeling orbit of `seq`; otherwise it sits on `seq`
/// alone.
struct MeasureEntry {
  Sequence seq;
  double p = 0.0;
  bool orbit = true;
};

class Measure {
 public:
  Measure() = default;
  /// Throws InvalidInput on negative weights or a total outside 1 +- 1e-12.
  explicit Measure(std::vector<MeasureEntry> entries);

  /// Builds a block-level measure, dropping blocks with weight <= drop_below
  /// and renormalizing.
  static Measure from_blocks(const std::vector<SymmetricBlock>& blocks, const std::vector<double>& weights,
                             double drop_below = 0.0);

  const std::vector<MeasureEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Weight carried by the orbit of `block` (orbit atoms plus member sequences).
  double block_weight(const SymmetricBlock& block) const;

 private:
  std::vector<MeasureEntry> entries_;
};

enum class TiePolicy { lowest_index, average_over_ties };

struct AlgorithmConfig {
  double epsilon = 1e-7;     // stop once theta* <= 1 + epsilon
  double omega = 1.0;        // step (theta* - 1)^omega
  long max_iters = 100000;
  double tol_support = 1e-8; // relative band defining the support set
  TiePolicy tie_policy = TiePolicy::average_over_ties;
  // Cap on a single step; (theta* - 1)^omega exceeds 1 far from the optimum.
  double max_step = 0.5;
  // Periodically jump to the exact hull weights on the current near-active
  // set; plain vertex steps converge only sublinearly near the optimum.
  bool refine_support = true;

  void validate() const;
};

/// The candidate universe for one (k, t, kernel): every symmetric block with
/// its quadratic form.
struct BlockUniverse {
  int k = 0;
  int t = 0;
  KernelMatrix kernel;
  std::vector<SymmetricBlock> blocks;
  std::vector<QuadForm> forms;

  static BlockUniverse build(int k, int t, const KernelMatrix& kernel);
  std::vector<Moments> moments(ModelKind kind) const;
  /// Index of the block whose orbit contains s; throws InvalidInput if absent.
  std::size_t index_of(const Sequence& s) const;
};

/// theta = tr(R_s R_xi^-1) - tr(Q_s Q_xi^-1). Throws DegenerateMeasure when
/// R_xi is singular (det <= 1e-14 relative).
double theta(const Moments& xi, const Moments& s);

/// Aggregate moments of a weight vector over `forms`.
Moments aggregate_moments(const std::vector<Moments>& forms, const std::vector<double>& weights);

/// theta(P, s) for a measure and one block.
double theta(const Measure& xi, const SymmetricBlock& s, const BlockUniverse& universe, ModelKind kind);

struct OptimizeResult {
  std::vector<double> weights;  // aligned with the forms passed in
  double theta_star = 0.0;
  long iterations = 0;
};

/// Vertex-direction ascent: start at the point mass with the smallest
/// theta*, then repeatedly move (theta* - 1)^omega of the mass toward the
/// maximizing block until theta* <= 1 + epsilon.
/// Throws ConvergenceError (carrying the last theta*) after max_iters.
OptimizeResult optimize_measure(const std::vector<Moments>& forms, const AlgorithmConfig& cfg);

struct SupportEntry {
  SymmetricBlock block;
  std::size_t index = 0;  // into BlockUniverse::blocks
  double q_at_x = 0.0;
  double p = 0.0;         // proportion in optimal_measure
};

struct MinimaxSolution {
  ModelKind model = ModelKind::directional;
  int k = 0;
  int t = 0;
  Eigen::Vector2d x_star = Eigen::Vector2d::Zero();
  double y_star = 0.0;
  std::vector<SupportEntry> support;
  Measure optimal_measure;
  long iterations = 0;
  bool converged = false;
  struct Residuals {
    double theta_star = 0.0;   // of optimal_measure
    double gap = 0.0;          // y* - q*(optimal_measure)
    double subgradient = 0.0;  // distance from 0 to the hull of support gradients
  } residuals;

  bool in_support(std::size_t block_index) const;
};

/// Directional: optimize the measure, take x = -Q^-1 ell, then polish x to
/// the exact minimizer of max_s q_s by enumerating active-set candidates
/// (vertices, pairwise ridges, triple points) among near-active blocks.
/// Undirectional: z* by exact envelope candidates (vertices and pairwise
/// crossings of q~_s), ties toward smaller z.
MinimaxSolution minimax_solve(const BlockUniverse& universe, ModelKind kind, const AlgorithmConfig& cfg = {});

/// Stacked left-hand side of the optimality equations for one atom at x:
///   directional   [C00 + x1 C01 B + x2 C02 B ; C10 + E11 (x (x) B)]
///   undirectional [C00 + z C~01 B ; C~10 + z C~11 B]   (z = x(0))
/// vectorized column-major.
VectorXd equation_lhs(const InfoComponents& c, const Eigen::Vector2d& x, ModelKind kind);
/// Matching right-hand side [y* B_t / (t-1) ; 0].
VectorXd equation_rhs(int t, double y_star, ModelKind kind);

enum class ProportionLevel { block, sequence };

struct ProportionResult {
  Measure measure;
  double residual = 0.0;  // Frobenius norm of the stacked equation residuals
  bool exact = false;     // residual <= 1e-8
};

/// Nonnegative proportions over the support solving the optimality
/// equation system in least squares (NNLS, lowest-index pivoting). Which
/// point of a non-unique optimal face is returned is fixed by that pivot
/// order.
ProportionResult solve_proportions(const MinimaxSolution& sol, const BlockUniverse& universe,
                                   ProportionLevel level = ProportionLevel::block);

struct VerifyReport {
  bool is_optimal = false;
  double q_star = 0.0;
  double y_star = 0.0;
  double gap = 0.0;        // y* - q*
  double theta_max = 0.0;
  double deviation = 0.0;  // ||C_xi - y* B_t / (t-1)||_F
};

/// Information matrix C_xi of a measure (sum over atoms of p times the
/// atom's components, then the Schur complement).
SymMatrix measure_information(const Measure& xi, const KernelMatrix& kernel, ModelKind kind);

VerifyReport verify_measure(const Measure& xi, const BlockUniverse& universe, const MinimaxSolution& sol);
VerifyReport verify_measure(const Measure& xi, const BlockUniverse& universe, ModelKind kind,
                            const AlgorithmConfig& cfg = {});

/// Type-H closed forms for 2 <= t <= k-1 at unit scale.
struct ClosedForm {
  int k = 0;
  int t = 0;
  bool adjacent_case = false;  // t == k-1
  int u = 0;                   // k = u t + v
  int v = 0;
  double z_star = 0.0;
  double y_star = 0.0;
  std::function<bool(const Sequence&)> in_support;
  std::vector<SymmetricBlock> support;  // enumerated blocks satisfying in_support
  std::vector<double> proportions;      // unique block proportions when adjacent_case
};

/// Throws Unsupported for t >= k.
ClosedForm closed_form(int k, int t);

struct ConsistencyReport {
  bool persymmetric = false;
  Eigen::Vector2d x_star = Eigen::Vector2d::Zero();
  double z_star = 0.0;
  double y_star = 0.0;
  double y0 = 0.0;
  double x_gap = 0.0;  // max |x*_i - z*|
  double y_gap = 0.0;  // |y* - y0|
  bool same_support = false;
  bool consistent = false;  // within 1e-7 / 1e-8; only asserted for persymmetric kernels
};

ConsistencyReport undirectional_consistency(const BlockUniverse& universe, const AlgorithmConfig& cfg = {});

}  // namespace interfere
