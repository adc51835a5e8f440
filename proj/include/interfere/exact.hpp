#pragma once

// Exact n-block designs: information matrices, A/D/E/T efficiencies and an
// integer search over the optimality equations.

#include <cstdint>
#include <vector>

#include "interfere/model.hpp"
#include "interfere/solver.hpp"

namespace interfere {

struct ExactDesign {
  int k = 0;
  int t = 0;
  std::vector<Sequence> rows;  // one block per row, plots in order

  ExactDesign() = default;
  /// Throws InvalidInput on an empty design or rows of the wrong length/alphabet.
  ExactDesign(int k, int t, std::vector<Sequence> rows);

  int n() const { return static_cast<int>(rows.size()); }
};

/// Schur complement information matrix of the whole design.
SymMatrix info_matrix(const ExactDesign& d, const KernelMatrix& kernel, ModelKind kind);

struct EfficiencyReport {
  std::vector<double> eigenvalues;  // t-1 values on the contrast space, ascending
  double eff_a = 0.0;
  double eff_d = 0.0;
  double eff_e = 0.0;
  double eff_t = 0.0;
  double y_star_used = 0.0;
  ModelKind model = ModelKind::directional;
};

/// Efficiencies against the benchmark n y* / (t-1). The structural null
/// vector 1_t is removed by projecting onto the normalized Helmert basis.
EfficiencyReport efficiencies(const ExactDesign& d, const KernelMatrix& kernel, ModelKind kind, double y_star);
/// Throws InvalidInput when `sol` did not converge.
EfficiencyReport efficiencies(const ExactDesign& d, const KernelMatrix& kernel, const MinimaxSolution& sol);
/// Same for a measure (n = 1).
EfficiencyReport efficiencies(const Measure& xi, const KernelMatrix& kernel, const MinimaxSolution& sol);
/// The formulas on an information matrix of an n-block design.
EfficiencyReport efficiencies_from_info(const SymMatrix& c, double n, ModelKind kind, double y_star);

struct ExactSearchResult {
  ExactDesign design;
  double distance = 0.0;  // Frobenius residual of the n-scaled equations
  long moves = 0;
};

/// Rounds n times the block proportions (largest remainder), spreads each
/// block's copies over its orbit in balanced_relabelings order, then moves
/// single blocks between support sequences while the residual of the
/// n-scaled optimality equations drops (first improvement, scan order
/// shuffled by `seed`, at most 1e4 moves).
ExactSearchResult exact_search(const MinimaxSolution& sol, const BlockUniverse& universe, int n, std::uint64_t seed);

}  // namespace interfere
