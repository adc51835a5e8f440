#include "interfere/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "interfere/errors.hpp"

namespace interfere {

ExactDesign::ExactDesign(int k_, int t_, std::vector<Sequence> rows_) : k(k_), t(t_), rows(std::move(rows_)) {
  if (rows.empty()) throw InvalidInput("exact design: n must be >= 1");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].k() != k || rows[i].t() != t) {
      throw InvalidInput("exact design: row " + std::to_string(i + 1) + " does not match k=" + std::to_string(k) +
                         ", t=" + std::to_string(t));
    }
  }
}

SymMatrix info_matrix(const ExactDesign& d, const KernelMatrix& kernel, ModelKind kind) {
  if (d.rows.empty()) throw InvalidInput("info_matrix: empty design");
  if (kernel.k() != d.k) throw DimensionMismatch("info_matrix: kernel size differs from block size");
  InfoComponents total = info_components(d.rows.front(), kernel);
  for (std::size_t i = 1; i < d.rows.size(); ++i) total += info_components(d.rows[i], kernel);
  return information_matrix(total, kind);
}

EfficiencyReport efficiencies_from_info(const SymMatrix& c, double n, ModelKind kind, double y_star) {
  if (!(y_star > 0.0) || !std::isfinite(y_star)) throw InvalidInput("efficiencies: y* must be positive and finite");
  if (!(n > 0.0)) throw InvalidInput("efficiencies: n must be positive");
  const Eigen::Index t = c.dim();
  const MatrixXd u = contrast_basis(t);
  const EigenDecomposition eig = eigh(SymMatrix(u.transpose() * c.mat() * u));

  EfficiencyReport rep;
  rep.model = kind;
  rep.y_star_used = y_star;
  const double tm1 = static_cast<double>(t - 1);
  const double scale = tm1 / (n * y_star);
  double sum = 0.0;
  double inv_sum = 0.0;
  double log_sum = 0.0;
  bool singular = false;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double a = eig.values(i);
    rep.eigenvalues.push_back(a);
    sum += a;
    if (a <= 1e-12 * std::max(1.0, std::abs(eig.values.maxCoeff()))) {
      singular = true;
    } else {
      inv_sum += 1.0 / a;
      log_sum += std::log(a);
    }
  }
  rep.eff_t = sum / (n * y_star);
  if (singular) return rep;  // A, D and E are zero for a disconnected design
  rep.eff_a = tm1 * tm1 / (n * y_star * inv_sum);
  rep.eff_d = scale * std::exp(log_sum / tm1);
  rep.eff_e = scale * rep.eigenvalues.front();
  return rep;
}

EfficiencyReport efficiencies(const ExactDesign& d, const KernelMatrix& kernel, ModelKind kind, double y_star) {
  return efficiencies_from_info(info_matrix(d, kernel, kind), d.n(), kind, y_star);
}

EfficiencyReport efficiencies(const Measure& xi, const KernelMatrix& kernel, const MinimaxSolution& sol) {
  if (!sol.converged) throw InvalidInput("efficiencies: y* comes from a solution that did not converge");
  return efficiencies_from_info(measure_information(xi, kernel, sol.model), 1.0, sol.model, sol.y_star);
}

EfficiencyReport efficiencies(const ExactDesign& d, const KernelMatrix& kernel, const MinimaxSolution& sol) {
  if (!sol.converged) throw InvalidInput("efficiencies: y* comes from a solution that did not converge");
  return efficiencies(d, kernel, sol.model, sol.y_star);
}

namespace {

std::vector<int> largest_remainder(const std::vector<double>& p, int n) {
  std::vector<int> out(p.size());
  std::vector<double> frac(p.size());
  int used = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double want = n * p[i];
    out[i] = static_cast<int>(std::floor(want + 1e-9));
    frac[i] = want - out[i];
    used += out[i];
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; used < n; i = (i + 1) % order.size(), ++used) ++out[order[i]];
  for (std::size_t i = order.size(); used > n && i-- > 0;) {
    if (out[order[i]] > 0) {
      --out[order[i]];
      --used;
    }
  }
  return out;
}

}  // namespace

ExactSearchResult exact_search(const MinimaxSolution& sol, const BlockUniverse& universe, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("exact_search: n must be >= 1");
  if (!sol.converged) throw InvalidInput("exact_search: solution did not converge");
  if (sol.support.empty()) throw InvalidInput("exact_search: empty support");

  // Block proportions from the equation system, falling back to the
  // algorithm's measure when the system has no exact nonnegative solution.
  const ProportionResult prop = solve_proportions(sol, universe, ProportionLevel::block);
  const Measure& xi = prop.exact ? prop.measure : sol.optimal_measure;
  std::vector<double> p;
  for (const auto& e : sol.support) p.push_back(xi.block_weight(e.block));
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateMeasure("exact_search: support carries no weight");
  for (double& v : p) v /= total;
  const std::vector<int> block_counts = largest_remainder(p, n);

  // Candidate sequences and their starting counts.
  std::vector<Sequence> seqs;
  std::vector<int> counts;
  for (std::size_t b = 0; b < sol.support.size(); ++b) {
    const auto members = orbit_sequences(sol.support[b].block);
    const std::size_t offset = seqs.size();
    seqs.insert(seqs.end(), members.begin(), members.end());
    counts.resize(seqs.size(), 0);
    for (int c = 0; c < block_counts[b]; ++c) ++counts[offset + static_cast<std::size_t>(c) % members.size()];
  }

  const auto m = static_cast<Eigen::Index>(seqs.size());
  const VectorXd rhs = static_cast<double>(n) * equation_rhs(universe.t, sol.y_star, sol.model);
  MatrixXd a(rhs.size(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    a.col(j) = equation_lhs(info_components(seqs[static_cast<std::size_t>(j)], universe.kernel), sol.x_star, sol.model);
  }
  VectorXd cv(m);
  for (Eigen::Index j = 0; j < m; ++j) cv(j) = counts[static_cast<std::size_t>(j)];
  VectorXd r = a * cv - rhs;
  const MatrixXd gram = a.transpose() * a;
  VectorXd g = a.transpose() * r;

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> from(static_cast<std::size_t>(m));
  std::iota(from.begin(), from.end(), 0);
  std::vector<Eigen::Index> to = from;
  std::shuffle(from.begin(), from.end(), rng);
  std::shuffle(to.begin(), to.end(), rng);

  auto transfer = [&](Eigen::Index i, Eigen::Index j) {
    --counts[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(j)];
    r += a.col(j) - a.col(i);
    g += gram.col(j) - gram.col(i);
  };

  constexpr long kMaxMoves = 10000;
  constexpr int kMaxKicks = 5000;
  long moves = 0;
  auto single_gain = [&](Eigen::Index i, Eigen::Index j) {
    return 2.0 * (g(j) - g(i)) + gram(j, j) + gram(i, i) - 2.0 * gram(i, j);
  };
  auto single_pass = [&](double floor_gain) {
    for (auto i : from) {
      if (counts[static_cast<std::size_t>(i)] == 0) continue;
      for (auto j : to) {
        if (i != j && single_gain(i, j) < -floor_gain) {
          transfer(i, j);
          ++moves;
          return true;
        }
      }
    }
    return false;
  };
  // Two simultaneous transfers i->j, k->l.
  auto pair_pass = [&](double floor_gain) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cand;
    for (auto i : from) {
      if (counts[static_cast<std::size_t>(i)] == 0) continue;
      for (auto j : to)
        if (i != j) cand.emplace_back(i, j);
    }
    for (std::size_t x = 0; x < cand.size(); ++x) {
      const auto [i, j] = cand[x];
      const double d1 = single_gain(i, j);
      for (std::size_t y = x + 1; y < cand.size(); ++y) {
        const auto [k, l] = cand[y];
        if (k == i && counts[static_cast<std::size_t>(i)] < 2) continue;
        const double cross = gram(j, l) - gram(j, k) - gram(i, l) + gram(i, k);
        if (d1 + single_gain(k, l) + 2.0 * cross < -floor_gain) {
          transfer(i, j);
          transfer(k, l);
          moves += 2;
          return true;
        }
      }
    }
    return false;
  };
  auto descend = [&]() {
    while (moves < kMaxMoves) {
      const double floor_gain = 1e-12 * std::max(1.0, r.squaredNorm());
      if (single_pass(floor_gain)) continue;
      if (!pair_pass(floor_gain)) break;
    }
  };

  // Single transfers stall in local optima; restart from random two-unit
  // kicks of the best counts, sharing the same move budget.
  descend();
  std::vector<int> best_counts = counts;
  double best = r.squaredNorm();
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  const double exact_level = 1e-20 * std::max(1.0, rhs.squaredNorm());
  for (int kick = 0; kick < kMaxKicks && moves < kMaxMoves && best > exact_level && m > 1; ++kick) {
    for (int step = 0; step < 2; ++step) {
      Eigen::Index i = pick(rng);
      while (counts[static_cast<std::size_t>(i)] == 0) i = (i + 1) % m;
      Eigen::Index j = pick(rng);
      if (j == i) j = (j + 1) % m;
      transfer(i, j);
    }
    descend();
    if (r.squaredNorm() < best * (1.0 - 1e-12)) {
      best = r.squaredNorm();
      best_counts = counts;
    } else {
      // Back to the incumbent.
      for (Eigen::Index j = 0; j < m; ++j) {
        cv(j) = best_counts[static_cast<std::size_t>(j)] - counts[static_cast<std::size_t>(j)];
      }
      r += a * cv;
      g += gram * cv;
      counts = best_counts;
    }
  }
  counts = best_counts;

  for (Eigen::Index j = 0; j < m; ++j) cv(j) = counts[static_cast<std::size_t>(j)];
  std::vector<Sequence> rows;
  for (std::size_t j = 0; j < seqs.size(); ++j)
    for (int c = 0; c < counts[j]; ++c) rows.push_back(seqs[j]);
  return {ExactDesign(universe.k, universe.t, std::move(rows)), (a * cv - rhs).norm(), moves};
}

}  // namespace interfere
