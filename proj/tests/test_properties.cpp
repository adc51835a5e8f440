#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "interfere/exact.hpp"
#include "interfere/solver.hpp"
#include "support.hpp"

using namespace interfere;

namespace {

constexpr int kCases = 100;

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Symmetric under reversal of the plot order.
MatrixXd random_persymmetric(int k, std::mt19937_64& rng) {
  const MatrixXd a = testing::random_spd(k, rng);
  const MatrixXd j = MatrixXd::Identity(k, k).rowwise().reverse();
  return 0.5 * (a + j * a * j);
}

ExactDesign random_design(int k, int t, int n, std::mt19937_64& rng) {
  std::vector<Sequence> rows;
  for (int i = 0; i < n; ++i) rows.push_back(testing::random_sequence(k, t, rng));
  return ExactDesign(k, t, rows);
}

}  // namespace

TEST_CASE("kernel rows sum to zero with rank k-1") {
  std::mt19937_64 rng(101);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 8);
    const auto ker = build_kernel(CovarianceSpec::custom_matrix(testing::random_spd(k, rng)));
    const MatrixXd b = ker.btilde.mat();
    CHECK((b * VectorXd::Ones(k)).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, b.norm()));
    const auto e = eigh(ker.btilde);
    CHECK(std::abs(e.values(0)) < 1e-9 * e.values(k - 1));
    CHECK(e.values(1) > 1e-9 * e.values(k - 1));
  }
}

TEST_CASE("nuisance block Q_s is positive definite on every enumerated block") {
  std::mt19937_64 rng(102);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 6);
    const int t = uniform_int(rng, 2, 4);
    const auto ker = build_kernel(CovarianceSpec::custom_matrix(testing::random_spd(k, rng)));
    for (const auto& b : enumerate_blocks(k, t)) {
      const auto f = quad_form(b.representative, ker);
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(f.q);
      CHECK(es.eigenvalues()(0) > 0);
    }
  }
}

TEST_CASE("type-H counting formulas match the generic path") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  // |b_i| <= 0.03 keeps aI + b1' + 1b' positive definite for k <= 8, a >= 0.5.
  std::uniform_real_distribution<double> ub(-0.03, 0.03);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 8);
    const int t = uniform_int(rng, 2, 6);
    std::vector<double> b(static_cast<std::size_t>(k));
    for (auto& v : b) v = ub(rng);
    const double a = ud(rng);
    const auto ker = build_kernel(CovarianceSpec::type_h(k, a, b));
    const auto s = testing::random_sequence(k, t, rng);
    const auto fast = type_h_coeffs(s, ker);
    const auto slow = undirectional(quad_form(s, ker));
    CHECK(std::abs(fast.q0 - slow.q0) < 1e-10);
    CHECK(std::abs(fast.q1 - slow.q1) < 1e-10);
    CHECK(std::abs(fast.q2 - slow.q2) < 1e-10);
  }
}

TEST_CASE("persymmetric kernels: directional optimum lies on the diagonal") {
  std::mt19937_64 rng(104);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 5);
    const int t = uniform_int(rng, 2, 4);
    const auto u = BlockUniverse::build(k, t, build_kernel(CovarianceSpec::custom_matrix(random_persymmetric(k, rng))));
    const auto rep = undirectional_consistency(u);
    CHECK(rep.persymmetric);
    CHECK(std::abs(rep.x_star(0) - rep.x_star(1)) < 1e-7);
    CHECK(rep.y_gap < 1e-8);
  }
}

TEST_CASE("undirectional information dominates directional") {
  std::mt19937_64 rng(105);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 6);
    const int t = uniform_int(rng, 2, 5);
    const auto ker = build_kernel(CovarianceSpec::custom_matrix(testing::random_spd(k, rng)));
    const auto d = random_design(k, t, uniform_int(rng, 1, 12), rng);
    const MatrixXd diff = (info_matrix(d, ker, ModelKind::undirectional).mat() - info_matrix(d, ker, ModelKind::directional).mat());
    CHECK(eigh(SymMatrix(0.5 * (diff + diff.transpose()))).values(0) >= -1e-9);
  }
}

TEST_CASE("efficiency chain E <= A <= D <= T <= 1") {
  std::mt19937_64 rng(106);
  for (int c = 0; c < kCases; ++c) {
    const int k = uniform_int(rng, 3, 5);
    const int t = uniform_int(rng, 2, 4);
    const auto kind = c % 2 ? ModelKind::undirectional : ModelKind::directional;
    const auto u = BlockUniverse::build(k, t, build_kernel(CovarianceSpec::custom_matrix(testing::random_spd(k, rng))));
    const auto sol = minimax_solve(u, kind);
    const auto r = efficiencies(random_design(k, t, uniform_int(rng, 2, 20), rng), u.kernel, sol);
    CHECK(r.eff_e <= r.eff_a + 1e-9);
    CHECK(r.eff_a <= r.eff_d + 1e-9);
    CHECK(r.eff_d <= r.eff_t + 1e-9);
    CHECK(r.eff_t <= 1 + 1e-9);
  }
}
