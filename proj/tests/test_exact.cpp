#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "interfere/errors.hpp"
#include "interfere/exact.hpp"
#include "interfere/io.hpp"
#include "support.hpp"

using namespace interfere;

namespace {

ExactDesign load_design(const std::string& name) {
  return io::design_from_json(nlohmann::json::parse(io::read_file(testing::fixture(name))));
}

MinimaxSolution solve(int k, int t, const KernelMatrix& ker, ModelKind kind = ModelKind::directional) {
  return minimax_solve(BlockUniverse::build(k, t, ker), kind);
}

ExactDesign relabel_all(const ExactDesign& d, const std::vector<int>& perm) {
  std::vector<Sequence> rows;
  for (const auto& r : d.rows) rows.push_back(relabel(r, perm));
  return ExactDesign(d.k, d.t, rows);
}

}  // namespace

TEST_CASE("design validation") {
  CHECK_THROWS_AS(ExactDesign(4, 2, {}), InvalidInput);
  CHECK_THROWS_AS(ExactDesign(4, 2, {Sequence({1, 2, 1}, 2)}), InvalidInput);
  CHECK_THROWS_AS(ExactDesign(4, 2, {Sequence({1, 2, 1, 3}, 3)}), InvalidInput);
}

TEST_CASE("d2 attains the equations exactly") {
  const auto ker = build_kernel(CovarianceSpec::identity(5));
  const auto d = load_design("d2.json");
  REQUIRE(d.n() == 24);
  const auto sol = solve(5, 4, ker);
  const MatrixXd c = info_matrix(d, ker, ModelKind::directional).mat();
  CHECK((c - 24 * sol.y_star / 3 * centering(4)).norm() < 1e-9);
  const auto r = efficiencies(d, ker, sol);
  for (double e : {r.eff_a, r.eff_d, r.eff_e, r.eff_t}) CHECK(std::abs(e - 1) < 1e-9);
}

TEST_CASE("d1 efficiencies") {
  const auto ker = build_kernel(CovarianceSpec::identity(4));
  const auto sol = solve(4, 4, ker);
  const auto r = efficiencies(load_design("d1.json"), ker, sol);
  CHECK(std::abs(r.eff_a - 0.9943) < 5e-4);
  CHECK(std::abs(r.eff_d - 0.9946) < 5e-4);
  CHECK(std::abs(r.eff_e - 0.9682) < 5e-4);
  CHECK(std::abs(r.eff_t - 0.9949) < 5e-4);
  CHECK(r.eigenvalues.size() == 3);
}

TEST_CASE("quarter design of k=5, t=2 is fully efficient") {
  const auto ker = build_kernel(CovarianceSpec::identity(5));
  const auto r = efficiencies(load_design("quarter.json"), ker, solve(5, 2, ker));
  for (double e : {r.eff_a, r.eff_d, r.eff_e, r.eff_t}) CHECK(std::abs(e - 1) < 1e-9);
}

TEST_CASE("measure efficiencies for k=t=5") {
  const Measure oa({{Sequence({1, 2, 3, 4, 5}, 5), 1.0, true}});
  const Measure b({{Sequence({1, 1, 2, 3, 3}, 5), 1.0, true}});
  const auto id = build_kernel(CovarianceSpec::identity(5));
  CHECK(efficiencies(oa, id, solve(5, 5, id)).eff_t >= 0.94);
  const auto k05 = build_kernel(CovarianceSpec::banded1(5, 0.5));
  const auto sol = solve(5, 5, k05);
  CHECK(std::abs(efficiencies(oa, k05, sol).eff_t - 0.8232) < 5e-4);
  CHECK(efficiencies(b, k05, sol).eff_t >= 0.999);
}

TEST_CASE("efficiency formulas on a known spectrum") {
  // eigenvalues 1, 2, 4 with n y* = 3
  const MatrixXd u = contrast_basis(4);
  const MatrixXd c = u * Eigen::Vector3d(1, 2, 4).asDiagonal() * u.transpose();
  const auto r = efficiencies_from_info(SymMatrix(c), 1.0, ModelKind::directional, 3.0);
  CHECK(r.eff_a == doctest::Approx(9.0 / (3 * 1.75)).epsilon(1e-12));
  CHECK(r.eff_d == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.eff_e == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.eff_t == doctest::Approx(7.0 / 3).epsilon(1e-12));
  const MatrixXd sing = u * Eigen::Vector3d(0, 2, 4).asDiagonal() * u.transpose();
  const auto z = efficiencies_from_info(SymMatrix(sing), 1.0, ModelKind::directional, 3.0);
  CHECK(z.eff_a == 0.0);
  CHECK(z.eff_d == 0.0);
  CHECK(z.eff_e == 0.0);
  CHECK(z.eff_t == doctest::Approx(2.0));
}

TEST_CASE("fewer nuisance parameters never lose information") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 3 + rep % 3;
    const int t = 2 + rep % 3;
    const auto ker = build_kernel(CovarianceSpec::custom_matrix(testing::random_spd(k, rng)));
    std::vector<Sequence> rows;
    for (int i = 0; i < 6; ++i) rows.push_back(testing::random_sequence(k, t, rng));
    const ExactDesign d(k, t, rows);
    CHECK(loewner_geq(info_matrix(d, ker, ModelKind::undirectional), info_matrix(d, ker, ModelKind::directional), 1e-9));
  }
}

TEST_CASE("efficiencies are invariant under relabeling treatments") {
  const auto ker = build_kernel(CovarianceSpec::banded1(4, 0.3));
  const auto sol = solve(4, 4, ker);
  const auto d = load_design("d1.json");
  const auto base = efficiencies(d, ker, sol);
  for (const auto& perm : testing::all_permutations(4)) {
    const auto r = efficiencies(relabel_all(d, perm), ker, sol);
    CHECK(r.eff_a == doctest::Approx(base.eff_a).epsilon(1e-10));
    CHECK(r.eff_e == doctest::Approx(base.eff_e).epsilon(1e-10));
  }
}

TEST_CASE("non-converged solutions are refused") {
  const auto ker = build_kernel(CovarianceSpec::identity(4));
  auto sol = solve(4, 4, ker);
  sol.converged = false;
  CHECK_THROWS_AS(efficiencies(load_design("d1.json"), ker, sol), InvalidInput);
}

TEST_CASE("exact_search") {
  SUBCASE("k=5, t=2, n=4 reaches the equations") {
    const auto u = BlockUniverse::build(5, 2, build_kernel(CovarianceSpec::identity(5)));
    const auto sol = minimax_solve(u, ModelKind::directional);
    const auto res = exact_search(sol, u, 4, 1);
    CHECK(res.design.n() == 4);
    CHECK(res.distance < 1e-9);
    CHECK(efficiencies(res.design, u.kernel, sol).eff_a == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("k=t=4, n=10 is as good as d1") {
    const auto u = BlockUniverse::build(4, 4, build_kernel(CovarianceSpec::identity(4)));
    const auto sol = minimax_solve(u, ModelKind::directional);
    const auto res = exact_search(sol, u, 10, 7);
    const auto r = efficiencies(res.design, u.kernel, sol);
    CHECK(r.eff_t >= 0.9949 - 5e-4);
    CHECK(r.eff_a >= 0.9943 - 5e-4);
  }
  SUBCASE("same seed, same design") {
    const auto u = BlockUniverse::build(4, 3, build_kernel(CovarianceSpec::banded1(4, 0.2)));
    const auto sol = minimax_solve(u, ModelKind::directional);
    const auto a = exact_search(sol, u, 9, 42);
    const auto b = exact_search(sol, u, 9, 42);
    REQUIRE(a.design.n() == b.design.n());
    for (int i = 0; i < a.design.n(); ++i) CHECK(a.design.rows[static_cast<std::size_t>(i)] == b.design.rows[static_cast<std::size_t>(i)]);
  }
}
