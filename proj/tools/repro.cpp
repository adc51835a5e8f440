#include "repro.hpp"

#include <cmath>
#include <cstdio>

#include "interfere/exact.hpp"
#include "interfere/solver.hpp"

namespace interfere::tool {

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string four(const EfficiencyReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f %.4f %.4f %.4f", r.eff_a, r.eff_d, r.eff_e, r.eff_t);
  return buf;
}

// Designs printed column-wise; column j is block j.
ExactDesign from_columns(int k, int t, const std::vector<std::vector<int>>& m) {
  std::vector<Sequence> rows;
  for (std::size_t j = 0; j < m.front().size(); ++j) {
    std::vector<int> s;
    for (int i = 0; i < k; ++i) s.push_back(m[static_cast<std::size_t>(i)][j]);
    rows.emplace_back(s, t);
  }
  return ExactDesign(k, t, rows);
}

ExactDesign design_d1() {
  return from_columns(4, 4, {{2, 1, 4, 3, 1, 1, 3, 2, 4, 3},
                             {2, 1, 4, 3, 2, 4, 4, 3, 2, 2},
                             {1, 3, 3, 1, 4, 3, 2, 1, 1, 4},
                             {1, 4, 2, 2, 4, 3, 2, 4, 3, 1}});
}

ExactDesign design_d2() {
  const std::vector<int> a1{1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4};
  const std::vector<int> a3{4, 2, 3, 1, 4, 3, 1, 4, 2, 1, 2, 3};
  const std::vector<int> a4{2, 3, 4, 4, 3, 1, 2, 1, 4, 3, 1, 2};
  const std::vector<int> a5{3, 4, 2, 3, 1, 4, 4, 2, 1, 2, 3, 1};
  auto cat = [](std::vector<int> x, const std::vector<int>& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  return from_columns(5, 4, {cat(a1, a5), cat(a1, a4), cat(a3, a3), cat(a4, a1), cat(a5, a1)});
}

bool all_near(const EfficiencyReport& r, double v, double tol) {
  return std::abs(r.eff_a - v) <= tol && std::abs(r.eff_d - v) <= tol && std::abs(r.eff_e - v) <= tol &&
         std::abs(r.eff_t - v) <= tol;
}

}  // namespace

std::vector<ReproCheck> run_repro() {
  std::vector<ReproCheck> out;
  const AlgorithmConfig cfg;

  for (auto [k, t] : {std::pair{5, 4}, std::pair{4, 3}}) {
    const auto u = BlockUniverse::build(k, t, build_kernel(CovarianceSpec::identity(k)));
    const auto sol = minimax_solve(u, ModelKind::undirectional, cfg);
    const auto cf = closed_form(k, t);
    char name[64];
    std::snprintf(name, sizeof name, "closed form k=%d t=%d", k, t);
    out.push_back({name, fmt("z*=%.8f", cf.z_star) + fmt(" y*=%.8f", cf.y_star),
                   fmt("z*=%.8f", sol.x_star(0)) + fmt(" y*=%.8f", sol.y_star),
                   std::abs(sol.x_star(0) - cf.z_star) <= 1e-6 && std::abs(sol.y_star - cf.y_star) <= 1e-6});
  }

  {
    const auto u = BlockUniverse::build(5, 2, build_kernel(CovarianceSpec::identity(5)));
    const auto sol = minimax_solve(u, ModelKind::directional, cfg);
    out.push_back({"k=5 t=2 optimum", "y*=2.4, 10 support blocks",
                   fmt("y*=%.8f", sol.y_star) + ", " + std::to_string(sol.support.size()) + " support blocks",
                   std::abs(sol.y_star - 2.4) <= 1e-6 && sol.support.size() == 10});
    const ExactDesign quarter(5, 2,
                              {Sequence({1, 1, 2, 2, 1}, 2), Sequence({2, 2, 1, 1, 2}, 2), Sequence({1, 2, 2, 1, 1}, 2),
                               Sequence({2, 1, 1, 2, 2}, 2)});
    const auto r = efficiencies(quarter, u.kernel, sol);
    out.push_back({"quarter design k=5 t=2", "all efficiencies 1", four(r), all_near(r, 1.0, 1e-9)});
  }

  {
    const auto u = BlockUniverse::build(4, 2, build_kernel(CovarianceSpec::identity(4)));
    const auto sol = minimax_solve(u, ModelKind::directional, cfg);
    const Measure km({{Sequence({1, 1, 2, 2}, 2), 0.5, true}, {Sequence({1, 2, 2, 1}, 2), 0.5, true}});
    const auto v = verify_measure(km, u, sol);
    out.push_back({"k=4 t=2 p<1122>=p<1221>=1/2", "optimal", v.is_optimal ? "optimal" : "not optimal", v.is_optimal});
  }

  {
    const auto ker = build_kernel(CovarianceSpec::identity(5));
    const auto sol = minimax_solve(BlockUniverse::build(5, 4, ker), ModelKind::directional, cfg);
    const auto r = efficiencies(design_d2(), ker, sol);
    out.push_back({"d2 k=5 t=4 n=24", "1 1 1 1", four(r), all_near(r, 1.0, 1e-9)});
  }

  {
    const auto ker = build_kernel(CovarianceSpec::identity(4));
    const auto sol = minimax_solve(BlockUniverse::build(4, 4, ker), ModelKind::directional, cfg);
    const auto r = efficiencies(design_d1(), ker, sol);
    const bool ok = std::abs(r.eff_a - 0.9943) <= 5e-4 && std::abs(r.eff_d - 0.9946) <= 5e-4 &&
                    std::abs(r.eff_e - 0.9682) <= 5e-4 && std::abs(r.eff_t - 0.9949) <= 5e-4;
    out.push_back({"d1 k=4 t=4 n=10", "0.9943 0.9946 0.9682 0.9949", four(r), ok});
  }

  const Measure oa({{Sequence({1, 2, 3, 4, 5}, 5), 1.0, true}});
  const Measure b11233({{Sequence({1, 1, 2, 3, 3}, 5), 1.0, true}});
  for (double eta : {0.0, 0.5, 0.9}) {
    const auto ker = build_kernel(CovarianceSpec::banded1(5, eta), eta > 0.6);
    const auto sol = minimax_solve(BlockUniverse::build(5, 5, ker), ModelKind::directional, cfg);
    const auto r = efficiencies(oa, ker, sol);
    if (eta == 0.0) {
      out.push_back({"OA_I k=t=5 identity", ">= 0.94", fmt("%.4f", r.eff_t), r.eff_t >= 0.94});
    } else if (eta == 0.5) {
      out.push_back({"OA_I k=t=5 eta=0.5", "0.8232", fmt("%.4f", r.eff_t), std::abs(r.eff_t - 0.8232) <= 5e-4});
      const auto s = efficiencies(b11233, ker, sol);
      out.push_back({"<11233> k=t=5 eta=0.5", ">= 0.999", fmt("%.5f", s.eff_t), s.eff_t >= 0.999});
    } else {
      out.push_back({"OA_I k=t=5 eta=0.9 (indefinite)", "0.3395", fmt("%.4f", r.eff_t), std::abs(r.eff_t - 0.3395) <= 5e-4});
    }
  }
  return out;
}

}  // namespace interfere::tool
