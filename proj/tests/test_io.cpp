#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <functional>

#include "interfere/errors.hpp"
#include "interfere/io.hpp"
#include "support.hpp"

using namespace interfere;
using io::json;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

// FNV-1a over every label, row by row.
std::uint64_t rows_hash(const ExactDesign& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : d.rows)
    for (int v : r.labels()) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
  return h;
}

ExactDesign load(const std::string& name) { return io::design_from_json(json::parse(io::read_file(testing::fixture(name)))); }

}  // namespace

TEST_CASE("fixture designs are unchanged") {
  CHECK(rows_hash(load("d1.json")) == 0xe6c3cb4707143f43ULL);
  CHECK(rows_hash(load("d2.json")) == 0xad8a3df4da775225ULL);
  CHECK(rows_hash(load("quarter.json")) == 0xf1add54965cf3555ULL);
}

TEST_CASE("covariance parsing") {
  CHECK(io::parse_covariance("identity", 4).kind == CovarianceSpec::Kind::identity);
  const auto b = io::parse_covariance(R"({"kind":"banded1","eta":0.25})", 4);
  CHECK(b.kind == CovarianceSpec::Kind::banded1);
  CHECK(b.eta == 0.25);
  const auto h = io::parse_covariance(R"({"kind":"type_h","a":2,"b":[0,1,2]})", 3);
  CHECK(h.a == 2.0);
  CHECK(h.b.size() == 3);
  const auto c = io::parse_covariance(R"({"kind":"custom","rows":[[2,1],[1,2]]})", 2);
  CHECK(c.custom(0, 1) == 1.0);

  const std::string path = (std::filesystem::temp_directory_path() / "interfere_sigma_test.json").string();
  io::write_file(path, R"({"kind":"banded1","eta":0.1})");
  CHECK(io::parse_covariance("@" + path, 5).eta == 0.1);
  std::remove(path.c_str());
}

TEST_CASE("covariance errors name the field") {
  CHECK(message_of([] { io::parse_covariance(R"({"kind":"banded1"})", 4); }).find("'eta'") != std::string::npos);
  CHECK(message_of([] { io::parse_covariance(R"({"eta":1})", 4); }).find("'kind'") != std::string::npos);
  CHECK(message_of([] { io::parse_covariance(R"({"kind":"custom","rows":[[1]]})", 2); }).find("'rows'") !=
        std::string::npos);
  CHECK(message_of([] { io::parse_covariance("wobbly", 4); }).find("sigma") != std::string::npos);
  CHECK_THROWS_AS(io::parse_covariance("", 3), InvalidInput);
  CHECK_THROWS_AS(io::read_file("/nonexistent/file.json"), InvalidInput);
}

TEST_CASE("covariance round trip") {
  for (const auto& spec : {CovarianceSpec::identity(4), CovarianceSpec::banded1(4, 0.3),
                           CovarianceSpec::type_h(4, 1.5, {0.1, 0.2, 0.3, 0.4})}) {
    const auto back = io::covariance_from_json(io::to_json(spec), 4);
    CHECK((back.realize() - spec.realize()).norm() < 1e-15);
  }
}

TEST_CASE("design round trip and errors") {
  const auto d = load("d1.json");
  const auto j = io::to_json(d);
  CHECK(io::is_design_json(j));
  const auto back = io::design_from_json(j);
  CHECK(rows_hash(back) == rows_hash(d));
  auto bad = j;
  bad["n"] = 3;
  CHECK(message_of([&] { io::design_from_json(bad); }).find("'n'") != std::string::npos);
  bad = j;
  bad.erase("t");
  CHECK(message_of([&] { io::design_from_json(bad); }).find("'t'") != std::string::npos);
}

TEST_CASE("measure round trip") {
  int k = 0;
  int t = 0;
  const auto xi = io::measure_from_json(json::parse(io::read_file(testing::fixture("half_1122_1221.json"))), k, t);
  CHECK(k == 4);
  CHECK(t == 2);
  CHECK(xi.entries().size() == 2);
  const auto j = io::to_json(xi, k, t);
  CHECK_FALSE(io::is_design_json(j));
  int k2 = 0;
  int t2 = 0;
  const auto back = io::measure_from_json(j, k2, t2);
  CHECK(back.block_weight(canonicalize(Sequence({1, 1, 2, 2}, 2))) == doctest::Approx(0.5));
  auto bad = j;
  bad["entries"][0].erase("p");
  CHECK(message_of([&] { io::measure_from_json(bad, k2, t2); }).find("'p'") != std::string::npos);
}

TEST_CASE("solution and report output") {
  const auto u = BlockUniverse::build(4, 3, build_kernel(CovarianceSpec::identity(4)));
  const auto sol = minimax_solve(u, ModelKind::directional);
  const auto j = io::to_json(sol);
  CHECK(j.at("model") == "directional");
  CHECK(j.at("x_star").size() == 2);
  CHECK(j.at("support").size() == sol.support.size());
  CHECK(j.at("converged") == true);
  CHECK(j.at("residual").contains("theta_star"));

  EfficiencyReport r;
  r.eff_a = 0.5;
  r.eff_d = 0.25;
  r.eff_e = 0.125;
  r.eff_t = 1.0 / 3;
  CHECK(io::efficiency_csv_header() == "n,eff_a,eff_d,eff_e,eff_t");
  CHECK(io::efficiency_csv_row(7, r) == "7,0.5,0.25,0.125,0.3333333333");
}
