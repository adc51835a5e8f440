// interfere_opt: optimal block designs under neighbor interference.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "interfere/errors.hpp"
#include "interfere/exact.hpp"
#include "interfere/io.hpp"
#include "interfere/sequences.hpp"
#include "interfere/solver.hpp"
#include "repro.hpp"

using namespace interfere;
using nlohmann::json;

namespace {

// Bad user input; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int k = 0;
  int t = 0;
  int n = 0;
  std::string n_range;
  std::string model = "directional";
  std::string sigma = "identity";
  double eps = 1e-7;
  double omega = 1.0;
  long max_iters = 100000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  bool allow_indefinite = false;
  std::string file;
};

void check_kt(const RunConfig& c) {
  if (c.k < 3) throw ConfigError("field 'k' must be >= 3 (got " + std::to_string(c.k) + ")");
  if (c.t < 2) throw ConfigError("field 't' must be >= 2 (got " + std::to_string(c.t) + ")");
}

ModelKind model_of(const RunConfig& c) {
  try {
    return parse_model_kind(c.model);
  } catch (const Error&) {
    throw ConfigError("field 'model' must be directional or undirectional (got '" + c.model + "')");
  }
}

AlgorithmConfig algorithm_of(const RunConfig& c) {
  AlgorithmConfig a;
  a.epsilon = c.eps;
  a.omega = c.omega;
  a.max_iters = c.max_iters;
  try {
    a.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'eps'/'omega'/'max-iters': ") + e.what());
  }
  return a;
}

KernelMatrix kernel_of(const RunConfig& c, int k) {
  CovarianceSpec spec;
  try {
    spec = io::parse_covariance(c.sigma, k);
    return build_kernel(spec, c.allow_indefinite);
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'sigma': ") + e.what());
  }
}

std::string format_of(const RunConfig& c, const char* fallback) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (f != "json" && f != "csv") throw ConfigError("field 'format' must be json or csv (got '" + f + "')");
  return f;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    io::write_file(c.out, text.back() == '\n' ? text : text + "\n");
  }
}

MinimaxSolution solve_for(const RunConfig& c, int k, int t, const KernelMatrix& ker, ModelKind kind) {
  const auto universe = BlockUniverse::build(k, t, ker);
  return minimax_solve(universe, kind, algorithm_of(c));
}

int cmd_solve(const RunConfig& c) {
  check_kt(c);
  const auto kind = model_of(c);
  const auto ker = kernel_of(c, c.k);
  const auto universe = BlockUniverse::build(c.k, c.t, ker);
  const auto sol = minimax_solve(universe, kind, algorithm_of(c));
  json j = io::to_json(sol);
  const auto prop = solve_proportions(sol, universe, ProportionLevel::block);
  j["proportions"] = io::to_json(prop.measure, c.k, c.t);
  j["proportions"]["residual"] = prop.residual;
  j["proportions"]["exact"] = prop.exact;
  if (ker.indefinite_sigma) j["warning"] = "sigma is not positive definite; minimax optimality is not guaranteed";
  emit(c, j.dump(2));
  return 0;
}

int cmd_verify(const RunConfig& c) {
  json in;
  try {
    in = json::parse(io::read_file(c.file));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("field 'file': ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("field 'file': ") + e.what());
  }
  const auto kind = model_of(c);
  json report;
  EfficiencyReport eff;
  int n = 1;
  if (io::is_design_json(in)) {
    ExactDesign d;
    try {
      d = io::design_from_json(in);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("field 'file': ") + e.what());
    }
    RunConfig kc = c;
    kc.k = d.k;
    kc.t = d.t;
    check_kt(kc);
    const auto ker = kernel_of(c, d.k);
    const auto sol = solve_for(c, d.k, d.t, ker, kind);
    eff = efficiencies(d, ker, sol);
    n = d.n();
    const SymMatrix info = info_matrix(d, ker, kind);
    const double dev = (info.mat() - n * sol.y_star * centering(d.t) / (d.t - 1.0)).norm();
    report = {{"kind", "design"}, {"n", n}, {"y_star", sol.y_star}, {"efficiency", io::to_json(eff)},
              {"universally_optimal", dev <= 1e-8 * n * sol.y_star}};
  } else {
    int k = 0;
    int t = 0;
    Measure xi;
    try {
      xi = io::measure_from_json(in, k, t);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("field 'file': ") + e.what());
    }
    RunConfig kc = c;
    kc.k = k;
    kc.t = t;
    check_kt(kc);
    const auto ker = kernel_of(c, k);
    const auto universe = BlockUniverse::build(k, t, ker);
    const auto sol = minimax_solve(universe, kind, algorithm_of(c));
    eff = efficiencies(xi, ker, sol);
    report = {{"kind", "measure"}, {"y_star", sol.y_star}, {"efficiency", io::to_json(eff)},
              {"verify", io::to_json(verify_measure(xi, universe, sol))}};
  }
  if (format_of(c, "json") == "csv") {
    emit(c, io::efficiency_csv_header() + "\n" + io::efficiency_csv_row(n, eff));
  } else {
    emit(c, report.dump(2));
  }
  return 0;
}

int cmd_exact(const RunConfig& c) {
  check_kt(c);
  if (c.n < 1) throw ConfigError("field 'n' must be >= 1 (got " + std::to_string(c.n) + ")");
  const auto kind = model_of(c);
  const auto ker = kernel_of(c, c.k);
  const auto universe = BlockUniverse::build(c.k, c.t, ker);
  const auto sol = minimax_solve(universe, kind, algorithm_of(c));
  const auto res = exact_search(sol, universe, c.n, c.seed);
  const auto eff = efficiencies(res.design, ker, sol);
  const json design = io::to_json(res.design);
  json report = {{"n", c.n},          {"seed", c.seed},         {"y_star", sol.y_star},
                 {"distance", res.distance}, {"moves", res.moves}, {"efficiency", io::to_json(eff)}};
  const bool csv = format_of(c, "json") == "csv";
  if (!c.out.empty()) {
    // Design to the file, report to stdout.
    io::write_file(c.out, design.dump(2) + "\n");
    std::cout << (csv ? io::efficiency_csv_header() + "\n" + io::efficiency_csv_row(c.n, eff) : report.dump(2)) << '\n';
    return 0;
  }
  if (csv) {
    std::cout << io::efficiency_csv_header() << '\n' << io::efficiency_csv_row(c.n, eff) << '\n';
  } else {
    report["design"] = design;
    std::cout << report.dump(2) << '\n';
  }
  return 0;
}

std::pair<int, int> n_range_of(const RunConfig& c) {
  std::string r = c.n_range;
  if (r.empty() && c.n > 0) r = std::to_string(c.n);
  if (r.empty()) throw ConfigError("field 'n' is required (a value or a range such as 5..50)");
  int from = 0;
  int to = 0;
  try {
    const auto dots = r.find("..");
    std::size_t used = 0;
    if (dots == std::string::npos) {
      from = to = std::stoi(r, &used);
      if (used != r.size()) throw std::invalid_argument(r);
    } else {
      from = std::stoi(r.substr(0, dots), &used);
      if (used != dots) throw std::invalid_argument(r);
      const std::string tail = r.substr(dots + 2);
      to = std::stoi(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(r);
    }
  } catch (const std::exception&) {
    throw ConfigError("field 'n' must be an integer or a range a..b (got '" + r + "')");
  }
  if (from < 1) throw ConfigError("field 'n' must start at >= 1");
  if (from > to) throw ConfigError("field 'n': range start exceeds range end");
  return {from, to};
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("INTERFERE_OPT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = std::min(cap, static_cast<unsigned>(v));
  }
  return cap;
}

int cmd_sweep(const RunConfig& c) {
  check_kt(c);
  const auto [from, to] = n_range_of(c);
  const auto kind = model_of(c);
  const auto ker = kernel_of(c, c.k);
  const auto universe = BlockUniverse::build(c.k, c.t, ker);
  const auto sol = minimax_solve(universe, kind, algorithm_of(c));
  const int count = to - from + 1;
  std::vector<EfficiencyReport> rows(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      const auto res = exact_search(sol, universe, from + i, c.seed);
      rows[static_cast<std::size_t>(i)] = efficiencies(res.design, ker, sol);
    }
  };
  const unsigned threads = std::min(thread_cap(), static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (format_of(c, "csv") == "csv") {
    std::string text = io::efficiency_csv_header() + "\n";
    for (int i = 0; i < count; ++i) text += io::efficiency_csv_row(from + i, rows[static_cast<std::size_t>(i)]) + "\n";
    emit(c, text);
  } else {
    json arr = json::array();
    for (int i = 0; i < count; ++i) {
      json r = io::to_json(rows[static_cast<std::size_t>(i)]);
      r["n"] = from + i;
      arr.push_back(r);
    }
    emit(c, arr.dump(2));
  }
  return 0;
}

int cmd_enumerate(const RunConfig& c) {
  check_kt(c);
  std::string text;
  for (const auto& b : enumerate_blocks(c.k, c.t)) text += io::to_json(b).dump() + "\n";
  emit(c, text);
  return 0;
}

int cmd_repro(const RunConfig& c) {
  const auto checks = tool::run_repro();
  std::string text;
  char line[512];
  int failed = 0;
  for (const auto& ch : checks) {
    std::snprintf(line, sizeof line, "%-4s  %-34s expected %-30s observed %s\n", ch.pass ? "PASS" : "FAIL",
                  ch.name.c_str(), ch.expected.c_str(), ch.observed.c_str());
    text += line;
    failed += !ch.pass;
  }
  text += std::to_string(checks.size() - static_cast<std::size_t>(failed)) + "/" + std::to_string(checks.size()) +
          " checks passed\n";
  emit(c, text);
  return 0;
}

void add_common(CLI::App* sub, RunConfig& c, bool kt) {
  if (kt) {
    sub->add_option("--k", c.k, "block size (plots per block)")->required();
    sub->add_option("--t", c.t, "number of treatments")->required();
  }
  sub->add_option("--model", c.model, "directional | undirectional");
  sub->add_option("--sigma", c.sigma, "covariance as inline JSON, a kind name, or @file");
  sub->add_option("--eps", c.eps, "stop once theta* <= 1 + eps");
  sub->add_option("--omega", c.omega, "step exponent");
  sub->add_option("--max-iters", c.max_iters, "iteration cap of the measure algorithm");
  sub->add_option("--out", c.out, "write output to this file");
  sub->add_option("--format", c.format, "json | csv");
  sub->add_flag("--allow-indefinite", c.allow_indefinite, "accept a nonsingular indefinite sigma");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal block designs under neighbor interference"};
  app.require_subcommand(1);
  RunConfig c;

  auto* solve = app.add_subcommand("solve", "minimax solution and optimal proportions");
  add_common(solve, c, true);

  auto* verify = app.add_subcommand("verify", "efficiencies of a design file or optimality of a measure file");
  add_common(verify, c, false);
  verify->add_option("file", c.file, "design or measure JSON")->required();

  auto* exact = app.add_subcommand("exact", "search an exact n-block design");
  add_common(exact, c, true);
  exact->add_option("--n", c.n, "number of blocks")->required();
  exact->add_option("--seed", c.seed, "local-search seed");

  auto* sweep = app.add_subcommand("sweep", "efficiencies of searched designs over a range of n");
  add_common(sweep, c, true);
  sweep->add_option("--n", c.n_range, "n or a range a..b")->required();
  sweep->add_option("--seed", c.seed, "local-search seed");

  auto* enumerate = app.add_subcommand("enumerate", "list symmetric blocks as JSON lines");
  add_common(enumerate, c, true);

  auto* repro = app.add_subcommand("repro", "recompute the worked examples and print a pass/fail table");
  repro->add_option("--out", c.out, "write the table to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve) return cmd_solve(c);
    if (*verify) return cmd_verify(c);
    if (*exact) return cmd_exact(c);
    if (*sweep) return cmd_sweep(c);
    if (*enumerate) return cmd_enumerate(c);
    if (*repro) return cmd_repro(c);
  } catch (const ConvergenceError& e) {
    const json diag = {{"error", "non-convergence"},
                       {"message", e.what()},
                       {"last_theta", e.last_theta()},
                       {"iterations", e.iterations()}};
    std::cout << diag.dump(2) << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const CapacityError& e) {
    std::cerr << "config error: fields 'k'/'t': " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
