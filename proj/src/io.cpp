#include "interfere/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "interfere/errors.hpp"

namespace interfere::io {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write file '" + path + "'");
  out << text;
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* name, const std::string& ctx) {
  if (!j.is_object() || !j.contains(name)) throw InvalidInput(ctx + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(ctx + ": field '" + std::string(name) + "' has the wrong type");
  }
}

Sequence sequence_from(const json& j, int t, const std::string& ctx) {
  std::vector<int> labels;
  try {
    labels = j.get<std::vector<int>>();
  } catch (const json::exception&) {
    throw InvalidInput(ctx + ": expected an array of integer labels");
  }
  try {
    return Sequence(std::move(labels), t);
  } catch (const InvalidInput& e) {
    throw InvalidInput(ctx + ": " + e.what());
  }
}

}  // namespace

CovarianceSpec parse_covariance(const std::string& text, int k) {
  if (text.empty()) throw InvalidInput("sigma: empty specification");
  if (text.front() == '@') return covariance_from_json(parse_json(read_file(text.substr(1)), "sigma"), k);
  if (text == "identity" || text == "type_h" || text == "banded1") return covariance_from_json(json{{"kind", text}}, k);
  return covariance_from_json(parse_json(text, "sigma"), k);
}

CovarianceSpec covariance_from_json(const json& j, int k) {
  const auto kind = field<std::string>(j, "kind", "sigma");
  if (kind == "identity") return CovarianceSpec::identity(k);
  if (kind == "type_h") {
    const double a = j.contains("a") ? field<double>(j, "a", "sigma") : 1.0;
    std::vector<double> b;
    if (j.contains("b")) b = field<std::vector<double>>(j, "b", "sigma");
    return CovarianceSpec::type_h(k, a, std::move(b));
  }
  if (kind == "banded1") return CovarianceSpec::banded1(k, field<double>(j, "eta", "sigma"));
  if (kind == "custom") {
    const auto rows = field<std::vector<std::vector<double>>>(j, "rows", "sigma");
    if (static_cast<int>(rows.size()) != k) {
      throw InvalidInput("sigma: field 'rows' has " + std::to_string(rows.size()) + " rows, expected k=" + std::to_string(k));
    }
    MatrixXd m(k, k);
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != k) {
        throw InvalidInput("sigma: row " + std::to_string(i + 1) + " of field 'rows' does not have k entries");
      }
      for (int c = 0; c < k; ++c) m(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
    return CovarianceSpec::custom_matrix(m);
  }
  throw InvalidInput("sigma: unknown kind '" + kind + "'");
}

json to_json(const CovarianceSpec& spec) {
  switch (spec.kind) {
    case CovarianceSpec::Kind::identity:
      return {{"kind", "identity"}};
    case CovarianceSpec::Kind::type_h:
      return {{"kind", "type_h"}, {"a", spec.a}, {"b", spec.b}};
    case CovarianceSpec::Kind::banded1:
      return {{"kind", "banded1"}, {"eta", spec.eta}};
    case CovarianceSpec::Kind::custom: {
      json rows = json::array();
      for (Eigen::Index i = 0; i < spec.custom.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(spec.custom.cols()));
        for (Eigen::Index c = 0; c < spec.custom.cols(); ++c) r[static_cast<std::size_t>(c)] = spec.custom(i, c);
        rows.push_back(r);
      }
      return {{"kind", "custom"}, {"rows", rows}};
    }
  }
  return {};
}

ExactDesign design_from_json(const json& j) {
  const int k = field<int>(j, "k", "design");
  const int t = field<int>(j, "t", "design");
  if (!j.contains("rows") || !j.at("rows").is_array()) throw InvalidInput("design: missing field 'rows'");
  std::vector<Sequence> rows;
  for (std::size_t i = 0; i < j.at("rows").size(); ++i) {
    rows.push_back(sequence_from(j.at("rows")[i], t, "design: rows[" + std::to_string(i) + "]"));
  }
  if (j.contains("n") && field<int>(j, "n", "design") != static_cast<int>(rows.size())) {
    throw InvalidInput("design: field 'n' disagrees with the number of rows");
  }
  return ExactDesign(k, t, std::move(rows));
}

json to_json(const ExactDesign& d) {
  json rows = json::array();
  for (const auto& r : d.rows) rows.push_back(r.labels());
  return {{"k", d.k}, {"t", d.t}, {"n", d.n()}, {"rows", rows}};
}

Measure measure_from_json(const json& j, int& k, int& t) {
  k = field<int>(j, "k", "measure");
  t = field<int>(j, "t", "measure");
  if (!j.contains("entries") || !j.at("entries").is_array()) throw InvalidInput("measure: missing field 'entries'");
  std::vector<MeasureEntry> entries;
  for (std::size_t i = 0; i < j.at("entries").size(); ++i) {
    const auto& e = j.at("entries")[i];
    const std::string ctx = "measure: entries[" + std::to_string(i) + "]";
    if (!e.contains("seq")) throw InvalidInput(ctx + ": missing field 'seq'");
    Sequence s = sequence_from(e.at("seq"), t, ctx);
    if (s.k() != k) throw InvalidInput(ctx + ": sequence length differs from k");
    const bool orbit = e.contains("orbit") ? field<bool>(e, "orbit", ctx) : true;
    entries.push_back({std::move(s), field<double>(e, "p", ctx), orbit});
  }
  return Measure(std::move(entries));
}

json to_json(const Measure& xi, int k, int t) {
  json entries = json::array();
  for (const auto& e : xi.entries()) entries.push_back({{"seq", e.seq.labels()}, {"p", e.p}, {"orbit", e.orbit}});
  return {{"k", k}, {"t", t}, {"entries", entries}};
}

json to_json(const MinimaxSolution& sol) {
  json support = json::array();
  for (const auto& e : sol.support) {
    support.push_back({{"rep", e.block.representative.labels()}, {"p", e.p}, {"q_at_x", e.q_at_x}});
  }
  return {{"model", to_string(sol.model)},
          {"k", sol.k},
          {"t", sol.t},
          {"x_star", {sol.x_star(0), sol.x_star(1)}},
          {"y_star", sol.y_star},
          {"support", support},
          {"residual",
           {{"theta_star", sol.residuals.theta_star},
            {"gap", sol.residuals.gap},
            {"subgradient", sol.residuals.subgradient}}},
          {"iterations", sol.iterations},
          {"converged", sol.converged}};
}

json to_json(const EfficiencyReport& rep) {
  return {{"model", to_string(rep.model)}, {"eigenvalues", rep.eigenvalues}, {"eff_a", rep.eff_a},
          {"eff_d", rep.eff_d},            {"eff_e", rep.eff_e},             {"eff_t", rep.eff_t},
          {"y_star_used", rep.y_star_used}};
}

json to_json(const VerifyReport& rep) {
  return {{"is_optimal", rep.is_optimal}, {"q_star", rep.q_star},       {"y_star", rep.y_star},
          {"gap", rep.gap},               {"theta_max", rep.theta_max}, {"deviation", rep.deviation}};
}

std::string efficiency_csv_header() { return "n,eff_a,eff_d,eff_e,eff_t"; }

std::string efficiency_csv_row(int n, const EfficiencyReport& rep) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g", n, rep.eff_a, rep.eff_d, rep.eff_e, rep.eff_t);
  return buf;
}

json to_json(const SymmetricBlock& b) {
  return {{"rep", b.representative.labels()}, {"orbit", b.orbit_size}, {"h", b.distinct_count}};
}

bool is_design_json(const json& j) { return j.is_object() && j.contains("rows"); }

}  // namespace interfere::io
