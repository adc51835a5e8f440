#pragma once

// JSON and CSV formats shared by the command-line tool and the tests.

#include <string>

#include <json.hpp>

#include "interfere/exact.hpp"
#include "interfere/model.hpp"
#include "interfere/solver.hpp"

namespace interfere::io {

using nlohmann::json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// {"kind":"identity"} | {"kind":"type_h","a":..,"b":[..]} |
/// {"kind":"banded1","eta":..} | {"kind":"custom","rows":[[..],..]}.
/// The bare words identity/type_h/banded1 are accepted as well. A leading
/// '@' reads the text from a file. Throws InvalidInput naming the field.
CovarianceSpec parse_covariance(const std::string& text, int k);
CovarianceSpec covariance_from_json(const json& j, int k);
json to_json(const CovarianceSpec& spec);

/// {"k":5,"t":4,"n":24,"rows":[[1,1,4,2,3],..]}, 1-based labels.
ExactDesign design_from_json(const json& j);
json to_json(const ExactDesign& d);

/// {"k":..,"t":..,"entries":[{"seq":[..],"p":..,"orbit":true},..]}.
Measure measure_from_json(const json& j, int& k, int& t);
json to_json(const Measure& xi, int k, int t);

json to_json(const MinimaxSolution& sol);
json to_json(const EfficiencyReport& rep);
json to_json(const VerifyReport& rep);

std::string efficiency_csv_header();
/// n,eff_a,eff_d,eff_e,eff_t with 10 significant digits.
std::string efficiency_csv_row(int n, const EfficiencyReport& rep);

/// {"rep":[..],"orbit":..,"h":..}
json to_json(const SymmetricBlock& b);

/// Distinguishes a design file (has "rows") from a measure file (has "entries").
bool is_design_json(const json& j);

}  // namespace interfere::io
