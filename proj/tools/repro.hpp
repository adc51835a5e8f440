#pragma once

#include <string>
#include <vector>

namespace interfere::tool {

struct ReproCheck {
  std::string name;
  std::string expected;
  std::string observed;
  bool pass = false;
};

/// Recomputes the worked examples: closed forms, d1/d2, the quarter design,
/// the (4,2) measures and the OA_I efficiencies.
std::vector<ReproCheck> run_repro();

}  // namespace interfere::tool
