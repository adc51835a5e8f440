#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "interfere/model.hpp"
#include "interfere/sequences.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

// Every sequence of length k over 1..t, in odometer order.
inline std::vector<interfere::Sequence> all_sequences(int k, int t) {
  std::vector<interfere::Sequence> out;
  std::vector<int> cur(static_cast<std::size_t>(k), 1);
  while (true) {
    out.emplace_back(cur, t);
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == t) cur[static_cast<std::size_t>(i--)] = 1;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
  }
  return out;
}

// Every permutation of 1..t as a relabeling map.
inline std::vector<std::vector<int>> all_permutations(int t) {
  std::vector<int> p(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) p[static_cast<std::size_t>(i)] = i + 1;
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline interfere::MatrixXd random_spd(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  interfere::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + 0.5 * interfere::MatrixXd::Identity(k, k);
}

inline interfere::Sequence random_sequence(int k, int t, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ud(1, t);
  std::vector<int> s(static_cast<std::size_t>(k));
  for (auto& v : s) v = ud(rng);
  return interfere::Sequence(s, t);
}

}  // namespace testing
