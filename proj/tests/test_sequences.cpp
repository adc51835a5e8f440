#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "interfere/errors.hpp"
#include "interfere/sequences.hpp"
#include "support.hpp"

using namespace interfere;

TEST_CASE("Sequence validation") {
  CHECK_THROWS_AS(Sequence({1, 3}, 2), InvalidInput);
  CHECK_THROWS_AS(Sequence({0, 1}, 2), InvalidInput);
  CHECK_THROWS_AS(Sequence({}, 2), InvalidInput);
  const Sequence s({1, 2, 1}, 2);
  CHECK(s.k() == 3);
  CHECK(s.str() == "(1 2 1)");
}

TEST_CASE("canonicalize relabels by first occurrence") {
  const auto b = canonicalize(Sequence({3, 3, 1, 4, 1}, 4));
  CHECK(b.representative == Sequence({1, 1, 2, 3, 2}, 4));
  CHECK(b.distinct_count == 3);
  CHECK(b.orbit_size == 24);
}

TEST_CASE("enumerate_blocks agrees with brute-force orbit partition") {
  for (int k = 3; k <= 6; ++k) {
    for (int t = 2; t <= 4; ++t) {
      std::map<std::vector<int>, std::int64_t> orbits;
      for (const auto& s : testing::all_sequences(k, t)) ++orbits[canonicalize(s).representative.labels()];
      const auto blocks = enumerate_blocks(k, t);
      REQUIRE(blocks.size() == orbits.size());
      std::int64_t total = 0;
      for (const auto& b : blocks) {
        CHECK(orbits.at(b.representative.labels()) == b.orbit_size);
        total += b.orbit_size;
      }
      CHECK(static_cast<double>(total) == std::pow(t, k));
      for (std::size_t i = 1; i < blocks.size(); ++i) CHECK(blocks[i - 1].representative < blocks[i].representative);
    }
  }
}

TEST_CASE("block counts from set-partition numbers") {
  CHECK(enumerate_blocks(3, 2).size() == 4);   // S(3,1)+S(3,2)
  CHECK(enumerate_blocks(5, 2).size() == 16);  // 1+15
  CHECK(enumerate_blocks(5, 4).size() == 51);  // Bell(5) - S(5,5)
  CHECK(enumerate_blocks(5, 5).size() == 52);
}

TEST_CASE("enumerate_blocks limits") {
  CHECK_THROWS_AS(enumerate_blocks(2, 3), InvalidInput);
  CHECK_THROWS_AS(enumerate_blocks(4, 1), InvalidInput);
  CHECK_THROWS_AS(enumerate_blocks(12, 5), CapacityError);
}

TEST_CASE("dual and stats") {
  const Sequence s({1, 1, 2, 3, 4}, 4);
  CHECK(dual(s) == Sequence({4, 3, 2, 1, 1}, 4));
  const auto st = stats(s);
  CHECK(st.phi == 1);
  CHECK(st.varphi == 0);
  CHECK(st.freq == std::vector<int>{2, 1, 1, 1});
  CHECK(st.chi == 7);
  CHECK(st.first_label == 1);
  CHECK(st.last_label == 4);
  const auto alt = stats(Sequence({1, 2, 1, 2, 1}, 2));
  CHECK(alt.phi == 0);
  CHECK(alt.varphi == 3);
}

TEST_CASE("balanced_relabelings: injective, complete, affine group first") {
  for (int t : {2, 3, 4, 5, 6, 7, 8, 9}) {
    for (int h = 1; h <= std::min(t, 4); ++h) {
      const auto maps = balanced_relabelings(h, t);
      CHECK(static_cast<std::int64_t>(maps.size()) == falling_factorial(t, h));
      std::set<std::vector<int>> seen(maps.begin(), maps.end());
      CHECK(seen.size() == maps.size());
      for (const auto& m : maps) CHECK(std::set<int>(m.begin(), m.end()).size() == static_cast<std::size_t>(h));
    }
  }
  // Sharp 2-transitivity of the leading t(t-1) maps for prime powers.
  for (int t : {2, 3, 4, 5, 7, 8, 9}) {
    const auto maps = balanced_relabelings(t, t);
    std::map<std::pair<int, int>, int> pairs;
    for (int i = 0; i < t * (t - 1); ++i) pairs[{maps[static_cast<std::size_t>(i)][0], maps[static_cast<std::size_t>(i)][1]}]++;
    CHECK(pairs.size() == static_cast<std::size_t>(t * (t - 1)));
    for (const auto& [p, c] : pairs) CHECK(c == 1);
  }
}

TEST_CASE("orbit_sequences lists the whole orbit") {
  for (const auto& b : enumerate_blocks(5, 3)) {
    const auto members = orbit_sequences(b);
    CHECK(static_cast<std::int64_t>(members.size()) == b.orbit_size);
    std::set<std::vector<int>> distinct;
    for (const auto& m : members) {
      CHECK(canonicalize(m).representative == b.representative);
      distinct.insert(m.labels());
    }
    CHECK(distinct.size() == members.size());
  }
  CHECK_THROWS_AS(relabel(Sequence({1, 2, 3}, 3), {2, 1}), InvalidInput);
}
