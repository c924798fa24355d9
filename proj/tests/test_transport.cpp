#include <catch2/catch_amalgamated.hpp>

#include "ot_bruteforce.hpp"
#include "test_helpers.hpp"

using namespace soficlab;
using soficlab::testing::ab;
using soficlab::testing::dist;

TEST_CASE("ground distance takes the heaviest differing coordinate", "[transport]") {
  const Alphabet a = ab();
  CHECK(ground_distance(parse_pattern(a, "abab"), parse_pattern(a, "abab")) == 0.0);
  CHECK(ground_distance(parse_pattern(a, "aab"), parse_pattern(a, "bab")) == 1.0);
  CHECK(ground_distance(parse_pattern(a, "aba"), parse_pattern(a, "abb")) == 1.0 / 3.0);
  CHECK_THROWS_AS(ground_distance(parse_pattern(a, "ab"), parse_pattern(a, "a")),
                  std::invalid_argument);
}

TEST_CASE("metric sandwich adds the tail weight", "[transport]") {
  const auto [lo2, hi2] = metric_sandwich(0.1, 2);
  CHECK(lo2 == 0.1);
  CHECK(hi2 == Catch::Approx(0.1 + 1.0 / 3.0));
  const auto [lo5, hi5] = metric_sandwich(0.0, 5);
  CHECK(lo5 == 0.0);
  CHECK(hi5 == Catch::Approx(1.0 / 6.0));
}

TEST_CASE("kantorovich on hand-checked instances", "[transport]") {
  const Alphabet a = ab();

  SECTION("equal distributions have distance zero and a diagonal coupling") {
    const auto d = dist(2, a, {{"aa", 0.5}, {"ab", 0.25}, {"bb", 0.25}});
    const auto cert = kantorovich(d, d);
    CHECK(cert.value == 0.0);
    for (const auto& entry : cert.coupling.entries) CHECK(entry.left == entry.right);
  }
  SECTION("diracs at distinct symbols") {
    const auto cert = kantorovich(dist(1, a, {{"a", 1.0}}), dist(1, a, {{"b", 1.0}}));
    CHECK(cert.value == 1.0);
  }
  SECTION("uniform to dirac is total variation at m = 1") {
    const auto cert =
        kantorovich(dist(1, a, {{"a", 0.5}, {"b", 0.5}}), dist(1, a, {{"a", 1.0}}));
    CHECK(cert.value == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("mass moving at coordinate-1 cost") {
    const auto cert = kantorovich(dist(2, a, {{"aa", 0.5}, {"ab", 0.5}}),
                                  dist(2, a, {{"aa", 0.5}, {"bb", 0.5}}));
    CHECK(cert.value == Catch::Approx(0.5).margin(1e-12));
  }
  SECTION("mass moving at coordinate-2 cost") {
    const auto cert = kantorovich(
        dist(2, a, {{"ab", 0.5}, {"ba", 0.5}}),
        dist(2, a, {{"aa", 0.25}, {"ab", 0.25}, {"ba", 0.25}, {"bb", 0.25}}));
    CHECK(cert.value == Catch::Approx(0.25).margin(1e-12));
  }
}

TEST_CASE("solver matches the polytope-vertex oracle on small supports", "[transport]") {
  Rng rng(2024);
  const Alphabet a = testing::abc();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(3);
    const auto d1 = testing::random_dist(rng, m, a, 1 + rng.below(4));
    const auto d2 = testing::random_dist(rng, m, a, 1 + rng.below(4));
    const auto cert = kantorovich(d1, d2);
    const double brute = testing::bruteforce_kantorovich(d1, d2);
    CHECK(cert.value == Catch::Approx(brute).margin(1e-9));
  }
}

TEST_CASE("kantorovich is a metric at fixed window", "[transport]") {
  Rng rng(11);
  const Alphabet a = ab();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(3);
    const auto d1 = testing::random_dist(rng, m, a, 1 + rng.below(4));
    const auto d2 = testing::random_dist(rng, m, a, 1 + rng.below(4));
    const auto d3 = testing::random_dist(rng, m, a, 1 + rng.below(4));
    const double d12 = kantorovich(d1, d2).value;
    const double d21 = kantorovich(d2, d1).value;
    const double d13 = kantorovich(d1, d3).value;
    const double d32 = kantorovich(d3, d2).value;
    CHECK(d12 == Catch::Approx(d21).margin(1e-12));  // symmetry
    CHECK(d12 <= d13 + d32 + 1e-7);                  // triangle
    CHECK(kantorovich(d1, d1).value < 1e-9);         // indiscernibles
  }
}

TEST_CASE("optimal couplings are feasible and price the value", "[transport]") {
  Rng rng(31);
  const Alphabet a = testing::abc();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(3);
    const auto d1 = testing::random_dist(rng, m, a, 1 + rng.below(5));
    const auto d2 = testing::random_dist(rng, m, a, 1 + rng.below(5));
    const auto cert = kantorovich(d1, d2);
    std::map<Pattern, double> left, right;
    double priced = 0.0;
    for (const auto& entry : cert.coupling.entries) {
      CHECK(entry.mass > 0.0);
      left[entry.left] += entry.mass;
      right[entry.right] += entry.mass;
      priced += entry.mass * ground_distance(entry.left, entry.right);
    }
    for (const auto& [p, mass] : d1.mass())
      CHECK(left[p] == Catch::Approx(mass).margin(1e-9));
    for (const auto& [p, mass] : d2.mass())
      CHECK(right[p] == Catch::Approx(mass).margin(1e-9));
    CHECK(priced == Catch::Approx(cert.value).margin(1e-9));
  }
}

TEST_CASE("total variation bounds kantorovich", "[transport]") {
  const Alphabet a = ab();
  CHECK(total_variation(dist(1, a, {{"a", 1.0}}), dist(1, a, {{"a", 1.0}})) == 0.0);
  CHECK(total_variation(dist(1, a, {{"a", 1.0}}), dist(1, a, {{"b", 1.0}})) == 1.0);
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(4);
    const auto d1 = testing::random_dist(rng, m, a, 1 + rng.below(6));
    const auto d2 = testing::random_dist(rng, m, a, 1 + rng.below(6));
    CHECK(kantorovich(d1, d2).value <= total_variation(d1, d2) + 1e-9);
  }
}

TEST_CASE("mismatched windows or alphabets are rejected", "[transport]") {
  const Alphabet a = ab();
  CHECK_THROWS_AS(kantorovich(dist(1, a, {{"a", 1.0}}), dist(2, a, {{"aa", 1.0}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      kantorovich(dist(1, a, {{"a", 1.0}}), dist(1, testing::abc(), {{"a", 1.0}})),
      std::invalid_argument);
}
