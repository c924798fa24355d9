#include <catch2/catch_amalgamated.hpp>

#include "soficlab/microstate.hpp"
#include "test_helpers.hpp"

using namespace soficlab;
using soficlab::testing::ab;
using soficlab::testing::dist;
using soficlab::testing::micro;

namespace {

CylinderOracle uniform_bernoulli() {
  return CylinderOracle::bernoulli(Group::integers(), ab(), {0.5, 0.5});
}

}  // namespace

TEST_CASE("theta reads the labels along the window orbit", "[microstate]") {
  const FiniteModel m4 = FiniteModel::cyclic_model(4);
  const Microstate tau = micro(ab(), "abab");
  // window (0, 1, -1): sigma^0(0)=0, sigma^1(0)=1, sigma^{-1}(0)=3
  CHECK(pattern_key(ab(), theta(m4, tau, 0, 3)) == "abb");
  for (std::uint32_t v = 0; v < 4; ++v)
    CHECK(theta(m4, tau, v, 1) == Pattern{tau.labels[v]});
  const Microstate constant = Microstate::constant(ab(), 0, 4);
  CHECK(pattern_key(ab(), theta(m4, constant, 2, 3)) == "aaa");
}

TEST_CASE("empirical distribution of a 2-periodic labelling", "[microstate]") {
  const FiniteModel m4 = FiniteModel::cyclic_model(4);
  const auto emp = empirical(m4, micro(ab(), "abab"), 2);
  CHECK(emp.prob(parse_pattern(ab(), "ab")) == Catch::Approx(0.5));
  CHECK(emp.prob(parse_pattern(ab(), "ba")) == Catch::Approx(0.5));
  CHECK(emp.mass().size() == 2);

  const auto dirac = empirical(m4, Microstate::constant(ab(), 0, 4), 3);
  REQUIRE(dirac.mass().size() == 1);
  CHECK(dirac.prob(parse_pattern(ab(), "aaa")) == Catch::Approx(1.0));

  const auto point = empirical(FiniteModel::cyclic_model(1), micro(ab(), "b"), 2);
  REQUIRE(point.mass().size() == 1);
  CHECK(point.prob(parse_pattern(ab(), "bb")) == Catch::Approx(1.0));
}

TEST_CASE("empirical masses are exact multiples of 1/|V|", "[microstate]") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const FiniteModel model = testing::random_table_model(rng, n, 3);
    const Microstate tau = testing::random_micro(rng, ab(), n);
    const std::size_t m = 1 + rng.below(4);
    const auto counts = empirical_counts(model, tau, m);
    std::uint64_t total = 0;
    for (const auto& [p, c] : counts) total += c;
    CHECK(total == n);
    const auto emp = empirical(model, tau, m);
    for (const auto& [p, c] : counts)
      CHECK(emp.prob(p) == static_cast<double>(c) / static_cast<double>(n));
  }
}

TEST_CASE("fit against hand-checked targets", "[microstate]") {
  const FiniteModel m4 = FiniteModel::cyclic_model(4);
  const Microstate tau = micro(ab(), "abab");
  const auto dirac = CylinderOracle::bernoulli(Group::integers(), ab(), {1.0, 0.0});
  CHECK(fit(m4, Microstate::constant(ab(), 0, 4), dirac, 2).value == 0.0);

  CHECK(fit(m4, tau, uniform_bernoulli(), 1).value == Catch::Approx(0.0).margin(1e-15));
  CHECK(fit(m4, tau, uniform_bernoulli(), 2).value == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("tensor microstate expands row-major", "[microstate]") {
  const Alphabet xy({"x", "y"});
  const Microstate left = micro(ab(), "ab");
  const Microstate right = micro(xy, "xyx");
  const Microstate paired = tensor_microstate(left, right);
  REQUIRE(paired.size() == 6);
  std::vector<std::string> labels;
  for (Symbol s : paired.labels) labels.push_back(paired.alphabet.label(s));
  CHECK(labels == std::vector<std::string>{"(a,x)", "(a,y)", "(a,x)", "(b,x)", "(b,y)", "(b,x)"});

  // pairing with a single constant reproduces the other factor
  const Microstate point = micro(xy, "x");
  const Microstate with_point = tensor_microstate(left, point);
  for (std::size_t v = 0; v < left.size(); ++v) {
    auto [sl, sr] = unpair_symbol(with_point.labels[v], xy);
    CHECK(sl == left.labels[v]);
    CHECK(sr == 0);
  }
}

TEST_CASE("project microstate applies the symbol map", "[microstate]") {
  const Alphabet abc = testing::abc();
  const Alphabet x({"x"});
  const SymbolMap collapse(abc, x, {0, 0, 0});
  CHECK(project_microstate(micro(abc, "aba"), collapse).labels == std::vector<Symbol>{0, 0, 0});
  const SymbolMap id = SymbolMap::identity(abc);
  CHECK(project_microstate(micro(abc, "cab"), id).labels == micro(abc, "cab").labels);
}

TEST_CASE("projection commutes with the empirical map exactly", "[microstate]") {
  // empirical(project(tau)) = pushforward(empirical(tau)), as exact counts
  Rng rng(13);
  const Alphabet abc = testing::abc();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const FiniteModel model = trial % 2 == 0 ? FiniteModel::cyclic_model(n)
                                             : testing::random_table_model(rng, n, 3);
    const Microstate tau = testing::random_micro(rng, abc, n);
    const std::size_t out_size = 1 + rng.below(3);
    std::vector<std::string> out_labels;
    for (std::size_t i = 0; i < out_size; ++i) out_labels.push_back("o" + std::to_string(i));
    const Alphabet out(out_labels);
    std::vector<Symbol> table(3);
    for (auto& s : table) s = static_cast<Symbol>(rng.below(out_size));
    const SymbolMap pi(abc, out, table);
    const std::size_t m = 1 + rng.below(3);

    const auto lhs = empirical_counts(model, project_microstate(tau, pi), m);
    std::map<Pattern, std::uint64_t> rhs;
    for (const auto& [p, c] : empirical_counts(model, tau, m)) rhs[pi.apply(p)] += c;
    CHECK(lhs == rhs);
  }
}

TEST_CASE("product identity holds exhaustively on tiny instances", "[microstate]") {
  for (std::size_t n1 = 1; n1 <= 4; ++n1) {
    for (std::size_t n2 = 1; n2 <= 4; ++n2) {
      const FiniteModel left = FiniteModel::cyclic_model(n1);
      const FiniteModel right = FiniteModel::cyclic_model(n2);
      const std::size_t tl = std::size_t{1} << n1;
      const std::size_t tr = std::size_t{1} << n2;
      for (std::size_t x = 0; x < tl; ++x) {
        for (std::size_t y = 0; y < tr; ++y) {
          std::vector<Symbol> lv(n1), rv(n2);
          for (std::size_t v = 0; v < n1; ++v) lv[v] = (x >> v) & 1u;
          for (std::size_t v = 0; v < n2; ++v) rv[v] = (y >> v) & 1u;
          const Microstate tau_l(ab(), lv);
          const Microstate tau_r(ab(), rv);
          for (std::size_t m = 1; m <= 2; ++m)
            REQUIRE(product_identity_check(left, right, tau_l, tau_r, m));
        }
      }
    }
  }
}

TEST_CASE("product identity holds for constant microstates", "[microstate]") {
  const FiniteModel left = FiniteModel::free_random_model(2, 6, 1);
  const FiniteModel right = FiniteModel::free_random_model(2, 5, 2);
  CHECK(product_identity_check(left, right, Microstate::constant(ab(), 0, 6),
                               Microstate::constant(ab(), 1, 5), 3));
}

TEST_CASE("a non-product table breaks the tensor identity", "[microstate]") {
  // 4-cycle on V' x V'' = 4 points is not a product permutation
  const Group z = Group::integers();
  std::map<std::string, Permutation> table;
  table.emplace("1", Permutation({1, 2, 3, 0}));
  table.emplace("-1", Permutation({3, 0, 1, 2}));
  const FiniteModel twisted = FiniteModel::table_model(z, 4, std::move(table));
  const FiniteModel c2 = FiniteModel::cyclic_model(2);

  bool found_mismatch = false;
  for (std::size_t x = 0; x < 4 && !found_mismatch; ++x) {
    for (std::size_t y = 0; y < 4 && !found_mismatch; ++y) {
      const Microstate tau_l(ab(), {static_cast<Symbol>(x & 1u), static_cast<Symbol>(x >> 1)});
      const Microstate tau_r(ab(), {static_cast<Symbol>(y & 1u), static_cast<Symbol>(y >> 1)});
      const Microstate paired = tensor_microstate(tau_l, tau_r);
      const auto twisted_counts = empirical_counts(twisted, paired, 2);
      std::map<Pattern, std::uint64_t> tensor_counts;
      for (const auto& [ls, lc] : empirical_counts(c2, tau_l, 2))
        for (const auto& [rs, rc] : empirical_counts(c2, tau_r, 2))
          tensor_counts[zip_patterns(ls, rs, ab())] += lc * rc;
      if (twisted_counts != tensor_counts) found_mismatch = true;
    }
  }
  CHECK(found_mismatch);
}

TEST_CASE("perturbation of d sites moves the empirical by at most m*d/n", "[microstate]") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng.below(40);
    FiniteModel model = [&]() {
      switch (trial % 3) {
        case 0: return FiniteModel::cyclic_model(n);
        case 1: return testing::random_table_model(rng, n, 4);
        default: return FiniteModel::free_random_model(2, n, rng.next_u64());
      }
    }();
    const Microstate tau1 = testing::random_micro(rng, ab(), n);
    Microstate tau2 = tau1;
    const std::size_t flips = 1 + rng.below(n);
    for (std::size_t f = 0; f < flips; ++f) {
      const std::size_t v = rng.below(n);
      tau2.labels[v] = static_cast<Symbol>(rng.below(2));
    }
    std::size_t d = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (tau1.labels[v] != tau2.labels[v]) ++d;
    const std::size_t m = 1 + rng.below(4);
    const double lhs =
        kantorovich(empirical(model, tau1, m), empirical(model, tau2, m)).value;
    CHECK(lhs <= static_cast<double>(m) * static_cast<double>(d) / static_cast<double>(n) +
                     1e-12);
  }
}

TEST_CASE("window values are monotone with the truncation increment bound", "[microstate]") {
  Rng rng(21);
  const auto oracle = uniform_bernoulli();
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + rng.below(24);
    const FiniteModel model = FiniteModel::cyclic_model(n);
    const Microstate tau = testing::random_micro(rng, ab(), n);
    double prev = -1.0;
    for (std::size_t m = 1; m <= 4; ++m) {
      const double value = fit(model, tau, oracle, m).value;
      if (m > 1) {
        CHECK(value >= prev - 1e-9);
        CHECK(value - prev <= 1.0 / static_cast<double>(m) + 1e-9);
      }
      prev = value;
    }
  }
}

TEST_CASE("microstate inputs are validated", "[microstate]") {
  const FiniteModel m4 = FiniteModel::cyclic_model(4);
  CHECK_THROWS_AS(empirical(m4, micro(ab(), "ab"), 1), std::invalid_argument);
  CHECK_THROWS_AS(fit(m4, micro(testing::abc(), "abca"), uniform_bernoulli(), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(project_microstate(micro(ab(), "ab"), SymbolMap::identity(testing::abc())),
                  std::invalid_argument);
}
