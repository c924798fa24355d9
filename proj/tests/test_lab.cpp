#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "soficlab/lab.hpp"
#include "test_helpers.hpp"

using namespace soficlab;
using soficlab::testing::ab;
using soficlab::testing::micro;

namespace {

CylinderOracle uniform_bernoulli() {
  return CylinderOracle::bernoulli(Group::integers(), ab(), {0.5, 0.5});
}

CylinderOracle dirac_a() {
  return CylinderOracle::bernoulli(Group::integers(), ab(), {1.0, 0.0});
}

CylinderOracle lazy_markov() {
  return CylinderOracle::markov(Group::integers(), ab(), {{0.9, 0.1}, {0.1, 0.9}});
}

}  // namespace

TEST_CASE("search finds a dirac target in one sweep", "[lab]") {
  const auto r = search_microstate(FiniteModel::cyclic_model(32), dirac_a(), 2, 0.05, 10000, 4);
  CHECK(r.reached_target);
  CHECK(r.fit.value == 0.0);
  CHECK(r.sweeps <= 1);
  for (Symbol s : r.best.labels) CHECK(s == 0);
}

TEST_CASE("a vacuous threshold accepts the initial state", "[lab]") {
  const auto r = search_microstate(FiniteModel::cyclic_model(16), uniform_bernoulli(), 2, 1.0,
                                   10000, 9);
  CHECK(r.reached_target);
  CHECK(r.evaluations == 1);
}

TEST_CASE("search is deterministic and monotone", "[lab]") {
  const FiniteModel model = FiniteModel::cyclic_model(64);
  const auto oracle = uniform_bernoulli();
  const auto r1 = search_microstate(model, oracle, 3, 0.01, 500, 11);
  const auto r2 = search_microstate(model, oracle, 3, 0.01, 500, 11);
  CHECK(r1.best.labels == r2.best.labels);
  CHECK(r1.fit.value == r2.fit.value);
  CHECK(r1.evaluations == r2.evaluations);
  // the accepted fit never exceeds the initial one
  const auto initial = fit(model, [&] {
    const WindowDistribution marg1 = oracle.marginal(1);
    std::vector<double> base = {marg1.prob({0}), marg1.prob({1})};
    Rng rng(11);
    std::vector<Symbol> labels(model.size());
    for (auto& l : labels) l = static_cast<Symbol>(rng.discrete(base));
    return Microstate(ab(), std::move(labels));
  }(), oracle, 3);
  CHECK(r1.fit.value <= initial.value + 1e-15);
}

TEST_CASE("search reaches a bernoulli target at desk scale", "[lab]") {
  const auto r =
      search_microstate(FiniteModel::cyclic_model(1024), uniform_bernoulli(), 3, 0.1, 100000, 42);
  CHECK(r.reached_target);
  CHECK(r.fit.value <= 0.1 + kFitSlack);
}

TEST_CASE("exact entropy matches the binomial oracle at window one", "[lab]") {
  // at m = 1 the fit value is |freq(a) - 1/2|; good k: |k/16 - 1/2| <= 0.1
  const auto est = entropy_exact(FiniteModel::cyclic_model(16), uniform_bernoulli(), 1, 0.1);
  CHECK(est.count == 35750);
  CHECK(est.value == Catch::Approx(std::log2(35750.0) / 16.0).margin(1e-12));
}

TEST_CASE("entropy accepts everything when epsilon exceeds the diameter", "[lab]") {
  const auto est = entropy_exact(FiniteModel::cyclic_model(10), uniform_bernoulli(), 2, 1.5);
  CHECK(est.count == 1024);
  CHECK(est.value == Catch::Approx(1.0));
}

TEST_CASE("entropy of a dirac target counts the constant", "[lab]") {
  const auto est = entropy_exact(FiniteModel::cyclic_model(8), dirac_a(), 1, 0.5);
  CHECK(est.count >= 1);
  CHECK(est.value_defined);
  CHECK(est.value >= 0.0);
}

TEST_CASE("montecarlo entropy agrees with exact mode within three sigmas", "[lab]") {
  const FiniteModel model = FiniteModel::cyclic_model(12);
  const auto oracle = uniform_bernoulli();
  const auto exact = entropy_exact(model, oracle, 2, 0.2);
  const auto mc = entropy_montecarlo(model, oracle, 2, 0.2, 20000, 5);
  REQUIRE(exact.value_defined);
  REQUIRE(mc.value_defined);
  CHECK(std::abs(mc.value - exact.value) <= 3.0 * mc.std_error + 1e-12);
}

TEST_CASE("montecarlo entropy is independent of the job count", "[lab]") {
  const FiniteModel model = FiniteModel::cyclic_model(32);
  const auto oracle = uniform_bernoulli();
  const auto j1 = entropy_montecarlo(model, oracle, 2, 0.1, 4000, 77, 1);
  const auto j4 = entropy_montecarlo(model, oracle, 2, 0.1, 4000, 77, 4);
  CHECK(j1.fraction == j4.fraction);
  CHECK(j1.value == j4.value);
}

TEST_CASE("exact entropy mode rejects oversized state spaces", "[lab]") {
  CHECK_THROWS_AS(entropy_exact(FiniteModel::cyclic_model(40), uniform_bernoulli(), 1, 0.1),
                  std::invalid_argument);
}

TEST_CASE("samplers are seeded and validated", "[lab]") {
  const auto iid = MicrostateSampler::iid(ab(), {0.5, 0.5});
  const Microstate a = iid.draw(64, 3);
  const Microstate b = iid.draw(64, 3);
  const Microstate c = iid.draw(64, 4);
  CHECK(a.labels == b.labels);
  CHECK(a.labels != c.labels);
  CHECK_THROWS_AS(MicrostateSampler::iid(ab(), {0.9, 0.2}), std::invalid_argument);

  const auto fixed = MicrostateSampler::explicit_list({{micro(ab(), "abab"), 1.0}});
  CHECK(fixed.draw(4, 9).labels == micro(ab(), "abab").labels);
  CHECK_THROWS_AS(fixed.draw(5, 9), std::invalid_argument);
}

TEST_CASE("dq with a dirac sampler reduces to the paired fit", "[lab]") {
  const FiniteModel model = FiniteModel::cyclic_model(8);
  const Microstate tau = micro(ab(), "abababab");
  const auto sampler = MicrostateSampler::explicit_list({{tau, 1.0}});
  const auto oracle = uniform_bernoulli();

  // mass is 1 iff the paired microstate (tau, tau) fits below epsilon
  const Microstate xi = [&] {
    std::vector<Symbol> labels(8);
    for (std::size_t v = 0; v < 8; ++v) labels[v] = pair_symbol(tau.labels[v], tau.labels[v], ab());
    return Microstate(pair_alphabet(ab(), ab()), std::move(labels));
  }();
  const double xi_fit =
      kantorovich(empirical(model, xi, 2), product_oracle(oracle, oracle).marginal(2)).value;

  const auto tight = dq_test(model, sampler, oracle, 2, xi_fit + 0.01, 20, 1);
  CHECK(tight.w_mass == 1.0);
  const auto loose = dq_test(model, sampler, oracle, 2, xi_fit / 2.0, 20, 1);
  CHECK((xi_fit > 0 ? loose.w_mass == 0.0 : loose.w_mass == 1.0));
}

TEST_CASE("dq mass is one when epsilon exceeds the diameter", "[lab]") {
  const auto sampler = MicrostateSampler::iid(ab(), {0.5, 0.5});
  const auto r =
      dq_test(FiniteModel::cyclic_model(32), sampler, uniform_bernoulli(), 2, 1.25, 25, 3);
  CHECK(r.w_mass == 1.0);
}

TEST_CASE("dq reports are independent of the job count", "[lab]") {
  const auto sampler = MicrostateSampler::iid(ab(), {0.5, 0.5});
  const FiniteModel model = FiniteModel::cyclic_model(128);
  const auto oracle = uniform_bernoulli();
  const auto j1 = dq_test(model, sampler, oracle, 2, 0.1, 40, 12, 1);
  const auto j3 = dq_test(model, sampler, oracle, 2, 0.1, 40, 12, 3);
  CHECK(j1.w_mass == j3.w_mass);
  CHECK(j1.pooled_value == j3.pooled_value);
}

TEST_CASE("dq concentrates for an iid bernoulli pair at moderate size", "[lab]") {
  const auto sampler = MicrostateSampler::iid(ab(), {0.5, 0.5});
  const auto r =
      dq_test(FiniteModel::cyclic_model(512), sampler, uniform_bernoulli(), 3, 0.12, 50, 2025);
  CHECK(r.w_mass >= 0.9);
  CHECK(r.pooled_value < 0.1);
}

TEST_CASE("approximability trace distinguishes tail and subsequence verdicts", "[lab]") {
  const auto oracle = uniform_bernoulli();

  SECTION("cyclic models eventually pass") {
    std::vector<FiniteModel> models;
    for (std::uint64_t n = 64; n <= 512; n *= 2) models.push_back(FiniteModel::cyclic_model(n));
    const auto trace =
        approximability_trace(SoficApproximationSeq(models), oracle, 2, 0.1, 20000, 7);
    CHECK(trace.eventually_all);
    CHECK(trace.on_subsequence);
    CHECK(trace.pass_count == trace.rows.size());
  }

  SECTION("identity tables kill separation-sensitive targets on the even steps") {
    // all-identity table: every vertex sees a constant pattern, so the
    // window-2 empirical is supported on {aa, bb} and cannot reach the
    // uniform product closer than 1/2
    std::vector<FiniteModel> models;
    for (int i = 0; i < 3; ++i) {
      models.push_back(FiniteModel::table_model(Group::integers(), 64, {}));
      models.push_back(FiniteModel::cyclic_model(64));
    }
    const auto trace =
        approximability_trace(SoficApproximationSeq(models), oracle, 2, 0.1, 20000, 7);
    CHECK(trace.on_subsequence);
    CHECK_FALSE(trace.rows[0].pass);
    CHECK(trace.rows[1].pass);
    CHECK_FALSE(trace.rows[2].pass);
  }

  SECTION("a dirac target passes everywhere with fit zero") {
    std::vector<FiniteModel> models = {FiniteModel::cyclic_model(4),
                                       FiniteModel::cyclic_model(16)};
    const auto trace =
        approximability_trace(SoficApproximationSeq(models), dirac_a(), 2, 0.1, 1000, 3);
    CHECK(trace.eventually_all);
    CHECK(trace.tail_start == 1);
    for (const auto& row : trace.rows) CHECK(row.fit_value == 0.0);
  }
}

TEST_CASE("diagonal verification over a refining bernoulli tower", "[lab]") {
  const Alphabet a1({"u"});
  const Alphabet a2 = ab();
  const Alphabet a4({"p", "q", "r", "s"});
  const auto tower = ObservableTower::from_consecutive(
      {a1, a2, a4}, {SymbolMap(a2, a1, {0, 0}), SymbolMap(a4, a2, {0, 0, 1, 1})});

  const auto o1 = CylinderOracle::bernoulli(Group::integers(), a1, {1.0});
  const auto o2 = uniform_bernoulli();
  const auto o4 =
      CylinderOracle::bernoulli(Group::integers(), a4, {0.25, 0.25, 0.25, 0.25});

  SECTION("single level passes vacuously") {
    const FiniteModel model = FiniteModel::cyclic_model(16);
    const auto report = diagonal_sequence(
        tower, {{model, Microstate::constant(a1, 0, 16), o1}}, 2, {1.0});
    CHECK(report.pass);
    CHECK(report.cells.empty());
  }

  SECTION("all cells pass with an epsilon schedule 1/i") {
    Rng rng(31);
    std::vector<DiagonalLevel> levels;
    const std::size_t n = 512;
    levels.push_back({FiniteModel::cyclic_model(n), Microstate::constant(a1, 0, n), o1});
    levels.push_back({FiniteModel::cyclic_model(n), testing::random_micro(rng, a2, n), o2});
    levels.push_back({FiniteModel::cyclic_model(n), testing::random_micro(rng, a4, n), o4});
    const auto report = diagonal_sequence(tower, levels, 2, {1.0, 0.5, 1.0 / 3.0});
    CHECK(report.pass);
    REQUIRE(report.cells.size() == 3);
  }

  SECTION("identity projections transfer the fit bound verbatim") {
    const auto two_level =
        ObservableTower::from_consecutive({a2, a2}, {SymbolMap::identity(a2)});
    Rng rng(5);
    const std::size_t n = 64;
    const Microstate tau = testing::random_micro(rng, a2, n);
    std::vector<DiagonalLevel> levels = {{FiniteModel::cyclic_model(n), tau, o2},
                                         {FiniteModel::cyclic_model(n), tau, o2}};
    const auto report = diagonal_sequence(two_level, levels, 2, {0.5, 0.5});
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].projected_value ==
          Catch::Approx(report.level_fit[1]).margin(1e-12));
    CHECK(report.pass);
  }
}

TEST_CASE("weak containment witnesses for the easy inclusions", "[lab]") {
  SECTION("an oracle witnesses itself through the identity code") {
    const auto r = weak_containment_witness(uniform_bernoulli(), uniform_bernoulli(), 2, 0.01,
                                            1, 10000, 3);
    REQUIRE(r.found);
    CHECK(r.best_value <= 0.01 + kFitSlack);
  }
  SECTION("a dirac target is witnessed by a constant code") {
    const auto r = weak_containment_witness(dirac_a(), lazy_markov(), 2, 0.01, 1, 10000, 3);
    REQUIRE(r.found);
    CHECK(r.best_value <= kFitSlack);
  }
  SECTION("uniform targets are witnessed across relabelings") {
    const auto xy = CylinderOracle::bernoulli(Group::integers(), Alphabet({"x", "y"}),
                                              {0.5, 0.5});
    const auto r = weak_containment_witness(xy, uniform_bernoulli(), 3, 0.001, 1, 10000, 5);
    REQUIRE(r.found);
    CHECK(r.best_value <= 0.001 + kFitSlack);
  }
}
