#include <doctest.h>

#include <algorithm>

#include "cflab/ontic.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace cflab;
using testing::kind_of;
using namespace cflab::ontic;

namespace {

const std::vector<std::string> kGhzObs{"X_A", "Y_A", "X_B", "Y_B", "X_C", "Y_C"};

std::vector<ParityConstraint> ghz_constraints(int xxx_sign) {
  return {{{"X_A", "Y_B", "Y_C"}, 1},
          {{"Y_A", "X_B", "Y_C"}, 1},
          {{"Y_A", "Y_B", "X_C"}, 1},
          {{"X_A", "X_B", "X_C"}, xxx_sign}};
}

}  // namespace

TEST_SUITE("ontic") {
  TEST_CASE("GHZ parity system has no assignment") {
    const auto r = enumerate_assignments(kGhzObs, ghz_constraints(-1));
    CHECK(r.examined == 64);
    CHECK(r.contradiction());
  }

  TEST_CASE("flipping the XXX sign makes the system consistent") {
    const auto r = enumerate_assignments(kGhzObs, ghz_constraints(1));
    CHECK_FALSE(r.contradiction());
    // Independent count: Y_A, Y_B, Y_C free, X's fixed by the first three
    // equations, and XXX = Y_A Y_B Y_C squared pairs = +1 always holds.
    CHECK(r.satisfying.size() == 8);
    CHECK(r.satisfying.front() == std::vector<int>(6, 1));
  }

  TEST_CASE("enumeration is deterministic and order-stable") {
    const auto a = enumerate_assignments(kGhzObs, ghz_constraints(1));
    const auto b = enumerate_assignments(kGhzObs, ghz_constraints(1));
    CHECK(a.satisfying == b.satisfying);
    CHECK(std::is_sorted(a.satisfying.begin(), a.satisfying.end(), std::greater<>()));
  }

  TEST_CASE("Peres-Mermin product system has no assignment") {
    const std::vector<std::string> obs{"XI", "IX", "XX", "IY", "YI", "YY", "XY", "YX", "ZZ"};
    const std::vector<ParityConstraint> c{{{"XI", "IX", "XX"}, 1}, {{"IY", "YI", "YY"}, 1},
                                          {{"XY", "YX", "ZZ"}, 1}, {{"XI", "IY", "XY"}, 1},
                                          {{"IX", "YI", "YX"}, 1}, {{"XX", "YY", "ZZ"}, -1}};
    const auto r = enumerate_assignments(obs, c);
    CHECK(r.examined == 512);
    CHECK(r.contradiction());
  }

  TEST_CASE("enumeration guards") {
    std::vector<std::string> many;
    for (int i = 0; i < 21; ++i) many.push_back("o" + std::to_string(i));
    CHECK(kind_of([&] { enumerate_assignments(many, {}); }) == ErrorKind::EnumerationTooLarge);
    CHECK(kind_of([] { enumerate_assignments({"a"}, {{{"b"}, 1}}); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { enumerate_assignments({"a"}, {{{"a"}, 2}}); }) == ErrorKind::InvalidParameter);
  }

  TEST_CASE("three-box optimum equals min(2, 1 + K eps)") {
    const auto space = three_box_space();
    const auto obj = three_box_objective(space);
    for (double eps : {0.0, 0.01, 0.1, 0.37, 1.0, 3.0}) {
      const auto r = optimize_over_ontic(space, obj, eps);
      CHECK(r.value == doctest::Approx(std::min(2.0, 1.0 + eps)).epsilon(1e-12));
      CHECK(r.value <= std::min(2.0, 1.0 + eps) + 1e-12);
      double tv = 0.0;
      for (std::size_t l = 0; l < r.mu_a.size(); ++l) tv += 0.5 * std::abs(r.mu_a[l] - r.mu_b[l]);
      CHECK(tv <= eps + 1e-12);
    }
  }

  TEST_CASE("optimum at eps = 0.1 shifts 0.1 of mu_B onto lambda_B") {
    const auto r = optimize_over_ontic(three_box_space(), three_box_objective(three_box_space()), 0.1);
    CHECK(r.mu_a[0] == doctest::Approx(1.0));
    CHECK(r.mu_b[1] == doctest::Approx(0.1));
  }

  TEST_CASE("optimizer agrees with a grid search over the simplex pair") {
    // Independent check on a 1/20 grid, restricted to mu_A concentrated on a
    // single state since the objective is linear in mu_A per fixed mu_B.
    const auto space = three_box_space();
    const auto obj = three_box_objective(space);
    const double eps = 0.15;
    double best = 0.0;
    const int g = 20;
    for (int a = 0; a < 3; ++a) {
      for (int i = 0; i <= g; ++i) {
        for (int j = 0; i + j <= g; ++j) {
          const std::array<double, 3> mb{i / double(g), j / double(g), (g - i - j) / double(g)};
          double tv = 0.0;
          for (int l = 0; l < 3; ++l) tv += 0.5 * std::abs((l == a ? 1.0 : 0.0) - mb[static_cast<std::size_t>(l)]);
          if (tv > eps + 1e-12) continue;
          double v = obj.weight_a[static_cast<std::size_t>(a)];
          for (int l = 0; l < 3; ++l) v += obj.weight_b[static_cast<std::size_t>(l)] * mb[static_cast<std::size_t>(l)];
          best = std::max(best, v);
        }
      }
    }
    CHECK(optimize_over_ontic(space, obj, eps).value >= best - 1e-12);
    CHECK(best == doctest::Approx(1.15).epsilon(1e-12));
  }

  TEST_CASE("single-context objective never exceeds 1") {
    const auto space = three_box_space();
    const auto& ind = space.values("chi_A");
    const LinearObjective chi_a{std::vector<double>(ind.begin(), ind.end()), std::vector<double>(3, 0.0)};
    for (double eps : {0.0, 0.5, 2.0}) CHECK(optimize_over_ontic(space, chi_a, eps).value == doctest::Approx(1.0));
  }

  TEST_CASE("ontic space validation") {
    OnticSpace bad{{"l0", "l1"}, {{"p", {1, 1}}, {"q", {0, 1}}}, {{"p", "q"}}};
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidParameter);
    CHECK(kind_of([] { optimize_over_ontic(three_box_space(), three_box_objective(three_box_space()), -0.1); }) ==
          ErrorKind::InvalidParameter);
  }

  TEST_CASE("macrorealist bound") {
    const auto terms = leggett_garg_k3();
    const auto zero = macrorealist_max(terms, 3, 0.0, 2.0);
    CHECK(zero.deterministic_max == ref::lg_deterministic_max());
    CHECK(zero.bound == 1.0);
    CHECK(macrorealist_max(terms, 3, 0.25, 2.0).bound == 1.5);
    CHECK(zero.argmax.size() == 3);
    CHECK(kind_of([&] { macrorealist_max(terms, 2, 0.0, 2.0); }) == ErrorKind::InvalidParameter);
  }

  TEST_CASE("modal rule on the ideal gadget support") {
    // Support of (b, W) for the ideal gadget over both bomb values.
    const PossibilisticTable t{{"b", "W"}, {{0, 0}, {1, 1}}};
    const auto v = modal_check(t, {{"flag", {{{{"W", 1}}, {"b", 1}}}}});
    CHECK(v.chains[0].verified);
    CHECK_FALSE(v.chains[0].vacuous);
    CHECK_FALSE(v.contradiction);
  }

  TEST_CASE("empty premise is vacuous, empty table is an error") {
    const PossibilisticTable t{{"b", "W"}, {{0, 0}, {1, 1}}};
    const auto v = modal_check(t, {{"never", {{{{"W", 1}, {"b", 0}}, {"b", 1}}}}});
    CHECK(v.chains[0].verified);
    CHECK(v.chains[0].vacuous);
    CHECK(kind_of([] { modal_check({{"b"}, {}}, {{"x", {{{{"b", 1}}, {"b", 1}}}}}); }) == ErrorKind::EmptySupport);
    CHECK(kind_of([&] { modal_check(t, {{"x", {{{{"z", 1}}, {"b", 1}}}}}); }) == ErrorKind::InvalidParameter);
  }

  TEST_CASE("chains evaluated in separate steps can clash") {
    // Chain A reaches c = 0 through a step read off different rows (z = 1);
    // chain B concludes c = 1 directly. Both are sound rule by rule and their
    // premise rows overlap in row 0.
    const PossibilisticTable t{{"x", "y", "z", "c"}, {{1, 1, 0, 1}, {0, 0, 1, 0}}};
    const RuleChain a{"A", {{{{"x", 1}}, {"y", 1}}, {{{"z", 1}}, {"c", 0}}}};
    const RuleChain b{"B", {{{{"x", 1}}, {"c", 1}}}};
    const auto v = modal_check(t, {a, b});
    CHECK(v.chains[0].verified);
    CHECK(v.chains[1].verified);
    CHECK(v.contradiction);
    REQUIRE(v.conflicting.size() == 1);
    CHECK(v.conflicting[0] == std::pair<std::string, std::string>{"A", "B"});
  }

  TEST_CASE("no contradiction without overlap, soundness or a shared variable") {
    // Disjoint premise rows.
    const PossibilisticTable t{{"u", "v", "c"}, {{1, 0, 0}, {0, 1, 1}}};
    const RuleChain a{"A", {{{{"u", 1}}, {"c", 0}}}};
    const RuleChain b{"B", {{{{"v", 1}}, {"c", 1}}}};
    auto v = modal_check(t, {a, b});
    CHECK(v.chains[0].verified);
    CHECK(v.chains[1].verified);
    CHECK_FALSE(v.contradiction);
    // Overlapping rows force one of two directly connected chains to fail.
    const PossibilisticTable both{{"u", "v", "c"}, {{1, 1, 0}}};
    v = modal_check(both, {a, b});
    CHECK_FALSE(v.chains[1].verified);
    CHECK_FALSE(v.contradiction);
    // Different conclusion variables never clash.
    const RuleChain c{"C", {{{{"u", 1}}, {"v", 1}}}};
    v = modal_check(both, {a, c});
    CHECK_FALSE(v.contradiction);
  }

  TEST_CASE("verdicts ignore support row order") {
    PossibilisticTable t{{"x", "y"}, {{0, 0}, {1, 1}, {1, 0}}};
    const RuleChain r{"R", {{{{"x", 1}}, {"y", 1}}}};
    const auto a = modal_check(t, {r});
    std::reverse(t.support.begin(), t.support.end());
    const auto b = modal_check(t, {r});
    CHECK(a.chains[0].verified == b.chains[0].verified);
    CHECK(a.chains[0].rules[0].counterexamples == b.chains[0].rules[0].counterexamples);
  }

  TEST_CASE("from_distribution drops sub-threshold rows") {
    const auto t = PossibilisticTable::from_distribution({"x"}, {{{0}, 0.5}, {{1}, 1e-12}});
    CHECK(t.support.size() == 1);
    CHECK(t.threshold == kSupportThreshold);
  }
}
