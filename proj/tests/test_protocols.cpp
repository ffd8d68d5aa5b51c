#include <doctest.h>

#include <cmath>

#include "cflab/gates.hpp"
#include "cflab/protocols.hpp"
#include "cflab/rng.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace cflab;
using testing::kind_of;
using namespace cflab::protocols;
using qcore::QuantumState;

namespace {

const InferenceEdge& edge(const CLFReport& r, const std::string& chain, const std::string& from) {
  for (const auto& e : r.graph.edges) {
    if (e.kind == EdgeKind::Modal && e.chain == chain && e.from == from) return e;
  }
  FAIL("missing edge");
  return r.graph.edges.front();
}

ifm::OracleSpec weak(int cycles) {
  ifm::OracleSpec s;
  s.kind = ifm::OracleKind::WeakZeno;
  s.cycles = cycles;
  return s;
}

}  // namespace

TEST_SUITE("protocols") {
  TEST_CASE("CLF direct wiring matches the reference statevector") {
    const auto r = clf_run({});
    const auto x = ref::clf_direct();
    CHECK(x.p_dark_dark == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.p_dark_dark == doctest::Approx(x.p_dark_dark).epsilon(1e-12));
    CHECK(edge(r, "A", "W_A").confidence == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(edge(r, "A", "b_A").confidence == doctest::Approx(x.p_coin0_given_bA1).epsilon(1e-12));
    CHECK(edge(r, "B", "W_B").confidence == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(edge(r, "B", "b_B").confidence == doctest::Approx(x.p_coin1_given_bB1).epsilon(1e-12));
  }

  TEST_CASE("CLF default encodings: chain A is not simulation-sound") {
    // b_A copies the coin's Z value, so b_A = 1 forces C = 1 and the claimed
    // C = 0 never holds inside the dark-dark event.
    const auto r = clf_run({});
    CHECK(edge(r, "A", "b_A").confidence == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(edge(r, "A", "b_A").sound);
    CHECK(edge(r, "B", "b_B").sound);
    CHECK_FALSE(r.contradiction_detected);
    CHECK(r.modal_contradiction == r.contradiction_detected);
  }

  TEST_CASE("CLF identity encodings agree") {
    CLFConfig cfg;
    cfg.encoding_a = {0, 1};
    cfg.encoding_b = {0, 1};
    const auto r = clf_run(cfg);
    for (const auto& c : r.chains) CHECK(c.sound);
    CHECK_FALSE(r.contradiction_detected);
  }

  TEST_CASE("CLF routed wiring") {
    CLFConfig cfg;
    cfg.wiring = Wiring::Routed;
    const auto r = clf_run(cfg);
    CHECK(r.p_dark_dark >= 0.0);
    CHECK(r.p_dark_dark <= 1.0);
    CHECK(r.modal_contradiction == r.contradiction_detected);
    CHECK(std::find(r.joint_variables.begin(), r.joint_variables.end(), "R") != r.joint_variables.end());
    cfg.postselect_routing = true;
    CHECK(clf_run(cfg).p_dark_dark <= r.p_dark_dark + 1e-12);
  }

  TEST_CASE("CLF encodings are validated") {
    CLFConfig cfg;
    cfg.encoding_a = {2, 0};
    CHECK(kind_of([&] { clf_run(cfg); }) == ErrorKind::InvalidParameter);
    CHECK(wiring_from_string("routed") == Wiring::Routed);
  }

  TEST_CASE("CLF robustness on the flip family") {
    const auto r = clf_robustness({}, {0.0, 1e-4, 1e-3, 1e-2});
    REQUIRE(r.points.size() == 4);
    CHECK(r.points[0].min_confidence == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.monotone);
    CHECK(r.bound_holds);
    for (std::size_t i = 1; i < r.points.size(); ++i) {
      CHECK(r.points[i].certified_epsilon == doctest::Approx(r.points[i].epsilon).epsilon(1e-9));
    }
    REQUIRE(r.fitted_exponent.has_value());
    // Linear response: 1 - confidence is proportional to epsilon.
    CHECK(*r.fitted_exponent == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("three-box ABL values") {
    const std::array<double, 3> pre{1, 1, 1}, post{1, 1, -1};
    CHECK(threebox_abl(BoxContext::A) == doctest::Approx(ref::abl(pre, post, 0)).epsilon(1e-15));
    CHECK(threebox_abl(BoxContext::A) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threebox_abl(BoxContext::B) == doctest::Approx(1.0).epsilon(1e-12));
    // Post-selecting on the pre-selected state gives the ABL value 1/5.
    ThreeBoxStates same = default_three_box_states();
    same.post = same.pre;
    CHECK(threebox_abl(BoxContext::A, same) == doctest::Approx(ref::abl(pre, pre, 0)).epsilon(1e-15));
    CHECK(threebox_abl(BoxContext::A, same) == doctest::Approx(0.2).epsilon(1e-12));
  }

  TEST_CASE("ABL with a vanishing denominator") {
    qcore::Vector pre = qcore::Vector::Zero(3), post = qcore::Vector::Zero(3);
    pre(0) = 1.0;
    post(1) = 1.0;
    CHECK(kind_of([&] { abl_probability(gates::level_projector(3, 0), pre, post); }) == ErrorKind::ABLUndefined);
  }

  TEST_CASE("three-box ideal probe reproduces ABL") {
    const auto a = threebox_ifm({}, BoxContext::A);
    const auto b = threebox_ifm({}, BoxContext::B);
    CHECK(a.p_decisive == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.p_decisive == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.p_postselect == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(a.certificate.value == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("three-box weak probe stays above 1 - c sqrt(eps)") {
    for (int n : {8, 16, 64}) {
      const auto r = threebox_ifm(weak(n), BoxContext::A, eps::Mode::Raw);
      CHECK(r.certificate.value > 0.0);
      CHECK(r.p_decisive >= 1.0 - std::sqrt(r.certificate.value));
      CHECK(r.p_decisive <= 1.0);
    }
  }

  TEST_CASE("three-box classical maximum") {
    CHECK(threebox_classical_max(1.0, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threebox_classical_max(1.0, 0.1).value == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(threebox_classical_max(1.0, 0.1).value_unhalved_tv == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(threebox_classical_max(1.0, 1.5).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(threebox_classical_max(0.5, 0.1).value == doctest::Approx(1.05).epsilon(1e-12));
  }

  TEST_CASE("GHZ parities match the reference") {
    const auto r = ghz_run();
    const std::array<std::array<ref::Gate1, 3>, 4> sets{{{ref::kX, ref::kY, ref::kY},
                                                         {ref::kY, ref::kX, ref::kY},
                                                         {ref::kY, ref::kY, ref::kX},
                                                         {ref::kX, ref::kX, ref::kX}}};
    REQUIRE(r.parities.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(r.parities[i] == doctest::Approx(ref::ghz_parity(M_PI, sets[i])).epsilon(1e-12));
    }
    CHECK(r.parities == std::vector<double>{1.0, 1.0, 1.0, -1.0});
    CHECK(r.enumeration.contradiction());
    CHECK(r.max_lab_epsilon == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("GHZ with phase 0 flips every parity but keeps the verdict") {
    const auto r = ghz_run(0.0);
    CHECK(r.parities == std::vector<double>{-1.0, -1.0, -1.0, 1.0});
    CHECK(r.enumeration.contradiction());
  }

  TEST_CASE("Peres-Mermin square operator identities") {
    const PMSquare sq;
    for (std::size_t k = 0; k < 6; ++k) {
      qcore::Matrix prod = qcore::Matrix::Identity(4, 4);
      for (auto c : sq.context(k)) prod = prod * pauli_word(sq.cells[c]);
      const double sign = k == 5 ? -1.0 : 1.0;
      CHECK((prod - sign * qcore::Matrix::Identity(4, 4)).norm() < 1e-12);
    }
  }

  TEST_CASE("Peres-Mermin is state independent") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      rng::Stream s(1, "pm_test", i);
      const auto r = pm_run(rng::random_mixed_state({{"q1", 2}, {"q2", 2}}, s, 1 + int(i % 4)));
      CHECK(r.product == doctest::Approx(-1.0).epsilon(1e-9));
    }
    const auto mm = pm_run(QuantumState::mixed({{"q1", 2}, {"q2", 2}}, qcore::Matrix::Identity(4, 4) / 4.0));
    CHECK(mm.product == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(mm.enumeration.contradiction());
    CHECK(kind_of([] { pm_run(QuantumState::basis({{"q", 2}}, {0})); }) == ErrorKind::DimensionError);
  }

  TEST_CASE("Leggett-Garg ideal probes follow 2 cos t - cos 2t") {
    for (int k = 0; k <= 24; k += 3) {
      const double t = k * M_PI / 24.0;
      const auto r = lg_run(t, {});
      CHECK(r.k3 == doctest::Approx(2.0 * std::cos(t) - std::cos(2.0 * t)).epsilon(1e-12));
      CHECK(r.c12 == doctest::Approx(std::cos(t)).epsilon(1e-12));
    }
    const auto peak = lg_run(M_PI / 3.0, {});
    CHECK(peak.k3 == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(peak.violated);
    const auto flat = lg_run(0.0, {});
    CHECK(flat.k3 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(flat.violated);
  }

  TEST_CASE("Leggett-Garg weak probes carry their epsilon into the bound") {
    const auto r = lg_run(M_PI / 3.0, weak(16));
    CHECK(r.epsilon > 0.0);
    CHECK(r.macrorealist_bound == doctest::Approx(1.0 + 2.0 * r.epsilon).epsilon(1e-15));
  }

  TEST_CASE("LF evaluator on CHSH") {
    const auto chsh = chsh_instance();
    auto r = lf_evaluate(chsh.coeffs, chsh.correlators, {});
    CHECK(r.s_lf == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.violated);
    LFParams p;
    p.epsilon = 2.0 * std::sqrt(2.0) - 2.0;
    CHECK_FALSE(lf_evaluate(chsh.coeffs, chsh.correlators, p).violated);
    p.epsilon = 0.0;
    p.delta = 0.25;  // K2 sqrt(delta) = 1
    CHECK_FALSE(lf_evaluate(chsh.coeffs, chsh.correlators, p).violated);
  }

  TEST_CASE("LF evaluator edge cases") {
    const auto chsh = chsh_instance();
    CorrelatorTable zeros = chsh.correlators;
    for (auto& [k, v] : zeros) v = 0.0;
    const auto r = lf_evaluate(chsh.coeffs, zeros, {});
    CHECK(r.s_lf == 0.0);
    CHECK_FALSE(r.violated);
    CorrelatorTable missing = chsh.correlators;
    missing.erase(missing.begin());
    CHECK(kind_of([&] { lf_evaluate(chsh.coeffs, missing, {}); }) == ErrorKind::CoefficientMismatch);
    CorrelatorTable big = chsh.correlators;
    big.begin()->second = 1.5;
    CHECK(kind_of([&] { lf_evaluate(chsh.coeffs, big, {}); }) == ErrorKind::InvalidParameter);
  }

  TEST_CASE("LF correlators from a product state are bounded by 2") {
    const auto s = qcore::tensor(QuantumState::qubit("A", 1.0, 0.0), QuantumState::qubit("B", 1.0, 0.0));
    const auto e = lf_correlators(s, {gates::pauli_z(), gates::pauli_x()}, {gates::pauli_z(), gates::pauli_x()});
    const auto r = lf_evaluate(chsh_instance().coeffs, e, {});
    CHECK(r.s_lf <= 2.0 + 1e-12);
  }
}
