#include <doctest.h>

#include <cmath>

#include "cflab/gates.hpp"
#include "cflab/qcore.hpp"
#include "cflab/rng.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace cflab;
using testing::kind_of;
using qcore::Matrix;
using qcore::QuantumState;
using qcore::Vector;

namespace {

const qcore::Layout kTwo{{"a", 2}, {"b", 2}};

Vector bell() {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_SUITE("qcore") {
  TEST_CASE("state constructors validate their input") {
    Vector v = Vector::Zero(4);
    v(0) = 1.1;
    CHECK(kind_of([&] { QuantumState::pure(kTwo, v); }) == ErrorKind::InvalidState);
    CHECK(kind_of([&] { QuantumState::pure(kTwo, Vector::Ones(3)); }) == ErrorKind::DimensionError);
    Matrix m = Matrix::Identity(4, 4) / 4.0;
    m(0, 1) = 0.3;
    CHECK(kind_of([&] { QuantumState::mixed(kTwo, m); }) == ErrorKind::InvalidState);
    CHECK(kind_of([&] { QuantumState::basis({{"a", 2}, {"a", 2}}, {0, 0}); }) == ErrorKind::DuplicateSubsystem);
  }

  TEST_CASE("basis digits are row-major over the layout") {
    const auto s = QuantumState::basis({{"a", 2}, {"t", 3}}, {1, 2});
    CHECK(s.dimension() == 6);
    CHECK(std::abs(s.amplitudes()(5) - 1.0) < 1e-15);
  }

  TEST_CASE("tensor puts the first factor in the most significant digit") {
    const auto a = QuantumState::qubit("a", 0.0, 1.0);
    const auto b = QuantumState::qubit("b", 1.0, 0.0);
    const auto ab = qcore::tensor(a, b);
    CHECK(ab.labels() == std::vector<std::string>{"a", "b"});
    CHECK(std::abs(ab.amplitudes()(2) - 1.0) < 1e-15);
    CHECK(kind_of([&] { qcore::tensor(a, a); }) == ErrorKind::DuplicateSubsystem);
  }

  TEST_CASE("partial trace of a Bell pair is maximally mixed") {
    const auto s = QuantumState::pure(kTwo, bell());
    const auto ra = qcore::partial_trace(s, {"a"});
    CHECK(!ra.is_pure());
    CHECK((ra.density() - Matrix::Identity(2, 2) / 2.0).norm() < 1e-14);
    CHECK(kind_of([&] { qcore::partial_trace(s, {}); }) == ErrorKind::EmptyKeepSet);
    CHECK(kind_of([&] { qcore::partial_trace(s, {"z"}); }) == ErrorKind::UnknownSubsystem);
  }

  TEST_CASE("partial trace keeps layout order, not request order") {
    const auto a = QuantumState::qubit("a", 1.0, 0.0);
    const auto b = QuantumState::qubit("b", 0.0, 1.0);
    const auto c = QuantumState::qubit("c", 1.0, 0.0);
    const auto abc = qcore::tensor(std::vector<QuantumState>{a, b, c});
    const auto kept = qcore::partial_trace(abc, {"c", "b"});
    CHECK(kept.labels() == std::vector<std::string>{"b", "c"});
    CHECK(std::abs(kept.density()(2, 2) - 1.0) < 1e-14);
  }

  TEST_CASE("unitary on a non-adjacent, reversed target list") {
    const auto s = QuantumState::basis({{"a", 2}, {"m", 2}, {"b", 2}}, {0, 0, 1});
    // CNOT with control b and target a.
    const auto out = qcore::apply_unitary(s, gates::cnot(), {"b", "a"});
    CHECK(std::abs(out.amplitudes()(5) - 1.0) < 1e-15);
    CHECK(kind_of([&] { qcore::apply_unitary(s, gates::cnot(), {"a"}); }) == ErrorKind::DimensionError);
    CHECK(kind_of([&] { qcore::Unitary(Matrix::Ones(2, 2)); }) == ErrorKind::InvalidOperator);
  }

  TEST_CASE("pure and mixed routes agree") {
    rng::Stream s(7, "qcore_test");
    const auto psi = rng::haar_state(kTwo, s);
    const Matrix u = rng::haar_unitary(4, s);
    const auto p = qcore::apply_unitary(psi, u, {"a", "b"});
    const auto m = qcore::apply_unitary(psi.to_mixed(), u, {"a", "b"});
    CHECK((p.density_matrix() - m.density()).norm() < 1e-12);
  }

  TEST_CASE("channel must be trace preserving") {
    CHECK(kind_of([&] { qcore::Channel({gates::identity(2) * 0.5}); }) == ErrorKind::InvalidOperator);
    const qcore::Channel dephase({std::sqrt(0.5) * gates::identity(2), std::sqrt(0.5) * gates::pauli_z()});
    const auto plus = QuantumState::qubit("a", 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    const auto out = qcore::apply_channel(plus, dephase, {"a"});
    CHECK(std::abs(out.density()(0, 1)) < 1e-15);
  }

  TEST_CASE("instrument branches sum to one and expose labelled outcomes") {
    const qcore::Instrument z({{"zero", {gates::level_projector(2, 0)}}, {"one", {gates::level_projector(2, 1)}}});
    const auto plus = QuantumState::qubit("a", 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    const auto br = qcore::apply_instrument(plus, z, {"a"});
    REQUIRE(br.size() == 2);
    CHECK(std::abs(br[0].probability - 0.5) < 1e-14);
    CHECK(std::abs(br[0].probability + br[1].probability - 1.0) < 1e-14);
    CHECK(kind_of([&] { z.outcome("two"); }) == ErrorKind::UnknownOutcome);
    CHECK(kind_of([&] { qcore::Instrument({{"zero", {gates::level_projector(2, 0)}}}); }) ==
          ErrorKind::InvalidOperator);
  }

  TEST_CASE("zero-probability branch carries no post state") {
    const qcore::Instrument z({{"zero", {gates::level_projector(2, 0)}}, {"one", {gates::level_projector(2, 1)}}});
    const auto br = qcore::apply_instrument(QuantumState::qubit("a", 1.0, 0.0), z, {"a"});
    CHECK(br[1].probability == 0.0);
    CHECK(!br[1].post_state.has_value());
  }

  TEST_CASE("distances on known pairs") {
    const auto zero = QuantumState::qubit("a", 1.0, 0.0);
    const auto one = QuantumState::qubit("a", 0.0, 1.0);
    const auto plus = QuantumState::qubit("a", 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    CHECK(qcore::trace_distance(zero, one) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qcore::fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(qcore::trace_distance(zero, plus) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(qcore::fidelity(zero, plus) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    const auto b = qcore::fvdg_bounds(zero, plus);
    CHECK(b.lower <= b.trace);
    // Pure pairs saturate the upper bound.
    CHECK(b.trace == doctest::Approx(b.upper).epsilon(1e-9));
  }

  TEST_CASE("expectation of Z on |1> and of ZZ on a Bell pair") {
    CHECK(qcore::expectation(QuantumState::qubit("a", 0.0, 1.0), gates::pauli_z(), {"a"}) ==
          doctest::Approx(-1.0));
    const auto s = QuantumState::pure(kTwo, bell());
    CHECK(qcore::expectation(s, gates::kron(gates::pauli_z(), gates::pauli_z()), {"a", "b"}) ==
          doctest::Approx(1.0));
  }

  TEST_CASE("rng streams are deterministic and independent") {
    rng::Stream a(42, "x", 3), b(42, "x", 3), c(42, "x", 4), d(42, "y", 3);
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va != c.uniform());
    CHECK(va != d.uniform());
    CHECK(rng::derive_seed(1, "x", 0) != rng::derive_seed(1, "x", 1));
    rng::Stream h(5, "haar");
    const Matrix u = rng::haar_unitary(3, h);
    CHECK((u.adjoint() * u - Matrix::Identity(3, 3)).norm() < 1e-12);
  }

  TEST_CASE("property samples") {
    CHECK(props::fvdg_failures(100, 11) == 0);
    CHECK(props::gentle_failures(100, 11) == 0);
    CHECK(props::completeness_failures(60, 11) == 0);
    CHECK(props::contractivity_failures(60, 11) == 0);
  }
}
