#include "cflab/ifm.hpp"

#include <cmath>
#include <sstream>

#include "cflab/gates.hpp"

namespace cflab::ifm {

using qcore::Matrix;

const char* to_string(OracleKind k) { return k == OracleKind::IdealFig1 ? "ideal_fig1" : "weak_zeno"; }

OracleKind oracle_kind_from_string(const std::string& s) {
  if (s == "ideal_fig1") return OracleKind::IdealFig1;
  if (s == "weak_zeno") return OracleKind::WeakZeno;
  throw Error(ErrorKind::InvalidParameter, "unknown oracle kind '" + s + "'");
}

double OracleSpec::mixing_angle() const { return theta.value_or(M_PI / (2.0 * cycles)); }

void OracleSpec::validate() const {
  if (flag_label == bomb_label || flag_label == mediator_label || bomb_label == mediator_label) {
    throw Error(ErrorKind::InvalidParameter, "oracle labels must be distinct");
  }
  if (kind == OracleKind::IdealFig1) return;
  if (cycles < 1) throw Error(ErrorKind::InvalidParameter, "weak probe needs cycles >= 1");
  const double t = mixing_angle();
  if (!(t > 0.0 && t <= M_PI / 2.0 + 1e-15)) {
    std::ostringstream os;
    os << "weak probe theta " << t << " outside (0, pi/2]";
    throw Error(ErrorKind::InvalidParameter, os.str());
  }
  if (!(absorption > 0.0 && absorption <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "absorption must lie in (0, 1]");
  }
}

Matrix ideal_oracle_unitary() {
  const Matrix i2 = gates::identity(2);
  const Matrix h_s = gates::kron({i2, gates::hadamard(), i2});
  const Matrix cz_bs = gates::kron(gates::cz(), i2);
  const Matrix cnot_bw = gates::kron({gates::level_projector(2, 0), i2, i2}) +
                         gates::kron({gates::level_projector(2, 1), i2, gates::pauli_x()});
  return cnot_bw * h_s * cz_bs * h_s;
}

Oracle build_ifm_oracle(const OracleSpec& spec) {
  spec.validate();
  if (spec.kind != OracleKind::IdealFig1) {
    throw Error(ErrorKind::InvalidParameter, "build_ifm_oracle expects an ideal_fig1 spec");
  }
  const auto& b = spec.bomb_label;
  const auto& s = spec.mediator_label;
  const auto& w = spec.flag_label;
  const Matrix u = ideal_oracle_unitary();
  const Matrix i2 = gates::identity(2);
  const Matrix dark = gates::kron({i2, i2, gates::level_projector(2, 1)}) * u;
  const Matrix bright = gates::kron({i2, i2, gates::level_projector(2, 0)}) * u;
  Oracle oracle{
      {{"H", {s}}, {"CZ", {b, s}}, {"H", {s}}, {"CNOT", {b, w}}, {"MEASURE_Z", {w}}},
      Instrument({{kDark, {dark}}, {kBright, {bright}}}),
      {b, s, w},
  };
  return oracle;
}

Instrument build_weak_probe(const OracleSpec& spec) {
  spec.validate();
  if (spec.kind != OracleKind::WeakZeno) {
    throw Error(ErrorKind::InvalidParameter, "build_weak_probe expects a weak_zeno spec");
  }
  const Matrix r = gates::mixing(spec.mixing_angle());
  Matrix a = Matrix::Identity(2, 2);
  a(1, 1) = -std::sqrt(1.0 - spec.absorption);
  const Matrix ar = a * r;

  const Matrix p0 = gates::level_projector(2, 0);
  const Matrix p1 = gates::level_projector(2, 1);
  Matrix dud = Matrix::Identity(2, 2);
  Matrix live = Matrix::Identity(2, 2);
  std::vector<Matrix> absorbed;
  absorbed.reserve(spec.cycles);
  Matrix to_mediator_ground = Matrix::Zero(2, 2);
  for (int k = 0; k < spec.cycles; ++k) {
    // The k-th absorption acts on the probed arm just after the k-th mixing.
    const Matrix reach = r * live;
    to_mediator_ground.row(0) = std::sqrt(spec.absorption) * reach.row(1);
    absorbed.push_back(gates::kron(p1, to_mediator_ground));
    dud = r * dud;
    live = ar * live;
  }
  const Matrix m = gates::kron(p0, dud) + gates::kron(p1, live);
  const Matrix i2 = gates::identity(2);
  return Instrument({{kDark, {gates::kron(i2, p0) * m}},
                     {kBright, {gates::kron(i2, p1) * m}},
                     {kAbsorbed, std::move(absorbed)}});
}

Instrument probe_instrument(const OracleSpec& spec) {
  return spec.kind == OracleKind::IdealFig1 ? build_ifm_oracle(spec).instrument : build_weak_probe(spec);
}

std::vector<std::string> probe_targets(const OracleSpec& spec) {
  if (spec.kind == OracleKind::IdealFig1) return {spec.bomb_label, spec.mediator_label, spec.flag_label};
  return {spec.bomb_label, spec.mediator_label};
}

QuantumState prepared_registers(const OracleSpec& spec) {
  if (spec.kind == OracleKind::IdealFig1) {
    return QuantumState::basis({{spec.mediator_label, 2}, {spec.flag_label, 2}}, {0, 0});
  }
  return QuantumState::basis({{spec.mediator_label, 2}}, {0});
}

Instrument flipping_oracle(const OracleSpec& spec, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidParameter, "flip probability must lie in [0, 1]");
  const auto ideal = build_ifm_oracle(spec).instrument;
  const Matrix& dark = ideal.outcome(kDark).kraus.front();
  const Matrix& bright = ideal.outcome(kBright).kraus.front();
  const Matrix i2 = gates::identity(2);
  const Matrix flip = gates::kron({gates::pauli_x(), i2, i2});
  std::vector<Matrix> dark_ops{std::sqrt(1.0 - q) * dark};
  if (q > 0.0) dark_ops.push_back(std::sqrt(q) * flip * dark);
  return Instrument({{kDark, std::move(dark_ops)}, {kBright, {bright}}});
}

Instrument reduced_probe(const Instrument& inst, int bomb_dim) {
  const auto d = static_cast<int>(inst.dim());
  if (bomb_dim < 1 || d % bomb_dim != 0) throw Error(ErrorKind::DimensionError, "bomb does not factor the gadget");
  const int rest = d / bomb_dim;
  std::vector<qcore::InstrumentOutcome> outcomes;
  for (const auto& o : inst.outcomes()) {
    qcore::InstrumentOutcome reduced{o.label, {}};
    for (const auto& k : o.kraus) {
      for (int r = 0; r < rest; ++r) {
        Matrix kr(bomb_dim, bomb_dim);
        for (int i = 0; i < bomb_dim; ++i)
          for (int j = 0; j < bomb_dim; ++j) kr(i, j) = k(i * rest + r, j * rest);
        if (kr.norm() > 0.0) reduced.kraus.push_back(std::move(kr));
      }
    }
    if (reduced.kraus.empty()) reduced.kraus.push_back(Matrix::Zero(bomb_dim, bomb_dim));
    outcomes.push_back(std::move(reduced));
  }
  return Instrument(std::move(outcomes));
}

std::vector<QuantumState> default_bomb_set(const OracleSpec& spec) {
  const qcore::Layout l{{spec.bomb_label, 2}};
  return {QuantumState::basis(l, {0}), QuantumState::basis(l, {1})};
}

eps::EpsilonCertificate verify_counterfactuality(const OracleSpec& spec,
                                                 const std::optional<eps::StateSet>& bomb_set,
                                                 const VerifyOptions& options) {
  const auto inst = probe_instrument(spec);
  const eps::StateSet bombs = bomb_set.value_or(eps::StateSet{default_bomb_set(spec)});

  eps::StateSet systems;
  std::string system_desc;
  if (options.system_states) {
    systems = *options.system_states;
    system_desc = "configured";
  } else if (spec.kind == OracleKind::IdealFig1) {
    systems = eps::HaarSampler{{{spec.mediator_label, 2}, {spec.flag_label, 2}}, 256, options.seed, "system_states"};
    system_desc = "haar_256";
  } else {
    systems = std::vector<QuantumState>{prepared_registers(spec)};
    system_desc = "prepared_mediator";
  }

  auto cert = eps::certify_state_epsilon(inst, probe_targets(spec), kDark, bombs, systems, options.mode);
  cert.provenance["oracle_kind"] = to_string(spec.kind);
  cert.provenance["system_states"] = system_desc;
  if (spec.kind == OracleKind::WeakZeno) {
    std::ostringstream os;
    os.precision(12);
    os << spec.mixing_angle();
    cert.provenance["cycles"] = std::to_string(spec.cycles);
    cert.provenance["theta"] = os.str();
    os.str("");
    os << spec.absorption;
    cert.provenance["absorption"] = os.str();
  }
  return cert;
}

}  // namespace cflab::ifm
