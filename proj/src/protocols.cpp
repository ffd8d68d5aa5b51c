#include "cflab/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cflab/gates.hpp"

namespace cflab::protocols {

using qcore::Matrix;
using qcore::Vector;

namespace {

using Distribution = std::vector<std::pair<std::vector<int>, double>>;

// Computational-basis distribution of `labels` (given in layout order).
Distribution marginal(const QuantumState& state, const std::vector<std::string>& labels) {
  const auto reduced = qcore::partial_trace(state, labels);
  const auto dims = reduced.dims();
  const Matrix& rho = reduced.density();
  Distribution out;
  out.reserve(rho.rows());
  for (Eigen::Index idx = 0; idx < rho.rows(); ++idx) {
    std::vector<int> digits(dims.size());
    Eigen::Index rem = idx;
    for (std::size_t k = dims.size(); k-- > 0;) {
      digits[k] = static_cast<int>(rem % dims[k]);
      rem /= dims[k];
    }
    out.emplace_back(std::move(digits), std::max(0.0, rho(idx, idx).real()));
  }
  return out;
}

double probability_of(const Distribution& dist, const std::vector<std::pair<std::size_t, int>>& lits) {
  double p = 0.0;
  for (const auto& [row, pr] : dist) {
    bool ok = true;
    for (const auto& [col, v] : lits) ok = ok && row[col] == v;
    if (ok) p += pr;
  }
  return p;
}

int sign_of_flag(int flag) { return flag == 1 ? -1 : 1; }

}  // namespace

// ---------------------------------------------------------------- CLF

const char* to_string(Wiring w) { return w == Wiring::Direct ? "direct" : "routed"; }

Wiring wiring_from_string(const std::string& s) {
  if (s == "direct") return Wiring::Direct;
  if (s == "routed") return Wiring::Routed;
  throw Error(ErrorKind::InvalidParameter, "unknown wiring '" + s + "'");
}

void CLFConfig::validate() const {
  for (int v : {encoding_a[0], encoding_a[1], encoding_b[0], encoding_b[1]}) {
    if (v != 0 && v != 1) throw Error(ErrorKind::InvalidParameter, "encodings must map into {0, 1}");
  }
}

namespace {

struct LabGadgets {
  std::vector<Matrix> lab_a;  // Kraus set on (C_A, S_A, W_A)
  std::vector<Matrix> lab_b;  // Kraus set on (C_B, S_B, W_B), X-basis bomb
};

Matrix hadamard_on_bomb() {
  const Matrix i2 = gates::identity(2);
  return gates::kron({gates::hadamard(), i2, i2});
}

LabGadgets lab_gadgets(const qcore::Instrument& inst) {
  LabGadgets g;
  const Matrix hb = hadamard_on_bomb();
  for (const auto& o : inst.outcomes()) {
    for (const auto& k : o.kraus) {
      g.lab_a.push_back(k);
      g.lab_b.push_back(hb * k * hb);
    }
  }
  return g;
}

QuantumState clf_prepare(bool routed) {
  qcore::Layout layout{{"C", 2}, {"C_A", 2}, {"C_B", 2}};
  if (routed) layout.push_back({"R", 2});
  for (const char* l : {"S_A", "W_A", "S_B", "W_B"}) layout.push_back({l, 2});
  Vector amp = Vector::Zero(1 << layout.size());
  amp(0) = 1.0;
  auto s = QuantumState::pure(layout, amp);
  s = qcore::apply_unitary(s, gates::hadamard(), {"C"});
  // Isometry from the coin into the two lab registers:
  // |0>_C -> |0>|+>, |1>_C -> |1>|->, with C itself retained.
  s = qcore::apply_unitary(s, gates::cnot(), {"C", "C_A"});
  s = qcore::apply_unitary(s, gates::cnot(), {"C", "C_B"});
  s = qcore::apply_unitary(s, gates::hadamard(), {"C_B"});
  if (routed) s = qcore::apply_unitary(s, gates::cnot(), {"C", "R"});
  return s;
}

QuantumState clf_evolve(const CLFConfig& cfg, const LabGadgets& gadgets) {
  const bool routed = cfg.wiring == Wiring::Routed;
  auto s = clf_prepare(routed);
  if (!routed) {
    s = qcore::apply_channel(s, qcore::Channel(gadgets.lab_a), {"C_A", "S_A", "W_A"});
    s = qcore::apply_channel(s, qcore::Channel(gadgets.lab_b), {"C_B", "S_B", "W_B"});
  } else {
    if (gadgets.lab_a.size() != 2) {
      throw Error(ErrorKind::InvalidParameter, "routed wiring needs the ideal gadget");
    }
    const Matrix u = ifm::ideal_oracle_unitary();
    const Matrix hb = hadamard_on_bomb();
    const Matrix i8 = gates::identity(8);
    const Matrix p0 = gates::level_projector(2, 0);
    const Matrix p1 = gates::level_projector(2, 1);
    s = qcore::apply_unitary(s, gates::kron(p0, u) + gates::kron(p1, i8), {"R", "C_A", "S_A", "W_A"});
    s = qcore::apply_unitary(s, gates::kron(p0, i8) + gates::kron(p1, hb * u * hb), {"R", "C_B", "S_B", "W_B"});
    s = qcore::apply_unitary(s, gates::hadamard(), {"R"});
  }
  // X-basis readout of C_B.
  return qcore::apply_unitary(s, gates::hadamard(), {"C_B"});
}

CLFReport clf_evaluate(const CLFConfig& cfg, const QuantumState& final_state) {
  const bool routed = cfg.wiring == Wiring::Routed;
  std::vector<std::string> keep{"C", "C_A", "C_B"};
  if (routed) keep.push_back("R");
  keep.push_back("W_A");
  keep.push_back("W_B");

  CLFReport rep;
  rep.joint_variables = {"C", "b_A", "b_B"};
  if (routed) rep.joint_variables.push_back("R");
  rep.joint_variables.push_back("W_A");
  rep.joint_variables.push_back("W_B");
  rep.joint = marginal(final_state, keep);

  auto col = [&](const std::string& v) {
    return static_cast<std::size_t>(
        std::find(rep.joint_variables.begin(), rep.joint_variables.end(), v) - rep.joint_variables.begin());
  };
  std::vector<std::pair<std::size_t, int>> event{{col("W_A"), 1}, {col("W_B"), 1}};
  if (routed && cfg.postselect_routing) event.emplace_back(col("R"), 0);
  rep.p_dark_dark = probability_of(rep.joint, event);

  rep.graph.nodes = {"C", "C_A", "C_B", "b_A", "b_B", "W_A", "W_B"};
  if (routed) rep.graph.nodes.push_back("R");
  auto causal = [&](std::string a, std::string b) {
    InferenceEdge e;
    e.from = std::move(a);
    e.to = std::move(b);
    rep.graph.edges.push_back(std::move(e));
  };
  causal("C", "C_A");
  causal("C", "C_B");
  if (routed) causal("C", "R");
  causal("C_A", "b_A");
  causal("C_B", "b_B");
  causal("b_A", "W_A");
  causal("b_B", "W_B");

  auto modal = [&](const std::string& chain, const std::string& from, int pv, const std::string& to, int cv) {
    InferenceEdge e;
    e.kind = EdgeKind::Modal;
    e.from = from;
    e.to = to;
    e.premise_value = pv;
    e.conclusion_value = cv;
    e.chain = chain;
    auto premise = event;
    premise.emplace_back(col(from), pv);
    const double denom = probability_of(rep.joint, premise);
    if (denom > qcore::tol::kNullProbability) {
      auto both = premise;
      both.emplace_back(col(to), cv);
      e.evaluated = true;
      e.confidence = std::clamp(probability_of(rep.joint, both) / denom, 0.0, 1.0);
      e.sound = e.confidence >= 1.0 - kSoundness;
    }
    rep.graph.edges.push_back(e);
    return e.sound;
  };
  const int claim_a = cfg.encoding_a[1];
  const int claim_b = cfg.encoding_b[1];
  const bool a1 = modal("A", "W_A", 1, "b_A", 1);
  const bool a2 = modal("A", "b_A", 1, "C", claim_a);
  const bool b1 = modal("B", "W_B", 1, "b_B", 1);
  const bool b2 = modal("B", "b_B", 1, "C", claim_b);
  rep.chains = {{"A", claim_a, a1 && a2}, {"B", claim_b, b1 && b2}};
  rep.contradiction_detected = rep.p_dark_dark > qcore::tol::kNullProbability && rep.chains[0].sound &&
                               rep.chains[1].sound && claim_a != claim_b;

  if (rep.p_dark_dark > ontic::kSupportThreshold) {
    // The same question asked possibilistically on the post-selected support.
    Distribution in_event;
    for (const auto& [row, p] : rep.joint) {
      bool ok = true;
      for (const auto& [c, v] : event) ok = ok && row[c] == v;
      if (ok) in_event.emplace_back(row, p);
    }
    const auto table = ontic::PossibilisticTable::from_distribution(rep.joint_variables, in_event);
    const std::vector<ontic::RuleChain> chains{
        {"A", {{{{"W_A", 1}}, {"b_A", 1}}, {{{"b_A", 1}}, {"C", claim_a}}}},
        {"B", {{{{"W_B", 1}}, {"b_B", 1}}, {{{"b_B", 1}}, {"C", claim_b}}}},
    };
    rep.modal_contradiction = ontic::modal_check(table, chains).contradiction;
  }
  return rep;
}

}  // namespace

CLFReport clf_run(const CLFConfig& cfg) {
  cfg.validate();
  const auto gadgets = lab_gadgets(ifm::build_ifm_oracle({}).instrument);
  return clf_evaluate(cfg, clf_evolve(cfg, gadgets));
}

CLFRobustness clf_robustness(const CLFConfig& cfg, const std::vector<double>& epsilons) {
  cfg.validate();
  if (cfg.wiring != Wiring::Direct) {
    throw Error(ErrorKind::InvalidParameter, "robustness sweep is defined for direct wiring");
  }
  const auto ideal = clf_run(cfg);
  std::vector<std::size_t> tracked;
  for (std::size_t i = 0; i < ideal.graph.edges.size(); ++i) {
    if (ideal.graph.edges[i].kind == EdgeKind::Modal && ideal.graph.edges[i].sound) tracked.push_back(i);
  }

  CLFRobustness out;
  const ifm::OracleSpec spec;
  for (double e : epsilons) {
    if (!(e >= 0.0 && e <= 2.0)) throw Error(ErrorKind::InvalidEpsilon, "epsilon must lie in [0, 2]");
    const auto inst = ifm::flipping_oracle(spec, e / 2.0);
    CLFRobustnessPoint pt;
    pt.epsilon = e;
    pt.certified_epsilon =
        eps::certify_state_epsilon(inst, ifm::probe_targets(spec), ifm::kDark,
                                   ifm::default_bomb_set(spec),
                                   eps::HaarSampler{{{"S", 2}, {"W", 2}}, 64, 0, "clf_robustness"})
            .value;
    const auto rep = clf_evaluate(cfg, clf_evolve(cfg, lab_gadgets(inst)));
    for (std::size_t i : tracked) {
      const auto& edge = rep.graph.edges[i];
      const double conf = edge.evaluated ? edge.confidence : 0.0;
      pt.edge_confidence.emplace_back(edge.chain + ":" + edge.from + "->" + edge.to, conf);
      pt.min_confidence = std::min(pt.min_confidence, conf);
    }
    out.points.push_back(std::move(pt));
  }

  std::vector<double> xs, ys;
  for (const auto& p : out.points) {
    const double gap = 1.0 - p.min_confidence;
    if (p.epsilon > 0.0) {
      out.fitted_c = std::max(out.fitted_c, gap / std::sqrt(p.epsilon));
      if (gap > 0.0) {
        xs.push_back(p.epsilon);
        ys.push_back(gap);
      }
    }
  }
  if (xs.size() >= 2) out.fitted_exponent = eps::loglog_slope(xs, ys);
  for (const auto& p : out.points) {
    if (p.min_confidence < 1.0 - out.fitted_c * std::sqrt(p.epsilon) - 1e-12) out.bound_holds = false;
  }
  std::vector<std::size_t> order(out.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.points[a].epsilon < out.points[b].epsilon; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (out.points[order[i]].min_confidence > out.points[order[i - 1]].min_confidence + 1e-12) out.monotone = false;
  }
  return out;
}

// ------------------------------------------------------------ three box

const char* to_string(BoxContext c) { return c == BoxContext::A ? "A" : "B"; }

ThreeBoxStates default_three_box_states() {
  const double r = 1.0 / std::sqrt(3.0);
  ThreeBoxStates s;
  s.pre = Vector::Constant(3, r);
  s.post = Vector::Constant(3, r);
  s.post(2) = -r;
  return s;
}

double abl_probability(const Matrix& projector, const Vector& pre, const Vector& post) {
  if (projector.rows() != pre.size() || projector.cols() != pre.size() || post.size() != pre.size()) {
    throw Error(ErrorKind::DimensionError, "projector and states disagree in dimension");
  }
  const Matrix complement = Matrix::Identity(pre.size(), pre.size()) - projector;
  const double yes = std::norm(post.dot(projector * pre));
  const double no = std::norm(post.dot(complement * pre));
  if (yes + no <= qcore::tol::kNullProbability) {
    throw Error(ErrorKind::ABLUndefined, "both ABL amplitudes vanish");
  }
  return yes / (yes + no);
}

double threebox_abl(BoxContext context, const ThreeBoxStates& states) {
  const int level = context == BoxContext::A ? 0 : 1;
  return abl_probability(gates::level_projector(3, level), states.pre, states.post);
}

ThreeBoxIFM threebox_ifm(const ifm::OracleSpec& probe, BoxContext context, eps::Mode certificate_mode,
                         const ThreeBoxStates& states) {
  const auto inst = ifm::probe_instrument(probe);
  const auto targets = ifm::probe_targets(probe);
  const int level = context == BoxContext::A ? 0 : 1;

  const auto box = QuantumState::pure({{"box", 3}}, states.pre / states.pre.norm());
  const auto bomb = QuantumState::basis({{probe.bomb_label, 2}}, {0});
  const std::vector<QuantumState> parts{box, bomb, ifm::prepared_registers(probe)};
  auto s = qcore::tensor(parts);
  // The bomb sits in the probed arm: it is live exactly when the particle is there.
  s = qcore::apply_unitary(s, gates::level_controlled(3, level, gates::pauli_x()), {"box", probe.bomb_label});

  const Vector f = states.post / states.post.norm();
  const auto dims = s.dims();
  double decisive = 0.0;
  double total = 0.0;
  for (const auto& o : inst.outcomes()) {
    const Matrix image = qcore::apply_outcome_unnormalized(s, o, targets);
    const Matrix rho_box = qcore::detail::partial_trace_matrix(image, dims, {0});
    const double p = std::max(0.0, f.dot(rho_box * f).real());
    total += p;
    if (o.label == ifm::kDark) decisive = p;
  }
  if (total <= qcore::tol::kNullProbability) {
    throw Error(ErrorKind::PostselectionImpossible, "post-selection on the final box state never succeeds");
  }
  ThreeBoxIFM out;
  out.p_decisive = decisive / total;
  out.p_postselect = total;
  ifm::VerifyOptions opts;
  opts.mode = certificate_mode;
  out.certificate = ifm::verify_counterfactuality(probe, std::nullopt, opts);
  return out;
}

ThreeBoxClassical threebox_classical_max(double k_prime, double epsilon) {
  if (k_prime < 0.0 || epsilon < 0.0) throw Error(ErrorKind::InvalidParameter, "K' and epsilon must be nonnegative");
  const auto space = ontic::three_box_space();
  const auto objective = ontic::three_box_objective(space);
  ThreeBoxClassical out;
  out.optimum = ontic::optimize_over_ontic(space, objective, k_prime * epsilon);
  out.value = out.optimum.value;
  out.value_unhalved_tv = ontic::optimize_over_ontic(space, objective, 2.0 * k_prime * epsilon).value;
  return out;
}

// ------------------------------------------------------------ GHZ

GHZReport ghz_run(double phase) {
  qcore::Layout layout;
  const std::array<std::string, 3> labs{"A", "B", "C"};
  for (const auto& l : labs) layout.push_back({"q_" + l, 2});
  for (const auto& l : labs) {
    layout.push_back({"S_" + l, 2});
    layout.push_back({"W_" + l, 2});
  }
  Vector amp = Vector::Zero(1 << layout.size());
  // q digits are the three most significant bits.
  amp(0) = 1.0 / std::sqrt(2.0);
  amp(7 << 6) = std::polar(1.0 / std::sqrt(2.0), phase);
  const auto ghz = QuantumState::pure(layout, amp);

  const Matrix u = ifm::ideal_oracle_unitary();
  const Matrix to_y = gates::hadamard() * gates::phase_s_dag();

  GHZReport rep;
  rep.settings = {"XYY", "YXY", "YYX", "XXX"};
  for (const auto& setting : rep.settings) {
    auto s = ghz;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::string q = "q_" + labs[j];
      s = qcore::apply_unitary(s, setting[j] == 'X' ? gates::hadamard() : to_y, {q});
      s = qcore::apply_unitary(s, u, {q, "S_" + labs[j], "W_" + labs[j]});
    }
    const auto dist = marginal(s, {"W_A", "W_B", "W_C"});
    double parity = 0.0;
    for (const auto& [row, p] : dist) parity += p * sign_of_flag(row[0]) * sign_of_flag(row[1]) * sign_of_flag(row[2]);
    rep.parities.push_back(parity);
  }

  std::vector<ontic::ParityConstraint> constraints;
  for (std::size_t k = 0; k < rep.settings.size(); ++k) {
    ontic::ParityConstraint c;
    for (std::size_t j = 0; j < 3; ++j) c.observables.push_back(std::string(1, rep.settings[k][j]) + "_" + labs[j]);
    c.sign = rep.parities[k] >= 0.0 ? 1 : -1;
    constraints.push_back(std::move(c));
  }
  rep.enumeration = ontic::enumerate_assignments({"X_A", "Y_A", "X_B", "Y_B", "X_C", "Y_C"}, constraints);
  rep.max_lab_epsilon = ifm::verify_counterfactuality({}).value;
  return rep;
}

// ------------------------------------------------------------ PM

Matrix pauli_word(const std::string& word) {
  std::vector<Matrix> factors;
  for (char ch : word) {
    switch (ch) {
      case 'I': factors.push_back(gates::identity(2)); break;
      case 'X': factors.push_back(gates::pauli_x()); break;
      case 'Y': factors.push_back(gates::pauli_y()); break;
      case 'Z': factors.push_back(gates::pauli_z()); break;
      default: throw Error(ErrorKind::InvalidParameter, "unknown Pauli letter in '" + word + "'");
    }
  }
  if (factors.empty()) throw Error(ErrorKind::InvalidParameter, "empty Pauli word");
  return gates::kron(factors);
}

std::array<std::size_t, 3> PMSquare::context(std::size_t k) const {
  if (k < 3) return {3 * k, 3 * k + 1, 3 * k + 2};
  if (k < 6) return {k - 3, k, k + 3};
  throw Error(ErrorKind::InvalidParameter, "Peres-Mermin square has six contexts");
}

std::string PMSquare::context_name(std::size_t k) const {
  return k < 3 ? "row" + std::to_string(k) : "col" + std::to_string(k - 3);
}

PMReport pm_run(const QuantumState& state, const PMSquare& square) {
  if (state.dims() != std::vector<int>{2, 2}) {
    throw Error(ErrorKind::DimensionError, "Peres-Mermin input must be exactly two qubits");
  }
  const auto labels = state.labels();
  qcore::Layout gadget;
  for (int k = 0; k < 3; ++k) {
    gadget.push_back({"m" + std::to_string(k), 2});
    gadget.push_back({"f" + std::to_string(k), 2});
  }
  const auto registers = QuantumState::basis(gadget, {0, 0, 0, 0, 0, 0});

  // Flag parities are linear in rho, so a mixed input runs as its eigen-ensemble
  // of pure states. Weights below the null threshold are dropped.
  std::vector<std::pair<double, QuantumState>> ensemble;
  if (state.is_pure()) {
    ensemble.emplace_back(1.0, qcore::tensor(state, registers));
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(state.density());
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double w = es.eigenvalues()(i);
      if (w <= qcore::tol::kNullProbability) continue;
      const QuantumState component = QuantumState::pure(state.layout(), es.eigenvectors().col(i));
      ensemble.emplace_back(w, qcore::tensor(component, registers));
    }
  }

  PMReport rep;
  rep.product = 1.0;
  std::vector<ontic::ParityConstraint> constraints;
  for (std::size_t c = 0; c < 6; ++c) {
    const auto cells = square.context(c);
    double parity = 0.0;
    for (const auto& [weight, joint] : ensemble) {
      auto s = joint;
      for (int k = 0; k < 3; ++k) {
        // Mediator phase gadget: H, controlled observable, H writes the
        // eigenvalue into m_k, which is then copied to the flag.
        const std::string m = "m" + std::to_string(k);
        const std::string f = "f" + std::to_string(k);
        s = qcore::apply_unitary(s, gates::hadamard(), {m});
        s = qcore::apply_unitary(s, gates::controlled(pauli_word(square.cells[cells[k]])), {m, labels[0], labels[1]});
        s = qcore::apply_unitary(s, gates::hadamard(), {m});
        s = qcore::apply_unitary(s, gates::cnot(), {m, f});
      }
      for (const auto& [row, p] : marginal(s, {"f0", "f1", "f2"})) {
        parity += weight * p * sign_of_flag(row[0]) * sign_of_flag(row[1]) * sign_of_flag(row[2]);
      }
    }
    rep.contexts.push_back(square.context_name(c));
    rep.parities.push_back(parity);
    rep.product *= parity;
    ontic::ParityConstraint pc;
    for (auto i : cells) pc.observables.push_back(square.cells[i]);
    pc.sign = parity >= 0.0 ? 1 : -1;
    constraints.push_back(std::move(pc));
  }
  const std::vector<std::string> observables(square.cells.begin(), square.cells.end());
  rep.enumeration = ontic::enumerate_assignments(observables, constraints);
  return rep;
}

// ------------------------------------------------------------ LG

LGReport lg_run(double theta, const ifm::OracleSpec& probe, double c) {
  if (!(theta >= 0.0 && theta <= M_PI)) throw Error(ErrorKind::InvalidParameter, "theta must lie in [0, pi]");
  const auto reduced = ifm::reduced_probe(ifm::probe_instrument(probe));
  // Rotating the Bloch vector by theta about y.
  const Matrix u = gates::mixing(theta / 2.0);
  const Matrix rho0 = gates::outer(gates::ket(2, 0), gates::ket(2, 0));

  auto apply = [](const Matrix& rho, const qcore::InstrumentOutcome& o) {
    Matrix out = Matrix::Zero(2, 2);
    for (const auto& k : o.kraus) out += k * rho * k.adjoint();
    return out;
  };
  auto sign = [](const std::string& label) { return label == ifm::kDark ? -1.0 : 1.0; };

  auto correlator = [&](int i, int j) {
    Matrix before = rho0;
    for (int t = 0; t < i; ++t) before = u * before * u.adjoint();
    double num = 0.0;
    double den = 0.0;
    for (const auto& x : reduced.outcomes()) {
      if (x.label == ifm::kAbsorbed) continue;
      Matrix mid = apply(before, x);
      for (int t = i; t < j; ++t) mid = u * mid * u.adjoint();
      for (const auto& y : reduced.outcomes()) {
        if (y.label == ifm::kAbsorbed) continue;
        const double p = apply(mid, y).trace().real();
        num += sign(x.label) * sign(y.label) * p;
        den += p;
      }
    }
    if (den <= qcore::tol::kNullProbability) {
      throw Error(ErrorKind::NoDecisiveEvents, "every run was absorbed");
    }
    return num / den;
  };

  LGReport rep;
  rep.theta = theta;
  rep.c12 = correlator(0, 1);
  rep.c23 = correlator(1, 2);
  rep.c13 = correlator(0, 2);
  rep.k3 = rep.c12 + rep.c23 - rep.c13;
  // The conditional Dark image of a basis bomb is exact for the Zeno chain,
  // so weak probes are charged their raw Dark deficit instead.
  ifm::VerifyOptions opts;
  if (probe.kind == ifm::OracleKind::WeakZeno) opts.mode = eps::Mode::Raw;
  rep.epsilon = ifm::verify_counterfactuality(probe, std::nullopt, opts).value;
  rep.macrorealist_bound = ontic::macrorealist_max(ontic::leggett_garg_k3(), 3, rep.epsilon, c).bound;
  rep.violated = rep.k3 > rep.macrorealist_bound + 1e-12;
  return rep;
}

// ------------------------------------------------------------ LF

LFReport lf_evaluate(const CorrelatorTable& coeffs, const CorrelatorTable& correlators, const LFParams& params) {
  if (coeffs.size() != correlators.size() ||
      !std::equal(coeffs.begin(), coeffs.end(), correlators.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorKind::CoefficientMismatch, "coefficients and correlators use different setting pairs");
  }
  LFReport rep;
  for (const auto& [key, c] : coeffs) {
    const double e = correlators.at(key);
    if (e < -1.0 - 1e-12 || e > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "correlator E" << key.first << key.second << " = " << e << " leaves [-1, 1]";
      throw Error(ErrorKind::InvalidParameter, os.str());
    }
    rep.s_lf += c * e;
  }
  rep.relaxed_bound = params.b_lf + eps::gentle_stability_bound(params.epsilon, params.delta, params.k1, params.k2);
  rep.violated = rep.s_lf > rep.relaxed_bound + 1e-12;
  return rep;
}

CorrelatorTable lf_correlators(const QuantumState& state, const std::vector<Matrix>& alice,
                               const std::vector<Matrix>& bob) {
  const auto labels = state.labels();
  if (labels.size() != 2) throw Error(ErrorKind::DimensionError, "LF correlators need a two-party state");
  CorrelatorTable table;
  for (std::size_t x = 0; x < alice.size(); ++x) {
    for (std::size_t y = 0; y < bob.size(); ++y) {
      table[{static_cast<int>(x), static_cast<int>(y)}] =
          qcore::expectation(state, gates::kron(alice[x], bob[y]), labels);
    }
  }
  return table;
}

CHSHInstance chsh_instance() {
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  const auto state = QuantumState::pure({{"A", 2}, {"B", 2}}, singlet);
  const Matrix z = gates::pauli_z();
  const Matrix x = gates::pauli_x();
  const double r = 1.0 / std::sqrt(2.0);
  CHSHInstance inst;
  inst.correlators = lf_correlators(state, {z, x}, {-r * (z + x), -r * (z - x)});
  inst.coeffs = {{{0, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 0}, 1.0}, {{1, 1}, -1.0}};
  return inst;
}

}  // namespace cflab::protocols
