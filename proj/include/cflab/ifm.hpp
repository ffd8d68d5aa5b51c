#pragma once

// Interaction-free measurement gadgets built as instruments.
//
// The ideal gadget acts on (bomb, mediator, flag) and the weak Zeno chain on
// (bomb, mediator); both expose the decisive outcome "Dark". Bomb |1> is live.

#include <optional>
#include <string>
#include <vector>

#include "cflab/epsilon.hpp"
#include "cflab/qcore.hpp"

namespace cflab::ifm {

using qcore::Instrument;
using qcore::QuantumState;

inline const std::string kDark = "Dark";
inline const std::string kBright = "Bright";
inline const std::string kAbsorbed = "Absorbed";

enum class OracleKind { IdealFig1, WeakZeno };

const char* to_string(OracleKind k);
OracleKind oracle_kind_from_string(const std::string& s);  // InvalidParameter

struct OracleSpec {
  OracleKind kind = OracleKind::IdealFig1;
  int cycles = 1;                // weak only
  std::optional<double> theta;  // weak only; defaults to pi / (2 * cycles)
  double absorption = eps::ZenoModel{}.absorption;  // weak only
  std::string flag_label = "W";
  std::string bomb_label = "b";
  std::string mediator_label = "S";

  // InvalidParameter unless cycles >= 1, 0 < theta <= pi/2, 0 < absorption <= 1
  // and the labels are distinct.
  void validate() const;
  double mixing_angle() const;
};

struct Gate {
  std::string name;
  std::vector<std::string> targets;
};

struct Oracle {
  std::vector<Gate> circuit;
  Instrument instrument;
  std::vector<std::string> targets;  // bomb, mediator, flag
};

// H(S), CZ(b->S), H(S), CNOT(b->W) on (bomb, mediator, flag).
qcore::Matrix ideal_oracle_unitary();

// Ideal gadget: H(S), CZ(b->S), H(S), CNOT(b->W), then a Z readout of W
// (Dark = 1, Bright = 0).
Oracle build_ifm_oracle(const OracleSpec& spec);

// N-cycle Zeno chain on (bomb, mediator) with outcomes Dark, Bright and
// Absorbed. The mediator starts in |0>; Dark means it is found back in |0>.
Instrument build_weak_probe(const OracleSpec& spec);

// The instrument for either kind, with its target order and a product
// state of the gadget's own registers in their prepared values.
Instrument probe_instrument(const OracleSpec& spec);
std::vector<std::string> probe_targets(const OracleSpec& spec);
QuantumState prepared_registers(const OracleSpec& spec);

// Instrument on the bomb alone: the gadget registers start in their prepared
// values and every output basis state of them becomes a separate Kraus term.
Instrument reduced_probe(const Instrument& inst, int bomb_dim = 2);

// Ideal gadget with a bit flip of the bomb, with probability q, on the Dark
// branch. On live bombs the conditional Dark disturbance is exactly 2q.
Instrument flipping_oracle(const OracleSpec& spec, double q);

// {|0>, |1>} on the bomb label.
std::vector<QuantumState> default_bomb_set(const OracleSpec& spec);

struct VerifyOptions {
  eps::Mode mode = eps::Mode::Conditional;
  // Defaults: 256 Haar states on (mediator, flag) for the ideal gadget, the
  // prepared mediator for the weak chain.
  std::optional<eps::StateSet> system_states;
  std::uint64_t seed = 0;
};

eps::EpsilonCertificate verify_counterfactuality(const OracleSpec& spec,
                                                 const std::optional<eps::StateSet>& bomb_set = std::nullopt,
                                                 const VerifyOptions& options = {});

}  // namespace cflab::ifm
