#pragma once

// End-to-end paradox protocols. Quantum values come from exact simulation,
// classical values from the ontic oracles; reports carry both.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cflab/epsilon.hpp"
#include "cflab/ifm.hpp"
#include "cflab/ontic.hpp"
#include "cflab/qcore.hpp"

namespace cflab::protocols {

using qcore::QuantumState;

// ---------------------------------------------------------------- CLF

enum class Wiring { Direct, Routed };
const char* to_string(Wiring w);
Wiring wiring_from_string(const std::string& s);  // InvalidParameter

struct CLFConfig {
  std::array<int, 2> encoding_a{1, 0};  // b_A value -> claimed coin value
  std::array<int, 2> encoding_b{0, 1};  // b_B value -> claimed coin value
  Wiring wiring = Wiring::Direct;
  bool postselect_routing = false;

  void validate() const;  // InvalidParameter unless encodings map into {0, 1}
};

enum class EdgeKind { Causal, Modal };

struct InferenceEdge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Causal;
  int premise_value = -1;     // modal only
  int conclusion_value = -1;  // modal only
  std::string chain;          // modal only
  bool evaluated = false;
  double confidence = 0.0;    // P(conclusion | premise, post-selected event)
  bool sound = false;         // confidence within 1e-9 of 1
};

struct InferenceGraph {
  std::vector<std::string> nodes;
  std::vector<InferenceEdge> edges;
};

struct ChainClaim {
  std::string name;
  int claimed_coin = 0;
  bool sound = false;
};

struct CLFReport {
  double p_dark_dark = 0.0;  // includes R = 0 when routing is post-selected
  InferenceGraph graph;
  std::vector<ChainClaim> chains;
  bool contradiction_detected = false;
  bool modal_contradiction = false;  // ontic::modal_check on the same support
  std::vector<std::pair<std::vector<int>, double>> joint;  // over joint_variables
  std::vector<std::string> joint_variables;
};

inline constexpr double kSoundness = 1e-9;

CLFReport clf_run(const CLFConfig& cfg);

struct CLFRobustnessPoint {
  double epsilon = 0.0;
  double certified_epsilon = 0.0;  // conditional Dark certificate of each lab gadget
  std::vector<std::pair<std::string, double>> edge_confidence;
  double min_confidence = 1.0;  // over edges sound in the ideal run
};

struct CLFRobustness {
  std::vector<CLFRobustnessPoint> points;
  std::optional<double> fitted_exponent;  // log-log slope of 1 - confidence vs epsilon
  double fitted_c = 0.0;                  // max (1 - confidence) / sqrt(epsilon)
  bool bound_holds = true;                // confidence >= 1 - c sqrt(epsilon) on every point
  bool monotone = true;
};

// Each lab gadget is the ideal oracle with a Dark-branch bomb flip of
// probability epsilon / 2, which saturates its certified epsilon.
// Direct wiring only.
CLFRobustness clf_robustness(const CLFConfig& cfg, const std::vector<double>& epsilons);

// ------------------------------------------------------------ three box

enum class BoxContext { A, B };
const char* to_string(BoxContext c);

struct ThreeBoxStates {
  qcore::Vector pre;
  qcore::Vector post;
};

ThreeBoxStates default_three_box_states();

// |<f|P|i>|^2 / (|<f|P|i>|^2 + |<f|(I-P)|i>|^2); ABLUndefined on a zero
// denominator.
double abl_probability(const qcore::Matrix& projector, const qcore::Vector& pre, const qcore::Vector& post);
double threebox_abl(BoxContext context, const ThreeBoxStates& states = default_three_box_states());

struct ThreeBoxIFM {
  double p_decisive = 0.0;  // P(Dark | post-selection)
  double p_postselect = 0.0;
  eps::EpsilonCertificate certificate;
};

ThreeBoxIFM threebox_ifm(const ifm::OracleSpec& probe, BoxContext context,
                         eps::Mode certificate_mode = eps::Mode::Conditional,
                         const ThreeBoxStates& states = default_three_box_states());

struct ThreeBoxClassical {
  double value = 0.0;              // with K = K'
  double value_unhalved_tv = 0.0;  // with K = 2K'
  ontic::OnticOptimum optimum;
};

ThreeBoxClassical threebox_classical_max(double k_prime, double epsilon);

// ------------------------------------------------------------ GHZ / PM

struct GHZReport {
  std::vector<std::string> settings;  // XYY, YXY, YYX, XXX
  std::vector<double> parities;
  ontic::EnumerationResult enumeration;
  double max_lab_epsilon = 0.0;
};

// (|000> + e^{i phase}|111>) / sqrt(2) on the three control registers.
GHZReport ghz_run(double phase = M_PI);

struct PMSquare {
  // Row-major 3x3 grid of two-qubit Pauli words such as "XY".
  std::array<std::string, 9> cells{"XI", "IX", "XX", "IY", "YI", "YY", "XY", "YX", "ZZ"};

  std::array<std::size_t, 3> context(std::size_t k) const;  // 0..2 rows, 3..5 columns
  std::string context_name(std::size_t k) const;
};

struct PMReport {
  std::vector<std::string> contexts;
  std::vector<double> parities;
  double product = 0.0;
  ontic::EnumerationResult enumeration;
};

// DimensionError unless the input is exactly two qubits.
PMReport pm_run(const QuantumState& state, const PMSquare& square = {});

qcore::Matrix pauli_word(const std::string& word);

// ------------------------------------------------------------ LG

struct LGReport {
  double theta = 0.0;
  double c12 = 0.0;
  double c23 = 0.0;
  double c13 = 0.0;
  double k3 = 0.0;
  double epsilon = 0.0;
  double macrorealist_bound = 1.0;
  bool violated = false;
};

LGReport lg_run(double theta, const ifm::OracleSpec& probe, double c = 2.0);

// ------------------------------------------------------------ LF

using CorrelatorTable = std::map<std::pair<int, int>, double>;

struct LFParams {
  double b_lf = 2.0;
  double k1 = 1.0;
  double k2 = 2.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

struct LFReport {
  double s_lf = 0.0;
  double relaxed_bound = 0.0;
  bool violated = false;
};

// CoefficientMismatch unless both tables share one index set;
// InvalidParameter when a correlator leaves [-1, 1].
LFReport lf_evaluate(const CorrelatorTable& coeffs, const CorrelatorTable& correlators, const LFParams& params);

// E_xy = <A_x (x) B_y> on a two-party state whose first subsystem is Alice.
CorrelatorTable lf_correlators(const QuantumState& state, const std::vector<qcore::Matrix>& alice,
                               const std::vector<qcore::Matrix>& bob);

// Singlet with A = {Z, X}, B = {-(Z+X)/sqrt2, -(Z-X)/sqrt2} and c = {1, 1, 1, -1}.
struct CHSHInstance {
  CorrelatorTable coeffs;
  CorrelatorTable correlators;
};
CHSHInstance chsh_instance();

}  // namespace cflab::protocols
