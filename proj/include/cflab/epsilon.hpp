#pragma once

// Disturbance certificates: state-level and channel-level epsilon, their
// conversions, additive composition, and the Zeno dose/success model.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cflab/qcore.hpp"

namespace cflab::eps {

using qcore::Channel;
using qcore::Instrument;
using qcore::QuantumState;

enum class Metric { TraceDistanceState, DiamondEstimate };
enum class Method { StateSweep, ChoiExact, VisibilityProxy, Analytic };
enum class BoundKind { LowerEstimate, RigorousUpper };

// Conditional divides the outcome's image by its probability; Raw compares
// the unnormalized image with the input.
enum class Mode { Conditional, Raw };

const char* to_string(Metric m);
const char* to_string(Method m);
const char* to_string(BoundKind b);
const char* to_string(Mode m);

struct EpsilonCertificate {
  double value = 0.0;  // trace norm, in [0, 2]
  Metric metric = Metric::TraceDistanceState;
  Method method = Method::StateSweep;
  BoundKind bound_kind = BoundKind::LowerEstimate;
  std::size_t samples = 0;  // probe inputs evaluated
  std::size_t skipped = 0;  // probe inputs where the outcome had probability < 1e-12
  std::string outcome_label;
  std::map<std::string, std::string> provenance;
};

struct EpsilonBudget {
  std::vector<double> per_round;
  double total = 0.0;
};

struct HaarSampler {
  qcore::Layout layout;
  std::size_t count = 256;
  std::uint64_t seed = 0;
  std::string stream = "system_states";
};

// Either an explicit finite list or a seeded Haar sampler.
using StateSet = std::variant<std::vector<QuantumState>, HaarSampler>;

std::vector<QuantumState> materialize(const StateSet& set);

inline constexpr double kSkipProbability = 1e-12;

// max over (system, bomb) inputs of || Tr_S[E_x(rho_S (x) rho_B)] - rho_B ||_1.
// The joint input is system (x) bomb; `targets` names the instrument's
// subsystems in its own operator order.
EpsilonCertificate certify_state_epsilon(const Instrument& inst,
                                         const std::vector<std::string>& targets,
                                         const std::string& outcome_label,
                                         const StateSet& bomb_states,
                                         const StateSet& system_states,
                                         Mode mode = Mode::Conditional);

struct DiamondOptions {
  std::size_t random_starts = 64;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 500;
};

struct DiamondResult {
  EpsilonCertificate lower;  // multi-start ascent, includes the maximally entangled probe
  EpsilonCertificate upper;  // d * ||J(ch - id)||_1
  double choi_trace_norm = 0.0;  // ||(ch - id) (x) id (Phi+)||_1 with normalized Phi+
};

DiamondResult estimate_diamond_epsilon(const Channel& ch, const DiamondOptions& options = {});

// Trace norm of ((ch - id) (x) id)(|phi><phi|) for a probe on system (x) ancilla.
double diamond_objective(const Channel& ch, const qcore::Vector& probe);

EpsilonBudget compose_epsilons(const std::vector<double>& per_round);

struct VisibilityEstimate {
  double lambda_estimate = 0.0;
  double epsilon_proxy = 0.0;
  bool rigorous = false;  // always false: empirical proxy
};

VisibilityEstimate visibility_to_epsilon(double v_dec, double v_0);

// Mach-Zehnder fringe visibility (max - min) / (max + min) over a phase scan,
// with `arm_noise` applied to the path qubit between the beam splitters.
double interferometer_visibility(const Channel& arm_noise, int phase_steps = 64);

double gentle_stability_bound(double epsilon, double delta, double k1, double k2);

// Zeno weak-look chain with a live absorber on the probed arm.
//
// Each cycle mixes the two arms by `theta`; the live bomb then absorbs the
// probed-arm amplitude with probability `absorption` and imparts a pi phase
// on what it transmits. `loss` is removed from both arms at the end of every
// cycle. success = P(Dark | photon detected), dose = total absorption
// probability.
struct ZenoModel {
  double absorption = 0.6;
  double loss = 0.0;
};

struct ZenoPoint {
  int n = 1;
  double theta = 0.0;
  double success = 0.0;
  double dose = 0.0;
  double dark = 0.0;
  double bright = 0.0;
  double lost = 0.0;
};

ZenoPoint zeno_point(int n, const ZenoModel& model);
std::vector<ZenoPoint> zeno_sweep(const std::vector<int>& n_values, double loss,
                                  double absorption = ZenoModel{}.absorption);

// Least-squares slope of log(y) against log(x). InvalidParameter on
// non-positive data or fewer than two points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cflab::eps
