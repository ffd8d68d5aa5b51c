#include "cflab/epsilon.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cflab/gates.hpp"
#include "cflab/rng.hpp"

namespace cflab::eps {

using qcore::Matrix;
using qcore::Vector;

const char* to_string(Metric m) {
  return m == Metric::TraceDistanceState ? "trace_distance_state" : "diamond_estimate";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::StateSweep: return "state_sweep";
    case Method::ChoiExact: return "choi_exact";
    case Method::VisibilityProxy: return "visibility_proxy";
    case Method::Analytic: return "analytic";
  }
  return "unknown";
}

const char* to_string(BoundKind b) {
  return b == BoundKind::LowerEstimate ? "lower_estimate" : "rigorous_upper";
}

const char* to_string(Mode m) { return m == Mode::Conditional ? "conditional" : "raw"; }

std::vector<QuantumState> materialize(const StateSet& set) {
  if (const auto* list = std::get_if<std::vector<QuantumState>>(&set)) return *list;
  const auto& sampler = std::get<HaarSampler>(set);
  std::vector<QuantumState> out;
  out.reserve(sampler.count);
  for (std::size_t i = 0; i < sampler.count; ++i) {
    rng::Stream stream(sampler.seed, sampler.stream, i);
    out.push_back(rng::haar_state(sampler.layout, stream));
  }
  return out;
}

namespace {

QuantumState joint_input(const QuantumState& system, const QuantumState& bomb) {
  if (system.is_pure() == bomb.is_pure()) return qcore::tensor(system, bomb);
  return qcore::tensor(system.to_mixed(), bomb.to_mixed());
}

}  // namespace

EpsilonCertificate certify_state_epsilon(const Instrument& inst,
                                         const std::vector<std::string>& targets,
                                         const std::string& outcome_label,
                                         const StateSet& bomb_states,
                                         const StateSet& system_states, Mode mode) {
  const auto& outcome = inst.outcome(outcome_label);
  const auto bombs = materialize(bomb_states);
  const auto systems = materialize(system_states);

  EpsilonCertificate cert;
  cert.metric = Metric::TraceDistanceState;
  cert.method = Method::StateSweep;
  cert.bound_kind = BoundKind::LowerEstimate;
  cert.outcome_label = outcome_label;
  cert.provenance["mode"] = to_string(mode);

  double worst = 0.0;
  std::size_t evaluated = 0;
  for (const auto& bomb : bombs) {
    const auto bomb_labels = bomb.labels();
    const Matrix rho_b = bomb.density_matrix();
    std::vector<std::size_t> bomb_positions;
    for (const auto& system : systems) {
      const auto joint = joint_input(system, bomb);
      if (bomb_positions.empty()) {
        for (const auto& l : bomb_labels) bomb_positions.push_back(joint.position(l));
      }
      const Matrix image = qcore::apply_outcome_unnormalized(joint, outcome, targets);
      const double p = image.trace().real();
      if (p < kSkipProbability) {
        ++cert.skipped;
        continue;
      }
      Matrix reduced = qcore::detail::partial_trace_matrix(image, joint.dims(), bomb_positions);
      if (mode == Mode::Conditional) reduced /= p;
      worst = std::max(worst, qcore::trace_norm(reduced - rho_b));
      ++evaluated;
    }
  }
  if (evaluated == 0) {
    throw Error(ErrorKind::NoDecisiveEvents,
                "outcome '" + outcome_label + "' never fired on the probe inputs");
  }
  cert.samples = evaluated;
  cert.value = std::clamp(worst, 0.0, 2.0);
  return cert;
}

namespace {

// ((ch - id) (x) id)(rho) for rho on system (x) ancilla, system first.
Matrix deviation_image(const Channel& ch, const Matrix& rho, const std::vector<int>& dims) {
  Matrix out = -rho;
  for (const auto& k : ch.kraus()) out += qcore::detail::conjugate_local(rho, k, dims, {0});
  return 0.5 * (out + out.adjoint());
}

// Adjoint map (ch^dagger - id) (x) id applied to a Hermitian operator.
Matrix adjoint_deviation_image(const Channel& ch, const Matrix& s, const std::vector<int>& dims) {
  Matrix out = -s;
  for (const auto& k : ch.kraus()) {
    out += qcore::detail::conjugate_local(s, k.adjoint(), dims, {0});
  }
  return 0.5 * (out + out.adjoint());
}

Matrix sign_of(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd s = es.eigenvalues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) > 0.0 ? 1.0 : (s(i) < 0.0 ? -1.0 : 0.0);
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// Alternating maximization of <phi| A_S |phi> over the sign operator S and the
// probe phi; the objective never decreases between iterations.
double ascend(const Channel& ch, Vector phi, const std::vector<int>& dims, std::size_t max_iterations) {
  double best = diamond_objective(ch, phi);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Matrix m = deviation_image(ch, phi * phi.adjoint(), dims);
    const Matrix a = adjoint_deviation_image(ch, sign_of(m), dims);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const Vector next = es.eigenvectors().col(es.eigenvalues().size() - 1);
    const double value = diamond_objective(ch, next);
    if (value <= best + 1e-14) break;
    best = value;
    phi = next;
  }
  return best;
}

}  // namespace

double diamond_objective(const Channel& ch, const Vector& probe) {
  const int d = static_cast<int>(ch.dim());
  if (probe.size() != d * d) throw Error(ErrorKind::DimensionError, "probe must live on system (x) ancilla");
  return qcore::trace_norm(deviation_image(ch, probe * probe.adjoint(), {d, d}));
}

DiamondResult estimate_diamond_epsilon(const Channel& ch, const DiamondOptions& options) {
  const int d = static_cast<int>(ch.dim());
  for (const auto& k : ch.kraus()) {
    if (k.rows() != k.cols()) throw Error(ErrorKind::DimensionError, "channel must be square");
  }
  const std::vector<int> dims{d, d};

  Vector phi_plus = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) phi_plus(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));

  DiamondResult result;
  result.choi_trace_norm = diamond_objective(ch, phi_plus);

  double best = ascend(ch, phi_plus, dims, options.max_iterations);
  best = std::max(best, result.choi_trace_norm);
  for (std::size_t s = 0; s < options.random_starts; ++s) {
    rng::Stream stream(options.seed, "diamond_start", s);
    best = std::max(best, ascend(ch, rng::haar_vector(d * d, stream), dims, options.max_iterations));
  }

  result.lower.value = std::clamp(best, 0.0, 2.0);
  result.lower.metric = Metric::DiamondEstimate;
  result.lower.method = Method::StateSweep;
  result.lower.bound_kind = BoundKind::LowerEstimate;
  result.lower.samples = options.random_starts + 1;
  result.lower.outcome_label = "channel";

  result.upper.value = std::min(2.0, d * result.choi_trace_norm);
  result.upper.metric = Metric::DiamondEstimate;
  result.upper.method = Method::ChoiExact;
  result.upper.bound_kind = BoundKind::RigorousUpper;
  result.upper.samples = 1;
  result.upper.outcome_label = "channel";
  return result;
}

EpsilonBudget compose_epsilons(const std::vector<double>& per_round) {
  EpsilonBudget b;
  b.per_round = per_round;
  for (double e : per_round) {
    if (!(e >= 0.0)) {
      std::ostringstream os;
      os << "per-round epsilon " << e << " is negative";
      throw Error(ErrorKind::InvalidEpsilon, os.str());
    }
    b.total += e;
  }
  return b;
}

VisibilityEstimate visibility_to_epsilon(double v_dec, double v_0) {
  if (v_0 == 0.0) throw Error(ErrorKind::DegenerateCalibration, "reference visibility is zero");
  if (!(v_0 > 0.0 && v_0 <= 1.0)) throw Error(ErrorKind::InvalidParameter, "reference visibility must lie in (0, 1]");
  if (v_dec < 0.0) throw Error(ErrorKind::InvalidParameter, "decisive visibility is negative");
  if (v_dec > v_0) throw Error(ErrorKind::VisibilityOrderError, "decisive visibility exceeds the reference");
  const double lambda = v_dec / v_0;
  return {lambda, 1.0 - lambda, false};
}

double interferometer_visibility(const Channel& arm_noise, int phase_steps) {
  if (arm_noise.dim() != 2) throw Error(ErrorKind::DimensionError, "arm noise must act on the path qubit");
  if (phase_steps < 2) throw Error(ErrorKind::InvalidParameter, "need at least two phase settings");
  double lo = 1.0;
  double hi = 0.0;
  const auto path = QuantumState::qubit("path", 1.0, 0.0);
  for (int k = 0; k < phase_steps; ++k) {
    const double phi = 2.0 * M_PI * k / phase_steps;
    auto s = qcore::apply_unitary(path, gates::hadamard(), {"path"});
    s = qcore::apply_unitary(s, gates::phase(phi), {"path"});
    s = qcore::apply_channel(s, arm_noise, {"path"});
    s = qcore::apply_unitary(s, gates::hadamard(), {"path"});
    const double p0 = s.density()(0, 0).real();
    lo = std::min(lo, p0);
    hi = std::max(hi, p0);
  }
  return (hi - lo) / (hi + lo);
}

double gentle_stability_bound(double epsilon, double delta, double k1, double k2) {
  if (epsilon < 0.0 || delta < 0.0) throw Error(ErrorKind::InvalidParameter, "epsilon and delta must be nonnegative");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error(ErrorKind::InvalidParameter, "K1 and K2 must be positive");
  return k1 * epsilon + k2 * std::sqrt(delta);
}

ZenoPoint zeno_point(int n, const ZenoModel& model) {
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "cycle count must be >= 1");
  if (model.loss < 0.0 || model.loss >= 1.0) throw Error(ErrorKind::InvalidParameter, "loss must lie in [0, 1)");
  if (!(model.absorption > 0.0 && model.absorption <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "absorption must lie in (0, 1]");
  }
  ZenoPoint pt;
  pt.n = n;
  pt.theta = M_PI / (2.0 * n);
  const double c = std::cos(pt.theta);
  const double s = std::sin(pt.theta);
  const double transmit = -std::sqrt(1.0 - model.absorption);
  const double keep = std::sqrt(1.0 - model.loss);
  double free_arm = 1.0;
  double probed_arm = 0.0;
  for (int k = 0; k < n; ++k) {
    const double f = c * free_arm - s * probed_arm;
    const double p = s * free_arm + c * probed_arm;
    pt.dose += model.absorption * p * p;
    free_arm = f;
    probed_arm = transmit * p;
    pt.lost += model.loss * (free_arm * free_arm + probed_arm * probed_arm);
    free_arm *= keep;
    probed_arm *= keep;
  }
  pt.dark = free_arm * free_arm;
  pt.bright = probed_arm * probed_arm;
  const double detected = pt.dark + pt.bright;
  pt.success = detected > 0.0 ? pt.dark / detected : 0.0;
  return pt;
}

std::vector<ZenoPoint> zeno_sweep(const std::vector<int>& n_values, double loss, double absorption) {
  std::vector<ZenoPoint> out;
  out.reserve(n_values.size());
  for (int n : n_values) out.push_back(zeno_point(n, {absorption, loss}));
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidParameter, "slope fit needs two or more paired points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::InvalidParameter, "log-log fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorKind::InvalidParameter, "degenerate abscissae in slope fit");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace cflab::eps
