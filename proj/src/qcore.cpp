#include "cflab/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cflab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RepresentationMismatch: return "RepresentationMismatch";
    case ErrorKind::UnknownSubsystem: return "UnknownSubsystem";
    case ErrorKind::DuplicateSubsystem: return "DuplicateSubsystem";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::EmptyKeepSet: return "EmptyKeepSet";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::InvalidOperator: return "InvalidOperator";
    case ErrorKind::UnknownOutcome: return "UnknownOutcome";
    case ErrorKind::NoDecisiveEvents: return "NoDecisiveEvents";
    case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::VisibilityOrderError: return "VisibilityOrderError";
    case ErrorKind::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorKind::ABLUndefined: return "ABLUndefined";
    case ErrorKind::PostselectionImpossible: return "PostselectionImpossible";
    case ErrorKind::CoefficientMismatch: return "CoefficientMismatch";
    case ErrorKind::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::NumericalValidation: return "NumericalValidation";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cflab

namespace cflab::qcore {

namespace {

int product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

void check_layout(const Layout& layout) {
  std::set<std::string> seen;
  for (const auto& s : layout) {
    if (s.dim < 1) throw Error(ErrorKind::DimensionError, "subsystem '" + s.label + "' has dim < 1");
    if (!seen.insert(s.label).second) {
      throw Error(ErrorKind::DuplicateSubsystem, "label '" + s.label + "' appears twice");
    }
  }
}

int layout_dim(const Layout& layout) {
  int d = 1;
  for (const auto& s : layout) d *= s.dim;
  return d;
}

std::vector<int> layout_dims(const Layout& layout) {
  std::vector<int> dims;
  dims.reserve(layout.size());
  for (const auto& s : layout) dims.push_back(s.dim);
  return dims;
}

std::vector<std::size_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];
  return strides;
}

// Offsets of every local index of the digits at `positions` (row-major over
// positions in the given order), and base offsets of every assignment to the
// remaining digits.
struct IndexPlan {
  std::vector<std::size_t> local;
  std::vector<std::size_t> rest;
};

IndexPlan plan_indices(const std::vector<int>& dims, const std::vector<std::size_t>& positions) {
  const auto strides = strides_of(dims);
  IndexPlan plan;
  std::size_t local_dim = 1;
  for (auto p : positions) local_dim *= dims[p];
  plan.local.assign(local_dim, 0);
  for (std::size_t l = 0; l < local_dim; ++l) {
    std::size_t rem = l;
    std::size_t off = 0;
    for (std::size_t k = positions.size(); k-- > 0;) {
      const auto p = positions[k];
      off += (rem % dims[p]) * strides[p];
      rem /= dims[p];
    }
    plan.local[l] = off;
  }
  std::vector<bool> is_target(dims.size(), false);
  for (auto p : positions) is_target[p] = true;
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (!is_target[i]) others.push_back(i);
  std::size_t rest_dim = 1;
  for (auto p : others) rest_dim *= dims[p];
  plan.rest.assign(rest_dim, 0);
  for (std::size_t r = 0; r < rest_dim; ++r) {
    std::size_t rem = r;
    std::size_t off = 0;
    for (std::size_t k = others.size(); k-- > 0;) {
      const auto p = others[k];
      off += (rem % dims[p]) * strides[p];
      rem /= dims[p];
    }
    plan.rest[r] = off;
  }
  return plan;
}

bool is_hermitian(const Matrix& m, double tolerance) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

// --- QuantumState ---------------------------------------------------------

QuantumState QuantumState::pure(Layout layout, Vector amplitudes) {
  check_layout(layout);
  if (amplitudes.size() != layout_dim(layout)) {
    throw Error(ErrorKind::DimensionError, "amplitude vector length does not match layout");
  }
  const double n2 = amplitudes.squaredNorm();
  if (std::abs(n2 - 1.0) > tol::kEquality) {
    std::ostringstream os;
    os << "pure state squared norm " << n2 << " differs from 1";
    throw Error(ErrorKind::InvalidState, os.str());
  }
  return QuantumState(std::move(layout), std::move(amplitudes));
}

QuantumState QuantumState::mixed(Layout layout, Matrix rho) {
  check_layout(layout);
  const int d = layout_dim(layout);
  if (rho.rows() != d || rho.cols() != d) {
    throw Error(ErrorKind::DimensionError, "density matrix shape does not match layout");
  }
  if (!is_hermitian(rho, tol::kEquality)) {
    throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian");
  }
  rho = hermitian_part(rho);
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tol::kEquality) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1";
    throw Error(ErrorKind::InvalidState, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::kValidity) {
    throw Error(ErrorKind::InvalidState, "density matrix has a negative eigenvalue");
  }
  return QuantumState(std::move(layout), std::move(rho));
}

QuantumState QuantumState::basis(Layout layout, const std::vector<int>& digits) {
  if (digits.size() != layout.size()) {
    throw Error(ErrorKind::DimensionError, "one digit per subsystem required");
  }
  const auto dims = layout_dims(layout);
  std::size_t index = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= dims[i]) {
      throw Error(ErrorKind::DimensionError, "basis digit out of range");
    }
    index = index * dims[i] + digits[i];
  }
  Vector v = Vector::Zero(product(dims));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return pure(std::move(layout), std::move(v));
}

QuantumState QuantumState::qubit(std::string label, Complex a, Complex b) {
  Vector v(2);
  v << a, b;
  return pure({{std::move(label), 2}}, std::move(v));
}

std::vector<std::string> QuantumState::labels() const {
  std::vector<std::string> out;
  out.reserve(layout_.size());
  for (const auto& s : layout_) out.push_back(s.label);
  return out;
}

std::vector<int> QuantumState::dims() const { return layout_dims(layout_); }

int QuantumState::dimension() const { return layout_dim(layout_); }

const Vector& QuantumState::amplitudes() const {
  if (!is_pure()) throw Error(ErrorKind::RepresentationMismatch, "state is mixed");
  return std::get<Vector>(data_);
}

const Matrix& QuantumState::density() const {
  if (is_pure()) throw Error(ErrorKind::RepresentationMismatch, "state is pure");
  return std::get<Matrix>(data_);
}

Matrix QuantumState::density_matrix() const {
  if (is_pure()) {
    const auto& v = std::get<Vector>(data_);
    return v * v.adjoint();
  }
  return std::get<Matrix>(data_);
}

QuantumState QuantumState::to_mixed() const {
  return QuantumState(layout_, density_matrix());
}

std::size_t QuantumState::position(const std::string& label) const {
  for (std::size_t i = 0; i < layout_.size(); ++i)
    if (layout_[i].label == label) return i;
  throw Error(ErrorKind::UnknownSubsystem, "no subsystem labelled '" + label + "'");
}

// --- operators ------------------------------------------------------------

Unitary::Unitary(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw Error(ErrorKind::DimensionError, "unitary must be square and non-empty");
  }
  const Matrix residual = m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols());
  if (residual.cwiseAbs().maxCoeff() > tol::kValidity) {
    throw Error(ErrorKind::InvalidOperator, "matrix is not unitary within 1e-10");
  }
}

Channel::Channel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw Error(ErrorKind::InvalidOperator, "channel needs at least one Kraus operator");
  const auto d = kraus_.front().rows();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& k : kraus_) {
    if (k.rows() != d || k.cols() != d) {
      throw Error(ErrorKind::DimensionError, "Kraus operators must be square and equal-sized");
    }
    sum += k.adjoint() * k;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol::kValidity) {
    throw Error(ErrorKind::InvalidOperator, "Kraus operators are not trace preserving within 1e-10");
  }
}

Instrument::Instrument(std::vector<InstrumentOutcome> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty() || outcomes_.front().kraus.empty()) {
    throw Error(ErrorKind::InvalidOperator, "instrument needs at least one outcome with a Kraus operator");
  }
  const auto d = outcomes_.front().kraus.front().rows();
  std::set<std::string> labels;
  for (const auto& o : outcomes_) {
    if (!labels.insert(o.label).second) {
      throw Error(ErrorKind::InvalidOperator, "duplicate outcome label '" + o.label + "'");
    }
    if (o.kraus.empty()) throw Error(ErrorKind::InvalidOperator, "outcome '" + o.label + "' has no Kraus operator");
    for (const auto& k : o.kraus) {
      if (k.rows() != d || k.cols() != d) {
        throw Error(ErrorKind::DimensionError, "instrument Kraus operators must be square and equal-sized");
      }
    }
  }
  if (completeness_residual() > tol::kValidity) {
    throw Error(ErrorKind::InvalidOperator, "instrument is not trace preserving within 1e-10");
  }
}

double Instrument::completeness_residual() const {
  const auto d = dim();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& o : outcomes_)
    for (const auto& k : o.kraus) sum += k.adjoint() * k;
  return (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

const InstrumentOutcome& Instrument::outcome(const std::string& label) const {
  for (const auto& o : outcomes_)
    if (o.label == label) return o;
  throw Error(ErrorKind::UnknownOutcome, "instrument has no outcome '" + label + "'");
}

bool Instrument::has_outcome(const std::string& label) const {
  return std::any_of(outcomes_.begin(), outcomes_.end(),
                     [&](const auto& o) { return o.label == label; });
}

// --- detail ---------------------------------------------------------------

namespace detail {

void apply_local(Matrix& columns, const Matrix& op, const std::vector<int>& dims,
                 const std::vector<std::size_t>& positions) {
  const auto plan = plan_indices(dims, positions);
  const auto l = static_cast<Eigen::Index>(plan.local.size());
  Vector buffer(l);
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    for (auto base : plan.rest) {
      for (Eigen::Index i = 0; i < l; ++i) buffer(i) = columns(base + plan.local[i], c);
      const Vector out = op * buffer;
      for (Eigen::Index i = 0; i < l; ++i) columns(base + plan.local[i], c) = out(i);
    }
  }
}

Matrix conjugate_local(const Matrix& rho, const Matrix& op, const std::vector<int>& dims,
                       const std::vector<std::size_t>& positions) {
  Matrix left = rho;
  apply_local(left, op, dims, positions);
  Matrix right = left.adjoint();
  apply_local(right, op, dims, positions);
  return right.adjoint();
}

Matrix partial_trace_matrix(const Matrix& rho, const std::vector<int>& dims,
                            const std::vector<std::size_t>& keep_positions) {
  const auto plan = plan_indices(dims, keep_positions);
  const auto dk = static_cast<Eigen::Index>(plan.local.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a) {
    for (Eigen::Index b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (auto t : plan.rest) acc += rho(plan.local[a] + t, plan.local[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

std::vector<std::size_t> resolve_targets(const QuantumState& state,
                                         const std::vector<std::string>& targets,
                                         Eigen::Index op_dim) {
  if (targets.empty()) throw Error(ErrorKind::UnknownSubsystem, "no target subsystems given");
  std::vector<std::size_t> positions;
  std::set<std::size_t> seen;
  Eigen::Index d = 1;
  for (const auto& t : targets) {
    const auto p = state.position(t);
    if (!seen.insert(p).second) throw Error(ErrorKind::DuplicateSubsystem, "target '" + t + "' repeated");
    positions.push_back(p);
    d *= state.layout()[p].dim;
  }
  if (d != op_dim) {
    std::ostringstream os;
    os << "operator dimension " << op_dim << " does not match target dimension " << d;
    throw Error(ErrorKind::DimensionError, os.str());
  }
  return positions;
}

Matrix matrix_sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// --- operations -----------------------------------------------------------

QuantumState tensor(std::span<const QuantumState> states) {
  if (states.empty()) throw Error(ErrorKind::DimensionError, "tensor of an empty list");
  const bool pure = states.front().is_pure();
  Layout layout;
  for (const auto& s : states) {
    if (s.is_pure() != pure) {
      throw Error(ErrorKind::RepresentationMismatch, "cannot tensor pure with mixed states");
    }
    layout.insert(layout.end(), s.layout().begin(), s.layout().end());
  }
  if (pure) {
    Vector v = states.front().amplitudes();
    for (std::size_t i = 1; i < states.size(); ++i) {
      const auto& w = states[i].amplitudes();
      Vector next(v.size() * w.size());
      for (Eigen::Index a = 0; a < v.size(); ++a) next.segment(a * w.size(), w.size()) = v(a) * w;
      v = std::move(next);
    }
    return QuantumState::pure(std::move(layout), std::move(v));
  }
  Matrix m = states.front().density();
  for (std::size_t i = 1; i < states.size(); ++i) {
    const auto& w = states[i].density();
    Matrix next(m.rows() * w.rows(), m.cols() * w.cols());
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b)
        next.block(a * w.rows(), b * w.cols(), w.rows(), w.cols()) = m(a, b) * w;
    m = std::move(next);
  }
  return QuantumState::mixed(std::move(layout), std::move(m));
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
  const std::vector<QuantumState> both{a, b};
  return tensor(both);
}

QuantumState apply_unitary(const QuantumState& state, const Unitary& u,
                           const std::vector<std::string>& targets) {
  return apply_unitary(state, u.matrix(), targets);
}

QuantumState apply_unitary(const QuantumState& state, const Matrix& u,
                           const std::vector<std::string>& targets) {
  const auto positions = detail::resolve_targets(state, targets, u.rows());
  const auto dims = state.dims();
  if (state.is_pure()) {
    Matrix col = state.amplitudes();
    detail::apply_local(col, u, dims, positions);
    Vector v = col.col(0);
    // Renormalize away rounding drift so long gate sequences stay valid.
    v /= v.norm();
    return QuantumState::pure(state.layout(), std::move(v));
  }
  Matrix rho = detail::conjugate_local(state.density(), u, dims, positions);
  rho /= rho.trace().real();
  return QuantumState::mixed(state.layout(), hermitian_part(rho));
}

QuantumState apply_channel(const QuantumState& state, const Channel& ch,
                           const std::vector<std::string>& targets) {
  const auto positions = detail::resolve_targets(state, targets, ch.dim());
  const auto dims = state.dims();
  const Matrix rho = state.density_matrix();
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus()) out += detail::conjugate_local(rho, k, dims, positions);
  out = hermitian_part(out);
  out /= out.trace().real();
  return QuantumState::mixed(state.layout(), std::move(out));
}

QuantumState partial_trace(const QuantumState& state, const std::vector<std::string>& keep) {
  if (keep.empty()) throw Error(ErrorKind::EmptyKeepSet, "keep set is empty");
  std::vector<std::size_t> positions;
  for (const auto& k : keep) positions.push_back(state.position(k));
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  Layout kept;
  for (auto p : positions) kept.push_back(state.layout()[p]);
  const auto dims = state.dims();
  Matrix reduced;
  if (state.is_pure()) {
    // rho_keep = Psi Psi^dagger with Psi[kept][traced].
    const auto plan = plan_indices(dims, positions);
    const auto& v = state.amplitudes();
    Matrix psi(static_cast<Eigen::Index>(plan.local.size()), static_cast<Eigen::Index>(plan.rest.size()));
    for (std::size_t a = 0; a < plan.local.size(); ++a)
      for (std::size_t t = 0; t < plan.rest.size(); ++t)
        psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = v(plan.local[a] + plan.rest[t]);
    reduced = psi * psi.adjoint();
  } else {
    reduced = detail::partial_trace_matrix(state.density(), dims, positions);
  }
  reduced = hermitian_part(reduced);
  return QuantumState::mixed(std::move(kept), std::move(reduced));
}

Matrix apply_outcome_unnormalized(const QuantumState& state, const InstrumentOutcome& outcome,
                                  const std::vector<std::string>& targets) {
  const auto positions = detail::resolve_targets(state, targets, outcome.kraus.front().rows());
  const auto dims = state.dims();
  if (state.is_pure()) {
    Matrix out = Matrix::Zero(state.dimension(), state.dimension());
    for (const auto& k : outcome.kraus) {
      Matrix col = state.amplitudes();
      detail::apply_local(col, k, dims, positions);
      out += col * col.adjoint();
    }
    return out;
  }
  Matrix out = Matrix::Zero(state.dimension(), state.dimension());
  for (const auto& k : outcome.kraus) out += detail::conjugate_local(state.density(), k, dims, positions);
  return hermitian_part(out);
}

std::vector<OutcomeBranch> apply_instrument(const QuantumState& state, const Instrument& inst,
                                            const std::vector<std::string>& targets) {
  const auto positions = detail::resolve_targets(state, targets, inst.dim());
  const auto dims = state.dims();
  std::vector<OutcomeBranch> branches;
  branches.reserve(inst.outcomes().size());
  for (const auto& o : inst.outcomes()) {
    OutcomeBranch br;
    br.label = o.label;
    if (state.is_pure() && o.kraus.size() == 1) {
      Matrix col = state.amplitudes();
      detail::apply_local(col, o.kraus.front(), dims, positions);
      const double p = col.col(0).squaredNorm();
      br.probability = p;
      if (p >= tol::kNullProbability) {
        Vector v = col.col(0) / std::sqrt(p);
        v /= v.norm();
        br.post_state = QuantumState::pure(state.layout(), std::move(v));
      }
    } else {
      Matrix rho = apply_outcome_unnormalized(state, o, targets);
      const double p = rho.trace().real();
      br.probability = p;
      if (p >= tol::kNullProbability) {
        rho /= p;
        rho /= rho.trace().real();
        br.post_state = QuantumState::mixed(state.layout(), std::move(rho));
      }
    }
    branches.push_back(std::move(br));
  }
  return branches;
}

double expectation(const QuantumState& state, const Matrix& observable,
                   const std::vector<std::string>& targets) {
  const auto positions = detail::resolve_targets(state, targets, observable.rows());
  const auto dims = state.dims();
  if (state.is_pure()) {
    Matrix col = state.amplitudes();
    detail::apply_local(col, observable, dims, positions);
    return state.amplitudes().dot(col.col(0)).real();
  }
  Matrix rho = state.density();
  detail::apply_local(rho, observable, dims, positions);
  return rho.trace().real();
}

double trace_norm(const Matrix& m) {
  if (is_hermitian(m, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double trace_distance(const QuantumState& a, const QuantumState& b) {
  if (a.dims() != b.dims()) throw Error(ErrorKind::DimensionError, "states have different dimensions");
  return std::clamp(0.5 * trace_norm(a.density_matrix() - b.density_matrix()), 0.0, 1.0);
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dims() != b.dims()) throw Error(ErrorKind::DimensionError, "states have different dimensions");
  double f = 0.0;
  if (a.is_pure() && b.is_pure()) {
    f = std::abs(a.amplitudes().dot(b.amplitudes()));
  } else if (a.is_pure()) {
    f = std::sqrt(std::max(0.0, a.amplitudes().dot(b.density() * a.amplitudes()).real()));
  } else if (b.is_pure()) {
    f = std::sqrt(std::max(0.0, b.amplitudes().dot(a.density() * b.amplitudes()).real()));
  } else {
    const Matrix sa = detail::matrix_sqrt_psd(a.density());
    const Matrix inner = sa * b.density() * sa;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(inner), Eigen::EigenvaluesOnly);
    f = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  }
  return std::clamp(f, 0.0, 1.0);
}

FvdgBounds fvdg_bounds(const QuantumState& a, const QuantumState& b) {
  const double f = fidelity(a, b);
  FvdgBounds out{1.0 - f, trace_distance(a, b), std::sqrt(std::max(0.0, 1.0 - f * f))};
  if (out.lower > out.trace + 1e-9 || out.trace > out.upper + 1e-9) {
    std::ostringstream os;
    os << "Fuchs-van de Graaf sandwich violated: " << out.lower << " <= " << out.trace
       << " <= " << out.upper;
    throw Error(ErrorKind::NumericalValidation, os.str());
  }
  return out;
}

}  // namespace cflab::qcore
