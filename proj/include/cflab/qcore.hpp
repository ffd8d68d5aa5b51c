#pragma once

// Dense linear-algebra engine for small labelled quantum registers.
//
// States carry an ordered list of labelled subsystems; amplitude and density
// indices are row-major over that list (the first label is the most
// significant digit). Everything here is value-semantic and free of shared
// mutable state.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cflab/error.hpp"

namespace cflab::qcore {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
inline constexpr double kValidity = 1e-10;  // unitarity, completeness, PSD slack
inline constexpr double kEquality = 1e-12;  // normalization and trace checks
inline constexpr double kNullProbability = 1e-14;
}  // namespace tol

struct Subsystem {
  std::string label;
  int dim = 2;

  bool operator==(const Subsystem&) const = default;
};

using Layout = std::vector<Subsystem>;

class QuantumState {
 public:
  // Validates the pure-state norm (1e-12).
  static QuantumState pure(Layout layout, Vector amplitudes);
  // Validates Hermiticity and unit trace (1e-12) and eigenvalues >= -1e-10.
  static QuantumState mixed(Layout layout, Matrix rho);
  // Product computational-basis state, one digit per subsystem.
  static QuantumState basis(Layout layout, const std::vector<int>& digits);
  // Single-qubit pure state a|0> + b|1>.
  static QuantumState qubit(std::string label, Complex a, Complex b);

  bool is_pure() const noexcept { return std::holds_alternative<Vector>(data_); }
  const Layout& layout() const noexcept { return layout_; }
  std::vector<std::string> labels() const;
  std::vector<int> dims() const;
  int dimension() const;

  const Vector& amplitudes() const;  // RepresentationMismatch when mixed
  const Matrix& density() const;     // RepresentationMismatch when pure
  Matrix density_matrix() const;     // works for either representation
  QuantumState to_mixed() const;

  std::size_t position(const std::string& label) const;  // UnknownSubsystem

 private:
  QuantumState(Layout layout, std::variant<Vector, Matrix> data)
      : layout_(std::move(layout)), data_(std::move(data)) {}

  Layout layout_;
  std::variant<Vector, Matrix> data_;
};

class Unitary {
 public:
  explicit Unitary(Matrix m);  // InvalidOperator unless U^dagger U = I within 1e-10
  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  Matrix m_;
};

class Channel {
 public:
  explicit Channel(std::vector<Matrix> kraus);  // trace preserving within 1e-10
  const std::vector<Matrix>& kraus() const noexcept { return kraus_; }
  Eigen::Index dim() const noexcept { return kraus_.front().rows(); }

 private:
  std::vector<Matrix> kraus_;
};

struct InstrumentOutcome {
  std::string label;
  std::vector<Matrix> kraus;
};

class Instrument {
 public:
  // All Kraus operators square and equal-sized; sum over outcomes of K^dagger K
  // equals I within 1e-10; labels unique.
  explicit Instrument(std::vector<InstrumentOutcome> outcomes);

  const std::vector<InstrumentOutcome>& outcomes() const noexcept { return outcomes_; }
  const InstrumentOutcome& outcome(const std::string& label) const;  // UnknownOutcome
  bool has_outcome(const std::string& label) const;
  Eigen::Index dim() const noexcept { return outcomes_.front().kraus.front().rows(); }
  // Completeness residual max |sum K^dagger K - I|.
  double completeness_residual() const;

 private:
  std::vector<InstrumentOutcome> outcomes_;
};

struct OutcomeBranch {
  std::string label;
  double probability = 0.0;
  std::optional<QuantumState> post_state;  // empty when probability < 1e-14
};

QuantumState tensor(std::span<const QuantumState> states);
QuantumState tensor(const QuantumState& a, const QuantumState& b);

QuantumState apply_unitary(const QuantumState& state, const Unitary& u,
                           const std::vector<std::string>& targets);
QuantumState apply_unitary(const QuantumState& state, const Matrix& u,
                           const std::vector<std::string>& targets);
QuantumState apply_channel(const QuantumState& state, const Channel& ch,
                           const std::vector<std::string>& targets);

// Kept subsystems retain their original relative order.
QuantumState partial_trace(const QuantumState& state, const std::vector<std::string>& keep);

std::vector<OutcomeBranch> apply_instrument(const QuantumState& state, const Instrument& inst,
                                            const std::vector<std::string>& targets);

// Unnormalized image sum_k K rho K^dagger of one outcome, as a density matrix
// over the full layout.
Matrix apply_outcome_unnormalized(const QuantumState& state, const InstrumentOutcome& outcome,
                                  const std::vector<std::string>& targets);

double expectation(const QuantumState& state, const Matrix& observable,
                   const std::vector<std::string>& targets);

double trace_norm(const Matrix& m);
double trace_distance(const QuantumState& a, const QuantumState& b);
// Root fidelity ||sqrt(rho) sqrt(sigma)||_1.
double fidelity(const QuantumState& a, const QuantumState& b);

struct FvdgBounds {
  double lower = 0.0;  // 1 - F
  double trace = 0.0;  // T
  double upper = 0.0;  // sqrt(1 - F^2)
};
// Throws NumericalValidation if the sandwich fails by more than 1e-9.
FvdgBounds fvdg_bounds(const QuantumState& a, const QuantumState& b);

// Low-level helpers shared by the other modules.
namespace detail {

// Applies `op` to the target digits of every column of `columns`, in place.
void apply_local(Matrix& columns, const Matrix& op, const std::vector<int>& dims,
                 const std::vector<std::size_t>& positions);
Matrix conjugate_local(const Matrix& rho, const Matrix& op, const std::vector<int>& dims,
                       const std::vector<std::size_t>& positions);
Matrix partial_trace_matrix(const Matrix& rho, const std::vector<int>& dims,
                            const std::vector<std::size_t>& keep_positions);
std::vector<std::size_t> resolve_targets(const QuantumState& state,
                                         const std::vector<std::string>& targets,
                                         Eigen::Index op_dim);
Matrix matrix_sqrt_psd(const Matrix& m);

}  // namespace detail

}  // namespace cflab::qcore
