#include "cflab/gates.hpp"

#include <cmath>

namespace cflab::gates {

namespace {
const Complex kI{0.0, 1.0};
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

Matrix hadamard() {
  Matrix h(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  return h;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

Matrix phase_s() { return phase(M_PI / 2.0); }
Matrix phase_s_dag() { return phase(-M_PI / 2.0); }

Matrix phase(double phi) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = std::polar(1.0, phi);
  return m;
}

Matrix mixing(double theta) {
  Matrix m(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  m << c, -s, s, c;
  return m;
}

Matrix rz(double theta) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -theta / 2.0);
  m(1, 1) = std::polar(1.0, theta / 2.0);
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix kron(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

Matrix controlled(const Matrix& u) { return level_controlled(2, 1, u); }

Matrix level_projector(int dim, int level) {
  Matrix p = Matrix::Zero(dim, dim);
  p(level, level) = 1.0;
  return p;
}

Matrix level_controlled(int dim, int level, const Matrix& u) {
  const auto d = static_cast<int>(u.rows());
  const Matrix p = level_projector(dim, level);
  return kron(identity(dim) - p, identity(d)) + kron(p, u);
}

Matrix cz() { return controlled(pauli_z()); }
Matrix cnot() { return controlled(pauli_x()); }

Vector ket(int dim, int index) {
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

Matrix outer(const Vector& a, const Vector& b) { return a * b.adjoint(); }

}  // namespace cflab::gates
