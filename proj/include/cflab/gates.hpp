#pragma once

#include <vector>

#include "cflab/qcore.hpp"

namespace cflab::gates {

using qcore::Complex;
using qcore::Matrix;
using qcore::Vector;

Matrix identity(int dim);
Matrix hadamard();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix phase_s();      // diag(1, i)
Matrix phase_s_dag();  // diag(1, -i)
Matrix phase(double phi);
// Real rotation [[cos t, -sin t], [sin t, cos t]] mixing two modes.
Matrix mixing(double theta);
Matrix rz(double theta);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix kron(const std::vector<Matrix>& factors);

// |0><0| (x) I + |1><1| (x) u; the control is the first (most significant) factor.
Matrix controlled(const Matrix& u);
// |v><v| on a qudit computational level.
Matrix level_projector(int dim, int level);
// I - P + P (x) u style coupling: u acts on the second factor only when the
// `dim`-level control sits on `level`.
Matrix level_controlled(int dim, int level, const Matrix& u);

Matrix cz();
Matrix cnot();

Vector ket(int dim, int index);
Matrix outer(const Vector& a, const Vector& b);

}  // namespace cflab::gates
