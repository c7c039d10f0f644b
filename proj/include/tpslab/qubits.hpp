#pragma once

#include <array>
#include <string>
#include <vector>

#include "tpslab/tps.hpp"

namespace tpslab::qubits {

enum class Pauli { I, X, Y, Z };

Matrix pauli(Pauli p);

/// coefficient * (P_0 (x) P_1 (x) ...), qubit 0 most significant.
struct PauliWord {
  std::vector<Pauli> factors;
  double coefficient = 1.0;

  /// Parses e.g. "ZZ", "XI", "IYZ".
  static PauliWord parse(const std::string& word, double coefficient = 1.0);
  OperatorMatrix matrix() const;
};

/// |+,+>, |+,->, |-,+>, |-,-> with |+,+-> = (|00> +- |11>)/sqrt2 and
/// |-,+-> = (|01> +- |10>)/sqrt2.
std::vector<StateVector> bell_basis();

/// Computational-basis states |00>, |01>, |10>, |11>.
std::vector<StateVector> computational_basis();

TensorProductStructure ab_tps();
/// TPS induced by the P and Q algebras. The adapted basis is the Bell basis
/// with |-,-> negated; factor P carries the zz label chi, factor Q the xx
/// label xi, with eigenvalue +1 at index 0.
TensorProductStructure pq_tps();

/// The two spanning sets of the P and Q observable algebras.
std::array<OperatorMatrix, 4> p_algebra();
std::array<OperatorMatrix, 4> q_algebra();

/// Label tuple per basis vector (eigenvalue of each op, in op order).
using LabelTable = std::vector<std::vector<double>>;

inline constexpr double kCscoTol = 1e-10;

/// Throws NonCommuting, InvalidArgument (not an eigenvector) or
/// DegenerateLabels.
LabelTable csco_check(const std::vector<StateVector>& basis, const std::vector<OperatorMatrix>& ops);

/// Single-qubit exp(-i angle/2 n.sigma).
Matrix spin_half_rotation(const std::array<double, 3>& axis, double angle);

/// exp(-i angle/2 n.(sigma (x) 1 + 1 (x) sigma)) on two qubits.
OperatorMatrix rotation_rep(const std::array<double, 3>& axis, double angle);

/// Total spin generators sigma^i (x) 1 + 1 (x) sigma^i.
std::vector<OperatorMatrix> rotation_generators();

/// Rotations by {pi/7, pi/3, 1 rad} about x, y and z, plus the generators.
SymmetryRep sampled_rotation_rep();

}  // namespace tpslab::qubits
