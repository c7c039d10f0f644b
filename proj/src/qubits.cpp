#include "tpslab/qubits.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tpslab::qubits {

namespace {

const Dims kTwoQubits{2, 2};

StateVector two_qubit(Complex a00, Complex a01, Complex a10, Complex a11) {
  Vector v(4);
  v << a00, a01, a10, a11;
  return StateVector(std::move(v), kTwoQubits);
}

OperatorMatrix word(const char* w) { return PauliWord::parse(w).matrix(); }

}  // namespace

Matrix pauli(Pauli p) {
  Matrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

PauliWord PauliWord::parse(const std::string& w, double coefficient) {
  if (w.empty()) throw Error(ErrorKind::InvalidArgument, "empty Pauli word");
  PauliWord pw;
  pw.coefficient = coefficient;
  for (char c : w) {
    switch (c) {
      case 'I': pw.factors.push_back(Pauli::I); break;
      case 'X': pw.factors.push_back(Pauli::X); break;
      case 'Y': pw.factors.push_back(Pauli::Y); break;
      case 'Z': pw.factors.push_back(Pauli::Z); break;
      default: throw Error(ErrorKind::InvalidArgument, std::string("invalid Pauli letter '") + c + "'");
    }
  }
  return pw;
}

OperatorMatrix PauliWord::matrix() const {
  if (factors.empty()) throw Error(ErrorKind::InvalidArgument, "empty Pauli word");
  Matrix m = pauli(factors.front());
  for (std::size_t k = 1; k < factors.size(); ++k) m = kron(m, pauli(factors[k]));
  m *= coefficient;
  return OperatorMatrix::hermitian(std::move(m), Dims(factors.size(), 2));
}

std::vector<StateVector> bell_basis() {
  const double r = 1.0 / std::numbers::sqrt2;
  return {
      two_qubit(r, 0, 0, r),   // |+,+>
      two_qubit(r, 0, 0, -r),  // |+,->
      two_qubit(0, r, r, 0),   // |-,+>
      two_qubit(0, r, -r, 0),  // |-,->
  };
}

std::vector<StateVector> computational_basis() {
  std::vector<StateVector> out;
  for (std::size_t k = 0; k < 4; ++k) out.push_back(StateVector::basis_state(kTwoQubits, k));
  return out;
}

TensorProductStructure ab_tps() { return TensorProductStructure::standard(kTwoQubits, "AB"); }

TensorProductStructure pq_tps() {
  // With |-,-> negated, XI, YZ, ZZ act on P alone and IZ, XY, XX on Q alone.
  auto basis = bell_basis();
  basis[3] = StateVector(-basis[3].amplitudes(), kTwoQubits);
  return tps_from_basis(basis, kTwoQubits, "PQ");
}

std::array<OperatorMatrix, 4> p_algebra() { return {word("II"), word("XI"), word("YZ"), word("ZZ")}; }

std::array<OperatorMatrix, 4> q_algebra() { return {word("II"), word("IZ"), word("XY"), word("XX")}; }

LabelTable csco_check(const std::vector<StateVector>& basis, const std::vector<OperatorMatrix>& ops) {
  if (ops.empty()) throw Error(ErrorKind::InvalidArgument, "CSCO is empty");
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      const Matrix comm = ops[i].entries() * ops[j].entries() - ops[j].entries() * ops[i].entries();
      if (!(comm.norm() <= kCscoTol)) {
        std::ostringstream os;
        os << "CSCO operators " << i << " and " << j << " do not commute (||[A,B]|| = " << comm.norm() << ")";
        throw Error(ErrorKind::NonCommuting, os.str());
      }
    }

  LabelTable table;
  for (std::size_t v = 0; v < basis.size(); ++v) {
    std::vector<double> labels;
    const auto& x = basis[v].amplitudes();
    for (std::size_t k = 0; k < ops.size(); ++k) {
      if (ops[k].size() != basis[v].size()) throw Error(ErrorKind::DimensionMismatch, "CSCO operator and basis dimensions differ");
      const Vector ox = ops[k].entries() * x;
      const Complex lambda = x.dot(ox);  // <x|O|x>
      const double residual = (ox - lambda * x).norm();
      if (!(residual <= kCscoTol)) {
        std::ostringstream os;
        os << "basis vector " << v << " is not an eigenvector of operator " << k << " (residual " << residual << ")";
        throw Error(ErrorKind::InvalidArgument, os.str());
      }
      labels.push_back(lambda.real());
    }
    table.push_back(std::move(labels));
  }

  for (std::size_t a = 0; a < table.size(); ++a)
    for (std::size_t b = a + 1; b < table.size(); ++b) {
      bool same = true;
      for (std::size_t k = 0; k < ops.size() && same; ++k) same = std::abs(table[a][k] - table[b][k]) <= 1e-8;
      if (same) {
        std::ostringstream os;
        os << "basis vectors " << a << " and " << b << " share every label; the operators are not complete";
        throw Error(ErrorKind::DegenerateLabels, os.str());
      }
    }
  return table;
}

Matrix spin_half_rotation(const std::array<double, 3>& axis, double angle) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "rotation axis is zero");
  const Matrix gen = (axis[0] * pauli(Pauli::X) + axis[1] * pauli(Pauli::Y) + axis[2] * pauli(Pauli::Z)) / n;
  // exp(-i a/2 n.sigma) = cos(a/2) - i sin(a/2) n.sigma
  return std::cos(angle / 2) * Matrix::Identity(2, 2) - Complex(0.0, std::sin(angle / 2)) * gen;
}

OperatorMatrix rotation_rep(const std::array<double, 3>& axis, double angle) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "rotation axis is zero");
  if (!(std::abs(n - 1.0) <= 1e-10)) throw Error(ErrorKind::InvalidArgument, "rotation axis is not normalized");
  const auto gens = rotation_generators();
  Matrix total = axis[0] * gens[0].entries() + axis[1] * gens[1].entries() + axis[2] * gens[2].entries();
  auto u = matrix_exponential(OperatorMatrix::hermitian(std::move(total) * 0.5, kTwoQubits), angle);
  return OperatorMatrix::unitary(u.entries(), kTwoQubits);
}

std::vector<OperatorMatrix> rotation_generators() {
  std::vector<OperatorMatrix> g;
  for (auto p : {Pauli::X, Pauli::Y, Pauli::Z}) {
    const Matrix s = pauli(p);
    const Matrix id = Matrix::Identity(2, 2);
    g.push_back(OperatorMatrix::hermitian(kron(s, id) + kron(id, s), kTwoQubits));
  }
  return g;
}

SymmetryRep sampled_rotation_rep() {
  const std::array<std::array<double, 3>, 3> axes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const char* axis_names[] = {"x", "y", "z"};
  const std::array<std::pair<double, const char*>, 3> angles{
      {{std::numbers::pi / 7, "pi/7"}, {std::numbers::pi / 3, "pi/3"}, {1.0, "1"}}};
  std::vector<SymmetryElement> elements;
  for (std::size_t a = 0; a < axes.size(); ++a)
    for (const auto& [angle, angle_name] : angles)
      elements.push_back({std::string("R_") + axis_names[a] + "(" + angle_name + ")", rotation_rep(axes[a], angle)});
  return SymmetryRep(std::move(elements), rotation_generators());
}

}  // namespace tpslab::qubits
