#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tpslab/qubits.hpp"
#include "tpslab/tps.hpp"

using namespace tpslab;
using qubits::Pauli;
using qubits::pauli;

namespace {

const Bipartition kCut{{0}};

Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("tps_from_basis") {
  const auto comp = tps_from_basis(qubits::computational_basis(), {2, 2}, "comp");
  CHECK((comp.adaptor() - Matrix::Identity(4, 4)).norm() < 1e-15);
  CHECK(comp.name() == "comp");

  const auto bell = tps_from_basis(qubits::bell_basis(), {2, 2});
  CHECK(unitary_deviation(bell.adaptor()) < 1e-14);
  for (const auto& b : qubits::bell_basis()) CHECK(entanglement_in_tps(b, bell, kCut) < 1e-12);
  // |jk> = (|b_2j> +- |b_2j+1>)/sqrt2 shares the first Bell label.
  for (const auto& c : qubits::computational_basis()) CHECK(entanglement_in_tps(c, bell, kCut) < 1e-12);
  const double r = 1.0 / std::numbers::sqrt2;
  const auto mixed = StateVector((Vector(4) << r, 0, r, 0).finished(), {2, 2});
  CHECK(std::abs(entanglement_in_tps(mixed, bell, kCut) - 1.0) < 1e-12);

  auto dup = qubits::computational_basis();
  dup[3] = dup[0];
  CHECK_THROWS_AS(tps_from_basis(dup, {2, 2}), Error);
  CHECK_THROWS_AS(tps_from_basis(qubits::computational_basis(), {2, 3}), Error);
  CHECK_THROWS_AS(tps_from_basis({qubits::computational_basis()[0]}, {2, 2}), Error);
}

TEST_CASE("entanglement_in_tps matches Schmidt in the standard frame") {
  Rng rng(17);
  const auto std_tps = TensorProductStructure::standard({3, 4}, "std");
  CHECK(std_tps.identity_adaptor());
  for (int i = 0; i < 10; ++i) {
    const auto s = random_state({3, 4}, rng);
    CHECK(std::abs(entanglement_in_tps(s, std_tps, kCut) - entropy_of_entanglement(schmidt_decompose(s, kCut))) <
          1e-13);
  }
}

TEST_CASE("entanglement is invariant under frame-local changes of basis") {
  Rng rng(23);
  const Matrix local = kron(random_unitary(2, rng), random_unitary(3, rng));
  const TensorProductStructure frame({2, 3}, local, "local");
  for (int i = 0; i < 5; ++i) {
    const auto s = random_state({2, 3}, rng);
    CHECK(std::abs(entanglement_in_tps(s, frame, kCut) - entropy_of_entanglement(schmidt_decompose(s, kCut))) <
          1e-12);
  }
}

TEST_CASE("is_local_unitary") {
  const auto ab = qubits::ab_tps();
  const auto zz = is_local_unitary(OperatorMatrix::unitary(kron(pauli(Pauli::Z), pauli(Pauli::Z)), {2, 2}), ab, kCut);
  CHECK(zz.local);
  CHECK(zz.operator_rank == 1);
  CHECK(zz.residual < 1e-14);
  REQUIRE(zz.left.has_value());
  CHECK(std::abs(zz.left->squaredNorm() - 2.0) < 1e-13);
  CHECK((kron(*zz.left, *zz.right) - kron(pauli(Pauli::Z), pauli(Pauli::Z))).norm() < 1e-14);

  const auto c = is_local_unitary(OperatorMatrix::unitary(cnot(), {2, 2}), ab, kCut);
  CHECK_FALSE(c.local);
  CHECK(c.operator_rank == 2);
  CHECK(std::abs(c.residual - std::numbers::sqrt2) < 1e-12);

  Rng rng(5);
  const Matrix a = random_unitary(3, rng), b = random_unitary(4, rng);
  const auto prod = is_local_unitary(OperatorMatrix(kron(a, b), {3, 4}),
                                     TensorProductStructure::standard({3, 4}, "std"), kCut);
  CHECK(prod.local);
  CHECK(prod.residual < 1e-12);
  CHECK(std::abs(prod.left->squaredNorm() - 3.0) < 1e-12);

  CHECK_THROWS_AS(is_local_unitary(OperatorMatrix(2.0 * Matrix::Identity(4, 4), {2, 2}), ab, kCut), Error);
  CHECK_THROWS_AS(is_local_unitary(OperatorMatrix(Matrix::Identity(6, 6), {6}), ab, kCut), Error);
}

TEST_CASE("is_sum_local") {
  const auto ab = qubits::ab_tps();
  const auto zz = is_sum_local(OperatorMatrix::hermitian(kron(pauli(Pauli::Z), pauli(Pauli::Z)), {2, 2}), ab, kCut);
  CHECK_FALSE(zz.split);
  CHECK(std::abs(zz.residual - 2.0) < 1e-14);

  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix h = kron(pauli(Pauli::Z), i2) + kron(i2, pauli(Pauli::X)) + 0.5 * Matrix::Identity(4, 4);
  const auto split = is_sum_local(OperatorMatrix::hermitian(h, {2, 2}), ab, kCut);
  CHECK(split.split);
  CHECK(split.residual < 1e-14);
  CHECK((split.left - pauli(Pauli::Z)).norm() < 1e-14);
  CHECK((split.right - pauli(Pauli::X)).norm() < 1e-14);
  CHECK(std::abs(split.identity_coefficient - 0.5) < 1e-14);

  // Sum-local in one frame is generally not sum-local in another.
  const auto pq = qubits::pq_tps();
  CHECK_FALSE(is_sum_local(OperatorMatrix::hermitian(kron(pauli(Pauli::Z), i2) + kron(i2, pauli(Pauli::X)), {2, 2}),
                           pq, kCut)
                  .split);

  Rng rng(9);
  CHECK_THROWS_AS(is_sum_local(OperatorMatrix(random_matrix(4, 4, rng), {2, 2}), ab, kCut), Error);
}

TEST_CASE("is_symmetry_invariant") {
  const auto rep = qubits::sampled_rotation_rep();
  const auto ab_report = is_symmetry_invariant(qubits::ab_tps(), rep, kCut);
  CHECK(ab_report.invariant);
  CHECK(ab_report.worst_residual < 1e-9);
  CHECK(ab_report.elements.size() == rep.elements().size());
  CHECK(ab_report.generators.size() == 3);

  const auto pq_report = is_symmetry_invariant(qubits::pq_tps(), rep, kCut);
  CHECK_FALSE(pq_report.invariant);
  bool some_nonlocal = false;
  for (const auto& v : pq_report.elements) some_nonlocal = some_nonlocal || !v.local;
  CHECK(some_nonlocal);

  const SymmetryRep trivial({{"e", OperatorMatrix::identity({2, 2})}});
  CHECK(is_symmetry_invariant(qubits::pq_tps(), trivial, kCut).invariant);
}

TEST_CASE("frame conversion round trip") {
  Rng rng(31);
  const auto pq = qubits::pq_tps();
  const auto s = random_state({2, 2}, rng);
  const Vector back = pq.adaptor() * pq.to_frame(s).amplitudes();
  CHECK((back - s.amplitudes()).norm() < 1e-14);

  const OperatorMatrix u(random_unitary(4, rng), {2, 2});
  const Matrix framed = pq.to_frame(u).entries();
  CHECK((pq.adaptor() * framed * pq.adaptor().adjoint() - u.entries()).norm() < 1e-13);
}
