#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tpslab/core.hpp"

using namespace tpslab;

namespace {

const Complex kI{0.0, 1.0};

Matrix sx() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
Matrix sy() { return (Matrix(2, 2) << 0, -kI, kI, 0).finished(); }
Matrix sz() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }

Matrix naive_kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Reduced density matrix on subsystem 0 of a bipartite (dl, dr) state by
// explicit summation over the traced index.
Matrix naive_reduce_left(const Vector& psi, std::size_t dl, std::size_t dr) {
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(dl), static_cast<Eigen::Index>(dl));
  for (std::size_t a = 0; a < dl; ++a)
    for (std::size_t ap = 0; ap < dl; ++ap)
      for (std::size_t b = 0; b < dr; ++b)
        rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(ap)) +=
            psi(static_cast<Eigen::Index>(a * dr + b)) * std::conj(psi(static_cast<Eigen::Index>(ap * dr + b)));
  return rho;
}

// Taylor series of exp(-iHt), summed until the terms vanish.
Matrix taylor_exp(const Matrix& h, double t) {
  Matrix term = Matrix::Identity(h.rows(), h.cols());
  Matrix sum = term;
  for (int k = 1; k < 200; ++k) {
    term = term * h * Complex(0.0, -t) / static_cast<double>(k);
    sum += term;
    if (term.norm() < 1e-18) break;
  }
  return sum;
}

Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Matrix swap_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("kron") {
  CHECK(kron(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Identity(2, 2))).isApprox(Matrix(Matrix::Identity(4, 4))));
  const Matrix zz = kron(sz(), sz());
  Matrix expected = Matrix::Zero(4, 4);
  expected.diagonal() << 1, -1, -1, 1;
  CHECK((zz - expected).norm() == 0.0);

  const Matrix xy = kron(sx(), sy());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) CHECK(xy(2 * i + k, 2 * j + l) == sx()(i, j) * sy()(k, l));

  Rng rng(5);
  const Matrix a = random_matrix(3, 2, rng), b = random_matrix(2, 4, rng);
  CHECK((kron(a, b) - naive_kron(a, b)).norm() < 1e-15);

  const auto op = kron(OperatorMatrix(sx(), {2}), OperatorMatrix(random_matrix(3, 3, rng), {3}));
  CHECK(op.dims() == Dims{2, 3});
}

TEST_CASE("state and operator validation") {
  CHECK_THROWS_AS(StateVector(Vector::Ones(4), {2, 2}), Error);
  CHECK_THROWS_AS(StateVector::normalized(Vector::Zero(4), {2, 2}), Error);
  CHECK_THROWS_AS(StateVector::normalized(Vector::Ones(4), {2, 3}), Error);
  CHECK_NOTHROW(StateVector::normalized(Vector::Ones(6), {2, 3}));
  CHECK_THROWS_AS(OperatorMatrix::hermitian(sx() + kI * sz(), {2}), Error);
  CHECK(OperatorMatrix::hermitian(sy(), {2}).hermitian_flag());
  CHECK_THROWS_AS(OperatorMatrix::unitary(2.0 * sx(), {2}), Error);
  CHECK(OperatorMatrix::unitary(sy(), {2}).unitary_flag());
  CHECK_THROWS_AS(OperatorMatrix(Matrix::Identity(4, 4), {2, 3}), Error);
}

TEST_CASE("permute_subsystems") {
  Rng rng(11);
  const auto s = random_state({2, 3, 4}, rng);
  CHECK((permute_subsystems(s, {0, 1, 2}).amplitudes() - s.amplitudes()).norm() == 0.0);

  const auto ket01 = StateVector::basis_state({2, 2}, 1);
  const auto swapped = permute_subsystems(ket01, {1, 0});
  CHECK(std::abs(swapped.amplitudes()(2) - 1.0) < 1e-15);

  auto t = s;
  for (int k = 0; k < 3; ++k) t = permute_subsystems(t, {2, 0, 1});
  CHECK(t.dims() == s.dims());
  CHECK((t.amplitudes() - s.amplitudes()).norm() < 1e-15);

  // Subsystem order change agrees with the explicit index relabelling.
  const auto p = permute_subsystems(s, {2, 0, 1});
  CHECK(p.dims() == Dims{4, 2, 3});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        CHECK(p.amplitudes()(static_cast<Eigen::Index>((c * 2 + a) * 3 + b)) ==
              s.amplitudes()(static_cast<Eigen::Index>((a * 3 + b) * 4 + c)));

  // Operators transform covariantly: P (A (x) B) P^dagger = B (x) A.
  const Matrix a = random_matrix(2, 2, rng), b = random_matrix(3, 3, rng);
  const auto swapped_op = permute_subsystems(OperatorMatrix(kron(a, b), {2, 3}), {1, 0});
  CHECK((swapped_op.entries() - kron(b, a)).norm() < 1e-14);
  CHECK_THROWS_AS(permute_subsystems(s, {0, 0, 1}), Error);
}

TEST_CASE("partial_trace") {
  const double r = 1.0 / std::numbers::sqrt2;
  const auto product = StateVector((Vector(4) << r, r, 0, 0).finished(), {2, 2});
  const auto rho = partial_trace(product, {0});
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK((rho.entries() - expected).norm() < 1e-15);

  const auto bell = StateVector((Vector(4) << r, 0, 0, r).finished(), {2, 2});
  for (std::size_t keep : {0u, 1u})
    CHECK((partial_trace(bell, {keep}).entries() - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-15);

  Rng rng(3);
  const auto s = random_state({3, 3}, rng);
  CHECK((partial_trace(s, {0}).entries() - naive_reduce_left(s.amplitudes(), 3, 3)).norm() < 1e-14);
  const RealVector eig = Eigen::SelfAdjointEigenSolver<Matrix>(partial_trace(s, {0}).entries()).eigenvalues().reverse();
  const auto sd = schmidt_decompose(s, {{0}});
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(eig(i) - sd.coefficients(i) * sd.coefficients(i)) < 1e-12);

  // Tracing a density matrix agrees with tracing the state.
  const auto s3 = random_state({2, 3, 2}, rng);
  const OperatorMatrix full(s3.amplitudes() * s3.amplitudes().adjoint(), s3.dims());
  CHECK((partial_trace(full, {0, 2}).entries() - partial_trace(s3, {2, 0}).entries()).norm() < 1e-14);
}

TEST_CASE("schmidt_decompose") {
  const auto sd00 = schmidt_decompose(StateVector::basis_state({2, 2}, 0), {{0}});
  CHECK(sd00.coefficients(0) == doctest::Approx(1.0));
  CHECK(sd00.coefficients(1) == doctest::Approx(0.0));

  const double r = 1.0 / std::numbers::sqrt2;
  const auto minus = StateVector((Vector(4) << r, 0, 0, -r).finished(), {2, 2});
  const auto sd = schmidt_decompose(minus, {{0}});
  CHECK(std::abs(sd.coefficients(0) - r) < 1e-15);
  CHECK(std::abs(sd.coefficients(1) - r) < 1e-15);

  Rng rng(21);
  const auto s = random_state({4, 4}, rng);
  const auto full = schmidt_decompose(s, {{0}});
  CHECK((full.reconstruct() - s.amplitudes()).norm() < 1e-10);
  CHECK(std::abs(full.coefficients.squaredNorm() - 1.0) < 1e-12);

  // Non-contiguous cut on three factors reassembles in the original order.
  const auto s3 = random_state({2, 3, 2}, rng);
  const auto sd3 = schmidt_decompose(s3, {{2, 0}});
  CHECK(sd3.left_dim() == 4);
  CHECK((sd3.reconstruct() - s3.amplitudes()).norm() < 1e-12);
  CHECK_THROWS_AS(schmidt_decompose(s3, {{3}}), Error);
  CHECK_THROWS_AS(schmidt_decompose(s3, {{0, 0}}), Error);
}

TEST_CASE("entropy_of_entanglement") {
  CHECK(entropy_from_coefficients((RealVector(2) << 1.0, 0.0).finished()) == 0.0);
  const double r = 1.0 / std::numbers::sqrt2;
  CHECK(std::abs(entropy_from_coefficients((RealVector(2) << r, r).finished()) - 1.0) < 1e-15);
  CHECK(std::abs(entropy_from_coefficients((RealVector(2) << std::sqrt(0.9), std::sqrt(0.1)).finished()) -
                 0.468995593589281221) < 1e-15);
  // Coefficients below the floor count as zero.
  CHECK(entropy_from_coefficients((RealVector(2) << 1.0, 1e-13).finished()) == 0.0);

  const double c = std::cos(0.3), s = std::sin(0.3);
  const auto st = StateVector((Vector(4) << c, 0, 0, s).finished(), {2, 2});
  CHECK(std::abs(entropy_of_entanglement(schmidt_decompose(st, {{0}})) - 0.4275017710560216) < 1e-14);
}

TEST_CASE("matrix_exponential") {
  Rng rng(8);
  const auto h = OperatorMatrix::hermitian(random_hermitian(8, rng), {8});
  CHECK((matrix_exponential(h, 0.0).entries() - Matrix::Identity(8, 8)).norm() < 1e-13);

  const auto z = matrix_exponential(OperatorMatrix::hermitian(sz(), {2}), std::numbers::pi / 2);
  CHECK(std::abs(z.entries()(0, 0) - std::polar(1.0, -std::numbers::pi / 2)) < 1e-15);
  CHECK(std::abs(z.entries()(1, 1) - std::polar(1.0, std::numbers::pi / 2)) < 1e-15);
  CHECK(std::abs(z.entries()(0, 1)) == 0.0);

  const Matrix forward = matrix_exponential(h, 0.7).entries();
  const Matrix back = matrix_exponential(h, -0.7).entries();
  CHECK((forward * back - Matrix::Identity(8, 8)).norm() < 1e-9);
  CHECK((forward - taylor_exp(h.entries(), 0.7)).norm() < 1e-11);

  const HermitianSpectrum spec(h);
  CHECK((spec.propagator(0.3).entries() * spec.propagator(0.4).entries() - forward).norm() < 1e-12);
  CHECK_THROWS_AS(matrix_exponential(OperatorMatrix(random_matrix(3, 3, rng), {3}), 1.0), Error);
}

TEST_CASE("operator_schmidt_decompose") {
  const auto zz = operator_schmidt_decompose(OperatorMatrix(kron(sz(), sz()), {2, 2}), {{0}});
  CHECK(zz.rank() == 1);
  CHECK(zz.hs_norm == doctest::Approx(2.0));

  const auto c = operator_schmidt_decompose(OperatorMatrix(cnot(), {2, 2}), {{0}});
  CHECK(c.rank() == 2);
  CHECK(std::abs(c.coefficients(0) - 1.0 / std::numbers::sqrt2) < 1e-14);
  CHECK(std::abs(c.coefficients(1) - 1.0 / std::numbers::sqrt2) < 1e-14);

  const auto sw = operator_schmidt_decompose(OperatorMatrix(swap_gate(), {2, 2}), {{0}});
  CHECK(sw.rank() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(sw.coefficients(i) - 0.5) < 1e-14);

  // Factors reassemble the operator.
  Rng rng(4);
  const Matrix a = random_matrix(2, 2, rng), b = random_matrix(3, 3, rng);
  const Matrix u = kron(a, b) + 0.1 * kron(random_matrix(2, 2, rng), random_matrix(3, 3, rng));
  const auto osd = operator_schmidt_decompose(OperatorMatrix(u, {2, 3}), {{0}});
  Matrix sum = Matrix::Zero(6, 6);
  for (std::size_t k = 0; k < osd.rank(); ++k)
    sum += osd.hs_norm * osd.coefficients(static_cast<Eigen::Index>(k)) * kron(osd.left_factor(k), osd.right_factor(k));
  CHECK((sum - u).norm() < 1e-12);
  CHECK(osd.rank() == 2);
}

TEST_CASE("random objects are deterministic and well formed") {
  Rng r1(99), r2(99);
  CHECK((random_unitary(5, r1) - random_unitary(5, r2)).norm() == 0.0);
  Rng rng(1);
  const Matrix u = random_unitary(6, rng);
  CHECK(unitary_deviation(u) < 1e-13);
  CHECK(hermitian_deviation(random_hermitian(6, rng)) == 0.0);
  CHECK(std::abs(random_state({3, 2}, rng).amplitudes().norm() - 1.0) < 1e-14);
}

TEST_CASE("apply") {
  Rng rng(2);
  const auto s = random_state({2, 2}, rng);
  const OperatorMatrix u(random_unitary(4, rng), {2, 2});
  CHECK((apply(u, s).amplitudes() - u.entries() * s.amplitudes()).norm() < 1e-14);
  CHECK_THROWS_AS(apply(OperatorMatrix(2.0 * Matrix::Identity(4, 4), {2, 2}), s), Error);
}
