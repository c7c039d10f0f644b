#pragma once

// Dense complex linear algebra over mixed-radix subsystem structures.
//
// Index convention everywhere: the computational basis of a space with
// dims (d0, d1, ..., dn-1) is ordered row-major, subsystem 0 most
// significant, so kron(A, B) acts on index a*dB + b.

#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tpslab/error.hpp"

namespace tpslab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;
using Rng = std::mt19937_64;

inline constexpr double kStateNormTol = 1e-12;
inline constexpr double kFlagTol = 1e-10;
inline constexpr double kSchmidtFloor = 1e-12;
inline constexpr double kOperatorRankRelTol = 1e-8;

std::size_t product(const Dims& dims);

/// Upper bound on the operator norm of h - h^dagger.
double hermitian_deviation(const Matrix& h);
/// Upper bound on the operator norm of u^dagger u - 1.
double unitary_deviation(const Matrix& u);

class StateVector {
 public:
  /// Throws unless the amplitudes have unit norm within kStateNormTol and
  /// product(dims) matches their length.
  StateVector(Vector amplitudes, Dims dims);

  /// Rescales to unit norm; rejects the zero vector.
  static StateVector normalized(Vector amplitudes, Dims dims);
  static StateVector basis_state(Dims dims, std::size_t index);

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }

 private:
  Vector amplitudes_;
  Dims dims_;
};

class OperatorMatrix {
 public:
  OperatorMatrix(Matrix entries, Dims dims);

  /// Verified to kFlagTol; sets the corresponding flag.
  static OperatorMatrix hermitian(Matrix entries, Dims dims);
  static OperatorMatrix unitary(Matrix entries, Dims dims);
  static OperatorMatrix identity(Dims dims);

  const Matrix& entries() const noexcept { return entries_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  bool hermitian_flag() const noexcept { return hermitian_; }
  bool unitary_flag() const noexcept { return unitary_; }

 private:
  Matrix entries_;
  Dims dims_;
  bool hermitian_ = false;
  bool unitary_ = false;
};

/// Which subsystems sit on the left of a bipartite cut. The right side is
/// every remaining subsystem in ascending order.
struct Bipartition {
  std::vector<std::size_t> left;
};

/// Validates `cut` against `dims` and returns the permutation that brings
/// the left group (in the given order) to the front.
std::vector<std::size_t> cut_permutation(const Dims& dims, const Bipartition& cut);

struct SchmidtDecomposition {
  RealVector coefficients;  // descending, nonnegative
  Matrix left_vectors;      // columns, d_left x k
  Matrix right_vectors;     // columns, d_right x k
  Bipartition cut;
  Dims dims;                // subsystem dims of the decomposed state

  std::size_t left_dim() const { return static_cast<std::size_t>(left_vectors.rows()); }
  std::size_t right_dim() const { return static_cast<std::size_t>(right_vectors.rows()); }
  /// sum_i lambda_i |l_i> (x) |r_i>, in the original subsystem order.
  Vector reconstruct() const;
};

/// Operator-space Schmidt decomposition u = ||u||_HS * sum_k c_k A_k (x) B_k.
/// A_k, B_k are returned vectorized row-major (A[a][a'] at a*dA + a').
struct OperatorSchmidtDecomposition {
  RealVector coefficients;  // descending, sum of squares 1
  Matrix left_operators;    // d_left^2 x k
  Matrix right_operators;   // d_right^2 x k
  double hs_norm = 0.0;
  Bipartition cut;
  Dims dims;

  std::size_t left_dim() const;
  std::size_t right_dim() const;
  Matrix left_factor(std::size_t k) const;
  Matrix right_factor(std::size_t k) const;
  /// Coefficients above kOperatorRankRelTol * largest.
  std::size_t rank() const;
};

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

/// New subsystem k is old subsystem perm[k].
StateVector permute_subsystems(const StateVector& s, const std::vector<std::size_t>& perm);
OperatorMatrix permute_subsystems(const OperatorMatrix& op, const std::vector<std::size_t>& perm);
/// Map from old linear index to new linear index under `perm`.
std::vector<std::size_t> permutation_index_map(const Dims& dims, const std::vector<std::size_t>& perm);

/// Reduced density matrix on `keep` (taken in ascending order).
OperatorMatrix partial_trace(const StateVector& s, std::vector<std::size_t> keep);
OperatorMatrix partial_trace(const OperatorMatrix& rho, std::vector<std::size_t> keep);

SchmidtDecomposition schmidt_decompose(const StateVector& s, const Bipartition& cut);
/// Schmidt decomposition of a coefficient matrix psi[l][r] (already a
/// bipartite state, not necessarily normalized).
SchmidtDecomposition schmidt_decompose_matrix(const Matrix& coefficients);
/// Singular values only, descending.
RealVector schmidt_coefficients(const Matrix& coefficients);

/// Entropy in bits, -sum lambda^2 log2 lambda^2, with lambda < kSchmidtFloor
/// treated as zero.
double entropy_of_entanglement(const SchmidtDecomposition& sd);
double entropy_from_coefficients(const RealVector& coefficients);

/// Caches the eigendecomposition of a hermitian operator so that
/// exp(-iHt) can be formed for many t.
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const OperatorMatrix& h);
  const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  /// exp(-i H t)
  OperatorMatrix propagator(double t) const;

 private:
  Dims dims_;
  RealVector eigenvalues_;
  Matrix eigenvectors_;
  bool diagonal_ = false;
};

/// exp(-i H t). Rejects non-hermitian input.
OperatorMatrix matrix_exponential(const OperatorMatrix& h, double t);

OperatorSchmidtDecomposition operator_schmidt_decompose(const OperatorMatrix& u, const Bipartition& cut);

/// u * s, renormalized when u is unitary to within 1e-9.
StateVector apply(const OperatorMatrix& u, const StateVector& s);

// Deterministic random objects for tests and experiments.
Vector random_vector(std::size_t d, Rng& rng);
StateVector random_state(const Dims& dims, Rng& rng);
Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng);
Matrix random_unitary(std::size_t d, Rng& rng);
Matrix random_hermitian(std::size_t d, Rng& rng);

}  // namespace tpslab
