#include "tpslab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace tpslab {

namespace {

// For normal E, ||E||_2 <= ||E||_1 and ||E||_2 <= ||E||_F.
double normal_operator_norm_bound(const Matrix& e) {
  const double frob = e.norm();
  const double col = e.cwiseAbs().colwise().sum().maxCoeff();
  return std::min(frob, col);
}

std::string dims_string(const Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ')';
  return os.str();
}

void check_dims(const Dims& dims, std::size_t total, const char* what) {
  if (dims.empty()) throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": empty dims");
  for (auto d : dims)
    if (d == 0) throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": zero factor dimension");
  if (product(dims) != total) {
    std::ostringstream os;
    os << what << ": dims " << dims_string(dims) << " do not multiply to " << total;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

void check_permutation(const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) throw Error(ErrorKind::DimensionMismatch, "permutation length does not match subsystem count");
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw Error(ErrorKind::InvalidArgument, "not a permutation of the subsystems");
    seen[p] = true;
  }
}

std::vector<std::size_t> strides(const Dims& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) s[k - 1] = s[k] * dims[k];
  return s;
}

Dims permuted_dims(const Dims& dims, const std::vector<std::size_t>& perm) {
  Dims out(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) out[k] = dims[perm[k]];
  return out;
}

bool is_identity_perm(const std::vector<std::size_t>& perm) {
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (perm[k] != k) return false;
  return true;
}

std::size_t dims_product(const Dims& dims, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t k = from; k < to; ++k) p *= dims[k];
  return p;
}

}  // namespace

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

double hermitian_deviation(const Matrix& h) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  return normal_operator_norm_bound(h - h.adjoint());
}

double unitary_deviation(const Matrix& u) {
  if (u.rows() != u.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  Matrix e = u.adjoint() * u;
  e.diagonal().array() -= 1.0;
  return normal_operator_norm_bound(e);
}

// ---- StateVector ----

StateVector::StateVector(Vector amplitudes, Dims dims) : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
  check_dims(dims_, size(), "state");
  const double n = amplitudes_.norm();
  if (!(std::abs(n - 1.0) <= kStateNormTol)) {
    std::ostringstream os;
    os << "state norm " << n << " differs from 1";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

StateVector StateVector::normalized(Vector amplitudes, Dims dims) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::InvalidArgument, "cannot normalize a zero or non-finite vector");
  amplitudes /= n;
  return StateVector(std::move(amplitudes), std::move(dims));
}

StateVector StateVector::basis_state(Dims dims, std::size_t index) {
  const auto d = product(dims);
  if (index >= d) throw Error(ErrorKind::InvalidArgument, "basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v), std::move(dims));
}

// ---- OperatorMatrix ----

OperatorMatrix::OperatorMatrix(Matrix entries, Dims dims) : entries_(std::move(entries)), dims_(std::move(dims)) {
  if (entries_.rows() != entries_.cols()) throw Error(ErrorKind::DimensionMismatch, "operator matrix is not square");
  check_dims(dims_, size(), "operator");
}

OperatorMatrix OperatorMatrix::hermitian(Matrix entries, Dims dims) {
  OperatorMatrix op(std::move(entries), std::move(dims));
  const double dev = hermitian_deviation(op.entries_);
  if (!(dev <= kFlagTol)) {
    std::ostringstream os;
    os << "operator is not hermitian (deviation " << dev << ")";
    throw Error(ErrorKind::NotHermitian, os.str());
  }
  op.hermitian_ = true;
  return op;
}

OperatorMatrix OperatorMatrix::unitary(Matrix entries, Dims dims) {
  OperatorMatrix op(std::move(entries), std::move(dims));
  const double dev = unitary_deviation(op.entries_);
  if (!(dev <= kFlagTol)) {
    std::ostringstream os;
    os << "operator is not unitary (deviation " << dev << ")";
    throw Error(ErrorKind::NotUnitary, os.str());
  }
  op.unitary_ = true;
  return op;
}

OperatorMatrix OperatorMatrix::identity(Dims dims) {
  const auto d = static_cast<Eigen::Index>(product(dims));
  OperatorMatrix op(Matrix::Identity(d, d), std::move(dims));
  op.hermitian_ = true;
  op.unitary_ = true;
  return op;
}

// ---- cuts ----

std::vector<std::size_t> cut_permutation(const Dims& dims, const Bipartition& cut) {
  const std::size_t n = dims.size();
  if (cut.left.empty() || cut.left.size() >= n)
    throw Error(ErrorKind::InvalidArgument, "degenerate bipartition: one side is empty");
  std::vector<bool> on_left(n, false);
  for (auto k : cut.left) {
    if (k >= n) throw Error(ErrorKind::InvalidArgument, "bipartition names a subsystem out of range");
    if (on_left[k]) throw Error(ErrorKind::InvalidArgument, "bipartition repeats a subsystem");
    on_left[k] = true;
  }
  std::vector<std::size_t> perm(cut.left.begin(), cut.left.end());
  for (std::size_t k = 0; k < n; ++k)
    if (!on_left[k]) perm.push_back(k);
  return perm;
}

Vector SchmidtDecomposition::reconstruct() const {
  const auto k = coefficients.size();
  Matrix m = left_vectors.leftCols(k) * coefficients.cast<Complex>().asDiagonal() * right_vectors.leftCols(k).transpose();
  // m is d_left x d_right in the cut order; flatten row-major then undo the permutation.
  Vector flat(m.size());
  for (Eigen::Index l = 0; l < m.rows(); ++l)
    for (Eigen::Index r = 0; r < m.cols(); ++r) flat(l * m.cols() + r) = m(l, r);
  if (dims.empty()) return flat;
  const auto perm = cut_permutation(dims, cut);
  const auto map = permutation_index_map(dims, perm);
  Vector out(flat.size());
  for (std::size_t i = 0; i < map.size(); ++i) out(static_cast<Eigen::Index>(i)) = flat(static_cast<Eigen::Index>(map[i]));
  return out;
}

std::size_t OperatorSchmidtDecomposition::left_dim() const {
  return static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(left_operators.rows()))));
}

std::size_t OperatorSchmidtDecomposition::right_dim() const {
  return static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(right_operators.rows()))));
}

namespace {
Matrix unvec_row_major(const Eigen::Ref<const Vector>& v, std::size_t d) {
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = v(static_cast<Eigen::Index>(i * d + j));
  return m;
}
}  // namespace

Matrix OperatorSchmidtDecomposition::left_factor(std::size_t k) const {
  return unvec_row_major(left_operators.col(static_cast<Eigen::Index>(k)), left_dim());
}

Matrix OperatorSchmidtDecomposition::right_factor(std::size_t k) const {
  return unvec_row_major(right_operators.col(static_cast<Eigen::Index>(k)), right_dim());
}

std::size_t OperatorSchmidtDecomposition::rank() const {
  if (coefficients.size() == 0) return 0;
  const double floor = kOperatorRankRelTol * coefficients(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    if (coefficients(i) > floor) ++r;
  return r;
}

// ---- kron ----

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return OperatorMatrix(kron(a.entries(), b.entries()), std::move(dims));
}

// ---- permutations ----

std::vector<std::size_t> permutation_index_map(const Dims& dims, const std::vector<std::size_t>& perm) {
  check_permutation(perm, dims.size());
  const auto new_dims = permuted_dims(dims, perm);
  const auto new_strides = strides(new_dims);
  // Stride in the new layout of old subsystem perm[k] is new_strides[k].
  std::vector<std::size_t> old_to_new_stride(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) old_to_new_stride[perm[k]] = new_strides[k];

  const std::size_t total = product(dims);
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> digits(dims.size(), 0);
  std::size_t target = 0;
  for (std::size_t i = 0; i < total; ++i) {
    map[i] = target;
    // increment the old mixed-radix counter, last subsystem fastest
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++digits[k] < dims[k]) {
        target += old_to_new_stride[k];
        break;
      }
      target -= (dims[k] - 1) * old_to_new_stride[k];
      digits[k] = 0;
    }
  }
  return map;
}

StateVector permute_subsystems(const StateVector& s, const std::vector<std::size_t>& perm) {
  const auto map = permutation_index_map(s.dims(), perm);
  Vector out(s.amplitudes().size());
  for (std::size_t i = 0; i < map.size(); ++i)
    out(static_cast<Eigen::Index>(map[i])) = s.amplitudes()(static_cast<Eigen::Index>(i));
  return StateVector(std::move(out), permuted_dims(s.dims(), perm));
}

OperatorMatrix permute_subsystems(const OperatorMatrix& op, const std::vector<std::size_t>& perm) {
  if (is_identity_perm(perm)) {
    check_permutation(perm, op.dims().size());
    return op;
  }
  const auto map = permutation_index_map(op.dims(), perm);
  const auto& e = op.entries();
  Matrix out(e.rows(), e.cols());
  for (std::size_t j = 0; j < map.size(); ++j)
    for (std::size_t i = 0; i < map.size(); ++i)
      out(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j])) =
          e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return OperatorMatrix(std::move(out), permuted_dims(op.dims(), perm));
}

// ---- partial trace ----

namespace {

std::vector<std::size_t> keep_first_permutation(const Dims& dims, std::vector<std::size_t>& keep) {
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "partial trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw Error(ErrorKind::InvalidArgument, "partial trace: keep set repeats a subsystem");
  if (keep.back() >= dims.size()) throw Error(ErrorKind::InvalidArgument, "partial trace: subsystem out of range");
  std::vector<std::size_t> perm = keep;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) perm.push_back(k);
  return perm;
}

// Row-major d_left x d_right view of a flattened bipartite vector.
Matrix as_bipartite_matrix(const Vector& flat, std::size_t d_left, std::size_t d_right) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(flat.data(), static_cast<Eigen::Index>(d_left),
                                    static_cast<Eigen::Index>(d_right));
}

}  // namespace

OperatorMatrix partial_trace(const StateVector& s, std::vector<std::size_t> keep) {
  const auto perm = keep_first_permutation(s.dims(), keep);
  const auto permuted = permute_subsystems(s, perm);
  const std::size_t d_keep = dims_product(permuted.dims(), 0, keep.size());
  const std::size_t d_trace = permuted.size() / d_keep;
  const Matrix m = as_bipartite_matrix(permuted.amplitudes(), d_keep, d_trace);
  Dims kept(permuted.dims().begin(), permuted.dims().begin() + static_cast<std::ptrdiff_t>(keep.size()));
  Matrix rho = m * m.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  return OperatorMatrix::hermitian(std::move(rho), std::move(kept));
}

OperatorMatrix partial_trace(const OperatorMatrix& rho, std::vector<std::size_t> keep) {
  const auto perm = keep_first_permutation(rho.dims(), keep);
  const auto permuted = permute_subsystems(rho, perm);
  const std::size_t d_keep = dims_product(permuted.dims(), 0, keep.size());
  const std::size_t d_trace = permuted.size() / d_keep;
  const auto& e = permuted.entries();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d_keep), static_cast<Eigen::Index>(d_keep));
  for (std::size_t a = 0; a < d_keep; ++a)
    for (std::size_t b = 0; b < d_keep; ++b) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < d_trace; ++t)
        acc += e(static_cast<Eigen::Index>(a * d_trace + t), static_cast<Eigen::Index>(b * d_trace + t));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  Dims kept(permuted.dims().begin(), permuted.dims().begin() + static_cast<std::ptrdiff_t>(keep.size()));
  return OperatorMatrix(std::move(out), std::move(kept));
}

// ---- Schmidt ----

SchmidtDecomposition schmidt_decompose_matrix(const Matrix& coefficients) {
  if (coefficients.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty coefficient matrix");
  Eigen::BDCSVD<Matrix> svd(coefficients, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition sd;
  sd.coefficients = svd.singularValues();
  sd.left_vectors = svd.matrixU();
  // psi = sum s_i u_i v_i^dagger  =>  |psi> = sum s_i |u_i> (x) |conj(v_i)>
  sd.right_vectors = svd.matrixV().conjugate();
  return sd;
}

RealVector schmidt_coefficients(const Matrix& coefficients) {
  if (coefficients.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty coefficient matrix");
  Eigen::BDCSVD<Matrix> svd(coefficients);
  return svd.singularValues();
}

SchmidtDecomposition schmidt_decompose(const StateVector& s, const Bipartition& cut) {
  const auto perm = cut_permutation(s.dims(), cut);
  const auto permuted = permute_subsystems(s, perm);
  const std::size_t d_left = dims_product(permuted.dims(), 0, cut.left.size());
  const std::size_t d_right = s.size() / d_left;
  auto sd = schmidt_decompose_matrix(as_bipartite_matrix(permuted.amplitudes(), d_left, d_right));
  sd.cut = cut;
  sd.dims = s.dims();
  return sd;
}

double entropy_from_coefficients(const RealVector& coefficients) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
    const double l = coefficients(i);
    if (l < kSchmidtFloor) continue;
    const double p = l * l;
    e -= p * std::log2(p);
  }
  return std::max(e, 0.0);
}

double entropy_of_entanglement(const SchmidtDecomposition& sd) { return entropy_from_coefficients(sd.coefficients); }

// ---- exponentials ----

HermitianSpectrum::HermitianSpectrum(const OperatorMatrix& h) : dims_(h.dims()) {
  const auto& e = h.entries();
  const double dev = hermitian_deviation(e);
  if (!(dev <= kFlagTol * std::max(1.0, e.cwiseAbs().maxCoeff()))) {
    std::ostringstream os;
    os << "matrix exponential requires a hermitian operator (deviation " << dev << ")";
    throw Error(ErrorKind::NotHermitian, os.str());
  }
  Matrix off = e;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() == 0.0) {
    diagonal_ = true;
    eigenvalues_ = e.diagonal().real();
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(e);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NumericalGuard, "hermitian eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

OperatorMatrix HermitianSpectrum::propagator(double t) const {
  Vector phases(eigenvalues_.size());
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) phases(i) = std::polar(1.0, -eigenvalues_(i) * t);
  if (diagonal_) return OperatorMatrix(Matrix(phases.asDiagonal()), dims_);
  Matrix u = eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
  return OperatorMatrix(std::move(u), dims_);
}

OperatorMatrix matrix_exponential(const OperatorMatrix& h, double t) { return HermitianSpectrum(h).propagator(t); }

// ---- operator Schmidt ----

OperatorSchmidtDecomposition operator_schmidt_decompose(const OperatorMatrix& u, const Bipartition& cut) {
  const auto perm = cut_permutation(u.dims(), cut);
  const auto permuted = permute_subsystems(u, perm);
  const std::size_t dl = dims_product(permuted.dims(), 0, cut.left.size());
  const std::size_t dr = u.size() / dl;
  const double hs = u.entries().norm();
  if (!(hs > 0.0)) throw Error(ErrorKind::InvalidArgument, "operator Schmidt decomposition of the zero matrix");

  // Realign U[(a,b),(a',b')] -> R[(a,a'),(b,b')].
  const auto& e = permuted.entries();
  Matrix realigned(static_cast<Eigen::Index>(dl * dl), static_cast<Eigen::Index>(dr * dr));
  for (std::size_t a = 0; a < dl; ++a)
    for (std::size_t ap = 0; ap < dl; ++ap)
      for (std::size_t b = 0; b < dr; ++b)
        for (std::size_t bp = 0; bp < dr; ++bp)
          realigned(static_cast<Eigen::Index>(a * dl + ap), static_cast<Eigen::Index>(b * dr + bp)) =
              e(static_cast<Eigen::Index>(a * dr + b), static_cast<Eigen::Index>(ap * dr + bp));

  Eigen::BDCSVD<Matrix> svd(realigned, Eigen::ComputeThinU | Eigen::ComputeThinV);
  OperatorSchmidtDecomposition osd;
  osd.coefficients = svd.singularValues() / hs;
  osd.left_operators = svd.matrixU();
  osd.right_operators = svd.matrixV().conjugate();
  osd.hs_norm = hs;
  osd.cut = cut;
  osd.dims = u.dims();
  return osd;
}

StateVector apply(const OperatorMatrix& u, const StateVector& s) {
  if (u.size() != s.size()) throw Error(ErrorKind::DimensionMismatch, "operator and state dimensions differ");
  Vector out = u.entries() * s.amplitudes();
  const double n = out.norm();
  if (!(std::abs(n - 1.0) <= 1e-9)) throw Error(ErrorKind::NotUnitary, "operator did not preserve the state norm");
  out /= n;
  return StateVector(std::move(out), s.dims());
}

// ---- random ----

Vector random_vector(std::size_t d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

StateVector random_state(const Dims& dims, Rng& rng) {
  return StateVector::normalized(random_vector(product(dims), rng), dims);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

Matrix random_unitary(std::size_t d, Rng& rng) {
  // Haar measure: QR of a Ginibre matrix with the R-diagonal phases removed.
  const Matrix z = random_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex diag = r(j, j);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(j) *= diag / mag;
  }
  return q;
}

Matrix random_hermitian(std::size_t d, Rng& rng) {
  const Matrix z = random_matrix(d, d, rng);
  return 0.5 * (z + z.adjoint());
}

}  // namespace tpslab
