#include "tpslab/tps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tpslab {

namespace {

constexpr double kUnitaryInputTol = 1e-9;

std::size_t left_dim_of(const Dims& dims, const Bipartition& cut) {
  std::size_t d = 1;
  for (auto k : cut.left) d *= dims.at(k);
  return d;
}

// Brings the left group of `cut` to the front, in the TPS frame.
OperatorMatrix framed_left_first(const OperatorMatrix& op, const TensorProductStructure& tps, const Bipartition& cut) {
  const auto framed = tps.to_frame(op);
  return permute_subsystems(framed, cut_permutation(framed.dims(), cut));
}

Matrix trace_right(const Matrix& m, std::size_t dl, std::size_t dr) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dl), static_cast<Eigen::Index>(dl));
  for (std::size_t a = 0; a < dl; ++a)
    for (std::size_t ap = 0; ap < dl; ++ap)
      for (std::size_t b = 0; b < dr; ++b)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(ap)) +=
            m(static_cast<Eigen::Index>(a * dr + b), static_cast<Eigen::Index>(ap * dr + b));
  return out;
}

Matrix trace_left(const Matrix& m, std::size_t dl, std::size_t dr) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dr));
  for (std::size_t a = 0; a < dl; ++a) out += m.block(a * dr, a * dr, dr, dr);
  return out;
}

}  // namespace

TensorProductStructure::TensorProductStructure(Dims factor_dims, Matrix adaptor, std::string name)
    : factor_dims_(std::move(factor_dims)), adaptor_(std::move(adaptor)), name_(std::move(name)) {
  if (adaptor_.rows() != adaptor_.cols()) throw Error(ErrorKind::DimensionMismatch, "TPS adaptor is not square");
  if (factor_dims_.empty() || product(factor_dims_) != dimension())
    throw Error(ErrorKind::DimensionMismatch, "TPS factor dims do not multiply to the adaptor size");
  identity_ = adaptor_.isIdentity(0.0);
  if (!identity_) {
    const double dev = unitary_deviation(adaptor_);
    if (!(dev <= kFlagTol)) {
      std::ostringstream os;
      os << "TPS adaptor is not unitary (deviation " << dev << ")";
      throw Error(ErrorKind::NotUnitary, os.str());
    }
  }
}

TensorProductStructure TensorProductStructure::standard(Dims factor_dims, std::string name) {
  const auto d = static_cast<Eigen::Index>(product(factor_dims));
  return TensorProductStructure(std::move(factor_dims), Matrix::Identity(d, d), std::move(name));
}

StateVector TensorProductStructure::to_frame(const StateVector& s) const {
  if (s.size() != dimension()) throw Error(ErrorKind::DimensionMismatch, "state and TPS dimensions differ");
  if (identity_) return StateVector(s.amplitudes(), factor_dims_);
  return StateVector::normalized(adaptor_.adjoint() * s.amplitudes(), factor_dims_);
}

OperatorMatrix TensorProductStructure::to_frame(const OperatorMatrix& op) const {
  if (op.size() != dimension()) throw Error(ErrorKind::DimensionMismatch, "operator and TPS dimensions differ");
  if (identity_) return OperatorMatrix(op.entries(), factor_dims_);
  return OperatorMatrix(adaptor_.adjoint() * op.entries() * adaptor_, factor_dims_);
}

SymmetryRep::SymmetryRep(std::vector<SymmetryElement> elements, std::vector<OperatorMatrix> generators)
    : elements_(std::move(elements)), generators_(std::move(generators)) {
  for (const auto& e : elements_) {
    const double dev = e.op.unitary_flag() ? 0.0 : unitary_deviation(e.op.entries());
    if (!(dev <= kFlagTol)) throw Error(ErrorKind::NotUnitary, "symmetry element '" + e.label + "' is not unitary");
  }
  for (const auto& g : generators_) {
    const double dev = g.hermitian_flag() ? 0.0 : hermitian_deviation(g.entries());
    if (!(dev <= kFlagTol)) throw Error(ErrorKind::NotHermitian, "symmetry generator is not hermitian");
  }
}

TensorProductStructure tps_from_basis(const std::vector<StateVector>& basis, const Dims& factor_dims, std::string name) {
  const std::size_t d = product(factor_dims);
  if (basis.size() != d) {
    std::ostringstream os;
    os << "basis has " << basis.size() << " vectors but the factor dims require " << d;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  Matrix adaptor(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    if (basis[j].size() != d) throw Error(ErrorKind::DimensionMismatch, "basis vector length differs from the space dimension");
    adaptor.col(static_cast<Eigen::Index>(j)) = basis[j].amplitudes();
  }
  const double dev = unitary_deviation(adaptor);
  if (!(dev <= kFlagTol)) {
    std::ostringstream os;
    os << "basis is not orthonormal (deviation " << dev << ")";
    throw Error(ErrorKind::NotOrthonormal, os.str());
  }
  return TensorProductStructure(factor_dims, std::move(adaptor), std::move(name));
}

double entanglement_in_tps(const StateVector& s, const TensorProductStructure& tps, const Bipartition& cut) {
  return entropy_of_entanglement(schmidt_decompose(tps.to_frame(s), cut));
}

LocalityCertificate is_local_unitary(const OperatorMatrix& u, const TensorProductStructure& tps, const Bipartition& cut) {
  if (u.size() != tps.dimension()) throw Error(ErrorKind::DimensionMismatch, "operator and TPS dimensions differ");
  auto require_unitary = [&u] {
    const double dev = unitary_deviation(u.entries());
    if (!(dev <= kUnitaryInputTol)) {
      std::ostringstream os;
      os << "locality test requires a unitary operator (deviation " << dev << ")";
      throw Error(ErrorKind::NotUnitary, os.str());
    }
  };
  const auto framed = framed_left_first(u, tps, cut);
  const std::size_t dl = left_dim_of(tps.factor_dims(), cut);
  const std::size_t dr = tps.dimension() / dl;
  Bipartition front;
  for (std::size_t k = 0; k < cut.left.size(); ++k) front.left.push_back(k);
  const auto osd = operator_schmidt_decompose(framed, front);

  LocalityCertificate cert;
  cert.spectrum = osd.coefficients;
  cert.operator_rank = osd.rank();
  cert.local = cert.operator_rank == 1;
  if (!cert.local) {
    if (!u.unitary_flag()) require_unitary();
    const double c0 = osd.coefficients(0);
    cert.residual = osd.hs_norm * std::sqrt(std::max(0.0, 1.0 - c0 * c0));
    return cert;
  }

  // Gauge: ||A||_F^2 = dl (|det A| = 1 for unitary A), largest entry of A real positive.
  Matrix a = osd.left_factor(0) * std::sqrt(static_cast<double>(dl));
  Eigen::Index ri = 0, ci = 0;
  a.cwiseAbs().maxCoeff(&ri, &ci);
  const Complex pivot = a(ri, ci);
  const Complex phase = std::abs(pivot) > 0.0 ? pivot / std::abs(pivot) : Complex(1.0);
  a /= phase;
  // B from the projection B = Tr_A[(A^dagger (x) 1) U] / ||A||_F^2.
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dr));
  const auto& e = framed.entries();
  for (std::size_t i = 0; i < dl; ++i)
    for (std::size_t j = 0; j < dl; ++j) {
      const Complex w = std::conj(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (w == Complex(0.0)) continue;
      b += w * e.block(i * dr, j * dr, dr, dr);
    }
  b /= static_cast<double>(dl);
  cert.residual = (e - kron(a, b)).norm();
  if (!u.unitary_flag()) {
    // With U = A (x) B + E the deviation of U is bounded through the small
    // factors; the dense U^dagger U is formed only when the bound is loose.
    const double da = unitary_deviation(a);
    const double db = unitary_deviation(b);
    const double r = cert.residual;
    const double bound = da * (1.0 + db) + db + r * (2.0 * std::sqrt((1.0 + da) * (1.0 + db)) + r);
    if (!(bound <= kUnitaryInputTol)) require_unitary();
  }
  cert.left = std::move(a);
  cert.right = std::move(b);
  return cert;
}

SumLocalityCertificate is_sum_local(const OperatorMatrix& h, const TensorProductStructure& tps, const Bipartition& cut) {
  if (h.size() != tps.dimension()) throw Error(ErrorKind::DimensionMismatch, "operator and TPS dimensions differ");
  if (!h.hermitian_flag()) {
    const double dev = hermitian_deviation(h.entries());
    if (!(dev <= kFlagTol * std::max(1.0, h.entries().cwiseAbs().maxCoeff()))) {
      std::ostringstream os;
      os << "sum-locality test requires a hermitian operator (deviation " << dev << ")";
      throw Error(ErrorKind::NotHermitian, os.str());
    }
  }
  const auto framed = framed_left_first(h, tps, cut);
  const std::size_t dl = left_dim_of(tps.factor_dims(), cut);
  const std::size_t dr = tps.dimension() / dl;
  const auto& e = framed.entries();

  SumLocalityCertificate cert;
  const double d = static_cast<double>(dl * dr);
  cert.identity_coefficient = e.trace().real() / d;
  const double c = cert.identity_coefficient;
  cert.left = trace_right(e, dl, dr) / static_cast<double>(dr);
  cert.left.diagonal().array() -= c;
  cert.right = trace_left(e, dl, dr) / static_cast<double>(dl);
  cert.right.diagonal().array() -= c;

  const auto il = Matrix::Identity(static_cast<Eigen::Index>(dl), static_cast<Eigen::Index>(dl));
  const auto ir = Matrix::Identity(static_cast<Eigen::Index>(dr), static_cast<Eigen::Index>(dr));
  Matrix rest = e - kron(Matrix(cert.left), Matrix(ir)) - kron(Matrix(il), Matrix(cert.right));
  rest.diagonal().array() -= c;
  cert.residual = rest.norm();
  cert.hs_norm = e.norm();
  cert.split = cert.residual <= kSumLocalRelTol * cert.hs_norm;
  return cert;
}

InvarianceReport is_symmetry_invariant(const TensorProductStructure& tps, const SymmetryRep& rep, const Bipartition& cut) {
  InvarianceReport report;
  report.invariant = true;
  for (const auto& el : rep.elements()) {
    if (el.op.size() != tps.dimension())
      throw Error(ErrorKind::DimensionMismatch, "symmetry element '" + el.label + "' does not match the TPS dimension");
    const auto cert = is_local_unitary(el.op, tps, cut);
    report.elements.push_back({el.label, cert.local, cert.residual, cert.operator_rank});
    report.invariant = report.invariant && cert.local;
    report.worst_residual = std::max(report.worst_residual, cert.residual);
  }
  for (std::size_t k = 0; k < rep.generators().size(); ++k) {
    const auto& g = rep.generators()[k];
    if (g.size() != tps.dimension()) throw Error(ErrorKind::DimensionMismatch, "generator does not match the TPS dimension");
    const auto cert = is_sum_local(g, tps, cut);
    report.generators.push_back({"generator " + std::to_string(k), cert.split, cert.residual, 0});
    report.invariant = report.invariant && cert.split;
    report.worst_residual = std::max(report.worst_residual, cert.residual);
  }
  return report;
}

}  // namespace tpslab
