#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpslab/core.hpp"

namespace tpslab {

/// A factorization of C^d: factor dims plus a unitary adaptor whose columns
/// are the TPS-adapted product basis written in the computational basis.
class TensorProductStructure {
 public:
  TensorProductStructure(Dims factor_dims, Matrix adaptor, std::string name);

  /// The computational-basis TPS (identity adaptor).
  static TensorProductStructure standard(Dims factor_dims, std::string name);

  const Dims& factor_dims() const noexcept { return factor_dims_; }
  const Matrix& adaptor() const noexcept { return adaptor_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(adaptor_.rows()); }
  bool identity_adaptor() const noexcept { return identity_; }

  /// adaptor^dagger * s, labelled with the factor dims.
  StateVector to_frame(const StateVector& s) const;
  /// adaptor^dagger * op * adaptor.
  OperatorMatrix to_frame(const OperatorMatrix& op) const;

 private:
  Dims factor_dims_;
  Matrix adaptor_;
  std::string name_;
  bool identity_ = false;
};

struct SymmetryElement {
  std::string label;
  OperatorMatrix op;
};

/// A finite sample of a unitary group representation, optionally with the
/// hermitian generators of its Lie algebra.
class SymmetryRep {
 public:
  SymmetryRep(std::vector<SymmetryElement> elements, std::vector<OperatorMatrix> generators = {});

  const std::vector<SymmetryElement>& elements() const noexcept { return elements_; }
  const std::vector<OperatorMatrix>& generators() const noexcept { return generators_; }

 private:
  std::vector<SymmetryElement> elements_;
  std::vector<OperatorMatrix> generators_;
};

struct LocalityCertificate {
  bool local = false;
  std::size_t operator_rank = 0;
  RealVector spectrum;          // normalized operator Schmidt coefficients
  std::optional<Matrix> left;   // recovered factors when local
  std::optional<Matrix> right;
  double residual = 0.0;        // ||u - A (x) B||_F in the TPS frame when local
};

struct SumLocalityCertificate {
  bool split = false;
  Matrix left;                  // traceless part acting on the left factor
  Matrix right;                 // traceless part acting on the right factor
  double identity_coefficient = 0.0;
  double residual = 0.0;        // ||H - A(x)1 - 1(x)B - c 1||_HS
  double hs_norm = 0.0;
};

struct ElementVerdict {
  std::string label;
  bool local = false;
  double residual = 0.0;
  std::size_t operator_rank = 0;
};

struct InvarianceReport {
  bool invariant = false;
  std::vector<ElementVerdict> elements;
  std::vector<ElementVerdict> generators;  // residual is the sum-locality residual
  double worst_residual = 0.0;
};

inline constexpr double kSumLocalRelTol = 1e-10;

/// Basis vectors (columns of the adaptor) in mixed-radix order of factor_dims.
TensorProductStructure tps_from_basis(const std::vector<StateVector>& basis, const Dims& factor_dims,
                                      std::string name = "tps");

double entanglement_in_tps(const StateVector& s, const TensorProductStructure& tps, const Bipartition& cut);

LocalityCertificate is_local_unitary(const OperatorMatrix& u, const TensorProductStructure& tps, const Bipartition& cut);

SumLocalityCertificate is_sum_local(const OperatorMatrix& h, const TensorProductStructure& tps, const Bipartition& cut);

InvarianceReport is_symmetry_invariant(const TensorProductStructure& tps, const SymmetryRep& rep, const Bipartition& cut);

}  // namespace tpslab
