#pragma once

// Single nonrelativistic particle with spin on a periodic momentum grid,
// carrying the Galilean action with the little group fixed at (0, W), plus
// SU(2) coupling machinery.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tpslab/tps.hpp"

namespace tpslab::galilean {

/// Nonnegative or signed half-integer, stored as twice its value.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  static constexpr HalfInteger from_twice(int twice) { return HalfInteger(twice); }
  /// Rejects values that are not multiples of 1/2.
  static HalfInteger from_double(double value);

  constexpr int twice() const noexcept { return twice_; }
  constexpr double value() const noexcept { return twice_ / 2.0; }
  constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }
  constexpr auto operator<=>(const HalfInteger&) const = default;

 private:
  constexpr explicit HalfInteger(int twice) : twice_(twice) {}
  int twice_ = 0;
};

using Vec3 = std::array<double, 3>;
using IntMatrix3 = std::array<std::array<int, 3>, 3>;

struct ParticleSpec {
  double mass = 1.0;
  double internal_energy = 0.0;
  HalfInteger spin = HalfInteger::from_twice(1);

  std::size_t spin_dim() const { return static_cast<std::size_t>(spin.twice() + 1); }
  void validate() const;
};

/// Points p = spacing * k, k in {-N/2, ..., N/2-1}^3, wrapped periodically.
struct MomentumGrid {
  std::size_t points_per_axis = 8;
  double spacing = 1.0;
  bool periodic = true;

  std::size_t size() const { return points_per_axis * points_per_axis * points_per_axis; }
  void validate() const;
};

/// Proper rotation of the cube with a chosen SU(2) lift.
struct OctahedralRotation {
  IntMatrix3 matrix;
  Matrix lift;  // 2x2, maps onto `matrix` under SU(2) -> SO(3)
};

/// The 24 proper rotations of the cube, identity first.
const std::vector<OctahedralRotation>& octahedral_group();

/// SO(3) image of an SU(2) element: R_ij = tr(sigma_i u sigma_j u^dagger)/2.
std::array<std::array<double, 3>, 3> rotation_from_su2(const Matrix& u);

struct GalileanElement {
  double b = 0.0;  // time translation
  Vec3 a{};        // space translation
  Vec3 v{};        // boost velocity
  OctahedralRotation rotation = octahedral_group().front();
  std::string label;

  static GalileanElement identity();
};

/// Throws GridIncompatible unless m v / spacing is integral per axis and the
/// rotation is a signed permutation whose lift projects onto it.
void check_compatible(const GalileanElement& g, const ParticleSpec& spec, const MomentumGrid& grid);

/// Amplitudes phi_chi(p), index (grid point) * (2s+1) + chi with grid point
/// index (ix*N + iy)*N + iz and k_axis = i_axis - N/2.
class MomentumSpinState {
 public:
  MomentumSpinState(MomentumGrid grid, std::size_t spin_dim, Vector amplitudes);

  const MomentumGrid& grid() const noexcept { return grid_; }
  std::size_t spin_dim() const noexcept { return spin_dim_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  /// Two-factor view (momentum, spin).
  StateVector as_state() const;

 private:
  MomentumGrid grid_;
  std::size_t spin_dim_;
  Vector amplitudes_;
};

/// Spin-j matrices (Jx, Jy, Jz), basis ordered m = j, j-1, ..., -j.
std::array<Matrix, 3> spin_matrices(HalfInteger j);

/// Spin-j representation matrix of an SU(2) element.
Matrix wigner_d(HalfInteger j, const Matrix& u);

/// (U(g) phi)_chi(p) = exp(-i m a.v/2 + i a.p' - i b E') sum_chi' D(R)_{chi' chi} phi_chi'(p'),
/// p' = R p + m v (wrapped), E' = |p'|^2/2m + W.
MomentumSpinState apply_galilean(const GalileanElement& g, const ParticleSpec& spec, const MomentumSpinState& s);

/// Dense U(g) on (momentum, spin).
OperatorMatrix galilean_operator(const GalileanElement& g, const ParticleSpec& spec, const MomentumGrid& grid);

TensorProductStructure momentum_spin_tps(const MomentumGrid& grid, const ParticleSpec& spec);

MomentumSpinState random_momentum_spin_state(const MomentumGrid& grid, const ParticleSpec& spec, Rng& rng);

/// b, a uniform in [-span, span], m v / spacing uniform integers in
/// [-max_boost_steps, max_boost_steps], rotation uniform over the 24.
GalileanElement random_compatible_element(const ParticleSpec& spec, const MomentumGrid& grid, Rng& rng,
                                          int max_boost_steps = 3, double span = 5.0);

struct ElementCheck {
  std::string label;
  double max_entropy_change = 0.0;
  double max_norm_change = 0.0;
  std::optional<bool> local;  // set for materialized elements
  std::optional<double> locality_residual;
  std::optional<double> spin_factor_error;  // ||B - D(R)^T|| up to phase
};

struct LocalityReport {
  std::vector<ElementCheck> elements;
  double worst_entropy_change = 0.0;
  double worst_locality_residual = 0.0;
  bool all_local = true;
};

inline constexpr double kGalileanEntropyTol = 1e-10;

/// Acts on `states` with every element and materializes the first
/// `materialize` elements for an operator-level locality test.
LocalityReport check_momentum_spin_locality(const ParticleSpec& spec, const MomentumGrid& grid,
                                            const std::vector<GalileanElement>& sample,
                                            const std::vector<MomentumSpinState>& states, std::size_t materialize);

/// Condon-Shortley <j1 m1; j2 m2 | j m>; zero when a selection rule fails.
double clebsch_gordan(HalfInteger j1, HalfInteger j2, HalfInteger j, HalfInteger m1, HalfInteger m2, HalfInteger m);

/// Number of (l <= l_max, S) with S in |sA-sB|..sA+sB coupling to j.
int degeneracy_count(HalfInteger j, HalfInteger s_a, HalfInteger s_b, int l_max);

struct CoupledLabel {
  HalfInteger j;
  int l;
  HalfInteger m;
};

/// Columns |(l s) j m> over (+)_{l<=l_max} C^{2l+1} (x) C^{2s+1}; uncoupled
/// index offset(l, m_l) * (2s+1) + chi with offset(l, m_l) = l^2 + (l - m_l).
/// Columns are grouped by j, then l, then m descending.
struct CoupledBasis {
  Matrix adaptor;
  std::vector<CoupledLabel> labels;
  std::size_t orbital_dim = 0;
  std::size_t spin_dim = 0;
};

CoupledBasis coupled_angular_basis(int l_max, HalfInteger s);

/// Total J_i = L_i (x) 1 + 1 (x) S_i on (+)_{l<=l_max} C^{2l+1} (x) C^{2s+1}.
std::array<Matrix, 3> total_angular_momentum(int l_max, HalfInteger s);

}  // namespace tpslab::galilean
