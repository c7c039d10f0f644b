#include "tpslab/galilean.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace tpslab::galilean {

namespace {

constexpr double kCompatTol = 1e-9;

Matrix pauli_x() { Matrix m(2, 2); m << 0, 1, 1, 0; return m; }
Matrix pauli_y() { Matrix m(2, 2); m << 0, Complex(0, -1), Complex(0, 1), 0; return m; }
Matrix pauli_z() { Matrix m(2, 2); m << 1, 0, 0, -1; return m; }

int determinant(const IntMatrix3& r) {
  return r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
         r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
}

// SU(2) element exp(-i theta/2 n.sigma) for the rotation R.
Matrix lift_rotation(const IntMatrix3& r) {
  const double trace = r[0][0] + r[1][1] + r[2][2];
  const double cos_theta = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Vec3 n{0.0, 0.0, 1.0};
  if (theta < 1e-12) return Matrix::Identity(2, 2);
  if (std::abs(theta - std::numbers::pi) < 1e-9) {
    // R = 2 n n^T - 1: pick the column with the largest diagonal entry.
    int col = 0;
    for (int i = 1; i < 3; ++i)
      if (r[i][i] > r[col][col]) col = i;
    const double ncol = std::sqrt((r[col][col] + 1.0) / 2.0);
    for (int i = 0; i < 3; ++i) n[static_cast<std::size_t>(i)] = (i == col) ? ncol : r[i][col] / (2.0 * ncol);
  } else {
    const double s = 2.0 * std::sin(theta);
    n = {(r[2][1] - r[1][2]) / s, (r[0][2] - r[2][0]) / s, (r[1][0] - r[0][1]) / s};
  }
  const Matrix ns = n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z();
  return std::cos(theta / 2) * Matrix::Identity(2, 2) - Complex(0.0, std::sin(theta / 2)) * ns;
}

std::vector<OctahedralRotation> build_octahedral_group() {
  std::vector<OctahedralRotation> group;
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      IntMatrix3 r{};
      for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = (signs >> i) & 1 ? -1 : 1;
      if (determinant(r) != 1) continue;
      group.push_back({r, lift_rotation(r)});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return group;
}

long wrap_index(long k, long n) {
  const long half = n / 2;
  long w = (k + half) % n;
  if (w < 0) w += n;
  return w - half;
}

double entropy_momentum_spin(const Vector& amplitudes, std::size_t grid_size, std::size_t spin_dim) {
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix m = Eigen::Map<const RowMajor>(amplitudes.data(), static_cast<Eigen::Index>(grid_size),
                                              static_cast<Eigen::Index>(spin_dim));
  return entropy_from_coefficients(schmidt_decompose_matrix(m).coefficients);
}

// Precomputed source index and phase for every target grid point.
struct GridAction {
  std::vector<std::size_t> source;
  std::vector<Complex> phase;
  Matrix spin;  // D^s(u)
};

GridAction grid_action(const GalileanElement& g, const ParticleSpec& spec, const MomentumGrid& grid) {
  check_compatible(g, spec, grid);
  const long n = static_cast<long>(grid.points_per_axis);
  const double dp = grid.spacing;
  const double m = spec.mass;
  std::array<long, 3> boost{};
  for (std::size_t i = 0; i < 3; ++i) boost[i] = std::lround(m * g.v[i] / dp);
  const double av = g.a[0] * g.v[0] + g.a[1] * g.v[1] + g.a[2] * g.v[2];
  const auto& r = g.rotation.matrix;

  GridAction act;
  act.source.resize(grid.size());
  act.phase.resize(grid.size());
  std::size_t t = 0;
  for (long ix = 0; ix < n; ++ix)
    for (long iy = 0; iy < n; ++iy)
      for (long iz = 0; iz < n; ++iz, ++t) {
        const std::array<long, 3> k{ix - n / 2, iy - n / 2, iz - n / 2};
        std::array<long, 3> kp{};
        for (std::size_t i = 0; i < 3; ++i)
          kp[i] = wrap_index(r[i][0] * k[0] + r[i][1] * k[1] + r[i][2] * k[2] + boost[i], n);
        const double px = dp * static_cast<double>(kp[0]);
        const double py = dp * static_cast<double>(kp[1]);
        const double pz = dp * static_cast<double>(kp[2]);
        const double energy = (px * px + py * py + pz * pz) / (2.0 * m) + spec.internal_energy;
        const double theta = -0.5 * m * av + g.a[0] * px + g.a[1] * py + g.a[2] * pz - g.b * energy;
        act.phase[t] = std::polar(1.0, theta);
        act.source[t] = static_cast<std::size_t>(((kp[0] + n / 2) * n + (kp[1] + n / 2)) * n + (kp[2] + n / 2));
      }
  act.spin = wigner_d(spec.spin, g.rotation.lift);
  return act;
}

std::vector<double> factorial_table() {
  std::vector<double> f(171, 1.0);
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<double>(i);
  return f;
}

double factorial(int n) {
  static const std::vector<double> table = factorial_table();
  if (n < 0 || n >= static_cast<int>(table.size())) throw Error(ErrorKind::InvalidArgument, "factorial argument out of range");
  return table[static_cast<std::size_t>(n)];
}

std::size_t orbital_offset(int l, int twice_ml) {
  // offset(l, m_l) = l^2 + (l - m_l)
  return static_cast<std::size_t>(l * l + (2 * l - twice_ml) / 2);
}

}  // namespace

HalfInteger HalfInteger::from_double(double value) {
  const double twice = 2.0 * value;
  const double rounded = std::round(twice);
  if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "value is not a multiple of 1/2");
  return HalfInteger(static_cast<int>(rounded));
}

void ParticleSpec::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorKind::InvalidArgument, "particle mass must be positive");
  if (spin.twice() < 0) throw Error(ErrorKind::InvalidArgument, "spin must be nonnegative");
}

void MomentumGrid::validate() const {
  if (points_per_axis == 0 || points_per_axis % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, "momentum grid needs an even positive number of points per axis");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error(ErrorKind::InvalidArgument, "momentum grid spacing must be positive");
  if (!periodic) throw Error(ErrorKind::InvalidArgument, "only periodic momentum grids keep U(g) unitary");
}

const std::vector<OctahedralRotation>& octahedral_group() {
  static const std::vector<OctahedralRotation> group = build_octahedral_group();
  return group;
}

std::array<std::array<double, 3>, 3> rotation_from_su2(const Matrix& u) {
  const std::array<Matrix, 3> s{pauli_x(), pauli_y(), pauli_z()};
  std::array<std::array<double, 3>, 3> r{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r[i][j] = 0.5 * (s[i] * u * s[j] * u.adjoint()).trace().real();
  return r;
}

GalileanElement GalileanElement::identity() {
  GalileanElement g;
  g.label = "identity";
  return g;
}

void check_compatible(const GalileanElement& g, const ParticleSpec& spec, const MomentumGrid& grid) {
  spec.validate();
  grid.validate();
  for (std::size_t i = 0; i < 3; ++i) {
    const double steps = spec.mass * g.v[i] / grid.spacing;
    if (!std::isfinite(steps) || std::abs(steps - std::round(steps)) > kCompatTol) {
      std::ostringstream os;
      os << "boost component " << i << " gives m v / spacing = " << steps << ", not an integer";
      throw Error(ErrorKind::GridIncompatible, os.str());
    }
  }
  const auto& r = g.rotation.matrix;
  for (const auto& row : r) {
    int nonzero = 0;
    for (int x : row) {
      if (x != 0 && x != 1 && x != -1) throw Error(ErrorKind::GridIncompatible, "rotation is not a signed permutation");
      nonzero += x != 0;
    }
    if (nonzero != 1) throw Error(ErrorKind::GridIncompatible, "rotation is not a signed permutation");
  }
  if (determinant(r) != 1) throw Error(ErrorKind::GridIncompatible, "rotation is improper");
  if (g.rotation.lift.rows() != 2 || g.rotation.lift.cols() != 2 || unitary_deviation(g.rotation.lift) > 1e-10)
    throw Error(ErrorKind::GridIncompatible, "rotation lift is not a 2x2 unitary");
  const auto projected = rotation_from_su2(g.rotation.lift);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (std::abs(projected[i][j] - r[i][j]) > 1e-10) throw Error(ErrorKind::GridIncompatible, "rotation lift does not cover the rotation");
}

MomentumSpinState::MomentumSpinState(MomentumGrid grid, std::size_t spin_dim, Vector amplitudes)
    : grid_(grid), spin_dim_(spin_dim), amplitudes_(std::move(amplitudes)) {
  grid_.validate();
  if (spin_dim_ == 0 || static_cast<std::size_t>(amplitudes_.size()) != grid_.size() * spin_dim_)
    throw Error(ErrorKind::DimensionMismatch, "momentum-spin amplitudes do not match grid size times spin dimension");
  if (!(std::abs(amplitudes_.norm() - 1.0) <= kStateNormTol)) throw Error(ErrorKind::InvalidArgument, "momentum-spin state is not normalized");
}

StateVector MomentumSpinState::as_state() const { return StateVector(amplitudes_, Dims{grid_.size(), spin_dim_}); }

std::array<Matrix, 3> spin_matrices(HalfInteger j) {
  if (j.twice() < 0) throw Error(ErrorKind::InvalidArgument, "negative angular momentum");
  const auto d = static_cast<Eigen::Index>(j.twice() + 1);
  const double jj = j.value();
  Matrix jz = Matrix::Zero(d, d);
  Matrix jp = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double m = jj - static_cast<double>(k);
    jz(k, k) = m;
    // <m+1|J+|m> sits at row k-1, column k
    if (k > 0) jp(k - 1, k) = std::sqrt(jj * (jj + 1) - m * (m + 1));
  }
  const Matrix jm = jp.adjoint();
  return {(jp + jm) / 2.0, (jp - jm) / Complex(0.0, 2.0), jz};
}

Matrix wigner_d(HalfInteger j, const Matrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "SU(2) element must be 2x2");
  // u = cos(theta/2) - i sin(theta/2) n.sigma
  const double c = 0.5 * (u(0, 0) + u(1, 1)).real();
  const Vec3 sn{-u(1, 0).imag(), u(1, 0).real(), -u(0, 0).imag()};
  const double s = std::sqrt(sn[0] * sn[0] + sn[1] * sn[1] + sn[2] * sn[2]);
  const auto d = static_cast<Eigen::Index>(j.twice() + 1);
  const double half_theta = std::atan2(s, c);
  if (s < 1e-15) {
    // u = +-1
    const double sign = (c < 0.0 && !j.is_integer()) ? -1.0 : 1.0;
    return sign * Matrix::Identity(d, d);
  }
  const auto js = spin_matrices(j);
  Matrix gen = (sn[0] * js[0] + sn[1] * js[1] + sn[2] * js[2]) * (2.0 * half_theta / s);
  gen = 0.5 * (gen + gen.adjoint());
  return matrix_exponential(OperatorMatrix::hermitian(std::move(gen), Dims{static_cast<std::size_t>(d)}), 1.0).entries();
}

MomentumSpinState apply_galilean(const GalileanElement& g, const ParticleSpec& spec, const MomentumSpinState& s) {
  if (s.spin_dim() != spec.spin_dim()) throw Error(ErrorKind::DimensionMismatch, "state spin dimension differs from the particle spin");
  const auto act = grid_action(g, spec, s.grid());
  const auto sd = static_cast<Eigen::Index>(s.spin_dim());
  const auto& in = s.amplitudes();
  Vector out(in.size());
  // (D^T phi)_chi = sum_chi' D_{chi' chi} phi_chi'
  const Matrix dt = act.spin.transpose();
  for (std::size_t t = 0; t < act.source.size(); ++t) {
    const auto src = static_cast<Eigen::Index>(act.source[t]) * sd;
    out.segment(static_cast<Eigen::Index>(t) * sd, sd) = act.phase[t] * (dt * in.segment(src, sd));
  }
  return MomentumSpinState(s.grid(), s.spin_dim(), std::move(out));
}

OperatorMatrix galilean_operator(const GalileanElement& g, const ParticleSpec& spec, const MomentumGrid& grid) {
  const auto act = grid_action(g, spec, grid);
  const auto sd = static_cast<Eigen::Index>(spec.spin_dim());
  const auto d = static_cast<Eigen::Index>(grid.size()) * sd;
  Matrix u = Matrix::Zero(d, d);
  const Matrix dt = act.spin.transpose();
  for (std::size_t t = 0; t < act.source.size(); ++t)
    u.block(static_cast<Eigen::Index>(t) * sd, static_cast<Eigen::Index>(act.source[t]) * sd, sd, sd) = act.phase[t] * dt;
  return OperatorMatrix(std::move(u), Dims{grid.size(), spec.spin_dim()});
}

TensorProductStructure momentum_spin_tps(const MomentumGrid& grid, const ParticleSpec& spec) {
  return TensorProductStructure::standard(Dims{grid.size(), spec.spin_dim()}, "momentum-spin");
}

MomentumSpinState random_momentum_spin_state(const MomentumGrid& grid, const ParticleSpec& spec, Rng& rng) {
  Vector v = random_vector(grid.size() * spec.spin_dim(), rng);
  v /= v.norm();
  return MomentumSpinState(grid, spec.spin_dim(), std::move(v));
}

GalileanElement random_compatible_element(const ParticleSpec& spec, const MomentumGrid& grid, Rng& rng,
                                          int max_boost_steps, double span) {
  std::uniform_real_distribution<double> real(-span, span);
  std::uniform_int_distribution<int> steps(-max_boost_steps, max_boost_steps);
  std::uniform_int_distribution<std::size_t> rot(0, octahedral_group().size() - 1);
  GalileanElement g;
  g.b = real(rng);
  for (auto& x : g.a) x = real(rng);
  for (auto& x : g.v) x = steps(rng) * grid.spacing / spec.mass;
  const auto r = rot(rng);
  g.rotation = octahedral_group()[r];
  std::ostringstream os;
  os << "g(b=" << g.b << ", v/dv=(" << std::lround(g.v[0] * spec.mass / grid.spacing) << ","
     << std::lround(g.v[1] * spec.mass / grid.spacing) << "," << std::lround(g.v[2] * spec.mass / grid.spacing)
     << "), R#" << r << ")";
  g.label = os.str();
  return g;
}

LocalityReport check_momentum_spin_locality(const ParticleSpec& spec, const MomentumGrid& grid,
                                            const std::vector<GalileanElement>& sample,
                                            const std::vector<MomentumSpinState>& states, std::size_t materialize) {
  LocalityReport report;
  const auto tps = momentum_spin_tps(grid, spec);
  std::vector<double> before;
  for (const auto& s : states) before.push_back(entropy_momentum_spin(s.amplitudes(), grid.size(), spec.spin_dim()));

  for (std::size_t k = 0; k < sample.size(); ++k) {
    const auto& g = sample[k];
    ElementCheck check;
    check.label = g.label;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto moved = apply_galilean(g, spec, states[i]);
      const double e = entropy_momentum_spin(moved.amplitudes(), grid.size(), spec.spin_dim());
      check.max_entropy_change = std::max(check.max_entropy_change, std::abs(e - before[i]));
      check.max_norm_change = std::max(check.max_norm_change, std::abs(moved.amplitudes().norm() - 1.0));
    }
    report.worst_entropy_change = std::max(report.worst_entropy_change, check.max_entropy_change);

    if (k < materialize) {
      const auto u = galilean_operator(g, spec, grid);
      const auto cert = is_local_unitary(u, tps, Bipartition{{0}});
      check.local = cert.local;
      check.locality_residual = cert.residual;
      report.all_local = report.all_local && cert.local;
      report.worst_locality_residual = std::max(report.worst_locality_residual, cert.residual);
      if (cert.local && cert.right) {
        const Matrix expected = wigner_d(spec.spin, g.rotation.lift).transpose();
        const Complex overlap = (expected.adjoint() * *cert.right).trace();
        const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
        check.spin_factor_error = (*cert.right - phase * expected).norm();
      }
    }
    report.elements.push_back(std::move(check));
  }
  return report;
}

double clebsch_gordan(HalfInteger j1, HalfInteger j2, HalfInteger j, HalfInteger m1, HalfInteger m2, HalfInteger m) {
  const int J1 = j1.twice(), J2 = j2.twice(), J = j.twice();
  const int M1 = m1.twice(), M2 = m2.twice(), M = m.twice();
  if (J1 < 0 || J2 < 0 || J < 0) return 0.0;
  if (M != M1 + M2) return 0.0;
  if (std::abs(M1) > J1 || std::abs(M2) > J2 || std::abs(M) > J) return 0.0;
  if ((J1 + M1) % 2 != 0 || (J2 + M2) % 2 != 0 || (J + M) % 2 != 0) return 0.0;
  if (J < std::abs(J1 - J2) || J > J1 + J2 || (J1 + J2 + J) % 2 != 0) return 0.0;

  const int a = (J1 + J2 - J) / 2;
  const int b = (J1 - J2 + J) / 2;
  const int c = (-J1 + J2 + J) / 2;
  const int big = (J1 + J2 + J) / 2 + 1;
  const double triangle = (J + 1) * factorial(a) * factorial(b) * factorial(c) / factorial(big);
  const double projections = factorial((J + M) / 2) * factorial((J - M) / 2) * factorial((J1 - M1) / 2) *
                             factorial((J1 + M1) / 2) * factorial((J2 - M2) / 2) * factorial((J2 + M2) / 2);

  const int t1 = (J1 - M1) / 2;
  const int t2 = (J2 + M2) / 2;
  const int t3 = (J - J2 + M1) / 2;
  const int t4 = (J - J1 - M2) / 2;
  const int kmin = std::max({0, -t3, -t4});
  const int kmax = std::min({a, t1, t2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double denom = factorial(k) * factorial(a - k) * factorial(t1 - k) * factorial(t2 - k) * factorial(t3 + k) *
                         factorial(t4 + k);
    sum += (k % 2 == 0 ? 1.0 : -1.0) / denom;
  }
  return std::sqrt(triangle * projections) * sum;
}

int degeneracy_count(HalfInteger j, HalfInteger s_a, HalfInteger s_b, int l_max) {
  if (l_max < 0) throw Error(ErrorKind::InvalidArgument, "l_max must be nonnegative");
  if (j.twice() < 0 || s_a.twice() < 0 || s_b.twice() < 0) throw Error(ErrorKind::InvalidArgument, "negative angular momentum");
  int count = 0;
  for (int S = std::abs(s_a.twice() - s_b.twice()); S <= s_a.twice() + s_b.twice(); S += 2)
    for (int l = 0; l <= l_max; ++l) {
      const int L = 2 * l;
      const int J = j.twice();
      if (J >= std::abs(L - S) && J <= L + S && (L + S - J) % 2 == 0) ++count;
    }
  return count;
}

std::array<Matrix, 3> total_angular_momentum(int l_max, HalfInteger s) {
  if (l_max < 0) throw Error(ErrorKind::InvalidArgument, "l_max must be nonnegative");
  const auto od = static_cast<Eigen::Index>((l_max + 1) * (l_max + 1));
  std::array<Matrix, 3> orbital{Matrix::Zero(od, od), Matrix::Zero(od, od), Matrix::Zero(od, od)};
  for (int l = 0; l <= l_max; ++l) {
    const auto ls = spin_matrices(HalfInteger::from_twice(2 * l));
    const auto off = static_cast<Eigen::Index>(l * l);
    for (std::size_t i = 0; i < 3; ++i) orbital[i].block(off, off, 2 * l + 1, 2 * l + 1) = ls[i];
  }
  const auto ss = spin_matrices(s);
  const auto sd = static_cast<Eigen::Index>(s.twice() + 1);
  std::array<Matrix, 3> total;
  for (std::size_t i = 0; i < 3; ++i)
    total[i] = kron(orbital[i], Matrix(Matrix::Identity(sd, sd))) + kron(Matrix(Matrix::Identity(od, od)), ss[i]);
  return total;
}

CoupledBasis coupled_angular_basis(int l_max, HalfInteger s) {
  if (l_max < 0) throw Error(ErrorKind::InvalidArgument, "l_max must be nonnegative");
  if (s.twice() < 0) throw Error(ErrorKind::InvalidArgument, "negative spin");
  CoupledBasis basis;
  basis.orbital_dim = static_cast<std::size_t>((l_max + 1) * (l_max + 1));
  basis.spin_dim = static_cast<std::size_t>(s.twice() + 1);
  const auto d = static_cast<Eigen::Index>(basis.orbital_dim * basis.spin_dim);
  basis.adaptor = Matrix::Zero(d, d);

  const int S = s.twice();
  const int jmin = S % 2;  // smallest reachable twice-j
  const int jmax = 2 * l_max + S;
  Eigen::Index col = 0;
  for (int J = jmin; J <= jmax; J += 2)
    for (int l = 0; l <= l_max; ++l) {
      const int L = 2 * l;
      if (J < std::abs(L - S) || J > L + S) continue;
      for (int M = J; M >= -J; M -= 2) {
        for (int ML = -L; ML <= L; ML += 2) {
          const int MS = M - ML;
          if (std::abs(MS) > S) continue;
          const double cg = clebsch_gordan(HalfInteger::from_twice(L), s, HalfInteger::from_twice(J),
                                           HalfInteger::from_twice(ML), HalfInteger::from_twice(MS), HalfInteger::from_twice(M));
          const auto row = orbital_offset(l, ML) * basis.spin_dim + static_cast<std::size_t>((S - MS) / 2);
          basis.adaptor(static_cast<Eigen::Index>(row), col) = cg;
        }
        basis.labels.push_back({HalfInteger::from_twice(J), l, HalfInteger::from_twice(M)});
        ++col;
      }
    }
  if (col != d) throw Error(ErrorKind::NumericalGuard, "coupled basis is incomplete");
  return basis;
}

}  // namespace tpslab::galilean
