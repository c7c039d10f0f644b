#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tpslab/galilean.hpp"

using namespace tpslab;
using namespace tpslab::galilean;

namespace {

HalfInteger half(int twice) { return HalfInteger::from_twice(twice); }

std::size_t grid_index(const MomentumGrid& grid, int kx, int ky, int kz) {
  const int n = static_cast<int>(grid.points_per_axis);
  return static_cast<std::size_t>(((kx + n / 2) * n + (ky + n / 2)) * n + (kz + n / 2));
}

// Random state supported on |k_i| <= radius.
MomentumSpinState interior_state(const MomentumGrid& grid, std::size_t spin_dim, int radius, Rng& rng) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(grid.size() * spin_dim));
  std::normal_distribution<double> g;
  for (int x = -radius; x <= radius; ++x)
    for (int y = -radius; y <= radius; ++y)
      for (int z = -radius; z <= radius; ++z)
        for (std::size_t c = 0; c < spin_dim; ++c)
          v(static_cast<Eigen::Index>(grid_index(grid, x, y, z) * spin_dim + c)) = Complex(g(rng), g(rng));
  v /= v.norm();
  return MomentumSpinState(grid, spin_dim, std::move(v));
}

IntMatrix3 multiply(const IntMatrix3& a, const IntMatrix3& b) {
  IntMatrix3 c{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Vec3 rotate(const IntMatrix3& r, const Vec3& x) {
  Vec3 y{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) y[i] += r[i][j] * x[j];
  return y;
}

// Element whose action equals acting with g1 first, then g2.
GalileanElement compose(const GalileanElement& g2, const GalileanElement& g1) {
  GalileanElement g;
  g.b = g1.b + g2.b;
  const Vec3 ra2 = rotate(g1.rotation.matrix, g2.a);
  const Vec3 rv2 = rotate(g1.rotation.matrix, g2.v);
  for (std::size_t i = 0; i < 3; ++i) {
    g.a[i] = g1.a[i] + ra2[i] + g2.b * g1.v[i];
    g.v[i] = g1.v[i] + rv2[i];
  }
  g.rotation = {multiply(g1.rotation.matrix, g2.rotation.matrix), g1.rotation.lift * g2.rotation.lift};
  return g;
}

// Independent Clebsch-Gordan table for j1 (x) j2: highest weight states by
// orthogonal complement, lowered with J-. Rows index the product basis
// (m1, m2 descending), columns index (j descending, m descending).
struct CgTable {
  Matrix coefficients;
  std::vector<std::pair<int, int>> columns;  // (2j, 2m)
};

double lowering(int twice_j, int twice_m) {
  const double j = twice_j / 2.0, m = twice_m / 2.0;
  return std::sqrt(j * (j + 1) - m * (m - 1));
}

CgTable cg_oracle(int tj1, int tj2) {
  const int d1 = tj1 + 1, d2 = tj2 + 1, d = d1 * d2;
  Matrix jm = Matrix::Zero(d, d);
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b) {
      const int m1 = tj1 - 2 * a, m2 = tj2 - 2 * b;
      if (a + 1 < d1) jm((a + 1) * d2 + b, a * d2 + b) += lowering(tj1, m1);
      if (b + 1 < d2) jm(a * d2 + b + 1, a * d2 + b) += lowering(tj2, m2);
    }
  CgTable t;
  t.coefficients = Matrix::Zero(d, d);
  int col = 0;
  for (int tj = tj1 + tj2; tj >= std::abs(tj1 - tj2); tj -= 2) {
    // Highest weight |j j>: within total m = j, orthogonal to earlier columns.
    Vector top = Vector::Zero(d);
    for (int a = 0; a < d1; ++a)
      for (int b = 0; b < d2; ++b)
        if ((tj1 - 2 * a) + (tj2 - 2 * b) == tj) top(a * d2 + b) = 1.0 + 0.1 * a;
    for (int c = 0; c < col; ++c) top -= t.coefficients.col(c).dot(top) * t.coefficients.col(c);
    top /= top.norm();
    // Condon-Shortley: <j1 j1; j2 (j - j1)|j j> > 0.
    for (int b = 0; b < d2; ++b)
      if (std::abs(top(b)) > 1e-12) {
        if (top(b).real() < 0) top = -top;
        break;
      }
    Vector v = top;
    for (int tm = tj; tm >= -tj; tm -= 2) {
      t.coefficients.col(col) = v;
      t.columns.emplace_back(tj, tm);
      ++col;
      if (tm > -tj) v = jm * v / lowering(tj, tm);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("half integers and particle validation") {
  CHECK(HalfInteger::from_double(1.5).twice() == 3);
  CHECK(HalfInteger::from_double(-0.5).twice() == -1);
  CHECK_THROWS_AS(HalfInteger::from_double(0.3), Error);
  CHECK(ParticleSpec{1.0, 0.0, half(1)}.spin_dim() == 2);
  CHECK(ParticleSpec{1.0, 0.0, half(3)}.spin_dim() == 4);
  CHECK_THROWS_AS((ParticleSpec{-1.0, 0.0, half(1)}.validate()), Error);
  CHECK_THROWS_AS((MomentumGrid{7, 1.0, true}.validate()), Error);
}

TEST_CASE("octahedral group") {
  const auto& group = octahedral_group();
  REQUIRE(group.size() == 24);
  const IntMatrix3 id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  CHECK(group.front().matrix == id);
  for (const auto& r : group) {
    CHECK(unitary_deviation(r.lift) < 1e-14);
    const auto image = rotation_from_su2(r.lift);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(image[i][j] - r.matrix[i][j]) < 1e-14);
  }
  for (const auto& a : group)
    for (const auto& b : group) {
      const auto c = multiply(a.matrix, b.matrix);
      bool found = false;
      for (const auto& r : group) found = found || r.matrix == c;
      CHECK(found);
    }
}

TEST_CASE("wigner_d") {
  Rng rng(4);
  const Matrix u1 = random_unitary(2, rng), u2 = random_unitary(2, rng);
  const Matrix s1 = u1 / std::sqrt(u1.determinant()), s2 = u2 / std::sqrt(u2.determinant());
  CHECK((wigner_d(half(1), s1) - s1).norm() < 1e-13);
  CHECK((wigner_d(half(0), s1) - Matrix::Identity(1, 1)).norm() < 1e-13);
  for (int tj : {2, 3, 4}) {
    const Matrix d12 = wigner_d(half(tj), s1 * s2);
    CHECK((d12 - wigner_d(half(tj), s1) * wigner_d(half(tj), s2)).norm() < 1e-12);
    CHECK(unitary_deviation(d12) < 1e-12);
  }
  // exp(-i theta Jz) is diagonal with entries exp(-i theta m).
  const double theta = 0.7;
  Matrix uz = Matrix::Zero(2, 2);
  uz(0, 0) = std::polar(1.0, -theta / 2);
  uz(1, 1) = std::polar(1.0, theta / 2);
  const Matrix d1 = wigner_d(half(2), uz);
  CHECK(std::abs(d1(0, 0) - std::polar(1.0, -theta)) < 1e-14);
  CHECK(std::abs(d1(1, 1) - 1.0) < 1e-14);
  CHECK(std::abs(d1(2, 2) - std::polar(1.0, theta)) < 1e-14);

  const auto j = spin_matrices(half(2));
  const Matrix comm = j[0] * j[1] - j[1] * j[0];
  CHECK((comm - Complex(0, 1) * j[2]).norm() < 1e-14);
  CHECK(((j[0] * j[0] + j[1] * j[1] + j[2] * j[2]) - 2.0 * Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("apply_galilean: identity and translations") {
  const ParticleSpec spec{1.0, 0.3, half(1)};
  const MomentumGrid grid{8, 0.5, true};
  Rng rng(6);
  const auto s = random_momentum_spin_state(grid, spec, rng);
  CHECK((apply_galilean(GalileanElement::identity(), spec, s).amplitudes() - s.amplitudes()).norm() == 0.0);

  GalileanElement t;
  t.a = {0.3, -1.2, 2.5};
  const auto moved = apply_galilean(t, spec, s);
  const int n = 8;
  for (int x = -n / 2; x < n / 2; ++x)
    for (int y = -n / 2; y < n / 2; ++y)
      for (int z = -n / 2; z < n / 2; ++z) {
        const double phase = 0.5 * (t.a[0] * x + t.a[1] * y + t.a[2] * z);
        for (std::size_t c = 0; c < 2; ++c) {
          const auto k = static_cast<Eigen::Index>(grid_index(grid, x, y, z) * 2 + c);
          CHECK(std::abs(moved.amplitudes()(k) - std::polar(1.0, phase) * s.amplitudes()(k)) < 1e-14);
        }
      }

  // Time translation multiplies by exp(-i b E(p)).
  GalileanElement tb;
  tb.b = 1.7;
  const auto evolved = apply_galilean(tb, spec, s);
  const auto k = static_cast<Eigen::Index>(grid_index(grid, 1, -2, 3) * 2 + 1);
  const double energy = 0.25 * (1 + 4 + 9) / 2.0 + 0.3;
  CHECK(std::abs(evolved.amplitudes()(k) - std::polar(1.0, -tb.b * energy) * s.amplitudes()(k)) < 1e-14);
}

TEST_CASE("apply_galilean: boost shifts momentum") {
  const ParticleSpec spec{2.0, 0.0, half(1)};
  const MomentumGrid grid{8, 1.0, true};
  GalileanElement g;
  g.v = {0.5, 0.0, -1.0};  // m v / spacing = (1, 0, -2)
  auto v = Vector::Zero(static_cast<Eigen::Index>(grid.size() * 2)).eval();
  v(static_cast<Eigen::Index>(grid_index(grid, 1, 0, -2) * 2)) = 1.0;
  const auto moved = apply_galilean(g, spec, MomentumSpinState(grid, 2, v));
  // (U phi)(p) = phi(p + m v), so support moves from k to k - m v.
  CHECK(std::abs(std::abs(moved.amplitudes()(static_cast<Eigen::Index>(grid_index(grid, 0, 0, 0) * 2))) - 1.0) < 1e-14);

  g.v = {0.3, 0.0, 0.0};
  CHECK_THROWS_AS(apply_galilean(g, spec, MomentumSpinState(grid, 2, v)), Error);
  try {
    check_compatible(g, spec, grid);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridIncompatible);
  }
}

TEST_CASE("apply_galilean composition law") {
  const ParticleSpec spec{1.5, 0.2, half(1)};
  const MomentumGrid grid{8, 0.75, true};
  Rng rng(19);
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  std::uniform_int_distribution<int> step(-1, 1);
  std::uniform_int_distribution<std::size_t> rot(0, 23);
  auto draw = [&] {
    GalileanElement g;
    g.b = real(rng);
    for (auto& x : g.a) x = real(rng);
    for (auto& x : g.v) x = step(rng) * grid.spacing / spec.mass;
    g.rotation = octahedral_group()[rot(rng)];
    return g;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto g1 = draw(), g2 = draw();
    const auto g12 = compose(g2, g1);
    Complex first_phase;
    for (int k = 0; k < 2; ++k) {
      const auto s = interior_state(grid, 2, 1, rng);
      const Vector two_step = apply_galilean(g2, spec, apply_galilean(g1, spec, s)).amplitudes();
      const Vector direct = apply_galilean(g12, spec, s).amplitudes();
      const Complex overlap = direct.dot(two_step);
      CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-12);
      CHECK((two_step - overlap * direct).norm() < 1e-12);
      if (k == 0) first_phase = overlap;
      else CHECK(std::abs(overlap - first_phase) < 1e-12);
    }
  }
}

TEST_CASE("galilean_operator agrees with apply_galilean") {
  const ParticleSpec spec{1.0, 0.0, half(1)};
  const MomentumGrid grid{4, 1.0, true};
  Rng rng(8);
  for (int i = 0; i < 3; ++i) {
    const auto g = random_compatible_element(spec, grid, rng, 1, 2.0);
    const auto u = galilean_operator(g, spec, grid);
    CHECK(unitary_deviation(u.entries()) < 1e-12);
    const auto s = random_momentum_spin_state(grid, spec, rng);
    CHECK((u.entries() * s.amplitudes() - apply_galilean(g, spec, s).amplitudes()).norm() < 1e-13);
  }
}

TEST_CASE("momentum-spin locality") {
  const ParticleSpec spec{1.0, 0.0, half(1)};
  const MomentumGrid grid{4, 1.0, true};
  Rng rng(12);
  std::vector<GalileanElement> sample;
  GalileanElement boost;
  boost.v = {1.0, -1.0, 0.0};
  sample.push_back(boost);
  GalileanElement rotation;
  rotation.rotation = octahedral_group()[5];
  rotation.a = {0.5, 0.0, 1.0};
  sample.push_back(rotation);
  for (int i = 0; i < 3; ++i) sample.push_back(random_compatible_element(spec, grid, rng));
  std::vector<MomentumSpinState> states;
  for (int i = 0; i < 3; ++i) states.push_back(random_momentum_spin_state(grid, spec, rng));

  const auto report = check_momentum_spin_locality(spec, grid, sample, states, sample.size());
  CHECK(report.all_local);
  CHECK(report.worst_entropy_change < kGalileanEntropyTol);
  CHECK(report.worst_locality_residual < 1e-9);
  for (const auto& e : report.elements) {
    REQUIRE(e.spin_factor_error.has_value());
    CHECK(*e.spin_factor_error < 1e-9);
    CHECK(e.max_norm_change < 1e-12);
  }

  // A boost leaves spin alone: the spin factor is proportional to identity.
  const auto cert = is_local_unitary(galilean_operator(boost, spec, grid), momentum_spin_tps(grid, spec), {{0}});
  REQUIRE(cert.right.has_value());
  CHECK((*cert.right - (*cert.right)(0, 0) * Matrix::Identity(2, 2)).norm() < 1e-12);

  // Spin 1 on the same grid.
  const ParticleSpec spin1{2.0, 0.0, half(2)};
  std::vector<MomentumSpinState> states1{random_momentum_spin_state(grid, spin1, rng)};
  const auto r1 = check_momentum_spin_locality(spin1, grid, {rotation}, states1, 1);
  CHECK(r1.all_local);
  CHECK(*r1.elements[0].spin_factor_error < 1e-9);
}

TEST_CASE("clebsch_gordan against an independent construction") {
  for (int tj1 = 0; tj1 <= 4; ++tj1)
    for (int tj2 = 0; tj2 <= 4; ++tj2) {
      const auto oracle = cg_oracle(tj1, tj2);
      const int d2 = tj2 + 1;
      Matrix table = Matrix::Zero(oracle.coefficients.rows(), oracle.coefficients.cols());
      for (Eigen::Index c = 0; c < table.cols(); ++c) {
        const auto [tj, tm] = oracle.columns[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < table.rows(); ++r) {
          const int m1 = tj1 - 2 * static_cast<int>(r / d2), m2 = tj2 - 2 * static_cast<int>(r % d2);
          table(r, c) = clebsch_gordan(half(tj1), half(tj2), half(tj), half(m1), half(m2), half(tm));
        }
      }
      CHECK((table - oracle.coefficients).norm() < 1e-12);
      CHECK((table.adjoint() * table - Matrix::Identity(table.cols(), table.cols())).norm() < 1e-12);
    }

  const double r = 1.0 / std::numbers::sqrt2;
  CHECK(std::abs(clebsch_gordan(half(1), half(1), half(0), half(1), half(-1), half(0)) - r) < 1e-15);
  CHECK(std::abs(clebsch_gordan(half(1), half(1), half(0), half(-1), half(1), half(0)) + r) < 1e-15);
  CHECK(clebsch_gordan(half(4), half(3), half(7), half(4), half(3), half(7)) == doctest::Approx(1.0));
  CHECK(clebsch_gordan(half(2), half(1), half(1), half(2), half(1), half(1)) == 0.0);
  CHECK(clebsch_gordan(half(2), half(2), half(6), half(2), half(2), half(4)) == 0.0);

  // Unitarity for 1 (x) 1/2.
  for (int tj : {1, 3})
    for (int tm = -tj; tm <= tj; tm += 2) {
      double sum = 0.0;
      for (int m1 = -2; m1 <= 2; m1 += 2)
        for (int m2 = -1; m2 <= 1; m2 += 2) {
          const double c = clebsch_gordan(half(2), half(1), half(tj), half(m1), half(m2), half(tm));
          sum += c * c;
        }
      CHECK(std::abs(sum - 1.0) < 1e-14);
    }
}

TEST_CASE("coupled angular basis block-diagonalizes total angular momentum") {
  for (int s2 : {0, 1, 2})
    for (int l_max : {0, 1, 2}) {
      const auto basis = coupled_angular_basis(l_max, half(s2));
      CHECK(unitary_deviation(basis.adaptor) < 1e-12);
      const auto j = total_angular_momentum(l_max, half(s2));
      const Matrix jz = basis.adaptor.adjoint() * j[2] * basis.adaptor;
      const Matrix j2 = basis.adaptor.adjoint() * (j[0] * j[0] + j[1] * j[1] + j[2] * j[2]) * basis.adaptor;
      for (std::size_t c = 0; c < basis.labels.size(); ++c) {
        const auto& lab = basis.labels[c];
        const auto i = static_cast<Eigen::Index>(c);
        CHECK(std::abs(jz(i, i) - lab.m.value()) < 1e-12);
        CHECK(std::abs(j2(i, i) - lab.j.value() * (lab.j.value() + 1)) < 1e-12);
      }
      CHECK((jz - Matrix(jz.diagonal().asDiagonal())).norm() < 1e-10);
      CHECK((j2 - Matrix(j2.diagonal().asDiagonal())).norm() < 1e-10);
    }
}

TEST_CASE("degeneracy_count") {
  for (int j = 0; j <= 3; ++j) CHECK(degeneracy_count(half(2 * j), half(0), half(0), 3) == 1);
  CHECK(degeneracy_count(half(8), half(0), half(0), 3) == 0);
  CHECK(degeneracy_count(half(0), half(1), half(1), 1) == 2);
  CHECK(degeneracy_count(half(0), half(1), half(1), 5) == 2);
  CHECK(degeneracy_count(half(0), half(1), half(1), 0) == 1);
  // j_min: 0 when both are fermions or both bosons, 1/2 otherwise.
  CHECK(degeneracy_count(half(0), half(1), half(0), 4) == 0);
  CHECK(degeneracy_count(half(1), half(1), half(0), 4) > 0);
  CHECK(degeneracy_count(half(0), half(2), half(0), 4) > 0);
  // l = 1 with S in {0, 1}: j = 1 arises from (1, 0) and (1, 1); l = 0, 2 add (0, 1), (2, 1).
  CHECK(degeneracy_count(half(2), half(1), half(1), 2) == 4);
}
