#include "tpslab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

namespace tpslab::scattering {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Angular wavenumber of DFT bin i on n points over a box of length L.
double wavenumber(std::size_t i, std::size_t n, double box_length) {
  const auto f = static_cast<double>(i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n));
  return 2.0 * std::numbers::pi * f / box_length;
}

// Minimum-image separation on a periodic box.
double wrap_separation(double r, double box_length) {
  r = std::fmod(r + 0.5 * box_length, box_length);
  if (r < 0.0) r += box_length;
  return r - 0.5 * box_length;
}

Vector packet_amplitudes(const ScatteringConfig& cfg, const Wavepacket& w) {
  Vector v(static_cast<Eigen::Index>(cfg.sites));
  for (std::size_t i = 0; i < cfg.sites; ++i) {
    const double x = cfg.position(i);
    const double dx = x - w.center;
    v(static_cast<Eigen::Index>(i)) = std::exp(-dx * dx / (4.0 * w.width * w.width)) * std::polar(1.0, w.momentum * x);
  }
  return v / v.norm();
}

double edge_mass(const Vector& v) {
  const auto n = v.size();
  double m = 0.0;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(2, n); ++i) m += std::norm(v(i)) + std::norm(v(n - 1 - i));
  return m;
}

double edge_mass_two_particle(const Matrix& psi) {
  const auto n = psi.rows();
  double m = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i < 2 || i >= n - 2 || j < 2 || j >= n - 2) m += std::norm(psi(i, j));
  return m;
}

void require_equal_masses(const TwoParticleState& s) {
  if (s.mass_a() != s.mass_b())
    throw Error(ErrorKind::InvalidArgument, "the lattice shear to (X, r) is exact only for equal masses");
}

Matrix dft_matrix(std::size_t n) {
  Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          scale * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n));
  return f;
}

}  // namespace

double Potential::value(double r, double spacing) const {
  switch (shape) {
    case PotentialShape::GaussianWell:
    case PotentialShape::GaussianBarrier:
      return strength * std::exp(-r * r / (2.0 * width * width));
    case PotentialShape::Contact:
      return std::abs(r) < 0.5 * spacing ? strength / spacing : 0.0;
  }
  return 0.0;
}

ScatteringConfig ScatteringConfig::reference() { return ScatteringConfig{}; }

double ScatteringConfig::position(std::size_t i) const { return -0.5 * box_length + spacing() * static_cast<double>(i); }

std::size_t ScatteringConfig::steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }

double packet_overlap(const ScatteringConfig& cfg) {
  const Vector a = packet_amplitudes(cfg, cfg.packet_a);
  const Vector b = packet_amplitudes(cfg, cfg.packet_b);
  return (a.cwiseAbs().array() * b.cwiseAbs().array()).sum();
}

std::vector<Violation> check_config(const ScatteringConfig& cfg) {
  std::vector<Violation> out;
  auto bad = [&out](std::string field, std::string message) { out.push_back({std::move(field), std::move(message)}); };

  if (!is_power_of_two(cfg.sites) || cfg.sites < 8) bad("sites", "must be a power of two, at least 8");
  if (!(cfg.box_length > 0.0)) bad("box_length", "must be positive");
  if (!(cfg.mass_a > 0.0)) bad("mass_a", "must be positive");
  if (!(cfg.mass_b > 0.0)) bad("mass_b", "must be positive");
  if (!(cfg.dt > 0.0)) bad("dt", "must be positive");
  if (!(cfg.t_final >= 0.0)) bad("t_final", "must be nonnegative");
  if (!out.empty()) return out;  // everything below needs a usable grid

  const double h = cfg.spacing();
  const auto& pot = cfg.potential;
  if (pot.shape != PotentialShape::Contact) {
    if (!(pot.width >= h)) bad("potential.width", "must be at least the grid spacing");
    if (pot.shape == PotentialShape::GaussianWell && pot.strength > 0.0) bad("potential.strength", "a well needs strength <= 0");
    if (pot.shape == PotentialShape::GaussianBarrier && pot.strength < 0.0) bad("potential.strength", "a barrier needs strength >= 0");
  }
  const double vmax = pot.shape == PotentialShape::Contact ? std::abs(pot.strength) / h : std::abs(pot.strength);
  if (!(cfg.dt * vmax <= 0.5)) bad("dt", "dt * max|V| exceeds 0.5 rad per step");

  const struct {
    const char* name;
    const Wavepacket& w;
    double mass;
  } packets[] = {{"packet_a", cfg.packet_a, cfg.mass_a}, {"packet_b", cfg.packet_b, cfg.mass_b}};
  bool packets_ok = true;
  for (const auto& p : packets) {
    const std::string f = p.name;
    if (!(p.w.width >= 2.0 * h)) {
      bad(f + ".width", "must be at least two grid spacings");
      packets_ok = false;
      continue;
    }
    const double margin = 0.5 * cfg.box_length - 4.0 * p.w.width;
    if (!(std::abs(p.w.center) <= margin)) bad(f + ".center", "packet must start at least 4 widths from the box edges");
    const double center_final = p.w.center + p.w.momentum / p.mass * cfg.t_final;
    if (!(std::abs(center_final) <= margin))
      bad(f + ".momentum", "free flight reaches within 4 widths of the box edges before t_final");
    const double kmax = std::abs(p.w.momentum) + 5.0 / (2.0 * p.w.width);
    if (!(cfg.dt * kmax * kmax / (2.0 * p.mass) <= 0.5)) bad("dt", std::string("dt * kinetic energy of ") + p.name + " exceeds 0.5 rad per step");
    if (std::abs(p.w.momentum) + 2.0 / p.w.width >= std::numbers::pi / h)
      bad(f + ".momentum", "momentum content within 4 spreads of the mean exceeds the grid Nyquist wavenumber");
    if (edge_mass(packet_amplitudes(cfg, p.w)) >= kPacketOverlapTol) bad(f + ".center", "packet has tail mass at the box edges");
  }
  if (packets_ok) {
    const double overlap = packet_overlap(cfg);
    if (!(overlap < kPacketOverlapTol)) {
      std::ostringstream os;
      os << "wavepackets overlap (" << overlap << " >= " << kPacketOverlapTol << ")";
      bad("packet_b.center", os.str());
    }
  }
  return out;
}

// ---- TwoParticleState ----

TwoParticleState::TwoParticleState(Matrix psi, double box_length, double mass_a, double mass_b)
    : TwoParticleState(std::move(psi), box_length, mass_a, mass_b, Unchecked{}) {
  if (psi_.rows() != psi_.cols() || psi_.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "two-particle amplitudes must be square");
  if (!(std::abs(psi_.norm() - 1.0) <= kStateNormTol)) throw Error(ErrorKind::InvalidArgument, "two-particle state is not normalized");
}

TwoParticleState::TwoParticleState(Matrix psi, double box_length, double mass_a, double mass_b, Unchecked)
    : psi_(std::move(psi)), box_length_(box_length), mass_a_(mass_a), mass_b_(mass_b) {}

StateVector TwoParticleState::as_state() const {
  const auto n = psi_.rows();
  Vector flat(n * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) flat(a * n + b) = psi_(a, b);
  return StateVector::normalized(std::move(flat), Dims{sites(), sites()});
}

TwoParticleState build_initial_state(const ScatteringConfig& cfg) {
  const auto violations = check_config(cfg);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid scattering config:";
    for (const auto& v : violations) os << ' ' << v.field << ": " << v.message << ';';
    throw Error(ErrorKind::Config, os.str());
  }
  const Vector a = packet_amplitudes(cfg, cfg.packet_a);
  const Vector b = packet_amplitudes(cfg, cfg.packet_b);
  Matrix psi = a * b.transpose();
  psi /= psi.norm();
  return TwoParticleState(std::move(psi), cfg.box_length, cfg.mass_a, cfg.mass_b);
}

double interparticle_entropy(const TwoParticleState& state) {
  return entropy_from_coefficients(schmidt_coefficients(state.psi()));
}

Matrix com_shear_embed(const TwoParticleState& state) {
  require_equal_masses(state);
  const auto n = static_cast<Eigen::Index>(state.sites());
  Matrix e = Matrix::Zero(2 * n - 1, 2 * n - 1);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) e(a + b, a - b + n - 1) = state.psi()(a, b);
  return e;
}

Matrix com_shear_extract(const Matrix& embedded, std::size_t sites) {
  const auto n = static_cast<Eigen::Index>(sites);
  if (embedded.rows() != 2 * n - 1 || embedded.cols() != 2 * n - 1)
    throw Error(ErrorKind::DimensionMismatch, "embedded grid must be (2N-1) x (2N-1)");
  Matrix psi(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) psi(a, b) = embedded(a + b, a - b + n - 1);
  return psi;
}

double ie_entropy(const TwoParticleState& state) {
  return entropy_from_coefficients(schmidt_coefficients(com_shear_embed(state)));
}

// ---- propagation ----

SplitStepPropagator::SplitStepPropagator(const ScatteringConfig& cfg, const TwoParticleState& initial)
    : cfg_(cfg), psi_(initial.psi()) {
  const std::size_t n = cfg.sites;
  if (initial.sites() != n) throw Error(ErrorKind::DimensionMismatch, "state size differs from the configured grid");
  const auto ni = static_cast<Eigen::Index>(n);
  work_.resize(ni, ni);
  k_a_.resize(ni);
  k_b_.resize(ni);
  for (std::size_t i = 0; i < n; ++i) {
    k_a_(static_cast<Eigen::Index>(i)) = wavenumber(i, n, cfg.box_length);
    k_b_(static_cast<Eigen::Index>(i)) = wavenumber(i, n, cfg.box_length);
  }
  half_kinetic_.resize(ni, ni);
  potential_phase_.resize(ni, ni);
  kinetic_.resize(ni * ni);
  potential_.resize(ni * ni);
  const double inv = 1.0 / static_cast<double>(n * n);
  for (Eigen::Index b = 0; b < ni; ++b)
    for (Eigen::Index a = 0; a < ni; ++a) {
      const double t = k_a_(a) * k_a_(a) / (2.0 * cfg.mass_a) + k_b_(b) * k_b_(b) / (2.0 * cfg.mass_b);
      kinetic_(a + b * ni) = t;
      half_kinetic_(a, b) = inv * std::polar(1.0, -0.5 * t * cfg.dt);
      const double r = wrap_separation(cfg.position(static_cast<std::size_t>(a)) - cfg.position(static_cast<std::size_t>(b)),
                                       cfg.box_length);
      const double v = cfg.potential.value(r, cfg.spacing());
      potential_(a + b * ni) = v;
      potential_phase_(a, b) = std::polar(1.0, -v * cfg.dt);
    }

  // psi_ is column-major, so memory index a + N b; the 2D DFT is symmetric in
  // its two axes, so frequency (a, b) lands at the same position.
  std::lock_guard lock(planner_mutex());
  auto* data = reinterpret_cast<fftw_complex*>(work_.data());
  forward_plan_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !backward_plan_) throw Error(ErrorKind::NumericalGuard, "FFT planning failed");
}

SplitStepPropagator::~SplitStepPropagator() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void SplitStepPropagator::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }
void SplitStepPropagator::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

void SplitStepPropagator::step() {
  work_ = psi_;
  forward();
  work_.array() *= half_kinetic_.array();
  backward();
  work_.array() *= potential_phase_.array();
  forward();
  work_.array() *= half_kinetic_.array();
  backward();
  psi_ = work_;
  time_ += cfg_.dt;
}

TwoParticleState SplitStepPropagator::state() const {
  return TwoParticleState(psi_, cfg_.box_length, cfg_.mass_a, cfg_.mass_b, TwoParticleState::Unchecked{});
}

Observables SplitStepPropagator::observables() {
  const auto n = psi_.rows();
  Observables o;
  const double norm2 = psi_.squaredNorm();
  o.norm = std::sqrt(norm2);
  work_ = psi_;
  forward();
  const double inv = 1.0 / static_cast<double>(n * n);  // Parseval for the unnormalized DFT
  double p_total = 0.0, kinetic = 0.0, p2 = 0.0, weight = 0.0;
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a) {
      const double w = std::norm(work_(a, b)) * inv;
      weight += w;
      p_total += w * (k_a_(a) + k_b_(b));
      p2 += w * (k_a_(a) * k_a_(a) + k_b_(b) * k_b_(b));
      kinetic += w * kinetic_(a + b * n);
    }
  double potential = 0.0;
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a) potential += std::norm(psi_(a, b)) * potential_(a + b * n);
  o.total_momentum = p_total / weight;
  o.rms_momentum = std::sqrt(p2 / weight);
  o.energy = (kinetic + potential) / norm2;
  return o;
}

Trajectory evolve(const ScatteringConfig& cfg, const TwoParticleState& initial, std::size_t n_steps,
                  const EvolveOptions& options) {
  if (options.sample_every == 0) throw Error(ErrorKind::InvalidArgument, "sample_every must be positive");
  SplitStepPropagator prop(cfg, initial);
  const bool with_ie = options.compute_ie && cfg.mass_a == cfg.mass_b;

  std::vector<TrajectorySample> samples;
  std::vector<TwoParticleState> snapshots;
  std::vector<std::string> warnings;
  double norm_drift = 0.0, momentum_drift = 0.0, energy_drift = 0.0;
  double ie_min = 0.0, ie_max = 0.0;
  bool boundary_warned = false;

  const Observables first = prop.observables();
  const double momentum_scale = std::max(std::abs(first.total_momentum), first.rms_momentum);
  const double energy_scale = std::abs(first.energy) > 0.0 ? std::abs(first.energy) : 1.0;

  auto record = [&](std::size_t step_index) {
    const auto s = prop.state();
    const Observables o = step_index == 0 ? first : prop.observables();
    TrajectorySample smp;
    smp.t = prop.time();
    smp.interparticle_entropy = interparticle_entropy(s);
    if (with_ie) {
      const double ie = ie_entropy(s);
      smp.ie_entropy = ie;
      if (samples.empty()) ie_min = ie_max = ie;
      ie_min = std::min(ie_min, ie);
      ie_max = std::max(ie_max, ie);
    }
    smp.norm = o.norm;
    smp.total_momentum = o.total_momentum;
    smp.energy = o.energy;
    norm_drift = std::max(norm_drift, std::abs(o.norm - first.norm));
    momentum_drift = std::max(momentum_drift, std::abs(o.total_momentum - first.total_momentum) / momentum_scale);
    energy_drift = std::max(energy_drift, std::abs(o.energy - first.energy) / energy_scale);
    if (!boundary_warned && edge_mass_two_particle(s.psi()) > 1e-8) {
      std::ostringstream os;
      os << "boundary contact: tail mass within 2 sites of the box edge exceeds 1e-8 at t = " << smp.t;
      warnings.push_back(os.str());
      boundary_warned = true;
    }
    samples.push_back(smp);
    if (options.keep_snapshots) snapshots.push_back(s);

    const double norm_allowance = options.norm_guard_per_1000 * std::max(1.0, static_cast<double>(step_index) / 1000.0);
    if (norm_drift > norm_allowance) {
      std::ostringstream os;
      os << "norm drift " << norm_drift << " exceeds " << norm_allowance << " after " << step_index << " steps";
      throw Error(ErrorKind::NumericalGuard, os.str());
    }
    if (energy_drift > options.energy_guard) {
      std::ostringstream os;
      os << "energy drift " << energy_drift << " exceeds the guard " << options.energy_guard << " at t = " << smp.t
         << "; reduce dt";
      throw Error(ErrorKind::NumericalGuard, os.str());
    }
  };

  record(0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    prop.step();
    if (k % options.sample_every == 0 || k == n_steps) record(k);
  }

  Trajectory traj{std::move(samples), std::move(snapshots), prop.state(), std::move(warnings), norm_drift, momentum_drift,
                  energy_drift, std::nullopt};
  if (with_ie) traj.ie_peak_to_peak = ie_max - ie_min;
  return traj;
}

// ---- split model ----

OperatorMatrix SplitHamiltonian::assemble() const {
  const auto de = static_cast<Eigen::Index>(h_ext.size());
  const auto di = static_cast<Eigen::Index>(h_int.size());
  Matrix h = kron(h_ext.entries(), Matrix(Matrix::Identity(di, di))) + kron(Matrix(Matrix::Identity(de, de)), h_int.entries());
  return OperatorMatrix::hermitian(std::move(h), Dims{h_ext.size(), h_int.size()});
}

SplitHamiltonian build_split_model(const ScatteringConfig& cfg, std::size_t d_ext, std::size_t d_int) {
  if (d_ext == 0 || d_int == 0 || d_ext > kSplitDimCap || d_int > kSplitDimCap) {
    std::ostringstream os;
    os << "split model dimensions must lie in [1, " << kSplitDimCap << "]";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  if (!(cfg.mass_a > 0.0 && cfg.mass_b > 0.0 && cfg.box_length > 0.0))
    throw Error(ErrorKind::Config, "split model needs positive masses and box length");
  const double total = cfg.mass_a + cfg.mass_b;
  const double reduced = cfg.mass_a * cfg.mass_b / total;

  Matrix h_ext = Matrix::Zero(static_cast<Eigen::Index>(d_ext), static_cast<Eigen::Index>(d_ext));
  for (std::size_t i = 0; i < d_ext; ++i) {
    const double p = 2.0 * std::numbers::pi / cfg.box_length * (static_cast<double>(i) - static_cast<double>(d_ext / 2));
    h_ext(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p * p / (2.0 * total);
  }

  const double h = cfg.box_length / static_cast<double>(d_int);
  const Matrix f = dft_matrix(d_int);
  RealVector t(static_cast<Eigen::Index>(d_int));
  for (std::size_t i = 0; i < d_int; ++i) {
    const double k = wavenumber(i, d_int, cfg.box_length);
    t(static_cast<Eigen::Index>(i)) = k * k / (2.0 * reduced);
  }
  Matrix h_int = f.adjoint() * t.cast<Complex>().asDiagonal() * f;
  for (std::size_t i = 0; i < d_int; ++i) {
    const double r = -0.5 * cfg.box_length + h * static_cast<double>(i);
    h_int(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += cfg.potential.value(r, h);
  }
  h_int = 0.5 * (h_int + h_int.adjoint());

  return SplitHamiltonian{OperatorMatrix::hermitian(std::move(h_ext), Dims{d_ext}),
                          OperatorMatrix::hermitian(std::move(h_int), Dims{d_int}), total, reduced};
}

SplitHamiltonian random_split_hamiltonian(std::size_t d_ext, std::size_t d_int, Rng& rng) {
  return SplitHamiltonian{OperatorMatrix::hermitian(random_hermitian(d_ext, rng), Dims{d_ext}),
                          OperatorMatrix::hermitian(random_hermitian(d_int, rng), Dims{d_int}), 0.0, 0.0};
}

SplitFactorizationReport verify_split_factorization(const SplitHamiltonian& sh, const std::vector<double>& times,
                                                    std::size_t n_states, Rng& rng) {
  const std::size_t de = sh.h_ext.size();
  const std::size_t di = sh.h_int.size();
  if (de * di > kSplitProductCap) {
    std::ostringstream os;
    os << "split factorization check is capped at d_P * d_q <= " << kSplitProductCap;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const Dims dims{de, di};
  const HermitianSpectrum total(sh.assemble());
  const HermitianSpectrum ext(sh.h_ext);
  const HermitianSpectrum in(sh.h_int);
  const auto tps = TensorProductStructure::standard(dims, "IE");
  const Bipartition cut{{0}};

  std::vector<StateVector> states;
  std::vector<double> initial_entropy;
  for (std::size_t k = 0; k < n_states; ++k) {
    states.push_back(random_state(dims, rng));
    initial_entropy.push_back(entanglement_in_tps(states.back(), tps, cut));
  }

  SplitFactorizationReport report;
  report.times = times;
  for (double t : times) {
    const auto u = total.propagator(t);
    const Matrix factored = kron(ext.propagator(t).entries(), in.propagator(t).entries());
    const double residual = (u.entries() - factored).norm();
    report.factorization_residuals.push_back(residual);
    report.worst_residual = std::max(report.worst_residual, residual);
    for (std::size_t k = 0; k < states.size(); ++k) {
      const double e = entanglement_in_tps(apply(u, states[k]), tps, cut);
      report.worst_entropy_drift = std::max(report.worst_entropy_drift, std::abs(e - initial_entropy[k]));
    }
  }
  report.passed = report.worst_residual < kSplitResidualTol && report.worst_entropy_drift < kSplitEntropyTol;
  return report;
}

}  // namespace tpslab::scattering
