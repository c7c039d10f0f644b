#pragma once

// Two distinguishable particles on a periodic 1D lattice, evolved by
// split-step Fourier under H = p_A^2/2m_A + p_B^2/2m_B + V(x_A - x_B).

#include <optional>
#include <string>
#include <vector>

#include "tpslab/tps.hpp"

namespace tpslab::scattering {

enum class PotentialShape { GaussianWell, GaussianBarrier, Contact };

/// Gaussian shapes: V(r) = strength * exp(-r^2 / (2 width^2)).
/// Contact: V = strength / h on coincident sites (h the lattice spacing).
struct Potential {
  PotentialShape shape = PotentialShape::GaussianWell;
  double strength = -2.0;
  double width = 1.0;

  double value(double r, double spacing) const;
};

/// psi(x) ~ exp(-(x - center)^2 / (4 width^2) + i momentum x); width is the
/// position standard deviation.
struct Wavepacket {
  double center = 0.0;
  double momentum = 0.0;
  double width = 1.0;
};

struct ScatteringConfig {
  std::size_t sites = 128;
  double box_length = 64.0;
  double mass_a = 1.0;
  double mass_b = 1.0;
  Potential potential{};
  Wavepacket packet_a{-12.0, 2.0, 2.0};
  Wavepacket packet_b{12.0, -2.0, 2.0};
  double dt = 0.01;
  double t_final = 12.0;

  static ScatteringConfig reference();
  double spacing() const { return box_length / static_cast<double>(sites); }
  double position(std::size_t i) const;
  std::size_t steps() const;
};

inline constexpr double kPacketOverlapTol = 1e-6;

struct Violation {
  std::string field;
  std::string message;
};

/// Every violated invariant; empty when the config is usable.
std::vector<Violation> check_config(const ScatteringConfig& cfg);
/// Bhattacharyya overlap sum_x |phi_A(x)| |phi_B(x)| of the two packets.
double packet_overlap(const ScatteringConfig& cfg);

/// psi(i_A, i_B), with the physical metadata needed to interpret it.
class TwoParticleState {
 public:
  /// Throws unless the norm is 1 within kStateNormTol.
  TwoParticleState(Matrix psi, double box_length, double mass_a, double mass_b);

  const Matrix& psi() const noexcept { return psi_; }
  std::size_t sites() const noexcept { return static_cast<std::size_t>(psi_.rows()); }
  double box_length() const noexcept { return box_length_; }
  double mass_a() const noexcept { return mass_a_; }
  double mass_b() const noexcept { return mass_b_; }
  double norm() const { return psi_.norm(); }
  /// Row-major flattening with dims (N, N).
  StateVector as_state() const;

 private:
  friend class SplitStepPropagator;
  struct Unchecked {};
  TwoParticleState(Matrix psi, double box_length, double mass_a, double mass_b, Unchecked);

  Matrix psi_;
  double box_length_;
  double mass_a_;
  double mass_b_;
};

/// Normalized product of the two configured packets. Throws Config when the
/// config violates any invariant.
TwoParticleState build_initial_state(const ScatteringConfig& cfg);

double interparticle_entropy(const TwoParticleState& state);

/// Injects psi into the (2N-1) x (2N-1) grid over (X, r) = (i_A + i_B,
/// i_A - i_B + N - 1). Requires equal masses.
Matrix com_shear_embed(const TwoParticleState& state);
/// Inverse of com_shear_embed on its image.
Matrix com_shear_extract(const Matrix& embedded, std::size_t sites);

double ie_entropy(const TwoParticleState& state);

struct Observables {
  double norm = 0.0;
  double total_momentum = 0.0;
  double energy = 0.0;
  double rms_momentum = 0.0;  // sqrt(<p_A^2> + <p_B^2>)
};

/// Owns the FFT plans and the state buffer of one trajectory.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const ScatteringConfig& cfg, const TwoParticleState& initial);
  ~SplitStepPropagator();
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  /// One symmetric (Strang) step: half kinetic, full potential, half kinetic.
  void step();
  double time() const noexcept { return time_; }
  TwoParticleState state() const;
  Observables observables();

 private:
  void forward();
  void backward();

  ScatteringConfig cfg_;
  Matrix psi_;
  Matrix work_;
  Matrix half_kinetic_;  // exp(-i T dt/2) / N^2 folded into the inverse FFT
  Matrix potential_phase_;
  RealVector kinetic_;   // T(k_A, k_B), column-major like psi_
  RealVector potential_;
  RealVector k_a_;
  RealVector k_b_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
  double time_ = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double interparticle_entropy = 0.0;
  std::optional<double> ie_entropy;
  double norm = 0.0;
  double total_momentum = 0.0;
  double energy = 0.0;
};

struct EvolveOptions {
  std::size_t sample_every = 10;
  bool compute_ie = true;        // ignored for unequal masses
  double energy_guard = 1e-6;    // relative drift of <H>
  double norm_guard_per_1000 = 1e-10;
  bool keep_snapshots = false;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<TwoParticleState> snapshots;  // at sample times, when requested
  TwoParticleState final_state;
  std::vector<std::string> warnings;
  double norm_drift = 0.0;              // max |norm - norm_0|
  double momentum_drift = 0.0;          // max |<P> - <P>_0| / max(|<P>_0|, p_rms_0)
  double energy_drift = 0.0;            // max |<H> - <H>_0| / |<H>_0|
  std::optional<double> ie_peak_to_peak;
};

/// Throws NumericalGuard when the energy or norm drift exceeds the guards.
Trajectory evolve(const ScatteringConfig& cfg, const TwoParticleState& initial, std::size_t n_steps,
                  const EvolveOptions& options = {});

inline constexpr std::size_t kSplitDimCap = 64;
inline constexpr std::size_t kSplitProductCap = 4096;

struct SplitHamiltonian {
  OperatorMatrix h_ext;
  OperatorMatrix h_int;
  double total_mass = 0.0;
  double reduced_mass = 0.0;

  /// H_ext (x) 1 + 1 (x) H_int on dims (d_P, d_q).
  OperatorMatrix assemble() const;
};

/// H_ext = P^2/2M on a d_P momentum grid; H_int = q^2/2mu + V(r) on a d_q
/// relative-coordinate grid spanning the box.
SplitHamiltonian build_split_model(const ScatteringConfig& cfg, std::size_t d_ext, std::size_t d_int);

SplitHamiltonian random_split_hamiltonian(std::size_t d_ext, std::size_t d_int, Rng& rng);

struct SplitFactorizationReport {
  std::vector<double> times;
  std::vector<double> factorization_residuals;  // per time
  double worst_residual = 0.0;
  double worst_entropy_drift = 0.0;             // over all states and times
  bool passed = false;
};

inline constexpr double kSplitResidualTol = 1e-9;
inline constexpr double kSplitEntropyTol = 1e-9;

SplitFactorizationReport verify_split_factorization(const SplitHamiltonian& sh, const std::vector<double>& times,
                                                    std::size_t n_states, Rng& rng);

}  // namespace tpslab::scattering
