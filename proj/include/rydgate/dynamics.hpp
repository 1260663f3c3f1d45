#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rydgate/atomic_physics.hpp"
#include "rydgate/beam_optics.hpp"
#include "rydgate/types.hpp"

namespace rydgate {

// Amplitudes ordered (r, b, a) at one momentum value.
using RbaAmplitudes = Eigen::Vector3cd;

double generalized_rabi(cplx rabi, double detuning);

// Exact single-pulse propagator for spatially uniform fields, acting on (r, b, a).
Eigen::Matrix3cd plane_wave_matrix(cplx rabi, double tau, double detuning);
RbaAmplitudes plane_wave_step(const RbaAmplitudes& state, cplx rabi, double tau, double detuning);

// -q p/m - hbar q^2/2m: the motional part of the two-photon detuning.
double kinetic_detuning(double wave_number, double momentum, double mass);

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OscillatorMode {
  double omega = 0.0;
  double temperature = 0.0;  // K
  double mass = 0.0;

  double ground_position_width() const;  // sqrt(hbar / 2 m omega)
  double ground_momentum_width() const;  // sqrt(m hbar omega / 2)
  double thermal_factor() const;         // coth(hbar omega / 2 kT)
  double position_width() const;
  double momentum_width() const;
  // Gibbs weights over Fock states, truncated once the remaining tail is below `tail`.
  std::vector<double> gibbs_weights(double tail = 1e-6) const;
};

struct TrapSpec {
  double omega_transverse = khz(100.0);
  double omega_axial = khz(20.0);
  double temperature_axial = 0.0;  // K; transverse motion stays in its ground state

  void validate() const;
};

// Motion along the beam axis and the two transverse spectator axes of the beams.
struct BeamAxes {
  OscillatorMode beam;
  std::array<OscillatorMode, 2> spectators;
};
BeamAxes beam_axes(const TrapSpec& trap, Geometry geometry, double mass);

// Quadratic beam profile around the common focus.
struct BeamProfile {
  double inv_waist1_sq = 0.0;
  double inv_rayleigh1_sq = 0.0;
  double inv_waist2_sq = 0.0;
  double inv_rayleigh2_sq = 0.0;
  double inv_effective_waist_sq = 0.0;
  double inv_effective_rayleigh = 0.0;     // first-order effective range
  double inv_effective_rayleigh_sq = 0.0;  // second-order effective range

  static BeamProfile plane_wave() { return {}; }
  static BeamProfile from_beams(const GaussianBeam& first, const GaussianBeam& second);
  bool is_plane_wave() const;

  // Omega(z, rho)/Omega(0)
  cplx coupling(double z, double rho_sq) const;
  // Relative change of each beam's intensity, I(z, rho)/I(0) - 1.
  double first_intensity(double z, double rho_sq) const;
  double second_intensity(double z, double rho_sq) const;
};

struct AtomDrive {
  cplx rabi = 0.0;  // effective two-photon Rabi frequency at the focus
  double shift_a = 0.0;
  double shift_b = 0.0;
  double shift_r = 0.0;
  double wave_number = 0.0;  // recoil q along the beam axis
  double mass = 0.0;
  // Two-photon detuning from the dressed, recoil-shifted resonance.
  double two_photon_detuning = 0.0;
  BeamProfile profile;
};

AtomDrive make_atom_drive(const LevelScheme& scheme, const DrivePair& drive, const BeamProfile& profile,
                          double two_photon_detuning = 0.0);

enum class MotionModel { plane_wave, phase_space, momentum_grid };

std::string to_string(MotionModel model);
MotionModel parse_motion_model(std::string_view name);

struct MotionSettings {
  MotionModel model = MotionModel::phase_space;
  int momentum_nodes = 16;
  int position_nodes = 6;
  int spectator_nodes = 4;
  double fock_tail = 1e-6;
  int steps_per_pi = 200;
  double edge_tolerance = 1e-6;
};

struct ProtocolSpec {
  AtomDrive drive;
  double tau_pi = 0.0;
  double blockade_shift = 0.0;
  Geometry geometry = Geometry::circular;
  TrapSpec trap;
  MotionSettings motion;
  int samples_per_stage = 51;

  void validate() const;
};

// Two-atom working space {a, b, r} x {a, b, r}, atom A as the slow index.
inline constexpr int kWorkingLevels = 3;
inline constexpr int kWorkingDim = 9;
inline constexpr std::array<int, kWorkingLevels> kWorkingToAtom{kIndexA, kIndexB, kIndexR};
using WorkingMatrix = Eigen::Matrix<cplx, kWorkingDim, kWorkingDim>;
using LevelMatrix = Eigen::Matrix3cd;  // single atom over (a, b, r)
using LevelVector = Eigen::Vector3cd;

// Embeds a working-space matrix into the full 81-dimensional pair space.
PairMatrix embed_working(const WorkingMatrix& working);

struct StageSamples {
  Atom active = Atom::A;
  double start = 0.0;
  double duration = 0.0;
  std::vector<double> times;
  std::vector<WorkingMatrix> rho;
};

struct ProtocolTrajectory {
  std::array<StageSamples, 3> stages;
  WorkingMatrix final_state;

  PairMatrix final_pair_state() const { return embed_working(final_state); }
  double total_duration() const;
};

// Runs pi (A), 2pi (B), pi (A) on a product input; each atom state is over (a, b, r).
ProtocolTrajectory apply_protocol(const ProtocolSpec& spec, const LevelVector& control, const LevelVector& target);

// Single-atom motional integrals behind apply_protocol, exposed for testing.
struct MotionalSample {
  double weight = 1.0;
  double momentum = 0.0;
  double axial_position = 0.0;  // along the beam axis
  double transverse_sq = 0.0;   // squared distance from the beam axis
};
std::vector<MotionalSample> phase_space_samples(const ProtocolSpec& spec);

// Laser-frame single-atom pulse propagator at a motional sample, over (a, b, r).
LevelMatrix pulse_propagator(const AtomDrive& drive, const MotionalSample& sample, double duration,
                             double blockade_shift = 0.0);
// Propagator of an atom left in the dark while its partner is driven.
LevelMatrix idle_propagator(const AtomDrive& drive, const MotionalSample& sample, double duration);

// Momentum-space amplitudes along the beam axis for one spectator configuration.
struct MomentumGrid {
  double spacing = 0.0;  // kg m/s
  int points = 0;

  double momentum(int i) const { return (i - points / 2) * spacing; }
  static MomentumGrid for_mode(const OscillatorMode& mode, int max_fock);
};

struct MomentumAmplitudes {
  MomentumGrid grid;
  Eigen::VectorXcd a, b, r;  // r is labelled by the ground-state momentum p (stored for p + hbar q)

  double norm() const;
  double edge_probability(int width = 4) const;
  LevelMatrix moments() const;  // sum_p c_s(p) c_s'(p)* dp over (a, b, r)
};

// Harmonic-oscillator eigenfunction n on the grid, times the given spin state.
MomentumAmplitudes fock_state(const MomentumGrid& grid, const OscillatorMode& mode, int n, const LevelVector& spin);

// Integrates one pulse with classical RK4; `observer` (if set) receives the state every
// `sample_every` steps including the initial state.
struct PulseIntegration {
  double duration = 0.0;
  int steps = 0;
  double blockade_shift = 0.0;
  double transverse_sq = 0.0;
};
MomentumAmplitudes momentum_space_step(const MomentumAmplitudes& initial, const AtomDrive& drive,
                                       const PulseIntegration& pulse,
                                       const std::function<void(int, const MomentumAmplitudes&)>& observer = {},
                                       int sample_every = 0);

// Fidelity bound for motional coherent-state displacements of both atoms.
double recoil_fidelity_estimate(const Eigen::Vector3d& control_displacement, const Eigen::Vector3d& target_displacement);
// Coherent displacement of a mode after spending `rydberg_time` with extra momentum hbar q.
double recoil_displacement(double wave_number, double mass, double omega, double rydberg_time);

// Pure spin (x) motion state written on truncated Fock spaces of one mode per atom.
struct SpinMotionState {
  int fock_dim = 0;
  // amplitudes(spin, nA * fock_dim + nB) for the 4 computational spin states
  Eigen::MatrixXcd amplitudes;
};
SpinMotionState coherent_branch_state(const std::array<cplx, 4>& spin_amplitudes, cplx control_alpha,
                                      cplx target_alpha, int fock_dim);
Eigen::Matrix4cd trace_out_motion(const SpinMotionState& state);

}  // namespace rydgate
