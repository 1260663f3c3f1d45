#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rydgate/angular_momentum.hpp"
#include "rydgate/types.hpp"

namespace rydgate {

enum class Manifold { ground, intermediate, rydberg };

struct ZeemanState {
  Manifold manifold = Manifold::ground;
  HalfInt F;
  HalfInt M;
  friend bool operator==(const ZeemanState&, const ZeemanState&) = default;
};

enum class Geometry { circular, linear };

std::string to_string(Geometry g);
Geometry parse_geometry(std::string_view name);

struct SpeciesData {
  std::string name;
  double mass = 0.0;  // kg
  HalfInt nuclear_spin;
  HalfInt electron_spin;
  HalfInt ground_J;
  HalfInt intermediate_J;
  HalfInt rydberg_J;
  double gamma = 0.0;               // intermediate radiative width, rad/s
  double rydberg_decay_rate = 0.0;  // 1/s
  double lambda1 = 0.0;             // m
  double lambda2 = 0.0;             // m
  double ground_hyperfine = 0.0;        // F0=2 above F0=1, rad/s
  double intermediate_hyperfine = 0.0;  // F=2 above F=1, rad/s

  void validate() const;
};

SpeciesData parse_species(std::string_view json_text);
SpeciesData load_species(const std::filesystem::path& path);
// The Rb-87 dataset shipped in data/.
SpeciesData bundled_species();

// Relative dipole matrix element <upper|d_q|lower> between hyperfine
// sublevels of two fine-structure levels sharing nuclear spin I.
double dipole_factor(HalfInt F_lower, HalfInt M_lower, HalfInt J_lower, HalfInt F_upper, HalfInt M_upper,
                     HalfInt J_upper, HalfInt I, int q);

class LevelScheme {
 public:
  LevelScheme(Geometry geometry, SpeciesData species);

  Geometry geometry() const { return geometry_; }
  int polarization() const { return polarization_; }
  const SpeciesData& species() const { return species_; }

  const std::array<ZeemanState, kGroundDim>& ground() const { return ground_; }
  const std::array<ZeemanState, kIntermediateDim>& intermediate() const { return intermediate_; }
  const ZeemanState& rydberg() const { return rydberg_; }
  ZeemanState qubit_a() const { return ground_[kIndexA]; }
  ZeemanState qubit_b() const { return ground_[kIndexB]; }
  // Per-atom basis state: ground sublevels 0-7, Rydberg 8.
  const ZeemanState& atom_state(int index) const;

  double ground_energy(int g) const;        // relative to F0=1, rad/s
  double intermediate_energy(int n) const;  // relative to F=1, rad/s

  static int ground_index(HalfInt F, HalfInt M);
  static int intermediate_index(HalfInt F, HalfInt M);

  // Spontaneous-emission amplitudes: jump(q)(m, n) is the amplitude for
  // intermediate n to decay to ground m emitting polarisation q.
  const Eigen::Matrix<double, kGroundDim, kIntermediateDim>& jump(int q) const { return jump_[q + 1]; }

  // Largest |dipole_factor| the given beam mode can drive with polarisation q.
  double strongest_transition(int mode, int q) const;

 private:
  Geometry geometry_;
  SpeciesData species_;
  int polarization_;
  std::array<ZeemanState, kGroundDim> ground_;
  std::array<ZeemanState, kIntermediateDim> intermediate_;
  ZeemanState rydberg_;
  std::array<Eigen::Matrix<double, kGroundDim, kIntermediateDim>, 3> jump_;
  std::array<std::array<double, 3>, 2> strongest_{};
};

struct DriveField {
  int mode = 1;           // 1: ground -> intermediate beam, 2: intermediate -> Rydberg beam
  int polarization = 0;   // spherical component q
  double peak_rabi = 0.0; // rad/s on the strongest allowed Zeeman transition of the mode
  double wave_number = 0.0;  // signed, rad/m along the beam axis
};

struct DrivePair {
  DriveField first;
  DriveField second;
  double detuning_nb = 0.0;  // omega_1 minus the |b> -> F=1 intermediate frequency, rad/s
  bool counter_rotating_term = true;

  double recoil_wave_number() const { return first.wave_number + second.wave_number; }
};

DrivePair make_drive_pair(const LevelScheme& scheme, double rabi1, double rabi2, double detuning_nb);

cplx single_photon_rabi(const DriveField& field, const ZeemanState& lower, const ZeemanState& upper,
                        const LevelScheme& scheme);

// omega_1 minus the transition frequency from ground sublevel g to intermediate n.
double ground_detuning(const DrivePair& drive, const LevelScheme& scheme, int g, int n);
// omega_2 minus the transition frequency from intermediate n to the Rydberg state,
// for exact two-photon resonance with |b>.
double rydberg_detuning(const DrivePair& drive, const LevelScheme& scheme, int n);

cplx effective_two_photon_rabi(const DrivePair& drive, const LevelScheme& scheme, cplx position_scale = 1.0);

// Light shift at the beam focus. `state` is a ground sublevel or the Rydberg state.
double light_shift(const ZeemanState& state, const DrivePair& drive, const LevelScheme& scheme);

struct LossRates {
  double w_a = 0.0;
  double w_b = 0.0;
  double w_r = 0.0;
  // Columns: from |a>, |b>, |r>; rows: final ground sublevel.
  Eigen::Matrix<double, kGroundDim, 3> branching = Eigen::Matrix<double, kGroundDim, 3>::Zero();
  double gamma = 0.0;
  double rydberg_decay_rate = 0.0;
  // gamma * Omega2_rn * Omega1_nb / (4 Delta_nb^2) per intermediate n.
  std::array<cplx, kIntermediateDim> cpt_cross{};
};

// amplitudes(n, k) for per-atom basis index k: Omega1_nk/(2 Delta_nk) for the
// qubit states and conj(Omega2_rn)/(2 Delta_nb) for the Rydberg state.
Eigen::Matrix<cplx, kIntermediateDim, kAtomDim> scattering_amplitudes(const LevelScheme& scheme,
                                                                      const DrivePair& drive);

LossRates scattering_rates(const LevelScheme& scheme, const DrivePair& drive);

// Equal beam Rabi frequencies giving |Omega_eff| = pi / tau_pi.
DrivePair calibrate_drive(const LevelScheme& scheme, double detuning_nb, double tau_pi,
                          bool counter_rotating_term = true);

}  // namespace rydgate
