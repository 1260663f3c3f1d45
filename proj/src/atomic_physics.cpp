#include "rydgate/atomic_physics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rydgate {

namespace {

using constants::two_pi;

HalfInt twice_of(const nlohmann::json& j, const char* key) { return HalfInt::from_twice(j.at(key).get<int>()); }

std::vector<ZeemanState> rydberg_manifold(const SpeciesData& s) {
  std::vector<ZeemanState> out;
  const int lo = std::abs(s.nuclear_spin.twice() - s.rydberg_J.twice());
  const int hi = s.nuclear_spin.twice() + s.rydberg_J.twice();
  for (int F = lo; F <= hi; F += 2)
    for (int M = -F; M <= F; M += 2) out.push_back({Manifold::rydberg, HalfInt::from_twice(F), HalfInt::from_twice(M)});
  return out;
}

double transition_factor(int mode, const ZeemanState& lower, const ZeemanState& upper, int q,
                         const SpeciesData& s) {
  if (mode == 1) {
    if (lower.manifold != Manifold::ground || upper.manifold != Manifold::intermediate)
      throw std::invalid_argument("mode 1 couples ground to intermediate sublevels");
    return dipole_factor(lower.F, lower.M, s.ground_J, upper.F, upper.M, s.intermediate_J, s.nuclear_spin, q);
  }
  if (mode == 2) {
    if (lower.manifold != Manifold::intermediate || upper.manifold != Manifold::rydberg)
      throw std::invalid_argument("mode 2 couples intermediate to Rydberg sublevels");
    return dipole_factor(lower.F, lower.M, s.intermediate_J, upper.F, upper.M, s.rydberg_J, s.nuclear_spin, q);
  }
  throw std::invalid_argument("drive mode must be 1 or 2");
}

double optical_frequency(double wavelength) { return two_pi * constants::speed_of_light / wavelength; }

}  // namespace

std::string to_string(Geometry g) { return g == Geometry::circular ? "circular" : "linear"; }

Geometry parse_geometry(std::string_view name) {
  if (name == "circular") return Geometry::circular;
  if (name == "linear") return Geometry::linear;
  throw std::invalid_argument("unknown geometry '" + std::string(name) + "'");
}

void SpeciesData::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("species mass must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(rydberg_decay_rate >= 0.0) || !(rydberg_decay_rate < gamma))
    throw std::invalid_argument("Rydberg decay rate must be non-negative and far below gamma");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw std::invalid_argument("wavelengths must be positive");
  if (!(ground_hyperfine > 0.0) || !(intermediate_hyperfine > 0.0))
    throw std::invalid_argument("hyperfine splittings must be positive");
  for (HalfInt j : {nuclear_spin, electron_spin, ground_J, intermediate_J, rydberg_J})
    if (j.twice() < 0) throw std::invalid_argument("negative angular momentum in species data");
}

SpeciesData parse_species(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  SpeciesData s;
  s.name = j.value("name", "unnamed");
  s.mass = j.at("mass_amu").get<double>() * constants::atomic_mass_unit;
  s.nuclear_spin = twice_of(j, "nuclear_spin_twice");
  s.electron_spin = twice_of(j, "electron_spin_twice");
  s.ground_J = twice_of(j, "ground_J_twice");
  s.intermediate_J = twice_of(j, "intermediate_J_twice");
  s.rydberg_J = twice_of(j, "rydberg_J_twice");
  s.gamma = mhz(j.at("gamma_MHz").get<double>());
  const double lifetime_us = j.at("rydberg_lifetime_us").get<double>();
  s.rydberg_decay_rate = lifetime_us > 0.0 ? 1.0 / (lifetime_us * 1e-6) : 0.0;
  s.lambda1 = j.at("lambda1_nm").get<double>() * 1e-9;
  s.lambda2 = j.at("lambda2_nm").get<double>() * 1e-9;
  s.ground_hyperfine = mhz(j.at("ground_hyperfine_MHz").get<double>());
  s.intermediate_hyperfine = mhz(j.at("intermediate_hyperfine_MHz").get<double>());
  s.validate();
  return s;
}

SpeciesData load_species(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open species file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_species(buffer.str());
}

SpeciesData bundled_species() { return load_species(std::filesystem::path(RYDGATE_DATA_DIR) / "rb87.json"); }

double dipole_factor(HalfInt F_lower, HalfInt M_lower, HalfInt J_lower, HalfInt F_upper, HalfInt M_upper,
                     HalfInt J_upper, HalfInt I, int q) {
  if (std::abs(q) > 1) return 0.0;
  const HalfInt photon = HalfInt::integer(1);
  const HalfInt qh = HalfInt::integer(q);
  if (M_lower + qh != M_upper) return 0.0;
  const double cg = clebsch_gordan(F_lower, M_lower, photon, qh, F_upper, M_upper);
  if (cg == 0.0) return 0.0;
  const int exponent_twice = F_lower.twice() + J_upper.twice() + I.twice() + 2;
  const double phase = (exponent_twice / 2) % 2 == 0 ? 1.0 : -1.0;
  return phase * std::sqrt((F_lower.twice() + 1.0) * (J_upper.twice() + 1.0)) *
         wigner_6j(J_upper, F_upper, I, F_lower, J_lower, photon) * cg;
}

LevelScheme::LevelScheme(Geometry geometry, SpeciesData species)
    : geometry_(geometry), species_(std::move(species)), polarization_(geometry == Geometry::circular ? 1 : 0) {
  species_.validate();
  int k = 0;
  for (int F : {1, 2})
    for (int M = -F; M <= F; ++M) ground_[k++] = {Manifold::ground, HalfInt::integer(F), HalfInt::integer(M)};
  k = 0;
  for (int F : {1, 2})
    for (int M = -F; M <= F; ++M)
      intermediate_[k++] = {Manifold::intermediate, HalfInt::integer(F), HalfInt::integer(M)};
  rydberg_ = {Manifold::rydberg, HalfInt::integer(2), HalfInt::integer(geometry == Geometry::circular ? 2 : 0)};

  for (int q = -1; q <= 1; ++q) {
    auto& jq = jump_[q + 1];
    jq.setZero();
    for (int m = 0; m < kGroundDim; ++m)
      for (int n = 0; n < kIntermediateDim; ++n)
        jq(m, n) = dipole_factor(ground_[m].F, ground_[m].M, species_.ground_J, intermediate_[n].F, intermediate_[n].M,
                                 species_.intermediate_J, species_.nuclear_spin, q);
  }

  const auto rydberg_levels = rydberg_manifold(species_);
  for (int q = -1; q <= 1; ++q) {
    double& best1 = strongest_[0][q + 1];
    double& best2 = strongest_[1][q + 1];
    for (const auto& n : intermediate_) {
      for (const auto& g : ground_) best1 = std::max(best1, std::abs(transition_factor(1, g, n, q, species_)));
      for (const auto& r : rydberg_levels) best2 = std::max(best2, std::abs(transition_factor(2, n, r, q, species_)));
    }
  }
}

double LevelScheme::strongest_transition(int mode, int q) const {
  if ((mode != 1 && mode != 2) || std::abs(q) > 1) throw std::invalid_argument("bad mode or polarisation");
  const double best = strongest_[mode - 1][q + 1];
  if (best == 0.0) throw std::invalid_argument("polarisation drives no transition");
  return best;
}

const ZeemanState& LevelScheme::atom_state(int index) const {
  if (index < 0 || index >= kAtomDim) throw std::out_of_range("atom basis index");
  return index == kIndexR ? rydberg_ : ground_[index];
}

double LevelScheme::ground_energy(int g) const { return ground_.at(g).F.twice() == 4 ? species_.ground_hyperfine : 0.0; }

double LevelScheme::intermediate_energy(int n) const {
  return intermediate_.at(n).F.twice() == 4 ? species_.intermediate_hyperfine : 0.0;
}

int LevelScheme::ground_index(HalfInt F, HalfInt M) {
  require_valid_pair(F, M);
  if (F == HalfInt::integer(1)) return 1 + M.twice() / 2;
  if (F == HalfInt::integer(2)) return 5 + M.twice() / 2;
  throw std::invalid_argument("ground manifold has F0 = 1, 2 only");
}

int LevelScheme::intermediate_index(HalfInt F, HalfInt M) { return ground_index(F, M); }

DrivePair make_drive_pair(const LevelScheme& scheme, double rabi1, double rabi2, double detuning_nb) {
  const auto& s = scheme.species();
  DrivePair d;
  d.first = {1, scheme.polarization(), rabi1, two_pi / s.lambda1};
  d.second = {2, scheme.polarization(), rabi2, -two_pi / s.lambda2};
  d.detuning_nb = detuning_nb;
  return d;
}

cplx single_photon_rabi(const DriveField& field, const ZeemanState& lower, const ZeemanState& upper,
                        const LevelScheme& scheme) {
  const double f = transition_factor(field.mode, lower, upper, field.polarization, scheme.species());
  if (f == 0.0) return 0.0;
  return field.peak_rabi * f / scheme.strongest_transition(field.mode, field.polarization);
}

double ground_detuning(const DrivePair& drive, const LevelScheme& scheme, int g, int n) {
  return drive.detuning_nb - scheme.intermediate_energy(n) + scheme.ground_energy(g) -
         scheme.ground_energy(kIndexB);
}

double rydberg_detuning(const DrivePair& drive, const LevelScheme& scheme, int n) {
  return -ground_detuning(drive, scheme, kIndexB, n);
}

cplx effective_two_photon_rabi(const DrivePair& drive, const LevelScheme& scheme, cplx position_scale) {
  const auto& s = scheme.species();
  const double w1 = optical_frequency(s.lambda1);
  const double w2 = optical_frequency(s.lambda2);
  cplx total = 0.0;
  for (int n = 0; n < kIntermediateDim; ++n) {
    const auto& mid = scheme.intermediate()[n];
    const cplx up = single_photon_rabi(drive.second, mid, scheme.rydberg(), scheme);
    const cplx down = single_photon_rabi(drive.first, scheme.qubit_b(), mid, scheme);
    if (up == 0.0 || down == 0.0) continue;
    const double delta_rn = rydberg_detuning(drive, scheme, n);
    if (delta_rn == 0.0) throw std::domain_error("resonant intermediate state");
    total += -0.5 * up * down / (-delta_rn);
    if (drive.counter_rotating_term) {
      const double denom = w2 - delta_rn - w1;
      if (denom == 0.0) throw std::domain_error("resonant counter-rotating denominator");
      total += -0.5 * up * down / denom;
    }
  }
  return total * position_scale;
}

double light_shift(const ZeemanState& state, const DrivePair& drive, const LevelScheme& scheme) {
  double shift = 0.0;
  if (state.manifold == Manifold::ground) {
    const int g = LevelScheme::ground_index(state.F, state.M);
    for (int n = 0; n < kIntermediateDim; ++n) {
      const cplx rabi = single_photon_rabi(drive.first, state, scheme.intermediate()[n], scheme);
      if (rabi == 0.0) continue;
      const double delta = ground_detuning(drive, scheme, g, n);
      if (delta == 0.0) throw std::domain_error("resonant light-shift denominator");
      shift += 0.25 * std::norm(rabi) / delta;
    }
    return shift;
  }
  if (state.manifold == Manifold::rydberg) {
    for (int n = 0; n < kIntermediateDim; ++n) {
      const cplx rabi = single_photon_rabi(drive.second, scheme.intermediate()[n], state, scheme);
      if (rabi == 0.0) continue;
      const double delta = rydberg_detuning(drive, scheme, n);
      if (delta == 0.0) throw std::domain_error("resonant light-shift denominator");
      shift -= 0.25 * std::norm(rabi) / delta;
    }
    return shift;
  }
  throw std::invalid_argument("light shift defined for ground and Rydberg states only");
}

Eigen::Matrix<cplx, kIntermediateDim, kAtomDim> scattering_amplitudes(const LevelScheme& scheme,
                                                                      const DrivePair& drive) {
  Eigen::Matrix<cplx, kIntermediateDim, kAtomDim> amp = Eigen::Matrix<cplx, kIntermediateDim, kAtomDim>::Zero();
  for (int n = 0; n < kIntermediateDim; ++n) {
    const auto& mid = scheme.intermediate()[n];
    for (int g : {kIndexA, kIndexB}) {
      const cplx rabi = single_photon_rabi(drive.first, scheme.ground()[g], mid, scheme);
      if (rabi != 0.0) amp(n, g) = rabi / (2.0 * ground_detuning(drive, scheme, g, n));
    }
    const cplx up = single_photon_rabi(drive.second, mid, scheme.rydberg(), scheme);
    if (up != 0.0) amp(n, kIndexR) = std::conj(up) / (2.0 * ground_detuning(drive, scheme, kIndexB, n));
  }
  return amp;
}

LossRates scattering_rates(const LevelScheme& scheme, const DrivePair& drive) {
  const auto amp = scattering_amplitudes(scheme, drive);
  const double gamma = scheme.species().gamma;
  LossRates rates;
  rates.gamma = gamma;
  rates.rydberg_decay_rate = scheme.species().rydberg_decay_rate;
  rates.w_a = gamma * amp.col(kIndexA).squaredNorm();
  rates.w_b = gamma * amp.col(kIndexB).squaredNorm();
  rates.w_r = gamma * amp.col(kIndexR).squaredNorm();
  const std::array<int, 3> columns = {kIndexA, kIndexB, kIndexR};
  for (int c = 0; c < 3; ++c)
    for (int q = -1; q <= 1; ++q) {
      const Eigen::Matrix<cplx, kGroundDim, 1> out = scheme.jump(q).cast<cplx>() * amp.col(columns[c]);
      rates.branching.col(c) += gamma * out.cwiseAbs2();
    }
  for (int n = 0; n < kIntermediateDim; ++n) {
    const auto& mid = scheme.intermediate()[n];
    const cplx up = single_photon_rabi(drive.second, mid, scheme.rydberg(), scheme);
    const cplx down = single_photon_rabi(drive.first, scheme.qubit_b(), mid, scheme);
    const double delta = ground_detuning(drive, scheme, kIndexB, n);
    rates.cpt_cross[n] = gamma * up * down / (4.0 * delta * delta);
  }
  return rates;
}

DrivePair calibrate_drive(const LevelScheme& scheme, double detuning_nb, double tau_pi, bool counter_rotating_term) {
  if (!(tau_pi > 0.0)) throw std::invalid_argument("tau_pi must be positive");
  DrivePair unit = make_drive_pair(scheme, 1.0, 1.0, detuning_nb);
  unit.counter_rotating_term = counter_rotating_term;
  const double unit_rabi = std::abs(effective_two_photon_rabi(unit, scheme));
  if (unit_rabi == 0.0) throw std::domain_error("geometry has no two-photon coupling");
  const double x = std::sqrt(std::numbers::pi / tau_pi / unit_rabi);
  DrivePair d = make_drive_pair(scheme, x, x, detuning_nb);
  d.counter_rotating_term = counter_rotating_term;
  return d;
}

}  // namespace rydgate
