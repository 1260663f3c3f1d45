#include "rydgate/dynamics.hpp"

#include <cmath>

#include "rydgate/quadrature.hpp"

namespace rydgate {

namespace {

constexpr cplx kI(0.0, 1.0);
constexpr int kA = 0, kB = 1, kR = 2;  // working level indices

// exp(-i H t) for the 2x2 Hermitian block [[h_bb, h_br], [conj(h_br), h_rr]] in (b, r).
Eigen::Matrix2cd two_level_propagator(double h_bb, double h_rr, cplx h_br, double t) {
  const double mean = 0.5 * (h_bb + h_rr);
  const double half_split = 0.5 * (h_bb - h_rr);
  const double lambda = std::sqrt(half_split * half_split + std::norm(h_br));
  const double c = std::cos(lambda * t);
  // sin(lambda t)/lambda, finite as lambda -> 0
  const double s = lambda * t < 1e-8 ? t : std::sin(lambda * t) / lambda;
  Eigen::Matrix2cd u;
  u(0, 0) = c - kI * s * half_split;
  u(1, 1) = c + kI * s * half_split;
  u(0, 1) = -kI * s * h_br;
  u(1, 0) = -kI * s * std::conj(h_br);
  return std::exp(-kI * mean * t) * u;
}

void kron_add(WorkingMatrix& out, const LevelMatrix& control, const LevelMatrix& target) {
  for (int i = 0; i < kWorkingLevels; ++i)
    for (int j = 0; j < kWorkingLevels; ++j)
      out.block<kWorkingLevels, kWorkingLevels>(kWorkingLevels * i, kWorkingLevels * j) += control(i, j) * target;
}

LevelVector only_ground(const LevelVector& v) { return {v(kA), v(kB), 0.0}; }
LevelVector only_rydberg(const LevelVector& v) { return {0.0, 0.0, v(kR)}; }

double two_photon_detuning_at(const AtomDrive& drive, double momentum) {
  // The recoil energy is absorbed in the resonance condition; the Doppler term remains.
  if (momentum == 0.0) return drive.two_photon_detuning;  // motionless atoms need no mass
  return drive.two_photon_detuning - drive.wave_number * momentum / drive.mass;
}

// Per-atom branch moments: control[stage][i][j][k], target[i][j][k] with i, j in {unblocked, blocked}.
using Moments = std::vector<LevelMatrix>;
struct BranchMoments {
  Moments stage1;                                 // control, before the branch split
  std::array<std::array<Moments, 2>, 2> stage2;  // control idle
  std::array<std::array<Moments, 2>, 2> stage3;  // control second pulse
  std::array<std::array<Moments, 2>, 2> target;  // target 2pi pulse
  std::array<std::array<Moments, 2>, 2> target_idle;  // target in the dark during the last pulse
};

BranchMoments empty_moments(int samples) {
  BranchMoments m;
  m.stage1.assign(samples, LevelMatrix::Zero());
  for (auto* block : {&m.stage2, &m.stage3, &m.target, &m.target_idle})
    for (auto& row : *block)
      for (auto& entry : row) entry.assign(samples, LevelMatrix::Zero());
  return m;
}

void accumulate(Moments& into, double weight, const std::vector<LevelVector>& x, const std::vector<LevelVector>& y) {
  for (std::size_t k = 0; k < into.size(); ++k) into[k] += weight * x[k] * y[k].adjoint();
}

void phase_space_moments(const ProtocolSpec& spec, const LevelVector& control, const LevelVector& target,
                         BranchMoments& out) {
  const int n = spec.samples_per_stage;
  const double tau = spec.tau_pi;
  const auto& drive = spec.drive;
  std::vector<LevelVector> x(n);
  std::array<std::vector<LevelVector>, 2> y{std::vector<LevelVector>(n), std::vector<LevelVector>(n)};
  std::array<std::vector<LevelVector>, 2> z = y, t = y, u = y;

  for (const auto& sample : phase_space_samples(spec)) {
    const double w = sample.weight;
    // control atom, first pulse
    for (int k = 0; k < n; ++k) x[k] = pulse_propagator(drive, sample, tau * k / (n - 1)) * control;
    accumulate(out.stage1, w, x, x);
    const std::array<LevelVector, 2> split{only_ground(x.back()), only_rydberg(x.back())};
    // control atom idles for 2 tau, then the second pulse
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < n; ++k) y[i][k] = idle_propagator(drive, sample, 2.0 * tau * k / (n - 1)) * split[i];
      for (int k = 0; k < n; ++k) z[i][k] = pulse_propagator(drive, sample, tau * k / (n - 1)) * y[i].back();
    }
    // target atom with and without the blockade shift
    for (int i = 0; i < 2; ++i) {
      const double shift = i == 0 ? 0.0 : spec.blockade_shift;
      for (int k = 0; k < n; ++k) t[i][k] = pulse_propagator(drive, sample, 2.0 * tau * k / (n - 1), shift) * target;
      for (int k = 0; k < n; ++k) u[i][k] = idle_propagator(drive, sample, tau * k / (n - 1)) * t[i].back();
    }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        accumulate(out.stage2[i][j], w, y[i], y[j]);
        accumulate(out.stage3[i][j], w, z[i], z[j]);
        accumulate(out.target[i][j], w, t[i], t[j]);
        accumulate(out.target_idle[i][j], w, u[i], u[j]);
      }
  }
}

// Momentum-grid engine: quantum motion along the beam axis, spectators sampled.

LevelMatrix cross_moments(const MomentumAmplitudes& x, const MomentumAmplitudes& y) {
  const std::array<const Eigen::VectorXcd*, 3> xs{&x.a, &x.b, &x.r};
  const std::array<const Eigen::VectorXcd*, 3> ys{&y.a, &y.b, &y.r};
  LevelMatrix m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = xs[i]->dot(*ys[j]) * x.grid.spacing;
  // VectorXcd::dot conjugates the first argument
  return m.conjugate();
}

MomentumAmplitudes project(const MomentumAmplitudes& v, bool rydberg) {
  MomentumAmplitudes out = v;
  if (rydberg) {
    out.a.setZero();
    out.b.setZero();
  } else {
    out.r.setZero();
  }
  return out;
}

MomentumAmplitudes idle_evolve(const MomentumAmplitudes& v, const AtomDrive& drive, double duration) {
  MomentumAmplitudes out = v;
  for (int i = 0; i < v.grid.points; ++i) {
    const double h_rr = drive.shift_b - drive.shift_r - two_photon_detuning_at(drive, v.grid.momentum(i));
    out.r(i) *= std::exp(-kI * h_rr * duration);
  }
  return out;
}

std::vector<MomentumAmplitudes> sampled_pulse(const MomentumAmplitudes& start, const ProtocolSpec& spec,
                                              double duration, double blockade_shift, double transverse_sq) {
  const int n = spec.samples_per_stage;
  const int intervals = n - 1;
  const double pulse_area = duration / spec.tau_pi;  // in units of pi
  // The blocked branch oscillates near the blockade shift; keep omega*dt below 0.02.
  const double fastest = generalized_rabi(spec.drive.rabi, std::abs(spec.drive.two_photon_detuning) + blockade_shift);
  int steps = static_cast<int>(std::lround(spec.motion.steps_per_pi * pulse_area));
  steps = std::max(steps, static_cast<int>(std::ceil(fastest * duration / 0.02)));
  steps = std::max(intervals, (steps + intervals - 1) / intervals * intervals);
  std::vector<MomentumAmplitudes> out;
  out.reserve(n);
  const auto observer = [&](int, const MomentumAmplitudes& v) { out.push_back(v); };
  const auto final = momentum_space_step(start, spec.drive, {duration, steps, blockade_shift, transverse_sq}, observer,
                                         steps / intervals);
  if (final.edge_probability() > spec.motion.edge_tolerance)
    throw ResolutionError("momentum grid: probability at the grid edge exceeds tolerance");
  return out;
}

void accumulate(Moments& into, double weight, const std::vector<MomentumAmplitudes>& x,
                const std::vector<MomentumAmplitudes>& y) {
  for (std::size_t k = 0; k < into.size(); ++k) into[k] += weight * cross_moments(x[k], y[k]);
}

void momentum_grid_moments(const ProtocolSpec& spec, const LevelVector& control, const LevelVector& target,
                           BranchMoments& out) {
  const int n = spec.samples_per_stage;
  const double tau = spec.tau_pi;
  const auto axes = beam_axes(spec.trap, spec.geometry, spec.drive.mass);
  const auto fock_weights = axes.beam.gibbs_weights(spec.motion.fock_tail);
  const auto grid = MomentumGrid::for_mode(axes.beam, static_cast<int>(fock_weights.size()) - 1);

  for (const auto& spectator : phase_space_samples(spec)) {
    for (std::size_t fock = 0; fock < fock_weights.size(); ++fock) {
      const double w = spectator.weight * fock_weights[fock];
      const double rho_sq = spectator.transverse_sq;
      const auto x = sampled_pulse(fock_state(grid, axes.beam, static_cast<int>(fock), control), spec, tau, 0.0, rho_sq);
      accumulate(out.stage1, w, x, x);
      std::array<std::vector<MomentumAmplitudes>, 2> y, z, t, u;
      for (int i = 0; i < 2; ++i) {
        const auto split = project(x.back(), i == 1);
        for (int k = 0; k < n; ++k) y[i].push_back(idle_evolve(split, spec.drive, 2.0 * tau * k / (n - 1)));
        z[i] = sampled_pulse(y[i].back(), spec, tau, 0.0, rho_sq);
        t[i] = sampled_pulse(fock_state(grid, axes.beam, static_cast<int>(fock), target), spec, 2.0 * tau,
                             i == 0 ? 0.0 : spec.blockade_shift, rho_sq);
        for (int k = 0; k < n; ++k) u[i].push_back(idle_evolve(t[i].back(), spec.drive, tau * k / (n - 1)));
      }
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          accumulate(out.stage2[i][j], w, y[i], y[j]);
          accumulate(out.stage3[i][j], w, z[i], z[j]);
          accumulate(out.target[i][j], w, t[i], t[j]);
          accumulate(out.target_idle[i][j], w, u[i], u[j]);
        }
    }
  }
}

std::vector<MotionalSample> spectator_samples(const ProtocolSpec& spec) {
  const auto axes = beam_axes(spec.trap, spec.geometry, spec.drive.mass);
  const auto rule = gauss_hermite(spec.motion.spectator_nodes);
  const double s0 = axes.spectators[0].position_width();
  const double s1 = axes.spectators[1].position_width();
  std::vector<MotionalSample> out;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double x = s0 * rule.nodes[i], y = s1 * rule.nodes[j];
      out.push_back({rule.weights[i] * rule.weights[j], 0.0, 0.0, x * x + y * y});
    }
  return out;
}

}  // namespace

double generalized_rabi(cplx rabi, double detuning) { return std::hypot(std::abs(rabi), detuning); }

Eigen::Matrix3cd plane_wave_matrix(cplx rabi, double tau, double detuning) {
  const double magnitude = std::abs(rabi);
  const double phi = std::arg(rabi);
  const double omega_p = generalized_rabi(rabi, detuning);
  const double c = std::cos(omega_p * tau / 2.0);
  const double s = std::sin(omega_p * tau / 2.0);
  // ratios with the generalized Rabi frequency; both vanish with the coupling
  const double detuning_ratio = omega_p > 0.0 ? detuning / omega_p : 0.0;
  const double coupling_ratio = omega_p > 0.0 ? magnitude / omega_p : 0.0;
  const cplx half_phase = std::exp(kI * detuning * tau / 2.0);
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Zero();
  u(0, 0) = (c + kI * detuning_ratio * s) / half_phase;
  u(0, 1) = kI * coupling_ratio * s * std::exp(kI * phi) / half_phase;
  u(1, 0) = kI * coupling_ratio * s * std::exp(-kI * phi) * half_phase;
  u(1, 1) = (c - kI * detuning_ratio * s) * half_phase;
  u(2, 2) = 1.0;
  return u;
}

RbaAmplitudes plane_wave_step(const RbaAmplitudes& state, cplx rabi, double tau, double detuning) {
  return plane_wave_matrix(rabi, tau, detuning) * state;
}

double kinetic_detuning(double wave_number, double momentum, double mass) {
  return -wave_number * momentum / mass - constants::hbar * wave_number * wave_number / (2.0 * mass);
}

double OscillatorMode::ground_position_width() const { return std::sqrt(constants::hbar / (2.0 * mass * omega)); }
double OscillatorMode::ground_momentum_width() const { return std::sqrt(mass * constants::hbar * omega / 2.0); }

double OscillatorMode::thermal_factor() const {
  if (temperature <= 0.0) return 1.0;
  return 1.0 / std::tanh(constants::hbar * omega / (2.0 * constants::k_boltzmann * temperature));
}

double OscillatorMode::position_width() const { return ground_position_width() * std::sqrt(thermal_factor()); }
double OscillatorMode::momentum_width() const { return ground_momentum_width() * std::sqrt(thermal_factor()); }

std::vector<double> OscillatorMode::gibbs_weights(double tail) const {
  if (temperature <= 0.0) return {1.0};
  if (!(tail > 0.0 && tail < 1.0)) throw std::invalid_argument("gibbs_weights: tail must lie in (0, 1)");
  const double ratio = std::exp(-constants::hbar * omega / (constants::k_boltzmann * temperature));
  std::vector<double> weights;
  double remaining = 1.0;  // probability of n >= current
  double p = 1.0 - ratio;
  while (remaining >= tail) {
    weights.push_back(p);
    remaining -= p;
    p *= ratio;
    if (weights.size() > 100000) throw ResolutionError("gibbs_weights: cutoff exceeds 1e5 Fock states");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return weights;
}

void TrapSpec::validate() const {
  if (!(omega_transverse > 0.0) || !(omega_axial > 0.0))
    throw std::invalid_argument("trap: frequencies must be positive");
  if (temperature_axial < 0.0) throw std::invalid_argument("trap: temperature must be non-negative");
}

BeamAxes beam_axes(const TrapSpec& trap, Geometry geometry, double mass) {
  const OscillatorMode axial{trap.omega_axial, trap.temperature_axial, mass};
  const OscillatorMode transverse{trap.omega_transverse, 0.0, mass};
  if (geometry == Geometry::circular) return {axial, {transverse, transverse}};
  return {transverse, {transverse, axial}};
}

BeamProfile BeamProfile::from_beams(const GaussianBeam& first, const GaussianBeam& second) {
  const auto eff = effective_beam_params(first, second);
  BeamProfile p;
  p.inv_waist1_sq = 1.0 / (first.waist() * first.waist());
  p.inv_rayleigh1_sq = 1.0 / (first.rayleigh_range() * first.rayleigh_range());
  p.inv_waist2_sq = 1.0 / (second.waist() * second.waist());
  p.inv_rayleigh2_sq = 1.0 / (second.rayleigh_range() * second.rayleigh_range());
  p.inv_effective_waist_sq = 1.0 / (eff.waist * eff.waist);
  p.inv_effective_rayleigh = 1.0 / eff.rayleigh_first_order;
  p.inv_effective_rayleigh_sq = 1.0 / (eff.rayleigh_second_order * eff.rayleigh_second_order);
  return p;
}

bool BeamProfile::is_plane_wave() const {
  return inv_waist1_sq == 0.0 && inv_rayleigh1_sq == 0.0 && inv_waist2_sq == 0.0 && inv_rayleigh2_sq == 0.0 &&
         inv_effective_waist_sq == 0.0 && inv_effective_rayleigh == 0.0 && inv_effective_rayleigh_sq == 0.0;
}

cplx BeamProfile::coupling(double z, double rho_sq) const {
  return cplx(1.0 - z * z * inv_effective_rayleigh_sq - 2.0 * rho_sq * inv_effective_waist_sq,
              2.0 * z * inv_effective_rayleigh);
}

double BeamProfile::first_intensity(double z, double rho_sq) const {
  return -z * z * inv_rayleigh1_sq - 2.0 * rho_sq * inv_waist1_sq;
}

double BeamProfile::second_intensity(double z, double rho_sq) const {
  return -z * z * inv_rayleigh2_sq - 2.0 * rho_sq * inv_waist2_sq;
}

AtomDrive make_atom_drive(const LevelScheme& scheme, const DrivePair& drive, const BeamProfile& profile,
                          double two_photon_detuning) {
  AtomDrive d;
  d.rabi = effective_two_photon_rabi(drive, scheme);
  d.shift_a = light_shift(scheme.qubit_a(), drive, scheme);
  d.shift_b = light_shift(scheme.qubit_b(), drive, scheme);
  d.shift_r = light_shift(scheme.rydberg(), drive, scheme);
  d.wave_number = drive.recoil_wave_number();
  d.mass = scheme.species().mass;
  d.two_photon_detuning = two_photon_detuning;
  d.profile = profile;
  return d;
}

std::string to_string(MotionModel model) {
  switch (model) {
    case MotionModel::plane_wave: return "plane_wave";
    case MotionModel::phase_space: return "phase_space";
    case MotionModel::momentum_grid: return "momentum_grid";
  }
  return "unknown";
}

MotionModel parse_motion_model(std::string_view name) {
  if (name == "plane_wave") return MotionModel::plane_wave;
  if (name == "phase_space") return MotionModel::phase_space;
  if (name == "momentum_grid") return MotionModel::momentum_grid;
  throw std::invalid_argument("unknown motion model: " + std::string(name));
}

void ProtocolSpec::validate() const {
  if (!(tau_pi > 0.0)) throw std::invalid_argument("protocol: tau_pi must be positive");
  if (blockade_shift < 0.0) throw std::invalid_argument("protocol: blockade shift must be non-negative");
  if (samples_per_stage < 3 || samples_per_stage % 2 == 0)
    throw std::invalid_argument("protocol: samples per stage must be odd and at least 3");
  if (motion.model != MotionModel::plane_wave && !(drive.mass > 0.0))
    throw std::invalid_argument("protocol: motional models need the atomic mass");
  if (motion.momentum_nodes < 1 || motion.position_nodes < 1 || motion.spectator_nodes < 1)
    throw std::invalid_argument("protocol: node counts must be positive");
  if (motion.steps_per_pi < 1) throw std::invalid_argument("protocol: steps per pi must be positive");
  trap.validate();
}

PairMatrix embed_working(const WorkingMatrix& working) {
  PairMatrix full = PairMatrix::Zero(kPairDim, kPairDim);
  for (int i = 0; i < kWorkingDim; ++i)
    for (int j = 0; j < kWorkingDim; ++j) {
      const int row = pair_index(kWorkingToAtom[i / 3], kWorkingToAtom[i % 3]);
      const int col = pair_index(kWorkingToAtom[j / 3], kWorkingToAtom[j % 3]);
      full(row, col) = working(i, j);
    }
  return full;
}

double ProtocolTrajectory::total_duration() const {
  return stages.back().start + stages.back().duration - stages.front().start;
}

std::vector<MotionalSample> phase_space_samples(const ProtocolSpec& spec) {
  if (spec.motion.model == MotionModel::plane_wave) return {MotionalSample{}};
  if (spec.motion.model == MotionModel::momentum_grid) return spectator_samples(spec);
  const auto axes = beam_axes(spec.trap, spec.geometry, spec.drive.mass);
  const auto momenta = gauss_hermite(spec.motion.momentum_nodes);
  const auto positions = gauss_hermite(spec.motion.position_nodes);
  const auto spectators = spectator_samples(spec);
  const double sp = axes.beam.momentum_width();
  const double sz = axes.beam.position_width();
  std::vector<MotionalSample> out;
  out.reserve(momenta.nodes.size() * positions.nodes.size() * spectators.size());
  for (std::size_t i = 0; i < momenta.nodes.size(); ++i)
    for (std::size_t j = 0; j < positions.nodes.size(); ++j)
      for (const auto& s : spectators)
        out.push_back({momenta.weights[i] * positions.weights[j] * s.weight, sp * momenta.nodes[i],
                       sz * positions.nodes[j], s.transverse_sq});
  return out;
}

LevelMatrix pulse_propagator(const AtomDrive& drive, const MotionalSample& sample, double duration,
                             double blockade_shift) {
  const auto& profile = drive.profile;
  const double first = profile.first_intensity(sample.axial_position, sample.transverse_sq);
  const double second = profile.second_intensity(sample.axial_position, sample.transverse_sq);
  const cplx rabi = drive.rabi * profile.coupling(sample.axial_position, sample.transverse_sq);
  const double detuning = two_photon_detuning_at(drive, sample.momentum) - blockade_shift;
  const double h_aa = drive.shift_a * (1.0 + first);
  const double h_bb = drive.shift_b * (1.0 + first);
  const double h_rr = drive.shift_b + drive.shift_r * second - detuning;
  const auto block = two_level_propagator(h_bb, h_rr, -std::conj(rabi) / 2.0, duration);
  LevelMatrix u = LevelMatrix::Zero();
  u(kA, kA) = std::exp(-kI * h_aa * duration);
  u(kB, kB) = block(0, 0);
  u(kB, kR) = block(0, 1);
  u(kR, kB) = block(1, 0);
  u(kR, kR) = block(1, 1);
  return u;
}

LevelMatrix idle_propagator(const AtomDrive& drive, const MotionalSample& sample, double duration) {
  LevelMatrix u = LevelMatrix::Identity();
  const double h_rr = drive.shift_b - drive.shift_r - two_photon_detuning_at(drive, sample.momentum);
  u(kR, kR) = std::exp(-kI * h_rr * duration);
  return u;
}

ProtocolTrajectory apply_protocol(const ProtocolSpec& spec, const LevelVector& control, const LevelVector& target) {
  spec.validate();
  const int n = spec.samples_per_stage;
  const double tau = spec.tau_pi;
  auto moments = empty_moments(n);
  if (spec.motion.model == MotionModel::momentum_grid)
    momentum_grid_moments(spec, control, target, moments);
  else
    phase_space_moments(spec, control, target, moments);

  ProtocolTrajectory out;
  const std::array<double, 3> durations{tau, 2.0 * tau, tau};
  const std::array<Atom, 3> active{Atom::A, Atom::B, Atom::A};
  double start = 0.0;
  for (int s = 0; s < 3; ++s) {
    auto& stage = out.stages[s];
    stage.active = active[s];
    stage.start = start;
    stage.duration = durations[s];
    for (int k = 0; k < n; ++k) {
      stage.times.push_back(start + durations[s] * k / (n - 1));
      WorkingMatrix rho = WorkingMatrix::Zero();
      if (s == 0) {
        kron_add(rho, moments.stage1[k], target * target.adjoint());
      } else {
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const auto& control_part = s == 1 ? moments.stage2[i][j][k] : moments.stage3[i][j][k];
            const auto& target_part = s == 1 ? moments.target[i][j][k] : moments.target_idle[i][j][k];
            kron_add(rho, control_part, target_part);
          }
      }
      stage.rho.push_back(rho);
    }
    start += durations[s];
  }
  out.final_state = out.stages.back().rho.back();
  return out;
}

MomentumGrid MomentumGrid::for_mode(const OscillatorMode& mode, int max_fock) {
  const double scale = std::sqrt(2.0) * mode.ground_momentum_width();  // p = scale * xi
  const double turning = std::sqrt(2.0 * max_fock + 1.0);
  const double extent = std::max(turning + 8.0, 6.0 * mode.momentum_width() / scale);
  const double step = std::min(0.25, std::numbers::pi / (8.0 * turning));
  const int half = static_cast<int>(std::ceil(extent / step));
  return {step * scale, 2 * half + 1};
}

double MomentumAmplitudes::norm() const {
  return (a.squaredNorm() + b.squaredNorm() + r.squaredNorm()) * grid.spacing;
}

double MomentumAmplitudes::edge_probability(int width) const {
  double sum = 0.0;
  for (int i = 0; i < width; ++i)
    for (int j : {i, grid.points - 1 - i}) sum += std::norm(a(j)) + std::norm(b(j)) + std::norm(r(j));
  return sum * grid.spacing;
}

LevelMatrix MomentumAmplitudes::moments() const { return cross_moments(*this, *this); }

MomentumAmplitudes fock_state(const MomentumGrid& grid, const OscillatorMode& mode, int n, const LevelVector& spin) {
  const double scale = std::sqrt(2.0) * mode.ground_momentum_width();
  Eigen::VectorXd psi(grid.points);
  for (int i = 0; i < grid.points; ++i) {
    const double xi = grid.momentum(i) / scale;
    double previous = 0.0;
    double current = std::pow(std::numbers::pi, -0.25) * std::exp(-xi * xi / 2.0);
    for (int k = 0; k < n; ++k) {
      const double next = std::sqrt(2.0 / (k + 1)) * xi * current - std::sqrt(static_cast<double>(k) / (k + 1)) * previous;
      previous = current;
      current = next;
    }
    psi(i) = current / std::sqrt(scale);
  }
  MomentumAmplitudes out;
  out.grid = grid;
  out.a = spin(kA) * psi.cast<cplx>();
  out.b = spin(kB) * psi.cast<cplx>();
  out.r = spin(kR) * psi.cast<cplx>();
  return out;
}

namespace {

struct FiniteDifference {
  double h;
  Eigen::VectorXcd first(const Eigen::VectorXcd& f) const {
    const int n = static_cast<int>(f.size());
    Eigen::VectorXcd d(n);
    for (int i = 1; i + 1 < n; ++i) d(i) = (f(i + 1) - f(i - 1)) / (2.0 * h);
    d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    d(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
    return d;
  }
  Eigen::VectorXcd second(const Eigen::VectorXcd& f) const {
    const int n = static_cast<int>(f.size());
    Eigen::VectorXcd d(n);
    for (int i = 1; i + 1 < n; ++i) d(i) = (f(i + 1) - 2.0 * f(i) + f(i - 1)) / (h * h);
    d(0) = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (h * h);
    d(n - 1) = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / (h * h);
    return d;
  }
};

// Time derivative with the uniform light-shift phases factored out.
struct GridGenerator {
  const AtomDrive& drive;
  FiniteDifference diff;
  Eigen::VectorXd rydberg_diagonal;  // -detuning(p) on the r component
  double transverse_sq;
  bool plane;

  void operator()(const MomentumAmplitudes& v, MomentumAmplitudes& out) const {
    const auto& prof = drive.profile;
    const double hbar = constants::hbar;
    const cplx half = drive.rabi / 2.0;
    auto light1 = [&](const Eigen::VectorXcd& f) -> Eigen::VectorXcd {
      return hbar * hbar * prof.inv_rayleigh1_sq * diff.second(f) - 2.0 * transverse_sq * prof.inv_waist1_sq * f;
    };
    auto light2 = [&](const Eigen::VectorXcd& f) -> Eigen::VectorXcd {
      return hbar * hbar * prof.inv_rayleigh2_sq * diff.second(f) - 2.0 * transverse_sq * prof.inv_waist2_sq * f;
    };
    // D(sign) = 1 + sign (2 hbar/z*) d/dp + (hbar/z*)^2 d2/dp2 - 2 rho^2/w*^2
    auto coupling = [&](const Eigen::VectorXcd& f, double sign) -> Eigen::VectorXcd {
      if (plane) return f;
      return (1.0 - 2.0 * transverse_sq * prof.inv_effective_waist_sq) * f +
             sign * 2.0 * hbar * prof.inv_effective_rayleigh * diff.first(f) +
             hbar * hbar * prof.inv_effective_rayleigh_sq * diff.second(f);
    };
    Eigen::VectorXcd ha = Eigen::VectorXcd::Zero(v.a.size());
    Eigen::VectorXcd hb = -std::conj(half) * coupling(v.r, -1.0);
    Eigen::VectorXcd hr = rydberg_diagonal.cast<cplx>().cwiseProduct(v.r) - half * coupling(v.b, +1.0);
    if (!plane) {
      ha += drive.shift_a * light1(v.a);
      hb += drive.shift_b * light1(v.b);
      hr += drive.shift_r * light2(v.r);
    }
    out.a = -kI * ha;
    out.b = -kI * hb;
    out.r = -kI * hr;
  }
};

void axpy(MomentumAmplitudes& y, cplx alpha, const MomentumAmplitudes& x) {
  y.a += alpha * x.a;
  y.b += alpha * x.b;
  y.r += alpha * x.r;
}

MomentumAmplitudes with_uniform_phases(const MomentumAmplitudes& v, const AtomDrive& drive, double t) {
  MomentumAmplitudes out = v;
  out.a *= std::exp(-kI * drive.shift_a * t);
  out.b *= std::exp(-kI * drive.shift_b * t);
  out.r *= std::exp(-kI * drive.shift_b * t);
  return out;
}

}  // namespace

MomentumAmplitudes momentum_space_step(const MomentumAmplitudes& initial, const AtomDrive& drive,
                                       const PulseIntegration& pulse,
                                       const std::function<void(int, const MomentumAmplitudes&)>& observer,
                                       int sample_every) {
  if (pulse.steps < 1) throw std::invalid_argument("momentum_space_step: steps must be positive");
  if (initial.grid.points < 5) throw std::invalid_argument("momentum_space_step: grid too small");
  GridGenerator gen{drive, {initial.grid.spacing}, Eigen::VectorXd(initial.grid.points), pulse.transverse_sq,
                    drive.profile.is_plane_wave()};
  for (int i = 0; i < initial.grid.points; ++i)
    gen.rydberg_diagonal(i) = -(two_photon_detuning_at(drive, initial.grid.momentum(i)) - pulse.blockade_shift);

  const double dt = pulse.duration / pulse.steps;
  MomentumAmplitudes state = initial;
  MomentumAmplitudes k1 = state, k2 = state, k3 = state, k4 = state, tmp = state;
  if (observer && sample_every > 0) observer(0, state);
  for (int step = 1; step <= pulse.steps; ++step) {
    gen(state, k1);
    tmp = state;
    axpy(tmp, dt / 2.0, k1);
    gen(tmp, k2);
    tmp = state;
    axpy(tmp, dt / 2.0, k2);
    gen(tmp, k3);
    tmp = state;
    axpy(tmp, dt, k3);
    gen(tmp, k4);
    axpy(state, dt / 6.0, k1);
    axpy(state, dt / 3.0, k2);
    axpy(state, dt / 3.0, k3);
    axpy(state, dt / 6.0, k4);
    if (observer && sample_every > 0 && step % sample_every == 0)
      observer(step, with_uniform_phases(state, drive, step * dt));
  }
  return with_uniform_phases(state, drive, pulse.duration);
}

double recoil_fidelity_estimate(const Eigen::Vector3d& control_displacement, const Eigen::Vector3d& target_displacement) {
  const double a = control_displacement.squaredNorm();
  const double b = target_displacement.squaredNorm();
  return 0.25 * (1.0 + std::exp(-a / 2.0) + std::exp(-b / 2.0) + std::exp(-(a + b) / 2.0));
}

double recoil_displacement(double wave_number, double mass, double omega, double rydberg_time) {
  const double shift = constants::hbar * std::abs(wave_number) / mass * rydberg_time;
  const OscillatorMode mode{omega, 0.0, mass};
  return shift / (2.0 * mode.ground_position_width());
}

SpinMotionState coherent_branch_state(const std::array<cplx, 4>& spin_amplitudes, cplx control_alpha,
                                      cplx target_alpha, int fock_dim) {
  auto coherent = [fock_dim](cplx alpha) {
    Eigen::VectorXcd c(fock_dim);
    c(0) = std::exp(-std::norm(alpha) / 2.0);
    for (int n = 1; n < fock_dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c;
  };
  Eigen::VectorXcd vacuum = Eigen::VectorXcd::Zero(fock_dim);
  vacuum(0) = 1.0;
  const Eigen::VectorXcd displaced_control = coherent(control_alpha);
  const Eigen::VectorXcd displaced_target = coherent(target_alpha);
  SpinMotionState state;
  state.fock_dim = fock_dim;
  state.amplitudes = Eigen::MatrixXcd::Zero(4, fock_dim * fock_dim);
  for (int s = 0; s < 4; ++s) {
    const auto& ca = (s >> 1) ? displaced_control : vacuum;
    const auto& cb = (s & 1) ? displaced_target : vacuum;
    for (int na = 0; na < fock_dim; ++na)
      for (int nb = 0; nb < fock_dim; ++nb) state.amplitudes(s, na * fock_dim + nb) = spin_amplitudes[s] * ca(na) * cb(nb);
  }
  return state;
}

Eigen::Matrix4cd trace_out_motion(const SpinMotionState& state) {
  return state.amplitudes * state.amplitudes.adjoint();
}

}  // namespace rydgate
