#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "rydgate/dynamics.hpp"
#include "rydgate/quadrature.hpp"

using namespace rydgate;

namespace {

constexpr double pi = std::numbers::pi;
const cplx I1(0.0, 1.0);

// Independent construction: exponentiate the 2x2 laser-frame Hamiltonian in (r, b)
// and move r into the frame co-rotating with the detuning.
Eigen::Matrix3cd dense_oracle(cplx rabi, double tau, double detuning) {
  Eigen::Matrix2cd h;
  h << -detuning, -rabi / 2.0, -std::conj(rabi) / 2.0, 0.0;
  const Eigen::Matrix2cd evolved = (-I1 * tau * h).exp();
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Zero();
  u.topLeftCorner<2, 2>() = evolved;
  u.row(0) *= std::exp(-I1 * detuning * tau);
  u(2, 2) = 1.0;
  return u;
}

LevelVector ket(cplx a, cplx b) { return {a, b, 0.0}; }

AtomDrive bare_drive(double tau_pi, double phase = 0.0) {
  AtomDrive d;
  d.rabi = std::polar(pi / tau_pi, phase);
  d.mass = 86.909180527 * constants::atomic_mass_unit;
  d.wave_number = 2 * pi / 780e-9 - 2 * pi / 480e-9;
  return d;
}

ProtocolSpec ideal_spec(double tau_pi = 200e-9) {
  ProtocolSpec spec;
  spec.drive = bare_drive(tau_pi, 0.4);
  spec.tau_pi = tau_pi;
  spec.blockade_shift = 1e7 * pi / tau_pi;
  spec.motion.model = MotionModel::plane_wave;
  return spec;
}

// index 3 * alpha_A + alpha_B in the working space
Eigen::Matrix<cplx, 9, 1> working_ket(const std::array<cplx, 4>& ab_amplitudes) {
  Eigen::Matrix<cplx, 9, 1> v = Eigen::Matrix<cplx, 9, 1>::Zero();
  v(0) = ab_amplitudes[0];
  v(1) = ab_amplitudes[1];
  v(3) = ab_amplitudes[2];
  v(4) = ab_amplitudes[3];
  return v;
}

double overlap(const WorkingMatrix& rho, const Eigen::Matrix<cplx, 9, 1>& psi) {
  return std::real((psi.adjoint() * rho * psi)(0, 0));
}

}  // namespace

TEST_CASE("resonant pulses") {
  const RbaAmplitudes b0(0.0, 1.0, 0.0);
  const double tau = 1e-7;
  const cplx rabi = std::polar(pi / tau, 0.7);
  CHECK(std::norm(plane_wave_step(b0, rabi, tau, 0.0)(0)) == doctest::Approx(1.0).epsilon(1e-14));
  const auto two_pi = plane_wave_step(b0, rabi, 2.0 * tau, 0.0);
  CHECK(std::abs(two_pi(1) + 1.0) < 1e-14);
  CHECK(std::abs(two_pi(0)) < 1e-14);
  const RbaAmplitudes a0(0.0, 0.0, 1.0);
  CHECK((plane_wave_step(a0, rabi, tau, 3e6) - a0).norm() == 0.0);
}

TEST_CASE("propagator agrees with a dense matrix exponential and is unitary") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_unitarity = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const cplx rabi = std::polar(2 * pi * 5e6 * std::abs(u(rng)), pi * u(rng));
    const double detuning = 2 * pi * 10e6 * u(rng);
    const double tau = 1e-6 * std::abs(u(rng));
    const auto m = plane_wave_matrix(rabi, tau, detuning);
    worst = std::max(worst, (m - dense_oracle(rabi, tau, detuning)).cwiseAbs().maxCoeff());
    worst_unitarity = std::max(worst_unitarity, (m.adjoint() * m - Eigen::Matrix3cd::Identity()).norm());
  }
  CHECK(worst < 1e-10);
  CHECK(worst_unitarity < 1e-12);
}

TEST_CASE("blocked excitation is suppressed") {
  const double blockade = 2 * pi * 50e6;
  for (double ratio : {0.02, 0.05, 0.1}) {
    const cplx rabi = ratio * blockade;
    double peak = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double tau = k * 2e-10;
      peak = std::max(peak, std::norm(plane_wave_step({0.0, 1.0, 0.0}, rabi, tau, -blockade)(0)));
    }
    CHECK(peak <= std::norm(rabi) / (std::norm(rabi) + blockade * blockade) * (1 + 1e-9));
    CHECK(peak == doctest::Approx(ratio * ratio).epsilon(0.01));
  }
}

TEST_CASE("kinetic detuning") {
  const double m = 1.4e-25, q = 5e6, p = 3e-27;
  CHECK(kinetic_detuning(q, p, m) == doctest::Approx(-q * p / m - constants::hbar * q * q / (2 * m)));
  CHECK(kinetic_detuning(0.0, p, m) == 0.0);
}

TEST_CASE("laser-frame pulse propagator reduces to the analytic pulse") {
  auto drive = bare_drive(150e-9, -1.1);
  drive.two_photon_detuning = 2 * pi * 0.7e6;
  MotionalSample sample;
  sample.momentum = 2e-27;
  const double tau = 230e-9;
  const double detuning = drive.two_photon_detuning - drive.wave_number * sample.momentum / drive.mass;
  const auto analytic = plane_wave_matrix(drive.rabi, tau, detuning);
  const auto u = pulse_propagator(drive, sample, tau);
  // (a, b, r) versus (r, b, a); the laser frame differs by exp(i detuning tau) on r
  CHECK(std::abs(u(2, 2) - analytic(0, 0) * std::exp(I1 * detuning * tau)) < 1e-12);
  CHECK(std::abs(u(2, 1) - analytic(0, 1) * std::exp(I1 * detuning * tau)) < 1e-12);
  CHECK(std::abs(u(1, 2) - analytic(1, 0)) < 1e-12);
  CHECK(std::abs(u(1, 1) - analytic(1, 1)) < 1e-12);
  CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("light shifts give uniform phases") {
  AtomDrive drive = bare_drive(150e-9);
  drive.rabi = 0.0;
  drive.shift_a = -2 * pi * 1e6;
  drive.shift_b = -2 * pi * 3e6;
  const auto u = pulse_propagator(drive, {}, 100e-9);
  CHECK(std::abs(u(0, 0) - std::exp(-I1 * drive.shift_a * 100e-9)) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::exp(-I1 * drive.shift_b * 100e-9)) < 1e-14);
}

TEST_CASE("Gauss-Hermite moments") {
  const auto rule = gauss_hermite(8);
  double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m0 += w;
    m2 += w * x * x;
    m4 += w * std::pow(x, 4);
    m6 += w * std::pow(x, 6);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("oscillator widths and Gibbs weights") {
  const double mass = 1.443e-25;
  OscillatorMode cold{khz(20), 0.0, mass};
  CHECK(cold.gibbs_weights() == std::vector<double>{1.0});
  CHECK(cold.position_width() * cold.momentum_width() == doctest::Approx(constants::hbar / 2).epsilon(1e-12));

  OscillatorMode warm{khz(20), 10e-6, mass};
  const auto w = warm.gibbs_weights(1e-6);
  double total = 0.0, mean = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    total += w[n];
    mean += n * w[n];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  const double x = constants::hbar * warm.omega / (constants::k_boltzmann * warm.temperature);
  CHECK(mean == doctest::Approx(1.0 / std::expm1(x)).epsilon(1e-4));
  CHECK(std::pow(std::exp(-x), static_cast<double>(w.size())) < 1e-6);
  CHECK(w.size() > 30);  // a cutoff of 30 leaves several percent in the tail here
  // thermal momentum variance equals the Gibbs average over Fock states
  double variance = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) variance += w[n] * (2.0 * n + 1.0);
  CHECK(variance * std::pow(warm.ground_momentum_width(), 2) ==
        doctest::Approx(std::pow(warm.momentum_width(), 2)).epsilon(1e-5));
}

TEST_CASE("beam axes follow the geometry") {
  TrapSpec trap;
  trap.temperature_axial = 5e-6;
  const auto circular = beam_axes(trap, Geometry::circular, 1.4e-25);
  CHECK(circular.beam.omega == trap.omega_axial);
  CHECK(circular.beam.temperature == 5e-6);
  CHECK(circular.spectators[0].temperature == 0.0);
  const auto linear = beam_axes(trap, Geometry::linear, 1.4e-25);
  CHECK(linear.beam.omega == trap.omega_transverse);
  CHECK(linear.beam.temperature == 0.0);
  CHECK(linear.spectators[1].temperature == 5e-6);
}

TEST_CASE("beam profile") {
  const GaussianBeam red(3e-6, 780e-9), blue(3e-6, 480e-9);
  const auto profile = BeamProfile::from_beams(red, blue);
  CHECK_FALSE(profile.is_plane_wave());
  CHECK(BeamProfile::plane_wave().is_plane_wave());
  CHECK(profile.coupling(0.0, 0.0) == cplx(1.0));
  CHECK(std::real(profile.coupling(0.0, 1e-12)) == doctest::Approx(1.0 - 2.0 * 1e-12 * profile.inv_effective_waist_sq));
  CHECK(std::imag(profile.coupling(1e-6, 0.0)) > 0.0);
  CHECK(profile.first_intensity(0.0, 1e-12) == doctest::Approx(-2.0 / 9.0));
}

TEST_CASE("Fock states on the momentum grid") {
  const OscillatorMode mode{khz(20), 0.0, 1.443e-25};
  const auto grid = MomentumGrid::for_mode(mode, 12);
  CHECK(grid.points % 2 == 1);
  CHECK(grid.momentum(grid.points / 2) == 0.0);
  for (int n : {0, 3, 12}) {
    const auto s = fock_state(grid, mode, n, {0.0, 1.0, 0.0});
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.edge_probability() < 1e-12);
  }
  const auto s0 = fock_state(grid, mode, 0, {0.0, 1.0, 0.0});
  const auto s2 = fock_state(grid, mode, 2, {0.0, 1.0, 0.0});
  CHECK(std::abs(s0.b.dot(s2.b)) * grid.spacing < 1e-12);
  // momentum variance of Fock n is (2n+1) sigma0^2
  double var = 0.0;
  for (int i = 0; i < grid.points; ++i) var += std::norm(s2.b(i)) * std::pow(grid.momentum(i), 2) * grid.spacing;
  CHECK(var == doctest::Approx(5.0 * std::pow(mode.ground_momentum_width(), 2)).epsilon(1e-10));
}

TEST_CASE("momentum-space integration") {
  const OscillatorMode mode{khz(100), 0.0, 1.443e-25};
  const auto grid = MomentumGrid::for_mode(mode, 2);
  const double tau = 150e-9;

  SUBCASE("plane waves reproduce the pointwise propagator") {
    auto drive = bare_drive(tau, 0.3);
    drive.shift_a = -2 * pi * 1e6;
    drive.shift_b = -2 * pi * 2e6;
    const auto start = fock_state(grid, mode, 1, {0.6, 0.8, 0.0});
    const auto end = momentum_space_step(start, drive, {tau, 1000, 0.0, 0.0});
    double worst = 0.0;
    for (int i = 0; i < grid.points; ++i) {
      MotionalSample s;
      s.momentum = grid.momentum(i);
      const LevelVector v = pulse_propagator(drive, s, tau) * LevelVector(start.a(i), start.b(i), start.r(i));
      worst = std::max({worst, std::abs(v(0) - end.a(i)), std::abs(v(1) - end.b(i)), std::abs(v(2) - end.r(i))});
    }
    const double scale = start.b.cwiseAbs().maxCoeff();
    CHECK(worst / scale < 1e-10);
  }

  SUBCASE("finite beams: norm, convergence and heating") {
    auto drive = bare_drive(tau);
    drive.shift_a = -2 * pi * 2e6;
    drive.shift_b = -2 * pi * 8e6;
    drive.shift_r = -2 * pi * 8e6;
    drive.profile = BeamProfile::from_beams(GaussianBeam(1.0e-6, 780e-9), GaussianBeam(1.0e-6, 480e-9));
    const auto start = fock_state(grid, mode, 0, {0.0, 1.0, 0.0});
    const auto coarse = momentum_space_step(start, drive, {tau, 200, 0.0, 1e-16});
    const auto fine = momentum_space_step(start, drive, {tau, 400, 0.0, 1e-16});
    CHECK(std::abs(coarse.norm() - 1.0) < 1e-6);
    const double change = std::max({(coarse.a - fine.a).cwiseAbs().maxCoeff(), (coarse.b - fine.b).cwiseAbs().maxCoeff(),
                                    (coarse.r - fine.r).cwiseAbs().maxCoeff()});
    CHECK(change * std::sqrt(grid.spacing) < 1e-8);

    auto plane = drive;
    plane.profile = BeamProfile::plane_wave();
    const auto flat = momentum_space_step(start, plane, {tau, 200, 0.0, 1e-16});
    auto spread = [&](const MomentumAmplitudes& v) {
      double s = 0.0;
      for (int i = 0; i < grid.points; ++i)
        s += (std::norm(v.a(i)) + std::norm(v.b(i)) + std::norm(v.r(i))) * std::pow(grid.momentum(i), 2);
      return s * grid.spacing / v.norm();
    };
    CHECK(spread(coarse) > spread(flat) * (1.0 + 1e-9));
  }

  SUBCASE("probability at the edge is reported") {
    MomentumGrid tiny{grid.spacing * 8.0, 9};
    auto drive = bare_drive(tau);
    const auto start = fock_state(tiny, mode, 0, {0.0, 1.0, 0.0});
    CHECK(start.edge_probability() > 1e-6);
  }
}

TEST_CASE("ideal blockade protocol gives the controlled-Z state") {
  const auto spec = ideal_spec();
  const auto plus = ket(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const auto traj = apply_protocol(spec, plus, plus);
  const auto target = working_ket({0.5, -0.5, -0.5, -0.5});
  CHECK(overlap(traj.final_state, target) > 1.0 - 1e-9);
  CHECK(traj.stages[0].times.size() == 51);
  CHECK(traj.stages[1].duration == doctest::Approx(2.0 * spec.tau_pi));
  CHECK(traj.total_duration() == doctest::Approx(4.0 * spec.tau_pi));
  for (const auto& stage : traj.stages)
    for (const auto& rho : stage.rho) {
      CHECK((rho - rho.adjoint()).norm() < 1e-12);
      CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
      CHECK(Eigen::SelfAdjointEigenSolver<WorkingMatrix>(rho).eigenvalues().minCoeff() > -1e-12);
    }
  // the control atom passes through |r> in the middle of the protocol
  const auto& mid = traj.stages[1].rho[25];
  double control_r = 0.0;
  for (int b = 0; b < 3; ++b) control_r += std::real(mid(6 + b, 6 + b));
  CHECK(control_r == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("computational inputs") {
  auto spec = ideal_spec();
  spec.drive.shift_a = -2 * pi * 0.4e6;
  spec.drive.shift_b = -2 * pi * 1.3e6;
  const auto a = ket(1.0, 0.0), b = ket(0.0, 1.0);
  SUBCASE("|aa> only picks up light-shift phases") {
    const auto traj = apply_protocol(spec, a, a);
    CHECK(std::abs(traj.final_state(0, 0) - 1.0) < 1e-12);
  }
  SUBCASE("|bb> returns with the collective pi phase") {
    spec.drive.shift_a = spec.drive.shift_b = 0.0;
    const auto traj = apply_protocol(spec, b, b);
    CHECK(std::real(traj.final_state(4, 4)) > 1.0 - 1e-9);
    // the target never leaves |b>
    double target_r = 0.0;
    for (const auto& rho : traj.stages[1].rho) target_r = std::max(target_r, std::real(rho(5, 5) + rho(8, 8)));
    CHECK(target_r < 1e-12);
  }
}

TEST_CASE("phase-space motion: Doppler dephasing matches the coherent-displacement estimate") {
  auto spec = ideal_spec(200e-9);
  spec.drive.rabi = pi / spec.tau_pi;
  spec.motion.model = MotionModel::phase_space;
  spec.geometry = Geometry::linear;
  spec.drive.mass = 86.909180527 * constants::atomic_mass_unit;
  const auto plus = ket(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const auto traj = apply_protocol(spec, plus, plus);
  const auto target = working_ket({0.5, -0.5, -0.5, -0.5});
  const double fidelity = overlap(traj.final_state, target);

  const double omega = spec.trap.omega_transverse;
  const double control = recoil_displacement(spec.drive.wave_number, spec.drive.mass, omega, 3.0 * spec.tau_pi);
  const double target_alpha = recoil_displacement(spec.drive.wave_number, spec.drive.mass, omega, spec.tau_pi);
  // the blocked target stays put, so |bb> only carries the control displacement
  // so the pair overlaps sum to (6 + 2 e^-b + 4 e^-a + 4 e^-(a+b)) / 16 with a, b the halved squares
  const double ea = std::exp(-control * control / 2.0), eb = std::exp(-target_alpha * target_alpha / 2.0);
  const double estimate = (6.0 + 2.0 * eb + 4.0 * ea + 4.0 * ea * eb) / 16.0;
  CHECK(fidelity < 1.0 - 1e-5);
  CHECK(fidelity == doctest::Approx(estimate).epsilon(2e-5));
}

TEST_CASE("momentum grid agrees with phase-space sampling for Doppler-only motion") {
  auto spec = ideal_spec(150e-9);
  spec.drive.rabi = pi / spec.tau_pi;
  spec.blockade_shift = 2 * pi * 50e6;
  spec.drive.shift_a = -2 * pi * 0.3e6;
  spec.drive.shift_b = -2 * pi * 1.1e6;
  spec.geometry = Geometry::linear;
  spec.motion.model = MotionModel::phase_space;
  spec.motion.spectator_nodes = 1;
  const auto plus = ket(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const auto sampled = apply_protocol(spec, plus, plus);
  spec.motion.model = MotionModel::momentum_grid;
  const auto grid = apply_protocol(spec, plus, plus);
  for (int s = 0; s < 3; ++s) CHECK((sampled.stages[s].rho[17] - grid.stages[s].rho[17]).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sampled.final_state - grid.final_state).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("recoil fidelity estimate") {
  CHECK(recoil_fidelity_estimate(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()) == 1.0);
  CHECK(recoil_fidelity_estimate(Eigen::Vector3d(40, 0, 0), Eigen::Vector3d(0, 0, 40)) == doctest::Approx(0.25));
  const double omega = khz(100), mass = 86.909180527 * constants::atomic_mass_unit;
  const double q = 2 * pi / 780e-9 - 2 * pi / 480e-9;
  const double control = recoil_displacement(q, mass, omega, 3 * 200e-9);
  const double target = recoil_displacement(q, mass, omega, 200e-9);
  CHECK(control > 0.01);
  CHECK(control < 0.1);
  CHECK(recoil_fidelity_estimate({control, 0, 0}, {target, 0, 0}) < 0.9995);
}

TEST_CASE("tracing out coherent motion") {
  const std::array<cplx, 4> spin{0.5, -0.5, -0.5, -0.5};
  for (auto [alpha, beta] : {std::pair<cplx, cplx>{0.0, 0.0}, {0.3, 0.1}, {cplx(0.2, -0.4), 0.5}, {1.1, 0.7}}) {
    const auto state = coherent_branch_state(spin, alpha, beta, 30);
    const auto rho = trace_out_motion(state);
    Eigen::Vector4cd psi(0.5, -0.5, -0.5, -0.5);
    const double fidelity = std::real((psi.adjoint() * rho * psi)(0, 0));
    const double expected = recoil_fidelity_estimate({std::abs(alpha), 0, 0}, {std::abs(beta), 0, 0});
    CHECK(std::abs(fidelity - expected) < 1e-8);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
  }
  // product spin-motion state keeps the spin purity
  const auto product = coherent_branch_state({0.6, 0.0, 0.8, 0.0}, 0.0, 0.0, 10);
  const auto rho = trace_out_motion(product);
  CHECK(std::real((rho * rho).trace()) == doctest::Approx(1.0).epsilon(1e-14));
}
