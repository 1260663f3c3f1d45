#include "rydgate/analysis.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rydgate {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRefineGrid = 64;

bool is_qubit_level(int level) { return level == kIndexA || level == kIndexB; }

// Phase-only fidelity over the computational block: sum_ij psi_i* psi_j rho_ij e^{i(phi_i - phi_j)}.
double compensated_fidelity(const QubitMatrix& block, const QubitVector& target, double control, double target_phase) {
  const std::array<double, 4> phi{0.0, target_phase, control, control + target_phase};
  cplx sum = 0.0;
  for (int i = 0; i < kQubitDim; ++i)
    for (int j = 0; j < kQubitDim; ++j)
      sum += std::conj(target(i)) * target(j) * block(i, j) * std::polar(1.0, phi[i] - phi[j]);
  return std::real(sum);
}

PhaseCompensation refine(const QubitMatrix& block, const QubitVector& target, PhaseCompensation start) {
  const auto f = [&](double x, double y) { return compensated_fidelity(block, target, x, y); };
  PhaseCompensation best = start;
  double best_value = f(start.control, start.target);
  const double cell = 2.0 * kPi / kRefineGrid;
  for (int i = 0; i < kRefineGrid; ++i)
    for (int j = 0; j < kRefineGrid; ++j) {
      const double x = start.control - kPi + i * cell, y = start.target - kPi + j * cell;
      const double value = f(x, y);
      if (value > best_value) best_value = value, best = {x, y};
    }
  // Newton polish with central differences; the objective is a trigonometric polynomial.
  double h = cell / 4.0;
  for (int iter = 0; iter < 40; ++iter) {
    const double x = best.control, y = best.target;
    const double fxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / (h * h);
    const double fyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / (h * h);
    const double fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
    const double fx = (f(x + h, y) - f(x - h, y)) / (2 * h);
    const double fy = (f(x, y + h) - f(x, y - h)) / (2 * h);
    const double det = fxx * fyy - fxy * fxy;
    if (!(det > 0.0) || !(fxx < 0.0)) break;  // not at a local maximum
    const double dx = -(fyy * fx - fxy * fy) / det;
    const double dy = -(fxx * fy - fxy * fx) / det;
    if (f(x + dx, y + dy) < f(x, y)) break;
    best = {x + dx, y + dy};
    if (std::hypot(dx, dy) < 1e-12) break;
    h = std::max(1e-5, std::min(h, 4.0 * std::hypot(dx, dy)));
  }
  return best;
}

// Operator on the pair space acting on one atom's qubit states and as identity elsewhere.
PairMatrix on_atom(const Eigen::Matrix2cd& op, Atom atom) {
  AtomMatrix single = AtomMatrix::Identity();
  const std::array<int, 2> idx{kIndexA, kIndexB};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) single(idx[i], idx[j]) = op(i, j);
  PairMatrix out = PairMatrix::Zero(kPairDim, kPairDim);
  const AtomMatrix id = AtomMatrix::Identity();
  const AtomMatrix& left = atom == Atom::A ? single : id;
  const AtomMatrix& right = atom == Atom::A ? id : single;
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j)
      if (left(i, j) != 0.0) out.block(i * kAtomDim, j * kAtomDim, kAtomDim, kAtomDim) = left(i, j) * right;
  return out;
}

Eigen::Matrix2cd hadamard() {
  Eigen::Matrix2cd h;
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

QubitVector product(const LevelVector& control, const LevelVector& target) {
  return {control(0) * target(0), control(0) * target(1), control(1) * target(0), control(1) * target(1)};
}

LevelVector hadamard_qubit(const LevelVector& v) {
  const Eigen::Vector2cd h = hadamard() * Eigen::Vector2cd(v(0), v(1));
  return {h(0), h(1), v(2)};
}

}  // namespace

QubitMatrix computational_block(const PairMatrix& rho) {
  QubitMatrix out;
  for (int i = 0; i < kQubitDim; ++i)
    for (int j = 0; j < kQubitDim; ++j) out(i, j) = rho(kComputationalPairs[i], kComputationalPairs[j]);
  return out;
}

PairMatrix embed_computational(const QubitMatrix& rho) {
  PairMatrix out = PairMatrix::Zero(kPairDim, kPairDim);
  for (int i = 0; i < kQubitDim; ++i)
    for (int j = 0; j < kQubitDim; ++j) out(kComputationalPairs[i], kComputationalPairs[j]) = rho(i, j);
  return out;
}

QubitVector ideal_blockade_state() { return QubitVector(0.5, -0.5, -0.5, -0.5); }

Eigen::Matrix4cd cz_gate() {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(3, 3) = -1.0;
  return u;
}

Eigen::Matrix4cd cnot_gate() {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1.0;
  return u;
}

PairMatrix apply_phases(const PairMatrix& rho, const PhaseCompensation& phases) {
  Eigen::VectorXcd diag = Eigen::VectorXcd::Ones(kPairDim);
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j) {
      double phi = 0.0;
      if (i == kIndexB) phi += phases.control;
      if (j == kIndexB) phi += phases.target;
      diag(pair_index(i, j)) = std::polar(1.0, phi);
    }
  return diag.asDiagonal() * rho * diag.conjugate().asDiagonal();
}

PhaseCompensation analytic_compensation(const AtomDrive& drive, double tau_pi) {
  const double illuminated = (drive.shift_b - drive.shift_a) * 2.0 * tau_pi;
  // the control's b amplitude waits in r through the target's 2 tau pulse
  const double parked = (drive.shift_b - drive.shift_r - drive.two_photon_detuning) * 2.0 * tau_pi;
  return {illuminated + parked, illuminated};
}

std::string to_string(CompensationMode mode) {
  switch (mode) {
    case CompensationMode::none: return "none";
    case CompensationMode::analytic: return "analytic";
    case CompensationMode::refined: return "refined";
  }
  return "unknown";
}

CompensationMode parse_compensation_mode(std::string_view name) {
  if (name == "none") return CompensationMode::none;
  if (name == "analytic") return CompensationMode::analytic;
  if (name == "refined") return CompensationMode::refined;
  throw std::invalid_argument("unknown compensation mode: " + std::string(name));
}

FidelityReport fidelity_purity(const PairMatrix& rho, const QubitVector& target, CompensationMode mode,
                               const PhaseCompensation& start) {
  FidelityReport report;
  const QubitMatrix block = computational_block(rho);
  if (mode != CompensationMode::none) report.phases = start;
  if (mode == CompensationMode::refined) report.phases = refine(block, target, start);
  report.fidelity = compensated_fidelity(block, target, report.phases.control, report.phases.target);
  report.purity = std::real((rho * rho).trace());
  return report;
}

QubitMatrix werner_state(const QubitVector& psi, double mixing) {
  if (mixing < 0.0 || mixing > 1.0) throw std::invalid_argument("Werner mixing must lie in [0, 1]");
  return (1.0 - mixing) * psi * psi.adjoint() + mixing / 4.0 * QubitMatrix::Identity();
}

Eigen::Matrix<double, 1, 9> outcome_probabilities(const PairMatrix& rho) {
  Eigen::Matrix<double, 1, 9> p = Eigen::Matrix<double, 1, 9>::Zero();
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j) {
      const double pop = std::real(rho(pair_index(i, j), pair_index(i, j)));
      const bool qa = is_qubit_level(i), qb = is_qubit_level(j);
      const int ia = i == kIndexB ? 1 : 0, ib = j == kIndexB ? 1 : 0;
      if (qa && qb) p(2 * ia + ib) += pop;
      else if (qa) p(4 + ia) += pop;
      else if (qb) p(6 + ib) += pop;
      else p(8) += pop;
    }
  return p;
}

PairMatrix hadamard_on_target(const PairMatrix& rho) {
  const PairMatrix h = on_atom(hadamard(), Atom::B);
  return h * rho * h.adjoint();
}

PairMatrix cnot_output(const GateRunner& run, const LevelVector& control, const LevelVector& target,
                       const PhaseCompensation& phases) {
  const PairMatrix raw = run(control, hadamard_qubit(target));
  // Z_A Z_B turns the blockade sequence's diag(1,-1,-1,-1) into CZ.
  return hadamard_on_target(apply_phases(raw, {phases.control + kPi, phases.target + kPi}));
}

TruthTable truth_table(const GateRunner& run, const PhaseCompensation& phases) {
  TruthTable table;
  const LevelVector a{1.0, 0.0, 0.0}, b{0.0, 1.0, 0.0};
  const std::array<LevelVector, 2> basis{a, b};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) table.probability.row(2 * i + j) = outcome_probabilities(cnot_output(run, basis[i], basis[j], phases));
  return table;
}

Eigen::Matrix4d postselect(const TruthTable& table) {
  Eigen::Matrix4d out = table.probability.leftCols<4>();
  for (int i = 0; i < 4; ++i) {
    const double sum = out.row(i).sum();
    if (!(sum > 0.0)) throw std::domain_error("post-selection: no weight left in the computational subspace");
    out.row(i) /= sum;
  }
  return out;
}

QubitMatrix postselect(const PairMatrix& rho) {
  const QubitMatrix block = computational_block(rho);
  const double weight = std::real(block.trace());
  if (!(weight > 0.0)) throw std::domain_error("post-selection: no weight left in the computational subspace");
  return block / weight;
}

std::array<LevelVector, 4> tomography_qubit_states() {
  const double s = 1.0 / std::sqrt(2.0);
  return {LevelVector{1.0, 0.0, 0.0}, LevelVector{0.0, 1.0, 0.0}, LevelVector{s, s, 0.0},
          LevelVector{s, cplx(0.0, s), 0.0}};
}

std::array<QubitVector, 16> tomography_inputs() {
  const auto states = tomography_qubit_states();
  std::array<QubitVector, 16> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[4 * i + j] = product(states[i], states[j]);
  return out;
}

QubitMatrix apply_process(const ProcessMatrix& process, const QubitMatrix& input) {
  QubitMatrix out = QubitMatrix::Zero();
  for (int j = 0; j < kQubitDim; ++j)
    for (int k = 0; k < kQubitDim; ++k)
      for (int m = 0; m < kQubitDim; ++m)
        for (int n = 0; n < kQubitDim; ++n) out(j, k) += process.chi(4 * j + m, 4 * k + n) * input(m, n);
  return out;
}

ProcessMatrix process_of_unitary(const Eigen::Matrix4cd& unitary) {
  Eigen::Matrix<cplx, 16, 1> v;
  for (int i = 0; i < kQubitDim; ++i)
    for (int j = 0; j < kQubitDim; ++j) v(4 * i + j) = unitary(i, j);
  ProcessMatrix out;
  out.chi = v * v.adjoint();
  return out;
}

ProcessMatrix chi_reconstruct(const std::vector<IoPair>& pairs) {
  const int count = static_cast<int>(pairs.size());
  if (count < 16) throw std::domain_error("tomography needs at least 16 input/output pairs");
  Eigen::MatrixXcd design(count, 16);
  for (int s = 0; s < count; ++s)
    for (int m = 0; m < kQubitDim; ++m)
      for (int n = 0; n < kQubitDim; ++n) design(s, 4 * m + n) = pairs[s].input(m, n);
  const Eigen::BDCSVD<Eigen::MatrixXcd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  if (sigma(15) < 1e-10 * sigma(0)) throw std::domain_error("tomography inputs do not span the operator space");

  Eigen::Matrix<cplx, 16, 16> chi;
  Eigen::VectorXcd rhs(count);
  for (int j = 0; j < kQubitDim; ++j)
    for (int k = 0; k < kQubitDim; ++k) {
      for (int s = 0; s < count; ++s) rhs(s) = pairs[s].output(j, k);
      const Eigen::VectorXcd x = svd.solve(rhs);
      for (int m = 0; m < kQubitDim; ++m)
        for (int n = 0; n < kQubitDim; ++n) chi(4 * j + m, 4 * k + n) = x(4 * m + n);
    }
  ProcessMatrix out;
  out.anti_hermitian_residual = (0.5 * (chi - chi.adjoint())).norm();
  out.chi = 0.5 * (chi + chi.adjoint());
  return out;
}

std::vector<IoPair> cnot_tomography_data(const GateRunner& run, const PhaseCompensation& phases) {
  const auto states = tomography_qubit_states();
  std::vector<IoPair> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const QubitVector psi = product(states[i], states[j]);
      out.push_back({psi * psi.adjoint(), computational_block(cnot_output(run, states[i], states[j], phases))});
    }
  return out;
}

ClosestUnitary closest_unitary(const ProcessMatrix& process) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 16, 16>> solver(process.chi);
  const auto& values = solver.eigenvalues();
  ClosestUnitary out;
  out.eigenvalue = values(15);
  out.ambiguous = values(15) - values(14) < 1e-9;
  if (out.ambiguous) std::clog << "rydgate: closest unitary is ambiguous (degenerate top eigenvalue)\n";
  const Eigen::Matrix<cplx, 16, 1> v = solver.eigenvectors().col(15);
  int largest = 0;
  v.cwiseAbs().maxCoeff(&largest);
  const cplx phase = std::abs(v(largest)) > 0.0 ? std::conj(v(largest)) / std::abs(v(largest)) : 1.0;
  for (int i = 0; i < kQubitDim; ++i)
    for (int j = 0; j < kQubitDim; ++j) out.unitary(i, j) = 2.0 * phase * v(4 * i + j);
  out.unitarity_deviation = (out.unitary.adjoint() * out.unitary - Eigen::Matrix4cd::Identity()).norm();
  return out;
}

}  // namespace rydgate
