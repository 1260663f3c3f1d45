#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "rydgate/atomic_physics.hpp"
#include "rydgate/dynamics.hpp"

namespace rydgate {

struct ChannelToggles {
  bool depopulation = true;
  bool optical_pumping = true;
  bool cpt = true;
  bool rydberg_decay = true;

  static ChannelToggles none() { return {false, false, false, false}; }
};

// Per-atom scattering data in the form the ledger consumes.
struct LossModel {
  double gamma = 0.0;
  double rydberg_decay_rate = 0.0;
  // amplitudes(n, level) for the working levels (a, b, r); see scattering_amplitudes.
  Eigen::Matrix<cplx, kIntermediateDim, kWorkingLevels> amplitudes =
      Eigen::Matrix<cplx, kIntermediateDim, kWorkingLevels>::Zero();
  std::array<Eigen::Matrix<double, kGroundDim, kIntermediateDim>, 3> jumps{};
  std::array<double, kGroundDim> output_frequency{};     // bare ground sublevels in the rotating frame
  std::array<double, kGroundDim> output_shift{};         // light shift of each ground sublevel
  std::array<double, kWorkingLevels> input_frequency{};  // frame frequencies of a, b, r
  // Scattered population keeps evolving under the light shift until its atom goes dark.
  bool dressed_outputs = true;

  // gamma * K^dagger K restricted to the working levels.
  LevelMatrix loss_matrix() const;
  // gamma * sum_q G_q(m', level') conj(G_q(m, level)), with G_q = J_q K.
  cplx income(int m_prime, int m, int level_prime, int level) const;
};

LossModel make_loss_model(const LevelScheme& scheme, const DrivePair& drive, bool dressed_outputs = true);

// Spontaneous Raman transfer rates between the qubit states.
struct RamanRates {
  double a_to_b = 0.0;
  double b_to_a = 0.0;
};
RamanRates raman_rates(const LossModel& model);

struct IncrementLedger {
  PairMatrix depopulation = PairMatrix::Zero(kPairDim, kPairDim);
  PairMatrix optical_pumping = PairMatrix::Zero(kPairDim, kPairDim);
  PairMatrix cpt_leak = PairMatrix::Zero(kPairDim, kPairDim);
  PairMatrix cpt_repopulation = PairMatrix::Zero(kPairDim, kPairDim);
  PairMatrix rydberg_decay = PairMatrix::Zero(kPairDim, kPairDim);
  double rydberg_probability = 0.0;

  PairMatrix total() const { return depopulation + optical_pumping + cpt_leak + cpt_repopulation + rydberg_decay; }
};

using PairOperator = Eigen::SparseMatrix<cplx>;

// Coherent maps from every trajectory sample to the end of the protocol, evaluated at the
// focus for atoms at rest. Increments created mid-protocol are carried along by them.
struct ProtocolTransport {
  std::array<std::vector<PairOperator>, 3> to_end;
};
ProtocolTransport make_transport(const ProtocolSpec& spec, const LossModel& model);

// Stage increments. Without `transport` they are the plain time integrals of the rate terms.
PairMatrix depopulation_increment(const StageSamples& stage, const LossModel& model,
                                  const std::vector<PairOperator>* transport = nullptr);
PairMatrix optical_pumping_increment(const StageSamples& stage, const LossModel& model,
                                     const std::vector<PairOperator>* transport = nullptr);
struct CptIncrements {
  PairMatrix leak;
  PairMatrix repopulation;
};
CptIncrements cpt_increments(const StageSamples& stage, const LossModel& model,
                             const std::vector<PairOperator>* transport = nullptr);

// Gamma_ryd times the time integral of the Rydberg population of both atoms.
double rydberg_decay_probability(const ProtocolTrajectory& trajectory, double rate);
// (1 - p) rho + p Tr(rho) I/64 on the two-atom ground manifold.
PairMatrix rydberg_decay_admixture(const PairMatrix& rho, double probability);

// Partial trace of an 81x81 pair matrix over one atom.
AtomMatrix partial_trace(const PairMatrix& rho, Atom traced);

IncrementLedger compute_increments(const ProtocolTrajectory& trajectory, const LossModel& model,
                                   const ChannelToggles& channels, const ProtocolTransport* transport = nullptr);

struct LedgerResult {
  PairMatrix rho;
  IncrementLedger ledger;
  double min_eigenvalue = 0.0;  // before any clamping
  bool clamped = false;
};

LedgerResult apply_loss_ledger(const ProtocolSpec& spec, const ProtocolTrajectory& trajectory, const LossModel& model,
                               const ChannelToggles& channels, double eigenvalue_floor = 1e-6);

}  // namespace rydgate
