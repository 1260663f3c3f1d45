#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rydgate/dynamics.hpp"
#include "rydgate/types.hpp"

namespace rydgate {

// Two-qubit computational subspace, ordered aa, ab, ba, bb.
inline constexpr int kQubitDim = 4;
using QubitMatrix = Eigen::Matrix4cd;
using QubitVector = Eigen::Vector4cd;
inline constexpr std::array<int, kQubitDim> kComputationalPairs{
    kIndexA * kAtomDim + kIndexA, kIndexA * kAtomDim + kIndexB, kIndexB * kAtomDim + kIndexA,
    kIndexB * kAtomDim + kIndexB};

QubitMatrix computational_block(const PairMatrix& rho);
PairMatrix embed_computational(const QubitMatrix& rho);

// Output of the ideal blockade sequence on (|a>+|b>)(|a>+|b>)/2.
QubitVector ideal_blockade_state();
Eigen::Matrix4cd cz_gate();
Eigen::Matrix4cd cnot_gate();  // target is atom B

// Relative phases multiplying |b> of each atom.
struct PhaseCompensation {
  double control = 0.0;
  double target = 0.0;
};
PairMatrix apply_phases(const PairMatrix& rho, const PhaseCompensation& phases);
// Differential light-shift phase of |b> against |a> over the 2 tau each atom spends illuminated,
// plus the idle-r phase the control's |b> collects while parked in r.
PhaseCompensation analytic_compensation(const AtomDrive& drive, double tau_pi);

enum class CompensationMode { none, analytic, refined };
CompensationMode parse_compensation_mode(std::string_view name);
std::string to_string(CompensationMode mode);

struct FidelityReport {
  double fidelity = 0.0;
  double purity = 0.0;
  PhaseCompensation phases;
};

// F = <psi| C rho C^dagger |psi> and P = Tr rho^2. `start` seeds the compensation; with
// `refined` the phases are then optimised for F on a 64x64 grid and polished.
FidelityReport fidelity_purity(const PairMatrix& rho, const QubitVector& target, CompensationMode mode,
                               const PhaseCompensation& start = {});

// Werner-type mixture (1 - x)|psi><psi| + x I/4 on the computational subspace.
QubitMatrix werner_state(const QubitVector& psi, double mixing);

struct TruthTable {
  static constexpr std::array<std::string_view, 4> kInputs{"aa", "ab", "ba", "bb"};
  static constexpr std::array<std::string_view, 9> kOutputs{"aa", "ab", "ba", "bb", "a0", "b0", "0a", "0b", "00"};
  Eigen::Matrix<double, 4, 9> probability = Eigen::Matrix<double, 4, 9>::Zero();
};

// Outcome probabilities of one output state, partitioned as in TruthTable::kOutputs.
Eigen::Matrix<double, 1, 9> outcome_probabilities(const PairMatrix& rho);

// Final pair density matrix of the blockade sequence for a product input.
using GateRunner = std::function<PairMatrix(const LevelVector& control, const LevelVector& target)>;

// Lossless instantaneous Hadamard on atom B's qubit states.
PairMatrix hadamard_on_target(const PairMatrix& rho);
// CNOT built as H_B . Z_A Z_B . C . (blockade sequence) . H_B, where C is the phase compensation.
PairMatrix cnot_output(const GateRunner& run, const LevelVector& control, const LevelVector& target,
                       const PhaseCompensation& phases);
TruthTable truth_table(const GateRunner& run, const PhaseCompensation& phases);

// Rows renormalised over the computational outcomes.
Eigen::Matrix4d postselect(const TruthTable& table);
// Renormalised projection of rho onto the computational subspace.
QubitMatrix postselect(const PairMatrix& rho);

// Process matrix over the dyadic basis E_m = |m1><m2|, m = 4 m1 + m2:
// rho_out = sum_{m,n} chi_{mn} E_m rho_in E_n^dagger.
struct ProcessMatrix {
  Eigen::Matrix<cplx, 16, 16> chi = Eigen::Matrix<cplx, 16, 16>::Zero();
  double anti_hermitian_residual = 0.0;
};

struct IoPair {
  QubitMatrix input;
  QubitMatrix output;
};

// Single-qubit tomography states |a>, |b>, (|a>+|b>)/sqrt2, (|a>+i|b>)/sqrt2.
std::array<LevelVector, 4> tomography_qubit_states();
// The 16 product inputs, index 4 i + j for control state i and target state j.
std::array<QubitVector, 16> tomography_inputs();

QubitMatrix apply_process(const ProcessMatrix& process, const QubitMatrix& input);
ProcessMatrix process_of_unitary(const Eigen::Matrix4cd& unitary);
ProcessMatrix chi_reconstruct(const std::vector<IoPair>& pairs);
std::vector<IoPair> cnot_tomography_data(const GateRunner& run, const PhaseCompensation& phases);

struct ClosestUnitary {
  Eigen::Matrix4cd unitary;  // sqrt(4) times the top eigenvector, largest entry made real positive
  double eigenvalue = 0.0;
  double unitarity_deviation = 0.0;  // || U^dagger U - I ||
  bool ambiguous = false;            // top eigenvalue gap below 1e-9
};
ClosestUnitary closest_unitary(const ProcessMatrix& process);

}  // namespace rydgate
