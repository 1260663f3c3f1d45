#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace rydgate {

using cplx = std::complex<double>;
using Vec3c = Eigen::Vector3cd;
using Mat3c = Eigen::Matrix3cd;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

namespace constants {
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double k_boltzmann = 1.380649e-23;
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

// 2*pi*MHz, the unit every config frequency is quoted in.
constexpr double mhz(double value) { return constants::two_pi * 1e6 * value; }
constexpr double khz(double value) { return constants::two_pi * 1e3 * value; }

// Per-atom basis: 8 ground Zeeman sublevels followed by the Rydberg state.
// Indices 0-2 are F0=1 with M=-1,0,+1; indices 3-7 are F0=2 with M=-2..+2.
inline constexpr int kAtomDim = 9;
inline constexpr int kGroundDim = 8;
inline constexpr int kIntermediateDim = 8;
inline constexpr int kPairDim = kAtomDim * kAtomDim;
inline constexpr int kIndexA = 1;
inline constexpr int kIndexB = 5;
inline constexpr int kIndexR = 8;

// Two-atom index with atom A as the slow index (Kronecker order A (x) B).
constexpr int pair_index(int atom_a, int atom_b) { return atom_a * kAtomDim + atom_b; }

using AtomMatrix = Eigen::Matrix<cplx, kAtomDim, kAtomDim>;
using PairMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

enum class Atom { A, B };

}  // namespace rydgate
