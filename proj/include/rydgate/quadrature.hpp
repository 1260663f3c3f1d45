#pragma once

#include <vector>

#include "rydgate/types.hpp"

namespace rydgate {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights for expectations over a standard normal variable; weights sum to 1.
QuadratureRule gauss_hermite(int count);

// Weights w_k such that sum_k w_k f(t_k) ~ integral of exp(i*frequency*t) f(t) over
// uniformly spaced samples t_k = start + k*step, k = 0..count-1 (count odd).
// Simpson's rule when |frequency|*step is small, piecewise-linear Filon otherwise.
std::vector<cplx> oscillatory_weights(double frequency, double start, double step, int count);

}  // namespace rydgate
