#include "rydgate/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rydgate {

QuadratureRule gauss_hermite(int count) {
  if (count < 1) throw std::invalid_argument("gauss_hermite: count must be positive");
  // Golub-Welsch on the probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(count, count);
  for (int i = 1; i < count; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  for (int i = 0; i < count; ++i) {
    rule.nodes.push_back(solver.eigenvalues()(i));
    const double v = solver.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return rule;
}

std::vector<cplx> oscillatory_weights(double frequency, double start, double step, int count) {
  if (count < 3 || count % 2 == 0) throw std::invalid_argument("oscillatory_weights: need an odd sample count >= 3");
  std::vector<cplx> w(count, 0.0);
  const double theta = frequency * step;
  if (std::abs(theta) <= 0.1) {
    for (int k = 0; k < count; ++k) {
      const double simpson = (k == 0 || k == count - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      w[k] = simpson * step / 3.0 * std::exp(cplx(0.0, frequency * (start + k * step)));
    }
    return w;
  }
  // On [t_k, t_k+h] with f linear: integral = e^{i w t_k} (alpha f_k + beta f_{k+1}).
  const cplx i(0.0, 1.0);
  const cplx e = std::exp(i * theta);
  const cplx total = step * (e - 1.0) / (i * theta);
  const cplx beta = step * (-i * e / theta + (e - 1.0) / (theta * theta));
  const cplx alpha = total - beta;
  for (int k = 0; k + 1 < count; ++k) {
    const cplx phase = std::exp(i * frequency * (start + k * step));
    w[k] += alpha * phase;
    w[k + 1] += beta * phase;
  }
  return w;
}

}  // namespace rydgate
