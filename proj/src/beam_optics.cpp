#include "rydgate/beam_optics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rydgate {

GaussianBeam::GaussianBeam(double waist, double wavelength, double quantization_length)
    : waist_(waist),
      wavelength_(wavelength),
      rayleigh_range_(std::numbers::pi * waist * waist / wavelength),
      quantization_length_(quantization_length) {
  if (!(waist > 0.0) || !(wavelength > 0.0) || !(quantization_length > 0.0))
    throw std::invalid_argument("GaussianBeam: waist, wavelength and quantization length must be positive");
}

double GaussianBeam::width(double z) const {
  const double x = z / rayleigh_range_;
  return waist_ * std::sqrt(1.0 + x * x);
}

double GaussianBeam::curvature_radius(double z) const {
  if (z == 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = rayleigh_range_ / z;
  return z * (1.0 + ratio * ratio);
}

double GaussianBeam::gouy_phase(double z) const { return std::atan(z / rayleigh_range_); }

cplx mode_amplitude(const GaussianBeam& beam, double rho, double z) {
  const double w = beam.width(z);
  const double amplitude = std::sqrt(2.0 / std::numbers::pi) / w;
  // i k rho^2 / 2q with 1/q = 1/R + i lambda/(pi w^2)
  const cplx inverse_q(1.0 / beam.curvature_radius(z), beam.wavelength() / (std::numbers::pi * w * w));
  const cplx exponent = cplx(0.0, 1.0) * beam.wave_number() * rho * rho / 2.0 * inverse_q +
                        cplx(0.0, beam.gouy_phase(z));
  return amplitude * std::exp(exponent);
}

CausticExpansion caustic_expansion(const GaussianBeam& beam) {
  const double w0 = beam.waist();
  const double zr = beam.rayleigh_range();
  return {-1.0 / (w0 * w0), -1.0 / (2.0 * zr * zr), cplx(0.0, 1.0 / zr)};
}

EffectiveBeamParams effective_beam_params(const GaussianBeam& first, const GaussianBeam& second) {
  const double w1 = first.waist(), w2 = second.waist();
  const double z1 = first.rayleigh_range(), z2 = second.rayleigh_range();
  EffectiveBeamParams p;
  p.waist = std::sqrt(2.0 / (1.0 / (w1 * w1) + 1.0 / (w2 * w2)));
  p.rayleigh_first_order = 2.0 / (1.0 / z1 + 1.0 / z2);
  p.rayleigh_second_order = std::sqrt(2.0 / (1.0 / (z1 * z1) + 1.0 / (z2 * z2)));
  return p;
}

}  // namespace rydgate
