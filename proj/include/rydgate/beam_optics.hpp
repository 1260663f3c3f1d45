#pragma once

#include "rydgate/types.hpp"

namespace rydgate {

class GaussianBeam {
 public:
  GaussianBeam(double waist, double wavelength, double quantization_length = 1.0);

  double waist() const { return waist_; }
  double wavelength() const { return wavelength_; }
  double rayleigh_range() const { return rayleigh_range_; }
  double quantization_length() const { return quantization_length_; }
  double wave_number() const { return constants::two_pi / wavelength_; }

  double width(double z) const;
  double curvature_radius(double z) const;  // +inf at the focus
  double gouy_phase(double z) const;

 private:
  double waist_;
  double wavelength_;
  double rayleigh_range_;
  double quantization_length_;
};

// Slowly varying TEM00 amplitude, normalised to unit power on every transverse plane.
cplx mode_amplitude(const GaussianBeam& beam, double rho, double z);

// u(rho, z)/u(0, 0) ~ 1 + transverse*rho^2 + axial_quadratic*z^2 + axial_linear*z
struct CausticExpansion {
  double transverse = 0.0;
  double axial_quadratic = 0.0;
  cplx axial_linear = 0.0;

  cplx evaluate(double rho, double z) const { return 1.0 + transverse * rho * rho + axial_quadratic * z * z + axial_linear * z; }
};

CausticExpansion caustic_expansion(const GaussianBeam& beam);

struct EffectiveBeamParams {
  double waist = 0.0;
  double rayleigh_first_order = 0.0;
  double rayleigh_second_order = 0.0;
};

EffectiveBeamParams effective_beam_params(const GaussianBeam& first, const GaussianBeam& second);

}  // namespace rydgate
