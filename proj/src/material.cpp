#include "tsdm/material.hpp"

#include <cmath>

#include "tsdm/errors.hpp"

namespace tsdm {

void MaterialParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(lambda) || !positive(mu))
    throw ValidationError("Lame parameters must be positive");
  if (!positive(rho)) throw ValidationError("density must be positive");
  if (!positive(eta)) throw ValidationError("viscosity must be positive");
  if (!(xi_second_moment >= 0.0) || !(std::sqrt(xi_second_moment) < 1.0))
    throw ValidationError("second moment of xi must lie in [0, 1)");
}

Matrix6 stiffness_voigt(double lambda, double mu) {
  if (!(lambda >= 0.0) || !(mu > 0.0))
    throw ValidationError("stiffness needs lambda >= 0 and mu > 0");
  Matrix6 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) c[i][j] = lambda;
    c[i][i] = lambda + 2.0 * mu;
    c[i + 3][i + 3] = mu;
  }
  return c;
}

CharacteristicScales characteristic_scales(const MaterialParams& p) {
  CharacteristicScales s{};
  s.young = p.young();
  s.wave_speed = std::sqrt(s.young / p.rho);
  s.internal_length = p.eta / (s.wave_speed * p.rho);
  s.char_time = p.eta / s.young;
  return s;
}

double free_energy(const Voigt& eps, const Matrix6& stiffness) {
  return 0.5 * dot(eps, stiffness * eps);
}

double update_damage_order0(double d0, const Voigt& eps0, const Matrix6& stiffness,
                            double eta, double dt) {
  return d0 + dt * std::exp(-d0) * free_energy(eps0, stiffness) / eta;
}

double damage_rate_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                          const Matrix6& stiffness, double eta, DamageSensitivityLaw law) {
  const Voigt e_eps0 = stiffness * eps0;
  const double q00 = dot(eps0, e_eps0);
  const double q10 = dot(eps1, e_eps0);
  double drive = 0.0;
  switch (law) {
    case DamageSensitivityLaw::exact_derivative:
      drive = (1.0 - d1) * 0.5 * q00 + q10;
      break;
    case DamageSensitivityLaw::full_quadratic_drive:
      drive = (1.0 - d1) * q00 + 2.0 * q10;
      break;
  }
  return std::exp(-d0) * drive / eta;
}

double update_damage_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                            const Matrix6& stiffness, double eta, double dt,
                            DamageSensitivityLaw law) {
  return d1 + dt * damage_rate_order1(d0, d1, eps0, eps1, stiffness, eta, law);
}

Voigt stress_order0(double d0, const Voigt& eps0, const Matrix6& stiffness) {
  const double f = std::exp(-d0);
  Voigt s = stiffness * eps0;
  for (double& v : s) v *= f;
  return s;
}

Voigt stress_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                    const Matrix6& stiffness) {
  const double f = std::exp(-d0);
  const Voigt a = stiffness * eps0;
  const Voigt b = stiffness * eps1;
  Voigt s{};
  for (std::size_t i = 0; i < 6; ++i) s[i] = f * ((1.0 - d1) * a[i] + b[i]);
  return s;
}

}  // namespace tsdm
