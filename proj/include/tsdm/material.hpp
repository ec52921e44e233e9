#pragma once

#include "tsdm/types.hpp"

namespace tsdm {

/// Mean material parameters. The elasticity tensor of one realization is
/// (1 + xi) * stiffness, with xi a zero-mean scalar of known second moment.
struct MaterialParams {
  double lambda = 1.0e9;  // Pa
  double mu = 0.8e9;      // Pa
  double rho = 1000.0;    // kg/m^3
  double eta = 1.0e9;     // Pa s
  double xi_second_moment = 0.01;

  /// Throws ValidationError on non-positive moduli, density or viscosity,
  /// or a second moment outside [0, 1).
  void validate() const;

  double young() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
  double poisson() const { return lambda / (2.0 * (lambda + mu)); }
};

/// Isotropic stiffness in Voigt form for engineering shear strain.
Matrix6 stiffness_voigt(double lambda, double mu);

struct CharacteristicScales {
  double young;            // E, Pa
  double wave_speed;       // v = sqrt(E / rho), m/s
  double internal_length;  // l_v = eta / (v rho), m
  double char_time;        // tau0 = eta / E, s
};

CharacteristicScales characteristic_scales(const MaterialParams& params);

/// Undamaged free energy 1/2 eps . E . eps.
double free_energy(const Voigt& eps, const Matrix6& stiffness);

inline double damage_function(double d) { return std::exp(-d); }

/// Forward-Euler step of d' = exp(-d) Psi0(eps) / eta using the state at the
/// beginning of the step.
double update_damage_order0(double d0, const Voigt& eps0, const Matrix6& stiffness,
                            double eta, double dt);

/// Source term used for the first-order damage rate.
enum class DamageSensitivityLaw {
  /// xi-derivative of the order-0 rate:
  /// d1' = exp(-d0) [(1 - d1) Psi0(eps0) + eps1 . E . eps0] / eta
  exact_derivative,
  /// d1' = exp(-d0) [(1 - d1) eps0 . E . eps0 + 2 eps1 . E . eps0] / eta,
  /// twice the derivative above. Kept for comparison only.
  full_quadratic_drive,
};

double damage_rate_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                          const Matrix6& stiffness, double eta,
                          DamageSensitivityLaw law = DamageSensitivityLaw::exact_derivative);

double update_damage_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                            const Matrix6& stiffness, double eta, double dt,
                            DamageSensitivityLaw law = DamageSensitivityLaw::exact_derivative);

/// sigma0 = exp(-d0) E eps0.
Voigt stress_order0(double d0, const Voigt& eps0, const Matrix6& stiffness);

/// sigma1 = exp(-d0) [(1 - d1) E eps0 + E eps1], the xi-derivative of the
/// stress of the realization with stiffness (1 + xi) E.
Voigt stress_order1(double d0, double d1, const Voigt& eps0, const Voigt& eps1,
                    const Matrix6& stiffness);

/// Both expansion orders at one Gauss point.
struct GaussPointState {
  double d0 = 0.0;
  double d1 = 0.0;
  Voigt eps0{};
  Voigt eps1{};
  Voigt sigma0{};
  Voigt sigma1{};
};

}  // namespace tsdm
