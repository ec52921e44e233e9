#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace tsdm {

using Vec3 = std::array<double, 3>;

/// Symmetric second-order tensor in Voigt order xx, yy, zz, xy, yz, zx.
/// Strains carry engineering shear (gamma = 2 eps_ij); stresses carry the
/// tensor components. With this convention eps . sigma is the work density.
using Voigt = std::array<double, 6>;

using Matrix6 = std::array<std::array<double, 6>, 6>;

inline Voigt operator*(const Matrix6& m, const Voigt& v) {
  Voigt r{};
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += m[i][j] * v[j];
    r[i] = s;
  }
  return r;
}

inline double dot(const Voigt& a, const Voigt& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) s += a[i] * b[i];
  return s;
}

/// Frobenius norm of the stress tensor stored in Voigt form.
inline double stress_norm(const Voigt& s) {
  return std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2] +
                   2.0 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]));
}

inline constexpr std::size_t kNodesPerElement = 8;
inline constexpr std::size_t kGaussPerElement = 8;
inline constexpr std::size_t kElementDofs = 24;

}  // namespace tsdm
