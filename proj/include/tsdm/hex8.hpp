#pragma once

#include <array>
#include <cmath>

#include "tsdm/types.hpp"

// Trilinear hexahedron: reference coordinates in [-1, 1]^3, 2x2x2 Gauss rule.
namespace tsdm::hex8 {

inline constexpr std::array<std::array<double, 3>, 8> kNodeSigns{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

inline std::array<std::array<double, 3>, 8> gauss_points() {
  const double g = 1.0 / std::sqrt(3.0);
  std::array<std::array<double, 3>, 8> pts{};
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t k = 0; k < 3; ++k) pts[i][k] = g * kNodeSigns[i][k];
  return pts;
}

// All Gauss weights of the 2x2x2 rule are 1.
inline constexpr double kGaussWeight = 1.0;

inline std::array<double, 8> shape(const std::array<double, 3>& r) {
  std::array<double, 8> n{};
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& s = kNodeSigns[i];
    n[i] = 0.125 * (1 + s[0] * r[0]) * (1 + s[1] * r[1]) * (1 + s[2] * r[2]);
  }
  return n;
}

/// Derivatives dN_i / dr_k.
inline std::array<std::array<double, 3>, 8> shape_derivatives(
    const std::array<double, 3>& r) {
  std::array<std::array<double, 3>, 8> d{};
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& s = kNodeSigns[i];
    const double a = 1 + s[0] * r[0];
    const double b = 1 + s[1] * r[1];
    const double c = 1 + s[2] * r[2];
    d[i][0] = 0.125 * s[0] * b * c;
    d[i][1] = 0.125 * s[1] * a * c;
    d[i][2] = 0.125 * s[2] * a * b;
  }
  return d;
}

struct Mapped {
  /// dN_i / dx_k in physical coordinates.
  std::array<std::array<double, 3>, 8> dndx{};
  double det_j = 0.0;
};

/// Maps reference derivatives at r to physical ones for the given element
/// coordinates. det_j <= 0 signals an inverted or degenerate element; dndx
/// is left zero in that case.
inline Mapped map(const std::array<Vec3, 8>& x, const std::array<double, 3>& r) {
  const auto dr = shape_derivatives(r);
  double j[3][3] = {};
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) j[a][b] += dr[i][a] * x[i][b];
  // j[a][b] = dx_b / dr_a
  Mapped m;
  m.det_j = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
            j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
            j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
  if (!(m.det_j > 0.0)) return m;
  const double inv = 1.0 / m.det_j;
  double ji[3][3];
  ji[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) * inv;
  ji[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) * inv;
  ji[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) * inv;
  ji[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) * inv;
  ji[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) * inv;
  ji[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) * inv;
  ji[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) * inv;
  ji[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) * inv;
  ji[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * inv;
  // dN/dx_b = sum_a (dr_a/dx_b) dN/dr_a, with dr/dx = inverse of dx/dr.
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t b = 0; b < 3; ++b)
      m.dndx[i][b] = ji[b][0] * dr[i][0] + ji[b][1] * dr[i][1] + ji[b][2] * dr[i][2];
  return m;
}

}  // namespace tsdm::hex8
