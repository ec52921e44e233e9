#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tsdm/mesh.hpp"
#include "tsdm/types.hpp"

namespace tsdm {

enum class Execution { serial, openmp };

/// Precomputed 2x2x2 Gauss data for every element. Gauss point g of
/// element e has the flat index e * 8 + g.
struct ElementQuadrature {
  std::vector<std::array<std::array<double, 3>, 8>> dndx;  // dN_i/dx_k
  std::vector<std::array<double, 8>> shape;                 // N_i
  std::vector<double> weight;                               // det J * w

  static ElementQuadrature build(const Mesh& mesh);
  std::size_t gauss_count() const { return weight.size(); }
};

/// For each node, the (element, local node) pairs touching it in ascending
/// element order. The OpenMP assembly gathers in this order, which matches
/// the element-order scatter of the serial kernel bit for bit.
struct NodeAdjacency {
  std::vector<std::size_t> offsets;  // node_count + 1
  std::vector<std::size_t> entries;  // element * 8 + local

  static NodeAdjacency build(const Mesh& mesh);
};

namespace kernels {

// Serial reference implementations.
namespace serial {
void compute_strains(const Mesh& mesh, const ElementQuadrature& q, std::span<const Vec3> u,
                     std::span<Voigt> eps);
void assemble_internal_force(const Mesh& mesh, const ElementQuadrature& q,
                             std::span<const Voigt> sigma, std::span<Vec3> f);
}  // namespace serial

// OpenMP versions; results are bitwise identical to the serial ones.
namespace omp {
void compute_strains(const Mesh& mesh, const ElementQuadrature& q, std::span<const Vec3> u,
                     std::span<Voigt> eps);
/// element_forces is scratch of size element_count * 8.
void assemble_internal_force(const Mesh& mesh, const ElementQuadrature& q,
                             const NodeAdjacency& adjacency, std::span<const Voigt> sigma,
                             std::span<Vec3> element_forces, std::span<Vec3> f);
}  // namespace omp

/// Element force of one element: sum over its Gauss points of B^T sigma w.
inline void element_force(const ElementQuadrature& q, std::size_t e,
                          std::span<const Voigt> sigma, std::array<Vec3, 8>& fe) {
  fe = {};
  for (std::size_t g = 0; g < kGaussPerElement; ++g) {
    const std::size_t gp = e * kGaussPerElement + g;
    const auto& s = sigma[gp];
    const double w = q.weight[gp];
    const auto& dn = q.dndx[gp];
    for (std::size_t i = 0; i < 8; ++i) {
      const double nx = dn[i][0], ny = dn[i][1], nz = dn[i][2];
      fe[i][0] += w * (nx * s[0] + ny * s[3] + nz * s[5]);
      fe[i][1] += w * (ny * s[1] + nx * s[3] + nz * s[4]);
      fe[i][2] += w * (nz * s[2] + ny * s[4] + nx * s[5]);
    }
  }
}

inline Voigt gauss_strain(const Mesh& mesh, const ElementQuadrature& q, std::size_t e,
                          std::size_t g, std::span<const Vec3> u) {
  const std::size_t gp = e * kGaussPerElement + g;
  const auto& dn = q.dndx[gp];
  Voigt eps{};
  for (std::size_t i = 0; i < 8; ++i) {
    const Vec3& ui = u[mesh.elements[e][i]];
    const double nx = dn[i][0], ny = dn[i][1], nz = dn[i][2];
    eps[0] += nx * ui[0];
    eps[1] += ny * ui[1];
    eps[2] += nz * ui[2];
    eps[3] += ny * ui[0] + nx * ui[1];
    eps[4] += nz * ui[1] + ny * ui[2];
    eps[5] += nx * ui[2] + nz * ui[0];
  }
  return eps;
}

}  // namespace kernels

/// Strain and internal-force evaluation bound to one mesh and execution mode.
class ForceAssembler {
 public:
  ForceAssembler(const Mesh& mesh, const ElementQuadrature& q, Execution exec);

  void strains(std::span<const Vec3> u, std::span<Voigt> eps) const;
  void internal_force(std::span<const Voigt> sigma, std::span<Vec3> f);
  Execution execution() const { return exec_; }

 private:
  const Mesh* mesh_;
  const ElementQuadrature* q_;
  Execution exec_;
  NodeAdjacency adjacency_;
  std::vector<Vec3> element_forces_;
};

}  // namespace tsdm
