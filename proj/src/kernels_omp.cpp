#include "tsdm/kernels.hpp"

namespace tsdm::kernels::omp {

void compute_strains(const Mesh& mesh, const ElementQuadrature& q, std::span<const Vec3> u,
                     std::span<Voigt> eps) {
  const long ne = static_cast<long>(mesh.element_count());
#pragma omp parallel for schedule(static)
  for (long e = 0; e < ne; ++e)
    for (std::size_t g = 0; g < kGaussPerElement; ++g)
      eps[static_cast<std::size_t>(e) * kGaussPerElement + g] =
          gauss_strain(mesh, q, static_cast<std::size_t>(e), g, u);
}

void assemble_internal_force(const Mesh& mesh, const ElementQuadrature& q,
                             const NodeAdjacency& adjacency, std::span<const Voigt> sigma,
                             std::span<Vec3> element_forces, std::span<Vec3> f) {
  const long ne = static_cast<long>(mesh.element_count());
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (long e = 0; e < ne; ++e) {
      std::array<Vec3, 8> fe;
      element_force(q, static_cast<std::size_t>(e), sigma, fe);
      for (std::size_t i = 0; i < 8; ++i)
        element_forces[static_cast<std::size_t>(e) * kNodesPerElement + i] = fe[i];
    }
    // Gather per node in ascending element order: the same summation order
    // as the serial scatter.
    const long nn = static_cast<long>(mesh.node_count());
#pragma omp for schedule(static)
    for (long n = 0; n < nn; ++n) {
      Vec3 acc{0.0, 0.0, 0.0};
      for (std::size_t k = adjacency.offsets[static_cast<std::size_t>(n)];
           k < adjacency.offsets[static_cast<std::size_t>(n) + 1]; ++k) {
        const Vec3& c = element_forces[adjacency.entries[k]];
        acc[0] += c[0];
        acc[1] += c[1];
        acc[2] += c[2];
      }
      f[static_cast<std::size_t>(n)] = acc;
    }
  }
}

}  // namespace tsdm::kernels::omp
