#include <algorithm>

#include "tsdm/errors.hpp"
#include "tsdm/hex8.hpp"
#include "tsdm/kernels.hpp"

namespace tsdm {

ElementQuadrature ElementQuadrature::build(const Mesh& mesh) {
  ElementQuadrature q;
  const std::size_t n = mesh.gauss_count();
  q.dndx.resize(n);
  q.shape.resize(n);
  q.weight.resize(n);
  const auto pts = hex8::gauss_points();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    std::array<Vec3, 8> x{};
    for (std::size_t i = 0; i < 8; ++i) x[i] = mesh.nodes[mesh.elements[e][i]];
    for (std::size_t g = 0; g < kGaussPerElement; ++g) {
      const std::size_t gp = e * kGaussPerElement + g;
      const auto m = hex8::map(x, pts[g]);
      if (!(m.det_j > 0.0))
        throw ValidationError("element " + std::to_string(e) +
                              " has a non-positive Jacobian determinant");
      q.dndx[gp] = m.dndx;
      q.shape[gp] = hex8::shape(pts[g]);
      q.weight[gp] = m.det_j * hex8::kGaussWeight;
    }
  }
  return q;
}

NodeAdjacency NodeAdjacency::build(const Mesh& mesh) {
  NodeAdjacency a;
  a.offsets.assign(mesh.node_count() + 1, 0);
  for (const auto& el : mesh.elements)
    for (std::size_t n : el) ++a.offsets[n + 1];
  for (std::size_t i = 0; i < mesh.node_count(); ++i) a.offsets[i + 1] += a.offsets[i];
  a.entries.resize(a.offsets.back());
  std::vector<std::size_t> fill(a.offsets.begin(), a.offsets.end() - 1);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (std::size_t i = 0; i < 8; ++i)
      a.entries[fill[mesh.elements[e][i]]++] = e * kNodesPerElement + i;
  return a;
}

namespace kernels::serial {

void compute_strains(const Mesh& mesh, const ElementQuadrature& q, std::span<const Vec3> u,
                     std::span<Voigt> eps) {
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (std::size_t g = 0; g < kGaussPerElement; ++g)
      eps[e * kGaussPerElement + g] = gauss_strain(mesh, q, e, g, u);
}

void assemble_internal_force(const Mesh& mesh, const ElementQuadrature& q,
                             std::span<const Voigt> sigma, std::span<Vec3> f) {
  std::fill(f.begin(), f.end(), Vec3{0.0, 0.0, 0.0});
  std::array<Vec3, 8> fe{};
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    element_force(q, e, sigma, fe);
    for (std::size_t i = 0; i < 8; ++i) {
      Vec3& fn = f[mesh.elements[e][i]];
      fn[0] += fe[i][0];
      fn[1] += fe[i][1];
      fn[2] += fe[i][2];
    }
  }
}

}  // namespace kernels::serial

ForceAssembler::ForceAssembler(const Mesh& mesh, const ElementQuadrature& q, Execution exec)
    : mesh_(&mesh), q_(&q), exec_(exec) {
  if (exec_ == Execution::openmp) {
    adjacency_ = NodeAdjacency::build(mesh);
    element_forces_.resize(mesh.element_count() * kNodesPerElement);
  }
}

void ForceAssembler::strains(std::span<const Vec3> u, std::span<Voigt> eps) const {
  if (exec_ == Execution::openmp)
    kernels::omp::compute_strains(*mesh_, *q_, u, eps);
  else
    kernels::serial::compute_strains(*mesh_, *q_, u, eps);
}

void ForceAssembler::internal_force(std::span<const Voigt> sigma, std::span<Vec3> f) {
  if (exec_ == Execution::openmp)
    kernels::omp::assemble_internal_force(*mesh_, *q_, adjacency_, sigma, element_forces_, f);
  else
    kernels::serial::assemble_internal_force(*mesh_, *q_, sigma, f);
}

}  // namespace tsdm
