#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "tsdm/mesh.hpp"
#include "tsdm/solver.hpp"

namespace tsdm::test {

// nx x ny x nz block of cubes with edge h; sets for the six faces.
inline Mesh block(std::size_t nx, std::size_t ny, std::size_t nz, double h = 1.0) {
  Mesh m;
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) {
    return (k * (ny + 1) + j) * (nx + 1) + i;
  };
  for (std::size_t k = 0; k <= nz; ++k)
    for (std::size_t j = 0; j <= ny; ++j)
      for (std::size_t i = 0; i <= nx; ++i) {
        m.nodes.push_back({h * i, h * j, h * k});
        const std::size_t n = id(i, j, k);
        if (i == 0) m.node_sets["x0"].push_back(n);
        if (i == nx) m.node_sets["x1"].push_back(n);
        if (j == 0) m.node_sets["y0"].push_back(n);
        if (j == ny) m.node_sets["y1"].push_back(n);
        if (k == 0) m.node_sets["z0"].push_back(n);
        if (k == nz) m.node_sets["z1"].push_back(n);
      }
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        m.elements.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k),
                              id(i, j + 1, k), id(i, j, k + 1), id(i + 1, j, k + 1),
                              id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)});
  return m;
}

inline constexpr GridResolution kCoarsePlate{6, 8, 1};

// Desk-scale quarter plate on the 41-element grid.
inline Problem coarse_plate(double eta = 750.0, double total_time = 0.016) {
  Problem p;
  p.mesh = generate_plate_with_hole({}, kCoarsePlate);
  p.material.eta = eta;
  p.mass_damping = 8000.0;
  p.loads.total_time = total_time;
  p.loads.dirichlet = {{"top", Axis::y, 0.001 * total_time / 0.016, total_time},
                       {"symmetry_x", Axis::x, 0.0, 0.0},
                       {"symmetry_y", Axis::y, 0.0, 0.0},
                       {"back", Axis::z, 0.0, 0.0}};
  return p;
}

// Fresh scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("tsdm-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace tsdm::test
