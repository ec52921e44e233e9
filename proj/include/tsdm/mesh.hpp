#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsdm/types.hpp"

namespace tsdm {

using Element = std::array<std::size_t, kNodesPerElement>;

/// Trilinear hexahedral mesh. Element node order follows the usual
/// convention: the four nodes of the lower (zeta = -1) face counterclockwise,
/// then the upper face in the same order.
struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<Element> elements;
  /// Named node sets used for boundary conditions.
  std::map<std::string, std::vector<std::size_t>> node_sets;
  /// Named ordered element sequences used for line extraction.
  std::map<std::string, std::vector<std::size_t>> element_paths;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }
  std::size_t gauss_count() const { return elements.size() * kGaussPerElement; }

  const std::vector<std::size_t>& node_set(const std::string& name) const;
  const std::vector<std::size_t>& element_path(const std::string& name) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Throws ValidationError naming the first offending element or set.
/// Checks connectivity bounds, Jacobian positivity at all Gauss points,
/// set membership and uniqueness, and path contiguity.
void validate(const Mesh& mesh);

/// Element volume by 2x2x2 Gauss quadrature.
double element_volume(const Mesh& mesh, std::size_t element);
double total_volume(const Mesh& mesh);
Vec3 element_centroid(const Mesh& mesh, std::size_t element);

enum class Axis : int { x = 0, y = 1, z = 2 };

/// Linear ramp u(t) = amplitude * min(t / ramp_end, 1) on one displacement
/// component of every node in a set. ramp_end == 0 holds the value from t = 0.
struct DirichletRamp {
  std::string node_set;
  Axis axis = Axis::x;
  double amplitude = 0.0;  // m
  double ramp_end = 0.0;   // s

  double value(double t) const;
};

struct LoadCase {
  std::vector<DirichletRamp> dirichlet;
  Vec3 body_force{0.0, 0.0, 0.0};  // N/m^3
  double total_time = 0.0;         // s
};

/// Rejects ramps longer than the horizon, unknown sets, conflicting
/// prescriptions on the same DOF and constraint sets leaving rigid-body modes.
void validate(const LoadCase& loads, const Mesh& mesh);

// --- Structured generators -------------------------------------------------

struct GridResolution {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;
};

/// Rectangular specimen with two opposing rectangular edge notches at half
/// height. Cells whose centre lies inside a notch are removed.
struct DoubleNotchGeometry {
  double width = 0.11;          // x extent, m
  double height = 0.155;        // y extent, m
  double thickness = 0.005;     // z extent, m
  double notch_depth = 0.03;    // measured from each vertical edge, m
  double notch_height = 0.015;  // m
};

/// Resolution giving the 646-element benchmark mesh for the default geometry.
inline constexpr GridResolution kDoubleNotchBenchmarkResolution{22, 31, 1};

/// Sets: "top", "bottom", "left", "right", "back". Path: "centerline".
Mesh generate_double_notch(const DoubleNotchGeometry& geom,
                           const GridResolution& res);

/// Quarter of a plate with a central circular hole; the hole centre is the
/// origin and the quarter occupies x >= 0, y >= 0. Cells whose centre lies
/// inside the hole are removed.
struct PlateWithHoleGeometry {
  double width = 0.115;      // quarter x extent, m
  double height = 0.15;      // quarter y extent, m
  double thickness = 0.005;  // m
  double hole_radius = 0.055;
};

/// Resolution giving the 594-element benchmark mesh for the default geometry.
inline constexpr GridResolution kPlateBenchmarkResolution{23, 30, 1};

/// Sets: "top", "symmetry_x", "symmetry_y", "hole_edge", "back".
/// Path: "midline" (the element row along y = 0, from the hole outwards).
Mesh generate_plate_with_hole(const PlateWithHoleGeometry& geom,
                              const GridResolution& res);

/// Scans nx in [1, max_nx] and ny in [1, max_ny] for resolutions whose mesh
/// has exactly target_elements elements and returns the one whose cells are
/// closest to square in the x-y plane (ties: smaller nx). Returns nullopt if
/// no resolution matches.
std::optional<GridResolution> sweep_resolution(
    const std::function<std::size_t(const GridResolution&)>& count_elements,
    std::size_t target_elements, double width, double height,
    std::size_t max_nx, std::size_t max_ny, std::size_t nz = 1);

// --- Text format -----------------------------------------------------------

/// Sections NODES, ELEMENTS, SETS, PATHS, one record per line. Coordinates
/// are written in shortest round-trip form so save/load is bit-exact.
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

std::string to_text(const Mesh& mesh);
Mesh parse_mesh(const std::string& text);

}  // namespace tsdm
