#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsdm/kernels.hpp"
#include "tsdm/material.hpp"
#include "tsdm/mesh.hpp"
#include "tsdm/montecarlo.hpp"
#include "tsdm/solver.hpp"
#include "tsdm/tsm.hpp"

namespace tsdm {

enum class ProblemKind { double_notch, plate_hole, mesh_file };

/// desk: horizon 16 ms with viscosity and damping scaled so damage develops
/// within it. full: the 1 s benchmark horizon, viscosities and time steps.
enum class TimeScale { desk, full };

struct RunConfig {
  ProblemKind problem = ProblemKind::double_notch;
  TimeScale scale = TimeScale::desk;
  std::filesystem::path mesh_path;
  std::optional<GridResolution> resolution;
  DoubleNotchGeometry notch;
  PlateWithHoleGeometry plate;

  MaterialParams material;
  double mass_damping = 0.0;
  LoadCase loads;

  double dt = 0.0;  // 0 selects the CFL step
  double cfl_safety = 0.5;

  TsmConfig tsm;

  std::size_t mc_samples = 500;
  XiDistribution xi;
  int workers = 1;

  Execution execution = Execution::serial;
  std::vector<double> snapshot_times;  // empty: quarters of the horizon
  std::size_t force_stride = 1;
  double mask_threshold = 0.5;
  double realization_xi = 0.0;  // run-det
  std::filesystem::path output_dir = "tsdm-out";

  /// Named path used for line tables ("centerline" or "midline").
  std::string line_path() const;
  /// The generated or loaded mesh.
  Mesh build_mesh() const;
  Problem build_problem() const;
  double time_step(const Mesh& mesh) const;
  OutputRequest outputs() const;
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// One `key = value` per line; `#` starts a comment. Throws ValidationError
/// naming the line of a malformed entry.
ConfigEntries parse_config_text(const std::string& text);

/// Applies the preset selected by `problem` and `scale`, then every entry in
/// order (later entries win). Unknown keys and bad values are rejected with
/// the key named. `dirichlet` may repeat; the first one replaces the preset
/// boundary conditions.
RunConfig make_config(const ConfigEntries& entries);

/// Canonical `key = value` dump of every setting, used for the manifest and
/// its hash.
std::string canonical_config(const RunConfig& config);

std::uint64_t fnv1a_hash(const std::string& text);
std::string hex64(std::uint64_t v);

/// All keys make_config accepts.
const std::vector<std::string>& config_keys();

}  // namespace tsdm
