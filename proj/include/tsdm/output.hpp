#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tsdm/mesh.hpp"
#include "tsdm/montecarlo.hpp"
#include "tsdm/solver.hpp"
#include "tsdm/tsm.hpp"

namespace tsdm {

using CellFields = std::vector<std::pair<std::string, std::vector<double>>>;

/// Legacy ASCII VTK unstructured grid of hexahedra. Point data holds the
/// displacement when `u` is non-empty; every cell field becomes a scalar.
std::string vtk_text(const Mesh& mesh, const std::vector<Vec3>& u, const CellFields& cells,
                     const std::string& title = "tsdm");

/// Element averages of d, f = exp(-d) and the stress norm.
CellFields snapshot_cells(const Snapshot& snapshot, const Mesh& mesh);
/// Element averages of every expectation and standard deviation field.
CellFields summary_cells(const UqSnapshot& snapshot, const Mesh& mesh);

std::string reaction_csv(const ReactionSeries& series);
std::string force_summary_csv(const UqForceSeries& series);
std::string line_csv(const std::vector<LineRow>& rows);
std::string comparison_csv(const ComparisonReport& report);
std::string comparison_groups_csv(const ComparisonReport& report);

/// Plain-text dump of a UQ summary that load_summary reads back bit-exactly.
std::string summary_text(const UqSummary& summary);
UqSummary parse_summary(const std::string& text);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Collects the files of one artifact directory in a staging directory and
/// moves it into place on commit, replacing any previous directory.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path target);
  ~ArtifactDir();
  ArtifactDir(const ArtifactDir&) = delete;
  ArtifactDir& operator=(const ArtifactDir&) = delete;

  void write(const std::string& name, const std::string& content);
  /// Path inside the staging directory, for writers that need a file name.
  std::filesystem::path staged(const std::string& name) const;
  void commit();
  const std::filesystem::path& target() const { return target_; }

 private:
  std::filesystem::path target_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

/// Key = value manifest lines, in insertion order.
using Manifest = std::vector<std::pair<std::string, std::string>>;
std::string manifest_text(const Manifest& manifest);
std::map<std::string, std::string> parse_manifest(const std::string& text);

std::string format_double(double v);

}  // namespace tsdm
