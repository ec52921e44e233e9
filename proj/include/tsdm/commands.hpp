#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tsdm/config.hpp"

namespace tsdm {

const char* version_string();

/// Each command writes one artifact directory (config.output_dir unless an
/// explicit directory is given) with a manifest, and returns it.
std::filesystem::path cmd_mesh_gen(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_run_det(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_run_tsm(const RunConfig& config, std::ostream& log);
std::filesystem::path cmd_run_mc(const RunConfig& config, std::ostream& log);

/// Rescales the TSM standard deviations to the MC sample variance when the
/// two runs used different second moments.
std::filesystem::path cmd_compare(const std::filesystem::path& tsm_dir,
                                  const std::filesystem::path& mc_dir,
                                  const std::filesystem::path& out_dir, double mask_threshold,
                                  std::ostream& log);

struct TimingRow {
  std::string dir;
  std::string command;
  double wall_s = 0.0;
  std::size_t runs = 0;
};

struct TimingReport {
  std::vector<TimingRow> rows;
  double det_s = 0.0, tsm_s = 0.0, mc_s = 0.0;
  std::size_t mc_runs = 0;
  /// Zero when the inputs lack the runs needed for a ratio.
  double tsm_over_det = 0.0;
  double speedup = 0.0;  // MC total / TSM total
};

TimingReport report_timing(const std::vector<std::filesystem::path>& run_dirs);
std::string timing_text(const TimingReport& report);

/// Maps an in-flight exception to the CLI exit code: 1 validation,
/// 2 instability, 3 I/O.
int exit_code_for_current_exception(std::ostream& err);

}  // namespace tsdm
