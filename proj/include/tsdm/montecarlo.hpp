#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tsdm/solver.hpp"
#include "tsdm/tsm.hpp"

namespace tsdm {

enum class XiKind { normal, uniform };

/// Zero-mean symmetric distribution cut at |xi| <= truncation by rejection.
struct XiDistribution {
  XiKind kind = XiKind::normal;
  double std = 0.1;          // of the untruncated distribution
  double truncation = 0.9;
  std::uint64_t seed = 20240601;

  void validate() const;
};

/// n draws from a 64-bit Mersenne Twister seeded with dist.seed.
std::vector<double> sample_xi(const XiDistribution& dist, std::size_t n);

/// Bessel-corrected variance of the samples about their own mean.
double sample_variance(const std::vector<double>& samples);

struct McEnsemble {
  std::vector<double> xi;
  std::vector<History> histories;
  std::vector<double> wall_s;  // per run
  double total_wall_s = 0.0;
};

/// One run_deterministic per sample, distributed over `workers` OpenMP
/// threads; each run is itself serial. A failing run aborts the ensemble
/// with an error naming its xi.
McEnsemble run_mc(const Problem& problem, const std::vector<double>& samples, double dt,
                  const OutputRequest& outputs, int workers = 1);

/// Sample mean and Bessel-corrected standard deviation of d, f, sigma and
/// the reaction forces. Samples are reduced in ascending xi order, so the
/// result does not depend on the order of the ensemble.
UqSummary mc_statistics(const McEnsemble& ensemble);

/// (run(xi = h) - run(xi = -h)) / (2h) for u, a, d, eps, sigma and the
/// reaction series.
History fd_oracle(const Problem& problem, double h, double dt, const OutputRequest& outputs,
                  Execution exec = Execution::serial);

/// Central difference of two histories on the same grid.
History central_difference(const History& plus, const History& minus, double h);

// --- Comparison ------------------------------------------------------------

/// |a - b| / |b|, zero when both vanish.
double relative_error(double a, double b);

struct ElementComparison {
  std::size_t snapshot = 0;
  double time = 0.0;
  std::size_t element = 0;
  double mean_f_tsm = 0.0, mean_f_mc = 0.0;
  double std_f_tsm = 0.0, std_f_mc = 0.0;
  double err_mean_f = 0.0, err_std_f = 0.0;
  double err_mean_sigma = 0.0, err_std_sigma = 0.0;  // on the tensor norm
  bool above_mask = false;
};

struct GroupErrors {
  std::size_t count = 0;
  double max_err_mean_f = 0.0;
  double max_err_std_f = 0.0;
  double mean_err_std_f = 0.0;
  double max_err_mean_sigma = 0.0;
  double max_err_std_sigma = 0.0;
};

/// Force errors are the largest deviation over time divided by the peak
/// magnitude of the MC series, per component.
struct ForceComparison {
  std::string node_set;
  Vec3 err_mean{};
  Vec3 err_std{};
};

struct ComparisonReport {
  double mask_threshold = 0.5;
  std::vector<ElementComparison> rows;
  GroupErrors above;  // elements with TSM <f> above the threshold
  GroupErrors below;
  std::vector<ForceComparison> forces;
};

/// Element-averaged TSM vs MC errors. Throws ValidationError if the grids
/// differ.
ComparisonReport compare(const UqSummary& tsm, const UqSummary& mc, const Mesh& mesh,
                         double mask_threshold = 0.5);

double element_average(const std::vector<double>& gauss_values, std::size_t element);
Voigt element_average(const std::vector<Voigt>& gauss_values, std::size_t element);

struct LineRow {
  std::size_t position = 0;
  std::size_t element = 0;
  Vec3 centroid{};
  double mean_f = 0.0, std_f = 0.0;
  double mean_d = 0.0, std_d = 0.0;
  double mean_sigma_norm = 0.0, std_sigma_norm = 0.0;
};

/// Element averages along a named path, in path order.
std::vector<LineRow> extract_line(const UqSnapshot& snapshot, const Mesh& mesh,
                                  const std::string& path_name);

}  // namespace tsdm
