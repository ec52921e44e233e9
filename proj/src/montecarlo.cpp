#include "tsdm/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

#include "tsdm/errors.hpp"

namespace tsdm {

void XiDistribution::validate() const {
  if (!(std >= 0.0)) throw ValidationError("xi standard deviation must be non-negative");
  if (!(truncation > 0.0) || truncation > 0.9)
    throw ValidationError("xi truncation bound must lie in (0, 0.9]");
  if (!(std < truncation))
    throw ValidationError("xi standard deviation must be below the truncation bound");
}

std::vector<double> sample_xi(const XiDistribution& dist, std::size_t n) {
  dist.validate();
  if (n < 1) throw ValidationError("need at least one sample");
  std::mt19937_64 rng(dist.seed);
  std::vector<double> out;
  out.reserve(n);
  if (dist.kind == XiKind::normal) {
    std::normal_distribution<double> g(0.0, dist.std);
    while (out.size() < n) {
      const double x = g(rng);
      if (std::abs(x) <= dist.truncation) out.push_back(x);
    }
  } else {
    const double half = std::sqrt(3.0) * dist.std;
    std::uniform_real_distribution<double> g(-half, half);
    while (out.size() < n) {
      const double x = g(rng);
      if (std::abs(x) <= dist.truncation) out.push_back(x);
    }
  }
  return out;
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw ValidationError("sample variance needs at least two samples");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

McEnsemble run_mc(const Problem& problem, const std::vector<double>& samples, double dt,
                  const OutputRequest& outputs, int workers) {
  if (samples.empty()) throw ValidationError("Monte Carlo needs at least one sample");
  if (workers < 1) throw ValidationError("worker count must be at least 1");
  for (double xi : samples)
    if (!(1.0 + xi > 0.0)) throw ValidationError("sample xi = " + std::to_string(xi) + " leaves 1 + xi <= 0");
  problem.validate();

  const std::size_t n = samples.size();
  McEnsemble ens;
  ens.xi = samples;
  ens.histories.resize(n);
  ens.wall_s.assign(n, 0.0);
  std::vector<std::exception_ptr> failures(n);
  const auto t0 = std::chrono::steady_clock::now();

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto start = std::chrono::steady_clock::now();
    try {
      ens.histories[k] = run_deterministic(problem, samples[k], dt, outputs, Execution::serial);
    } catch (...) {
      failures[k] = std::current_exception();
    }
    ens.wall_s[k] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  ens.total_wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (std::size_t k = 0; k < n; ++k) {
    if (!failures[k]) continue;
    std::ostringstream msg;
    msg.precision(17);
    msg << "Monte Carlo sample " << k << " (xi = " << samples[k] << ") failed: ";
    try {
      std::rethrow_exception(failures[k]);
    } catch (const InstabilityError& e) {
      msg << e.what();
      throw InstabilityError(msg.str(), e.step());
    } catch (const ValidationError& e) {
      msg << e.what();
      throw ValidationError(msg.str());
    }
  }
  return ens;
}

namespace {

// Two-pass mean and Bessel-corrected deviation over values produced by get(k)
// for k in `order`, shifted by the first value so that a constant ensemble has
// exactly zero spread.
template <class Get>
std::pair<double, double> mean_std(const std::vector<std::size_t>& order, Get get) {
  const double shift = get(order.front());
  double sum = 0.0;
  for (std::size_t k : order) sum += get(k) - shift;
  const double m = sum / static_cast<double>(order.size());
  double ss = 0.0;
  for (std::size_t k : order) {
    const double r = (get(k) - shift) - m;
    ss += r * r;
  }
  return {shift + m, std::sqrt(ss / static_cast<double>(order.size() - 1))};
}

}  // namespace

UqSummary mc_statistics(const McEnsemble& ens) {
  const std::size_t n = ens.histories.size();
  if (n < 2) throw ValidationError("Monte Carlo statistics need at least two samples");
  if (ens.xi.size() != n) throw ValidationError("ensemble has mismatched sample and history counts");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ens.xi[a] < ens.xi[b]; });

  const History& ref = ens.histories.front();
  for (const History& h : ens.histories) {
    if (h.snapshots.size() != ref.snapshots.size() || h.reactions.size() != ref.reactions.size())
      throw ValidationError("ensemble histories do not share a snapshot grid");
    for (std::size_t i = 0; i < ref.snapshots.size(); ++i)
      if (h.snapshots[i].step != ref.snapshots[i].step ||
          h.snapshots[i].d.size() != ref.snapshots[i].d.size())
        throw ValidationError("ensemble histories do not share a snapshot grid");
    for (std::size_t r = 0; r < ref.reactions.size(); ++r)
      if (h.reactions[r].time.size() != ref.reactions[r].time.size())
        throw ValidationError("ensemble reaction series differ in length");
  }

  UqSummary out;
  for (std::size_t i = 0; i < ref.snapshots.size(); ++i) {
    const std::size_t ngp = ref.snapshots[i].d.size();
    UqSnapshot u;
    u.step = ref.snapshots[i].step;
    u.time = ref.snapshots[i].time;
    u.mean_d.resize(ngp);
    u.std_d.resize(ngp);
    u.mean_f.resize(ngp);
    u.std_f.resize(ngp);
    u.mean_sigma.resize(ngp);
    u.std_sigma.resize(ngp);
    for (std::size_t gp = 0; gp < ngp; ++gp) {
      std::tie(u.mean_d[gp], u.std_d[gp]) =
          mean_std(order, [&](std::size_t k) { return ens.histories[k].snapshots[i].d[gp]; });
      std::tie(u.mean_f[gp], u.std_f[gp]) = mean_std(order, [&](std::size_t k) {
        return damage_function(ens.histories[k].snapshots[i].d[gp]);
      });
      for (std::size_t c = 0; c < 6; ++c)
        std::tie(u.mean_sigma[gp][c], u.std_sigma[gp][c]) = mean_std(
            order, [&](std::size_t k) { return ens.histories[k].snapshots[i].sigma[gp][c]; });
    }
    out.snapshots.push_back(std::move(u));
  }
  for (std::size_t r = 0; r < ref.reactions.size(); ++r) {
    const auto& rs = ref.reactions[r];
    UqForceSeries f{rs.node_set, rs.time, {}, {}};
    f.mean.resize(rs.time.size());
    f.std.resize(rs.time.size());
    for (std::size_t t = 0; t < rs.time.size(); ++t)
      for (std::size_t c = 0; c < 3; ++c)
        std::tie(f.mean[t][c], f.std[t][c]) =
            mean_std(order, [&](std::size_t k) { return ens.histories[k].reactions[r].force[t][c]; });
    out.forces.push_back(std::move(f));
  }
  return out;
}

namespace {

template <class T>
std::vector<T> diff_vec(const std::vector<T>& a, const std::vector<T>& b, double h) {
  if (a.size() != b.size()) throw ValidationError("finite-difference histories differ in size");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_same_v<T, double>) {
      out[i] = (a[i] - b[i]) / (2.0 * h);
    } else {
      for (std::size_t c = 0; c < a[i].size(); ++c) out[i][c] = (a[i][c] - b[i][c]) / (2.0 * h);
    }
  }
  return out;
}

}  // namespace

History central_difference(const History& plus, const History& minus, double h) {
  if (plus.snapshots.size() != minus.snapshots.size() ||
      plus.reactions.size() != minus.reactions.size())
    throw ValidationError("finite-difference histories do not share a grid");
  History out;
  out.dt = plus.dt;
  out.steps = plus.steps;
  for (std::size_t i = 0; i < plus.snapshots.size(); ++i) {
    const Snapshot& a = plus.snapshots[i];
    const Snapshot& b = minus.snapshots[i];
    if (a.step != b.step) throw ValidationError("finite-difference snapshots differ in step");
    Snapshot s;
    s.step = a.step;
    s.time = a.time;
    s.u = diff_vec(a.u, b.u, h);
    s.a = diff_vec(a.a, b.a, h);
    s.d = diff_vec(a.d, b.d, h);
    s.eps = diff_vec(a.eps, b.eps, h);
    s.sigma = diff_vec(a.sigma, b.sigma, h);
    out.snapshots.push_back(std::move(s));
  }
  for (std::size_t r = 0; r < plus.reactions.size(); ++r)
    out.reactions.push_back({plus.reactions[r].node_set, plus.reactions[r].time,
                             diff_vec(plus.reactions[r].force, minus.reactions[r].force, h)});
  return out;
}

History fd_oracle(const Problem& problem, double h, double dt, const OutputRequest& outputs,
                  Execution exec) {
  if (!(h > 0.0) || !(h < 1.0)) throw ValidationError("finite-difference step must lie in (0, 1)");
  const History plus = run_deterministic(problem, h, dt, outputs, exec);
  const History minus = run_deterministic(problem, -h, dt, outputs, exec);
  return central_difference(plus, minus, h);
}

// --- Comparison ------------------------------------------------------------

double relative_error(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::abs(b);
}

double element_average(const std::vector<double>& v, std::size_t e) {
  double s = 0.0;
  for (std::size_t g = 0; g < kGaussPerElement; ++g) s += v[e * kGaussPerElement + g];
  return s / static_cast<double>(kGaussPerElement);
}

Voigt element_average(const std::vector<Voigt>& v, std::size_t e) {
  Voigt s{};
  for (std::size_t g = 0; g < kGaussPerElement; ++g)
    for (std::size_t c = 0; c < 6; ++c) s[c] += v[e * kGaussPerElement + g][c];
  for (double& c : s) c /= static_cast<double>(kGaussPerElement);
  return s;
}

namespace {

double norm_error(const Voigt& a, const Voigt& b) {
  Voigt d;
  for (std::size_t c = 0; c < 6; ++c) d[c] = a[c] - b[c];
  const double nd = stress_norm(d);
  if (nd == 0.0) return 0.0;
  return nd / stress_norm(b);
}

void accumulate(GroupErrors& g, const ElementComparison& r) {
  ++g.count;
  g.max_err_mean_f = std::max(g.max_err_mean_f, r.err_mean_f);
  g.max_err_std_f = std::max(g.max_err_std_f, r.err_std_f);
  g.mean_err_std_f += r.err_std_f;
  g.max_err_mean_sigma = std::max(g.max_err_mean_sigma, r.err_mean_sigma);
  g.max_err_std_sigma = std::max(g.max_err_std_sigma, r.err_std_sigma);
}

}  // namespace

ComparisonReport compare(const UqSummary& tsm, const UqSummary& mc, const Mesh& mesh,
                         double mask_threshold) {
  if (tsm.snapshots.size() != mc.snapshots.size())
    throw ValidationError("TSM and MC summaries have different snapshot counts");
  ComparisonReport rep;
  rep.mask_threshold = mask_threshold;
  for (std::size_t i = 0; i < tsm.snapshots.size(); ++i) {
    const UqSnapshot& a = tsm.snapshots[i];
    const UqSnapshot& b = mc.snapshots[i];
    if (a.step != b.step || a.mean_f.size() != mesh.gauss_count() ||
        b.mean_f.size() != mesh.gauss_count())
      throw ValidationError("TSM and MC summaries differ at snapshot " + std::to_string(i));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      ElementComparison r;
      r.snapshot = i;
      r.time = a.time;
      r.element = e;
      r.mean_f_tsm = element_average(a.mean_f, e);
      r.mean_f_mc = element_average(b.mean_f, e);
      r.std_f_tsm = element_average(a.std_f, e);
      r.std_f_mc = element_average(b.std_f, e);
      r.err_mean_f = relative_error(r.mean_f_tsm, r.mean_f_mc);
      r.err_std_f = relative_error(r.std_f_tsm, r.std_f_mc);
      r.err_mean_sigma = norm_error(element_average(a.mean_sigma, e), element_average(b.mean_sigma, e));
      r.err_std_sigma = norm_error(element_average(a.std_sigma, e), element_average(b.std_sigma, e));
      r.above_mask = r.mean_f_tsm > mask_threshold;
      accumulate(r.above_mask ? rep.above : rep.below, r);
      rep.rows.push_back(r);
    }
  }
  for (GroupErrors* g : {&rep.above, &rep.below})
    if (g->count > 0) g->mean_err_std_f /= static_cast<double>(g->count);

  for (const auto& fm : mc.forces) {
    const UqForceSeries& ft = tsm.force(fm.node_set);
    if (ft.time.size() != fm.time.size())
      throw ValidationError("force series for '" + fm.node_set + "' differ in length");
    ForceComparison fc{fm.node_set, {}, {}};
    for (std::size_t c = 0; c < 3; ++c) {
      double peak_mean = 0.0, peak_std = 0.0, dev_mean = 0.0, dev_std = 0.0;
      for (std::size_t t = 0; t < fm.time.size(); ++t) {
        peak_mean = std::max(peak_mean, std::abs(fm.mean[t][c]));
        peak_std = std::max(peak_std, std::abs(fm.std[t][c]));
        dev_mean = std::max(dev_mean, std::abs(ft.mean[t][c] - fm.mean[t][c]));
        dev_std = std::max(dev_std, std::abs(ft.std[t][c] - fm.std[t][c]));
      }
      fc.err_mean[c] = dev_mean == 0.0 ? 0.0 : dev_mean / peak_mean;
      fc.err_std[c] = dev_std == 0.0 ? 0.0 : dev_std / peak_std;
    }
    rep.forces.push_back(fc);
  }
  return rep;
}

std::vector<LineRow> extract_line(const UqSnapshot& s, const Mesh& mesh,
                                  const std::string& path_name) {
  const auto& path = mesh.element_path(path_name);
  if (s.mean_f.size() != mesh.gauss_count())
    throw ValidationError("summary does not match the mesh");
  std::vector<LineRow> rows;
  rows.reserve(path.size());
  for (std::size_t p = 0; p < path.size(); ++p) {
    const std::size_t e = path[p];
    LineRow r;
    r.position = p;
    r.element = e;
    r.centroid = element_centroid(mesh, e);
    r.mean_f = element_average(s.mean_f, e);
    r.std_f = element_average(s.std_f, e);
    r.mean_d = element_average(s.mean_d, e);
    r.std_d = element_average(s.std_d, e);
    r.mean_sigma_norm = stress_norm(element_average(s.mean_sigma, e));
    r.std_sigma_norm = stress_norm(element_average(s.std_sigma, e));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace tsdm
