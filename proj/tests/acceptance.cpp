// Acceptance run: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; no arguments runs all seven.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "tsdm/config.hpp"
#include "tsdm/errors.hpp"
#include "tsdm/montecarlo.hpp"
#include "tsdm/output.hpp"
#include "tsdm/tsm.hpp"

using namespace tsdm;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
};

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

// Records one check; a failing check fails the criterion.
bool expect(Outcome& o, bool ok, const std::string& what) {
  note("%s %s", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) o.pass = false;
  return ok;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

template <class T>
std::vector<double> flat(const std::vector<T>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
  return out;
}

std::filesystem::path scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() /
                 ("tsdm-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p;
}

// Desk configurations shared by several criteria.
RunConfig coarse_plate_config() {
  return make_config({{"problem", "plate_hole"}, {"resolution", "6x8x1"}, {"eta", "750"}});
}
RunConfig plate_config() { return make_config({{"problem", "plate_hole"}}); }
RunConfig notch_config() { return make_config({{"problem", "double_notch"}}); }

// --- 1 ---------------------------------------------------------------------

// Forward Euler at one material point under a held strain, to a t = 1.
struct PointRun {
  double d0 = 0.0, d1 = 0.0;
};

PointRun integrate_point(double dt_a, DamageSensitivityLaw law) {
  const Matrix6 E = stiffness_voigt(1.0e9, 0.8e9);
  const Voigt eps{1e-3, -2e-4, 0.0, 5e-4, 0.0, 0.0};
  const double eta = 1.0e9;
  const double a = free_energy(eps, E) / eta;
  const double dt = dt_a / a;
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / dt_a));
  const Voigt zero{};
  PointRun r;
  for (std::size_t n = 0; n < steps; ++n) {
    const double d1 = update_damage_order1(r.d0, r.d1, eps, zero, E, eta, dt, law);
    r.d0 = update_damage_order0(r.d0, eps, E, eta, dt);
    r.d1 = d1;
  }
  return r;
}

Outcome criterion1() {
  Outcome o;
  const double ln2 = std::log(2.0);
  struct Case {
    const char* name;
    DamageSensitivityLaw law;
    double exact_d1;
  };
  const Case cases[] = {{"quadratic-drive law", DamageSensitivityLaw::full_quadratic_drive, 0.75},
                        {"derivative law", DamageSensitivityLaw::exact_derivative, 0.5}};
  bool first = true;
  for (const auto& c : cases) {
    const PointRun fine = integrate_point(1e-5, c.law);
    const PointRun half = integrate_point(2e-5, c.law);
    if (first) {
      const double e = relative_error(fine.d0, ln2);
      expect(o, e <= 1e-4, fmt("d0 = %.10f vs ln 2, rel %.2e <= 1e-4", fine.d0, e));
      const double ratio = std::abs(half.d0 - ln2) / std::abs(fine.d0 - ln2);
      expect(o, ratio > 1.8 && ratio < 2.2,
             fmt("d0 error ratio dt 2e-5/a vs 1e-5/a = %.3f (first order)", ratio));
      first = false;
    }
    const double e = relative_error(fine.d1, c.exact_d1);
    expect(o, e <= 1e-4,
           std::string(c.name) + fmt(": d1 = %.10f vs %.2f", fine.d1, c.exact_d1) +
               fmt(", rel %.2e <= 1e-4", e));
    const double ratio = std::abs(half.d1 - c.exact_d1) / std::abs(fine.d1 - c.exact_d1);
    expect(o, ratio > 1.8 && ratio < 2.2,
           std::string(c.name) + fmt(": d1 error ratio = %.3f (first order)", ratio));
  }
  o.summary = "material-point closed forms";
  return o;
}

// --- 2 ---------------------------------------------------------------------

struct FdGap {
  double u = 0.0, d = 0.0, sigma = 0.0, force = 0.0;
  double max() const { return std::max({u, d, sigma, force}); }
};

FdGap fd_gap(const History& tsm1, const History& fd) {
  FdGap g;
  for (std::size_t i = 0; i < tsm1.snapshots.size(); ++i) {
    const auto& t = tsm1.snapshots[i];
    const auto& f = fd.snapshots[i];
    g.u = std::max(g.u, max_rel(flat(t.u), flat(f.u)));
    g.d = std::max(g.d, max_rel(t.d, f.d));
    g.sigma = std::max(g.sigma, max_rel(flat(t.sigma), flat(f.sigma)));
  }
  for (const auto& r : tsm1.reactions)
    g.force = std::max(g.force, max_rel(flat(r.force), flat(fd.reaction(r.node_set).force)));
  return g;
}

Outcome criterion2() {
  Outcome o;
  const RunConfig c = coarse_plate_config();
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  const OutputRequest out = c.outputs();
  const auto tau0 = characteristic_scales(p.material).char_time;
  note("%zu elements, %zu steps, horizon / tau0 = %.3g", p.mesh.element_count(),
       step_count(p.loads.total_time, dt), p.loads.total_time / tau0);
  expect(o, p.mesh.element_count() <= 50, "mesh has at most 50 elements");
  expect(o, p.loads.total_time >= 10.0 * tau0, "horizon covers at least 10 tau0");

  TsmConfig cfg = c.tsm;
  cfg.exchange_interval = 1;
  const TsmSolution sol = run_tsm(p, cfg, dt, out);
  double peak_d1 = 0.0;
  for (const auto& s : sol.history1.snapshots)
    for (double x : s.d) peak_d1 = std::max(peak_d1, std::abs(x));
  note("peak |d1| = %.4g", peak_d1);

  const FdGap g1 = fd_gap(sol.history1, fd_oracle(p, 1e-4, dt, out));
  const FdGap g2 = fd_gap(sol.history1, fd_oracle(p, 5e-5, dt, out));
  expect(o, g1.u <= 1e-3, fmt("u1 vs FD(h=1e-4): rel %.3e <= 1e-3", g1.u));
  expect(o, g1.d <= 1e-3, fmt("d1 vs FD(h=1e-4): rel %.3e <= 1e-3", g1.d));
  expect(o, g1.sigma <= 1e-3, fmt("sigma1 vs FD(h=1e-4): rel %.3e <= 1e-3", g1.sigma));
  expect(o, g1.force <= 1e-3, fmt("F1 vs FD(h=1e-4): rel %.3e <= 1e-3", g1.force));
  note("gaps at h=5e-5: u %.3e, d %.3e, sigma %.3e, F %.3e", g2.u, g2.d, g2.sigma, g2.force);
  const double ratio = g1.max() / g2.max();
  expect(o, ratio > 3.0 && ratio < 5.0,
         fmt("gap shrink factor h=1e-4 -> 5e-5: %.3f (about 4)", ratio));
  o.summary = "TSM order 1 vs central finite differences";
  return o;
}

// --- 3 and 4 -----------------------------------------------------------------

struct CoarseStudy {
  Mesh mesh;
  std::vector<double> xi;
  double m2 = 0.0;
  UqSummary tsm, mc;
  double tsm_s = 0.0, mc_s = 0.0, det_s = 0.0;
};

const CoarseStudy& coarse_study() {
  static std::unique_ptr<CoarseStudy> study;
  if (study) return *study;
  study = std::make_unique<CoarseStudy>();
  const RunConfig c = coarse_plate_config();
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  OutputRequest out = c.outputs();
  out.keep_nodal = false;
  out.keep_strain = false;
  study->mesh = p.mesh;
  study->xi = sample_xi(c.xi, 500);
  study->m2 = sample_variance(study->xi);

  // Best of three for the single runs; the ensemble is timed once.
  study->det_s = study->tsm_s = 1e300;
  TsmConfig cfg = c.tsm;
  cfg.exchange_interval = 1;
  cfg.xi_second_moment = study->m2;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    run_deterministic(p, 0.0, dt, out);
    study->det_s = std::min(study->det_s, seconds_since(t0));
    const TsmSolution sol = run_tsm(p, cfg, dt, out);
    study->tsm_s = std::min(study->tsm_s, sol.timing.total_s);
    if (rep == 0) study->tsm = uq_summary(sol, study->m2);
  }
  note("running 500 Monte Carlo samples (%zu steps each)", step_count(p.loads.total_time, dt));
  const auto t0 = std::chrono::steady_clock::now();
  const McEnsemble ens = run_mc(p, study->xi, dt, out, 1);
  study->mc = mc_statistics(ens);
  study->mc_s = seconds_since(t0);
  return *study;
}

Outcome criterion3() {
  Outcome o;
  const CoarseStudy& s = coarse_study();
  note("sample variance of xi = %.6f", s.m2);
  const ComparisonReport rep = compare(s.tsm, s.mc, s.mesh, 0.5);
  const double mean_err = std::max(rep.above.max_err_mean_f, rep.below.max_err_mean_f);
  expect(o, mean_err <= 0.01, fmt("<f> TSM vs MC, all elements: max rel %.3e <= 0.01", mean_err));
  {
    const auto worst = std::max_element(rep.rows.begin(), rep.rows.end(), [](auto& a, auto& b) {
      return a.err_mean_f < b.err_mean_f;
    });
    const double se = worst->std_f_mc / std::sqrt(static_cast<double>(s.xi.size()));
    note("worst <f> row: element %zu at t = %.4g s, TSM %.5f, MC %.5f, MC standard error %.5f",
         worst->element, worst->time, worst->mean_f_tsm, worst->mean_f_mc, se);
    // The first-order expectation misses 1/2 f'' <xi^2>; f'' from a
    // second difference of three realizations.
    const RunConfig c = coarse_plate_config();
    const Problem p = c.build_problem();
    const double dt = c.time_step(p.mesh);
    OutputRequest out;
    out.snapshot_times = {worst->time};
    out.keep_nodal = out.keep_strain = false;
    const double h = 0.05;
    double fh[3];
    for (int k = 0; k < 3; ++k) {
      const History r = run_deterministic(p, (k - 1) * h, dt, out);
      std::vector<double> f(r.snapshots[0].d.size());
      for (std::size_t g = 0; g < f.size(); ++g) f[g] = damage_function(r.snapshots[0].d[g]);
      fh[k] = element_average(f, worst->element);
    }
    const double bias = 0.5 * (fh[0] - 2.0 * fh[1] + fh[2]) / (h * h) * s.m2;
    note("  MC - TSM = %.5f (%.2f standard errors); second-order bias 1/2 f'' <xi^2> = %.5f",
         worst->mean_f_mc - worst->mean_f_tsm,
         std::abs(worst->mean_f_tsm - worst->mean_f_mc) / se, bias);
  }
  expect(o, rep.above.max_err_std_f <= 0.10,
         fmt("Std(f), %.0f elements with <f> > 0.5: max rel %.3e <= 0.10",
             static_cast<double>(rep.above.count), rep.above.max_err_std_f));
  note("reported only: Std(f) for %zu element rows with <f> <= 0.5: max rel %.3e", rep.below.count,
       rep.below.max_err_std_f);
  double min_f = 1.0;
  for (const auto& r : rep.rows) min_f = std::min(min_f, r.mean_f_tsm);
  note("smallest element <f> = %.4f", min_f);
  for (const auto& f : rep.forces) {
    if (f.node_set != "top") continue;
    expect(o, f.err_mean[1] <= 0.05, fmt("<F_y> on top: err %.3e <= 0.05", f.err_mean[1]));
    expect(o, f.err_std[1] <= 0.05, fmt("Std(F_y) on top: err %.3e <= 0.05", f.err_std[1]));
  }
  o.summary = "TSM vs 500-sample Monte Carlo";
  return o;
}

Outcome criterion4() {
  Outcome o;
  const CoarseStudy& s = coarse_study();
  note("deterministic %.3f s, TSM %.3f s, MC(500) %.1f s", s.det_s, s.tsm_s, s.mc_s);
  const double r = s.tsm_s / s.det_s;
  expect(o, r <= 4.0, fmt("TSM / deterministic = %.3f <= 4", r));
  const double sp = s.mc_s / s.tsm_s;
  expect(o, sp >= 100.0, fmt("MC / TSM = %.1f >= 100", sp));
  o.summary = "speedup";
  return o;
}

// --- 5 -----------------------------------------------------------------------

std::string rejection(const std::filesystem::path& p) {
  try {
    ExchangeReader r(p);
    while (true) r.next();
  } catch (const IoError& e) {
    return e.what();
  } catch (const std::exception& e) {
    return std::string("wrong error type: ") + e.what();
  }
  return {};
}

Outcome criterion5() {
  Outcome o;
  const RunConfig c = plate_config();
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  OutputRequest out = c.outputs();
  out.keep_strain = false;
  const auto dir = scratch_dir();
  note("%zu elements, %zu steps", p.mesh.element_count(), step_count(p.loads.total_time, dt));

  TsmConfig ref = c.tsm;
  ref.exchange_interval = 1;
  ref.exchange_mode = ExchangeMode::file;
  ref.exchange_path = dir / "k1.tsmx";
  const TsmSolution k1 = run_tsm(p, ref, dt, out);
  note("K = 1 exchange file: %.1f MB",
       static_cast<double>(std::filesystem::file_size(ref.exchange_path)) / 1e6);
  std::filesystem::remove(ref.exchange_path);

  TsmConfig mem = c.tsm;
  mem.exchange_interval = 1000;
  mem.exchange_mode = ExchangeMode::in_memory;
  const TsmSolution km = run_tsm(p, mem, dt, out);
  TsmConfig file = mem;
  file.exchange_mode = ExchangeMode::file;
  file.exchange_path = dir / "k1000.tsmx";
  const TsmSolution kf = run_tsm(p, file, dt, out);

  const double m2 = c.tsm.xi_second_moment;
  const ComparisonReport rep = compare(uq_summary(km, m2), uq_summary(k1, m2), p.mesh, 0.5);
  const double mean_err = std::max(rep.above.max_err_mean_f, rep.below.max_err_mean_f);
  expect(o, mean_err <= 0.01, fmt("<f> K=1000 vs K=1: max rel %.3e <= 0.01", mean_err));
  note("reported only: Std(f) K=1000 vs K=1: max rel %.3e (above mask), %.3e (below)",
       rep.above.max_err_std_f, rep.below.max_err_std_f);

  double gap = 0.0;
  for (std::size_t i = 0; i < km.history1.snapshots.size(); ++i) {
    const auto& a = kf.history1.snapshots[i];
    const auto& b = km.history1.snapshots[i];
    gap = std::max({gap, max_rel(flat(a.u), flat(b.u)), max_rel(a.d, b.d),
                    max_rel(flat(a.sigma), flat(b.sigma))});
  }
  for (const auto& r : km.history1.reactions)
    gap = std::max(gap, max_rel(flat(kf.history1.reaction(r.node_set).force), flat(r.force)));
  expect(o, gap <= 1e-12, fmt("file vs in-memory, K=1000: max rel %.3e <= 1e-12", gap));

  // Damaged copies of the K = 1000 file.
  const auto good = file.exchange_path;
  const auto size = std::filesystem::file_size(good);
  const std::size_t rec = exchange_record_bytes(p.mesh.gauss_count());
  auto variant = [&](const std::string& name, auto&& damage) {
    const auto q = dir / name;
    std::filesystem::copy_file(good, q, std::filesystem::copy_options::overwrite_existing);
    damage(q);
    return q;
  };
  auto flip = [](std::size_t offset) {
    return [offset](const std::filesystem::path& q) {
      std::fstream f(q, std::ios::in | std::ios::out | std::ios::binary);
      f.seekg(static_cast<std::streamoff>(offset));
      char ch;
      f.read(&ch, 1);
      ch = static_cast<char>(ch ^ 0x01);
      f.seekp(static_cast<std::streamoff>(offset));
      f.write(&ch, 1);
    };
  };
  const std::vector<std::pair<std::string, std::filesystem::path>> damaged = {
      {"truncated by one byte",
       variant("t1", [&](const auto& q) { std::filesystem::resize_file(q, size - 1); })},
      {"truncated by one record",
       variant("tr", [&](const auto& q) { std::filesystem::resize_file(q, size - rec); })},
      {"one flipped bit in a record", variant("fb", flip(kExchangeHeaderBytes + rec / 2))},
      {"bad magic", variant("bm", flip(0))},
      {"empty", variant("em", [](const auto& q) { std::filesystem::resize_file(q, 0); })},
  };
  {
    ExchangeReader r(good);
    std::size_t n = 0;
    for (; n < r.record_count(); ++n) r.next();
    expect(o, n == km.history0.steps / 1000 + 1, fmt("undamaged file: %.0f records read",
                                                     static_cast<double>(n)));
  }
  for (const auto& [what, q] : damaged) {
    const std::string first = rejection(q);
    const std::string again = rejection(q);
    bool stopped = false;
    try {
      FileSource src(q);
      run_order1(p, src, dt, out, c.tsm.law);
    } catch (const IoError&) {
      stopped = true;
    } catch (...) {
    }
    expect(o, !first.empty() && first.rfind("wrong", 0) != 0 && first == again && stopped,
           what + ": rejected with \"" + first + "\"");
  }
  std::filesystem::remove_all(dir);
  o.summary = "exchange protocol";
  return o;
}

// --- 6 -----------------------------------------------------------------------

Mesh distorted_patch() {
  Mesh m;
  for (int k = 0; k <= 2; ++k)
    for (int j = 0; j <= 2; ++j)
      for (int i = 0; i <= 2; ++i) m.nodes.push_back({0.5 * i, 0.5 * j, 0.5 * k});
  m.nodes[13] = {0.56, 0.44, 0.53};
  auto id = [](int i, int j, int k) { return static_cast<std::size_t>((k * 3 + j) * 3 + i); };
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        m.elements.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                              id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                              id(i, j + 1, k + 1)});
  return m;
}

// Watches every step of a run for healing and for f outside (0, 1].
struct Watch {
  std::vector<double> last;
  std::size_t steps = 0, healed = 0, out_of_range = 0;
  void operator()(const DynamicState& s) {
    if (last.empty()) last.assign(s.gauss.d.size(), 0.0);
    for (std::size_t g = 0; g < s.gauss.d.size(); ++g) {
      const double d = s.gauss.d[g];
      if (!(d >= last[g])) ++healed;
      const double f = damage_function(d);
      if (!(f > 0.0 && f <= 1.0)) ++out_of_range;
      last[g] = d;
    }
    ++steps;
  }
};

Outcome criterion6() {
  Outcome o;
  {
    const Mesh m = distorted_patch();
    const auto q = ElementQuadrature::build(m);
    const double G[3][3] = {{1e-3, 2e-4, -1e-4}, {3e-4, -5e-4, 2e-4}, {-2e-4, 1e-4, 4e-4}};
    std::vector<Vec3> u(m.node_count());
    for (std::size_t n = 0; n < m.node_count(); ++n)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) u[n][i] += G[i][j] * m.nodes[n][j];
    for (const Execution exec : {Execution::serial, Execution::openmp}) {
      ForceAssembler a(m, q, exec);
      std::vector<Voigt> eps(m.gauss_count()), sigma(m.gauss_count());
      a.strains(u, eps);
      const Matrix6 E = stiffness_voigt(1.0e9, 0.8e9);
      for (std::size_t g = 0; g < eps.size(); ++g) sigma[g] = E * eps[g];
      std::vector<Vec3> f(m.node_count());
      a.internal_force(sigma, f);
      double scale = 0.0;
      for (const auto& fi : f)
        for (double x : fi) scale = std::max(scale, std::abs(x));
      double res = 0.0;
      for (double x : f[13]) res = std::max(res, std::abs(x) / scale);
      expect(o, res <= 1e-10,
             std::string(exec == Execution::serial ? "serial" : "openmp") +
                 fmt(" patch test, distorted interior node: residual %.2e <= 1e-10", res));
    }
  }
  const std::pair<const char*, RunConfig> benchmarks[] = {{"double notch", notch_config()},
                                                          {"plate with hole", plate_config()}};
  for (const auto& [name, c] : benchmarks) {
    const Problem p = c.build_problem();
    const auto mass = lumped_mass(p.mesh, p.material.rho);
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    const double rv = p.material.rho * total_volume(p.mesh);
    const double e = relative_error(total, rv);
    expect(o, e <= 1e-12, std::string(name) + fmt(" lumped mass vs rho V: rel %.2e <= 1e-12", e));

    Watch w;
    OutputRequest out;
    out.snapshot_times = {p.loads.total_time};
    const History h = run_deterministic(p, 0.0, c.time_step(p.mesh), out, Execution::serial,
                                        std::ref(w));
    const double peak = *std::max_element(h.snapshots[0].d.begin(), h.snapshots[0].d.end());
    note("%s: %zu elements, %zu steps, peak d %.3f", name, p.mesh.element_count(), w.steps, peak);
    expect(o, w.healed == 0,
           std::string(name) + ": d0 nondecreasing at every Gauss point and step");
    expect(o, w.out_of_range == 0, std::string(name) + ": f in (0, 1] everywhere");
  }
  o.summary = "structural FEM invariants";
  return o;
}

// --- 7 -----------------------------------------------------------------------

// Peak strictly inside the series, preceded by a rise and followed by a
// drop of at least 5% of the peak.
bool rises_then_falls(const std::vector<double>& f, std::string& detail) {
  const auto it = std::max_element(f.begin(), f.end());
  const std::size_t k = static_cast<std::size_t>(it - f.begin());
  const double peak = *it;
  detail = fmt("peak %.4g N at sample %.0f", peak, static_cast<double>(k)) +
           fmt(" of %.0f, final %.4g N", static_cast<double>(f.size()), f.back());
  return k > 0 && k + 1 < f.size() && f.front() < 0.5 * peak && f.back() <= 0.95 * peak;
}

std::vector<double> reaction_y(const UqSummary& s) {
  std::vector<double> out;
  for (const auto& v : s.force("top").mean) out.push_back(v[1]);
  return out;
}

Outcome criterion7() {
  Outcome o;
  {
    const RunConfig c = notch_config();
    const Problem p = c.build_problem();
    OutputRequest out = c.outputs();
    out.keep_strain = false;
    const TsmSolution sol = run_tsm(p, c.tsm, c.time_step(p.mesh), out);
    const UqSummary s = uq_summary(sol, c.tsm.xi_second_moment);
    const auto& last = s.snapshots.back();
    const auto line = extract_line(last, p.mesh, "centerline");
    const std::size_t n = line.size();
    std::vector<double> f;
    for (const auto& r : line) f.push_back(r.mean_f);
    std::string profile;
    for (double x : f) profile += fmt(" %.3f", x);
    note("double notch centerline <f> at t = %.4g s:%s", last.time, profile.c_str());
    // Minima at the notch ends: the smallest value of each half lies within
    // one notch height of its notch tip, and <f> rises from there to the
    // middle of the ligament.
    const std::size_t lo = static_cast<std::size_t>(
        std::min_element(f.begin(), f.begin() + n / 2) - f.begin());
    const std::size_t hi = static_cast<std::size_t>(
        std::min_element(f.begin() + (n + 1) / 2, f.end()) - f.begin());
    const double tip_left = c.notch.notch_depth;
    const double tip_right = c.notch.width - c.notch.notch_depth;
    const double x_lo = line[lo].centroid[0], x_hi = line[hi].centroid[0];
    note("minima at x = %.4f and %.4f m; notch tips at %.4f and %.4f m", x_lo, x_hi, tip_left,
         tip_right);
    bool rising = true;
    for (std::size_t i = lo; i + 1 < n / 2; ++i) rising = rising && f[i + 1] >= f[i];
    for (std::size_t i = hi; i > (n + 1) / 2; --i) rising = rising && f[i - 1] >= f[i];
    expect(o, x_lo - tip_left <= c.notch.notch_height &&
                  tip_right - x_hi <= c.notch.notch_height && rising,
           "centerline <f> minima sit at both notch ends");

    // Band: every centerline element more damaged than the median element,
    // and the centerline keeps softening over the output instants.
    std::vector<double> all;
    for (std::size_t e = 0; e < p.mesh.element_count(); ++e)
      all.push_back(element_average(last.mean_f, e));
    std::nth_element(all.begin(), all.begin() + all.size() / 2, all.end());
    const double median = all[all.size() / 2];
    const double band_max = *std::max_element(f.begin(), f.end());
    expect(o, band_max < median,
           fmt("damage band: largest centerline <f> %.4f below the mesh median %.4f", band_max,
               median));
    bool softening = true;
    double prev = 2.0;
    for (const auto& snap : s.snapshots) {
      double mean = 0.0;
      for (const auto& r : extract_line(snap, p.mesh, "centerline")) mean += r.mean_f;
      mean /= static_cast<double>(n);
      softening = softening && mean < prev;
      prev = mean;
    }
    expect(o, softening, "centerline mean <f> decreases over the output instants");
    std::string detail;
    const bool rf = rises_then_falls(reaction_y(s), detail);
    expect(o, rf, "double notch <F_y> rises then falls: " + detail);
  }
  {
    const RunConfig c = plate_config();
    const Problem p = c.build_problem();
    OutputRequest out = c.outputs();
    out.keep_strain = false;
    const TsmSolution sol = run_tsm(p, c.tsm, c.time_step(p.mesh), out);
    const UqSummary s = uq_summary(sol, c.tsm.xi_second_moment);
    const auto& last = s.snapshots.back();
    const double radius = c.plate.hole_radius;
    // Right of the hole: x > R within the hole's horizontal extent.
    std::size_t argmin = 0;
    double fmin = 2.0, right = 0.0, rest = 0.0;
    std::size_t n_right = 0, n_rest = 0;
    for (std::size_t e = 0; e < p.mesh.element_count(); ++e) {
      const double fe = element_average(last.mean_f, e);
      if (fe < fmin) fmin = fe, argmin = e;
      const Vec3 x = element_centroid(p.mesh, e);
      const bool ligament = x[0] > radius && x[1] < radius;
      (ligament ? right : rest) += fe;
      ++(ligament ? n_right : n_rest);
    }
    const Vec3 xm = element_centroid(p.mesh, argmin);
    note("plate: smallest <f> %.4f at (%.4f, %.4f); right of the hole mean %.4f, elsewhere %.4f",
         fmin, xm[0], xm[1], right / n_right, rest / n_rest);
    expect(o, xm[0] > radius && xm[1] < radius,
           "plate: most damaged element lies right of the hole");
    expect(o, right / n_right < rest / n_rest,
           "plate: region right of the hole more damaged than the rest");
    const auto line = extract_line(last, p.mesh, "midline");
    expect(o, line.front().mean_f < line.back().mean_f,
           fmt("plate midline <f> rises away from the hole: %.4f -> %.4f", line.front().mean_f,
               line.back().mean_f));
    std::string detail;
    const bool rf = rises_then_falls(reaction_y(s), detail);
    expect(o, rf, "plate <F_y> rises then falls: " + detail);
  }
  o.summary = "qualitative benchmark behaviour";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5, criterion6, criterion7};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > 7) {
      std::fprintf(stderr, "usage: %s [criterion 1-7 ...]\n", argv[0]);
      return 2;
    }
    wanted.insert(k);
  }
  if (wanted.empty())
    for (int k = 1; k <= 7; ++k) wanted.insert(k);

  int failed = 0;
  for (int k : wanted) {
    std::printf("criterion %d\n", k);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("aborted: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k,
                o.summary.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
