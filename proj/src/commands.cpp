#include "tsdm/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "tsdm/errors.hpp"
#include "tsdm/output.hpp"

#ifndef TSDM_VERSION
#define TSDM_VERSION "dev"
#endif

namespace tsdm {

const char* version_string() { return TSDM_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

Manifest base_manifest(const char* command, const RunConfig& c, const Problem& p, double dt,
                       std::size_t steps) {
  const std::string canon = canonical_config(c);
  return {{"command", command},
          {"tsdm_version", version_string()},
          {"config_hash", hex64(fnv1a_hash(canon))},
          {"elements", std::to_string(p.mesh.element_count())},
          {"gauss_points", std::to_string(p.mesh.gauss_count())},
          {"dt", format_double(dt)},
          {"steps", std::to_string(steps)},
          {"execution", c.execution == Execution::openmp ? "openmp" : "serial"}};
}

void write_common(ArtifactDir& a, const RunConfig& c, const Mesh& mesh) {
  a.write("config.txt", canonical_config(c));
  a.write("mesh.txt", to_text(mesh));
}

bool has_path(const Mesh& mesh, const std::string& name) {
  return !name.empty() && mesh.element_paths.count(name) > 0;
}

void write_summary_files(ArtifactDir& a, const UqSummary& uq, const Mesh& mesh,
                         const std::string& path, const History* h0) {
  a.write("summary.txt", summary_text(uq));
  for (const auto& f : uq.forces) a.write("forces_" + f.node_set + ".csv", force_summary_csv(f));
  for (std::size_t i = 0; i < uq.snapshots.size(); ++i) {
    const std::vector<Vec3> none;
    const auto& u = h0 ? h0->snapshots[i].u : none;
    a.write(numbered("uq", i, "vtk"), vtk_text(mesh, u, summary_cells(uq.snapshots[i], mesh)));
    if (has_path(mesh, path))
      a.write(numbered("line", i, "csv"), line_csv(extract_line(uq.snapshots[i], mesh, path)));
  }
}

double manifest_number(const std::map<std::string, std::string>& m, const std::string& key,
                       const std::filesystem::path& dir) {
  const auto it = m.find(key);
  if (it == m.end())
    throw ValidationError("manifest in '" + dir.string() + "' has no '" + key + "'");
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::logic_error&) {
    throw ValidationError("manifest in '" + dir.string() + "': '" + key + "' is not a number");
  }
}

std::map<std::string, std::string> load_manifest(const std::filesystem::path& dir) {
  return parse_manifest(read_file(dir / "manifest.txt"));
}

}  // namespace

std::filesystem::path cmd_mesh_gen(const RunConfig& c, std::ostream& log) {
  const Mesh mesh = c.build_mesh();
  validate(mesh);
  ArtifactDir a(c.output_dir);
  write_common(a, c, mesh);
  a.write("mesh.vtk", vtk_text(mesh, {}, {}));
  const std::string canon = canonical_config(c);
  a.write("manifest.txt", manifest_text({{"command", "mesh-gen"},
                                         {"tsdm_version", version_string()},
                                         {"config_hash", hex64(fnv1a_hash(canon))},
                                         {"nodes", std::to_string(mesh.node_count())},
                                         {"elements", std::to_string(mesh.element_count())},
                                         {"volume", format_double(total_volume(mesh))}}));
  a.commit();
  log << "mesh: " << mesh.node_count() << " nodes, " << mesh.element_count() << " elements -> "
      << a.target().string() << '\n';
  return a.target();
}

std::filesystem::path cmd_run_det(const RunConfig& c, std::ostream& log) {
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  const OutputRequest out = c.outputs();
  const auto t0 = Clock::now();
  const History h = run_deterministic(p, c.realization_xi, dt, out, c.execution);
  const double wall = since(t0);

  ArtifactDir a(c.output_dir);
  write_common(a, c, p.mesh);
  for (std::size_t i = 0; i < h.snapshots.size(); ++i)
    a.write(numbered("snapshot", i, "vtk"),
            vtk_text(p.mesh, h.snapshots[i].u, snapshot_cells(h.snapshots[i], p.mesh)));
  for (const auto& r : h.reactions) a.write("reaction_" + r.node_set + ".csv", reaction_csv(r));
  Manifest m = base_manifest("run-det", c, p, dt, h.steps);
  m.emplace_back("xi", format_double(c.realization_xi));
  m.emplace_back("runs", "1");
  m.emplace_back("wall_total_s", format_double(wall));
  a.write("manifest.txt", manifest_text(m));
  a.commit();
  log << "run-det: " << h.steps << " steps of " << dt << " s in " << wall << " s -> "
      << a.target().string() << '\n';
  return a.target();
}

std::filesystem::path cmd_run_tsm(const RunConfig& c, std::ostream& log) {
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  const OutputRequest out = c.outputs();
  ArtifactDir a(c.output_dir);
  TsmConfig tc = c.tsm;
  const bool scratch_exchange = tc.exchange_mode == ExchangeMode::file && tc.exchange_path.empty();
  if (scratch_exchange) tc.exchange_path = a.staged("exchange.tsmx");

  const TsmSolution sol = run_tsm(p, tc, dt, out, c.execution);
  std::uintmax_t exchange_bytes = 0;
  if (tc.exchange_mode == ExchangeMode::file) {
    exchange_bytes = std::filesystem::file_size(tc.exchange_path);
    if (scratch_exchange) std::filesystem::remove(tc.exchange_path);
  }

  const auto t_post = Clock::now();
  const UqSummary uq = uq_summary(sol, tc.xi_second_moment);
  write_common(a, c, p.mesh);
  write_summary_files(a, uq, p.mesh, c.line_path(), &sol.history0);
  for (const auto& r : sol.history0.reactions)
    a.write("order0_reaction_" + r.node_set + ".csv", reaction_csv(r));
  for (const auto& r : sol.history1.reactions)
    a.write("order1_reaction_" + r.node_set + ".csv", reaction_csv(r));
  const double post = since(t_post);

  Manifest m = base_manifest("run-tsm", c, p, dt, sol.history0.steps);
  m.emplace_back("xi_second_moment", format_double(tc.xi_second_moment));
  m.emplace_back("exchange_interval", std::to_string(tc.exchange_interval));
  m.emplace_back("exchange_mode", tc.exchange_mode == ExchangeMode::file ? "file" : "in_memory");
  m.emplace_back("exchange_bytes", std::to_string(exchange_bytes));
  m.emplace_back("line_path", has_path(p.mesh, c.line_path()) ? c.line_path() : "");
  m.emplace_back("runs", "2");
  m.emplace_back("wall_order0_s", format_double(sol.timing.order0_s));
  m.emplace_back("wall_order1_s", format_double(sol.timing.order1_s));
  m.emplace_back("wall_post_s", format_double(post));
  m.emplace_back("wall_total_s", format_double(sol.timing.total_s + post));
  a.write("manifest.txt", manifest_text(m));
  a.commit();
  log << "run-tsm: order 0 " << sol.timing.order0_s << " s, order 1 " << sol.timing.order1_s
      << " s, post " << post << " s -> " << a.target().string() << '\n';
  return a.target();
}

std::filesystem::path cmd_run_mc(const RunConfig& c, std::ostream& log) {
  const Problem p = c.build_problem();
  const double dt = c.time_step(p.mesh);
  OutputRequest out = c.outputs();
  out.keep_nodal = false;
  out.keep_strain = false;
  const std::vector<double> xi = sample_xi(c.xi, c.mc_samples);
  const double m2 = sample_variance(xi);

  const McEnsemble ens = run_mc(p, xi, dt, out, c.workers);
  const auto t_post = Clock::now();
  const UqSummary st = mc_statistics(ens);
  ArtifactDir a(c.output_dir);
  write_common(a, c, p.mesh);
  write_summary_files(a, st, p.mesh, c.line_path(), nullptr);
  std::ostringstream samples;
  samples << "index,xi,wall_s\n";
  double run_sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    samples << i << ',' << format_double(xi[i]) << ',' << format_double(ens.wall_s[i]) << '\n';
    run_sum += ens.wall_s[i];
  }
  a.write("samples.csv", samples.str());
  const double post = since(t_post);

  Manifest m = base_manifest("run-mc", c, p, dt, ens.histories.front().steps);
  m.emplace_back("seed", std::to_string(c.xi.seed));
  m.emplace_back("xi_distribution", c.xi.kind == XiKind::normal ? "normal" : "uniform");
  m.emplace_back("xi_std", format_double(c.xi.std));
  m.emplace_back("xi_sample_variance", format_double(m2));
  m.emplace_back("workers", std::to_string(c.workers));
  m.emplace_back("line_path", has_path(p.mesh, c.line_path()) ? c.line_path() : "");
  m.emplace_back("runs", std::to_string(xi.size()));
  m.emplace_back("wall_run_mean_s", format_double(run_sum / static_cast<double>(xi.size())));
  m.emplace_back("wall_runs_s", format_double(ens.total_wall_s));
  m.emplace_back("wall_post_s", format_double(post));
  m.emplace_back("wall_total_s", format_double(ens.total_wall_s + post));
  a.write("manifest.txt", manifest_text(m));
  a.commit();
  log << "run-mc: " << xi.size() << " runs in " << ens.total_wall_s << " s (sample variance "
      << m2 << ") -> " << a.target().string() << '\n';
  return a.target();
}

std::filesystem::path cmd_compare(const std::filesystem::path& tsm_dir,
                                  const std::filesystem::path& mc_dir,
                                  const std::filesystem::path& out_dir, double mask_threshold,
                                  std::ostream& log) {
  const auto mt = load_manifest(tsm_dir);
  const auto mm = load_manifest(mc_dir);
  if (mt.count("command") == 0 || mt.at("command") != "run-tsm")
    throw ValidationError("'" + tsm_dir.string() + "' is not a run-tsm artifact directory");
  if (mm.count("command") == 0 || mm.at("command") != "run-mc")
    throw ValidationError("'" + mc_dir.string() + "' is not a run-mc artifact directory");
  const Mesh mesh = parse_mesh(read_file(tsm_dir / "mesh.txt"));
  if (!(parse_mesh(read_file(mc_dir / "mesh.txt")) == mesh))
    throw ValidationError("TSM and MC runs use different meshes");

  UqSummary tsm = parse_summary(read_file(tsm_dir / "summary.txt"));
  const UqSummary mc = parse_summary(read_file(mc_dir / "summary.txt"));
  const double m2_tsm = manifest_number(mt, "xi_second_moment", tsm_dir);
  const double m2_mc = manifest_number(mm, "xi_sample_variance", mc_dir);
  const double scale = m2_tsm > 0.0 ? std::sqrt(m2_mc / m2_tsm) : 1.0;
  if (scale != 1.0) {
    for (auto& s : tsm.snapshots) {
      for (double& v : s.std_d) v *= scale;
      for (double& v : s.std_f) v *= scale;
      for (auto& v : s.std_sigma)
        for (double& x : v) x *= scale;
    }
    for (auto& f : tsm.forces)
      for (auto& v : f.std)
        for (double& x : v) x *= scale;
  }
  const ComparisonReport rep = compare(tsm, mc, mesh, mask_threshold);

  ArtifactDir a(out_dir);
  a.write("comparison.csv", comparison_csv(rep));
  a.write("comparison_groups.csv", comparison_groups_csv(rep));
  const std::string path = mt.count("line_path") ? mt.at("line_path") : "";
  if (has_path(mesh, path))
    for (std::size_t i = 0; i < tsm.snapshots.size(); ++i) {
      a.write(numbered("line_tsm", i, "csv"), line_csv(extract_line(tsm.snapshots[i], mesh, path)));
      a.write(numbered("line_mc", i, "csv"), line_csv(extract_line(mc.snapshots[i], mesh, path)));
    }
  const TimingReport timing = report_timing({tsm_dir, mc_dir});
  a.write("timing.txt", timing_text(timing));
  a.write("manifest.txt",
          manifest_text({{"command", "compare"},
                         {"tsdm_version", version_string()},
                         {"tsm_dir", tsm_dir.string()},
                         {"mc_dir", mc_dir.string()},
                         {"tsm_config_hash", mt.count("config_hash") ? mt.at("config_hash") : ""},
                         {"mc_config_hash", mm.count("config_hash") ? mm.at("config_hash") : ""},
                         {"mask_threshold", format_double(mask_threshold)},
                         {"std_rescale", format_double(scale)}}));
  a.commit();
  log << "compare: above mask " << rep.above.count << " rows, max Std(f) error "
      << rep.above.max_err_std_f << "; below mask " << rep.below.count
      << " rows, max Std(f) error " << rep.below.max_err_std_f << " -> " << a.target().string()
      << '\n';
  return a.target();
}

TimingReport report_timing(const std::vector<std::filesystem::path>& dirs) {
  TimingReport r;
  double mc_run_mean = 0.0;
  for (const auto& d : dirs) {
    const auto m = load_manifest(d);
    TimingRow row;
    row.dir = d.string();
    row.command = m.count("command") ? m.at("command") : "?";
    row.wall_s = manifest_number(m, "wall_total_s", d);
    row.runs = m.count("runs") ? static_cast<std::size_t>(manifest_number(m, "runs", d)) : 0;
    if (row.command == "run-det") r.det_s = row.wall_s;
    if (row.command == "run-tsm") r.tsm_s = row.wall_s;
    if (row.command == "run-mc") {
      r.mc_s = row.wall_s;
      r.mc_runs = row.runs;
      mc_run_mean = manifest_number(m, "wall_run_mean_s", d);
    }
    r.rows.push_back(row);
  }
  if (r.det_s == 0.0) r.det_s = mc_run_mean;
  if (r.det_s > 0.0 && r.tsm_s > 0.0) r.tsm_over_det = r.tsm_s / r.det_s;
  if (r.tsm_s > 0.0 && r.mc_s > 0.0) r.speedup = r.mc_s / r.tsm_s;
  return r;
}

std::string timing_text(const TimingReport& r) {
  std::ostringstream o;
  char line[512];
  std::snprintf(line, sizeof line, "%-10s %6s %12s  %s\n", "command", "runs", "wall_s", "dir");
  o << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-10s %6zu %12.4f  %s\n", row.command.c_str(), row.runs,
                  row.wall_s, row.dir.c_str());
    o << line;
  }
  if (r.tsm_over_det > 0.0) {
    std::snprintf(line, sizeof line, "TSM / deterministic run: %.3f\n", r.tsm_over_det);
    o << line;
  }
  if (r.speedup > 0.0) {
    std::snprintf(line, sizeof line, "speedup MC(%zu) / TSM: %.1f\n", r.mc_runs, r.speedup);
    o << line;
  }
  return o.str();
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const InstabilityError& e) {
    err << "numerical instability at step " << e.step() << ": " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tsdm
