#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "tsdm/commands.hpp"
#include "tsdm/config.hpp"
#include "tsdm/errors.hpp"
#include "tsdm/output.hpp"

using namespace tsdm;

namespace {

std::string error_of(const ConfigEntries& e) {
  try {
    make_config(e);
  } catch (const ValidationError& x) {
    return x.what();
  }
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TSDM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Fast desk run on the coarse plate.
ConfigEntries quick(const std::filesystem::path& out) {
  return {{"problem", "plate_hole"},  {"resolution", "6x8x1"},
          {"eta", "750"},             {"total_time", "0.002"},
          {"dirichlet", "top y 0.000125 0.002"},
          {"dirichlet", "symmetry_x x 0 0"},
          {"dirichlet", "symmetry_y y 0 0"},
          {"dirichlet", "back z 0 0"},
          {"exchange_interval", "1"}, {"mc_samples", "4"},
          {"output_dir", out.string()}};
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto e = parse_config_text("# comment\nproblem = plate_hole  # trailing\n\n  eta=5 \n");
  REQUIRE(e.size() == 2);
  CHECK(e[0] == std::pair<std::string, std::string>{"problem", "plate_hole"});
  CHECK(e[1] == std::pair<std::string, std::string>{"eta", "5"});
  try {
    parse_config_text("eta = 1\nnot a pair\n");
    FAIL("expected rejection");
  } catch (const ValidationError& x) {
    CHECK(std::string(x.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("presets carry the benchmark parameters") {
  const RunConfig dns = make_config({{"scale", "full"}});
  CHECK(dns.material.lambda == 1.0e9);
  CHECK(dns.material.mu == 0.8e9);
  CHECK(dns.material.rho == 1000.0);
  CHECK(dns.material.eta == 1.0e9);
  CHECK(dns.loads.total_time == 1.0);
  CHECK(dns.dt == 1.6e-6);
  CHECK(dns.mass_damping == 0.0);
  CHECK(dns.xi.std == 0.1);
  CHECK(dns.tsm.exchange_interval == 1000);
  CHECK(dns.loads.dirichlet[0].node_set == "top");
  CHECK(dns.loads.dirichlet[0].amplitude == 0.01);
  CHECK(dns.loads.dirichlet[0].ramp_end == 1.0);

  const RunConfig plate = make_config({{"problem", "plate_hole"}, {"scale", "full"}});
  CHECK(plate.material.eta == 5.0e9);
  CHECK(plate.dt == 1.8e-6);
  CHECK(plate.loads.dirichlet[0].amplitude == 0.001);
  CHECK(plate.build_mesh().element_count() == 594);
  CHECK(dns.build_mesh().element_count() == 646);

  const RunConfig desk = make_config({{"problem", "plate_hole"}});
  CHECK(desk.loads.total_time == 0.016);
  CHECK(desk.mass_damping == 8000.0);
  CHECK(desk.tsm.xi_second_moment == doctest::Approx(0.01));
  CHECK(desk.outputs().snapshot_times.size() == 4);
}

TEST_CASE("config overrides and validation") {
  CHECK(error_of({{"etaa", "1"}}).find("'etaa'") != std::string::npos);
  CHECK(error_of({{"eta", "fast"}}).find("'eta'") != std::string::npos);
  CHECK(error_of({{"eta", "-1"}}).find("material") != std::string::npos);
  CHECK(error_of({{"workers", "0"}}).find("'workers'") != std::string::npos);
  CHECK(error_of({{"snapshot_times", "0.5"}}).find("'snapshot_times'") != std::string::npos);
  CHECK(error_of({{"problem", "mesh_file"}}).find("'mesh_path'") != std::string::npos);
  CHECK(error_of({{"problem", "mesh_file"}, {"mesh_path", "/nonexistent.mesh"}})
            .find("does not exist") != std::string::npos);
  CHECK(error_of({{"mesh_path", "/tmp"}}).find("'mesh_path'") != std::string::npos);
  CHECK(error_of({{"xi_std", "0.95"}}).find("xi_std") != std::string::npos);

  const RunConfig c = make_config({{"eta", "1"}, {"eta", "2"}, {"total_time", "0.008"}});
  CHECK(c.material.eta == 2.0);
  CHECK(c.loads.dirichlet[0].ramp_end == 0.008);

  const RunConfig d = make_config({{"dirichlet", "top y 0.002 0.01"},
                                   {"dirichlet", "bottom x 0 0"},
                                   {"dirichlet", "bottom y 0 0"},
                                   {"dirichlet", "bottom z 0 0"}});
  CHECK(d.loads.dirichlet.size() == 4);
  CHECK(d.loads.dirichlet[0].amplitude == 0.002);

  const RunConfig m2 = make_config({{"xi_std", "0.2"}});
  CHECK(m2.tsm.xi_second_moment == doctest::Approx(0.04));
}

TEST_CASE("mesh files as a problem source") {
  test::TempDir dir("meshsrc");
  save_mesh(test::block(3, 3, 1, 0.01), dir / "b.mesh");
  const RunConfig c = make_config({{"problem", "mesh_file"},
                                   {"mesh_path", (dir / "b.mesh").string()},
                                   {"dirichlet", "y0 x 0 0"},
                                   {"dirichlet", "y0 y 0 0"},
                                   {"dirichlet", "y0 z 0 0"},
                                   {"dirichlet", "y1 y 0.0001 0.016"}});
  const Problem p = c.build_problem();
  CHECK(p.mesh.element_count() == 9);
  CHECK(c.line_path().empty());
}

TEST_CASE("canonical config is a fixed point") {
  const RunConfig c = make_config({{"problem", "plate_hole"}, {"resolution", "6x8x1"},
                                   {"seed", "42"}, {"snapshot_times", "0.004,0.012"},
                                   {"sensitivity_law", "full_quadratic_drive"}});
  const std::string text = canonical_config(c);
  const RunConfig back = make_config(parse_config_text(text));
  CHECK(canonical_config(back) == text);
  CHECK(fnv1a_hash(text) == fnv1a_hash(canonical_config(back)));
  CHECK(fnv1a_hash(text) != fnv1a_hash(canonical_config(make_config({}))));
  // Reference value of 64-bit FNV-1a.
  CHECK(hex64(fnv1a_hash("a")) == "af63dc4c8601ec8c");
  for (const auto& [k, v] : parse_config_text(text))
    CHECK(std::find(config_keys().begin(), config_keys().end(), k) != config_keys().end());
}

TEST_CASE("summary text reads back bit-exactly") {
  UqSummary s;
  UqSnapshot q;
  q.step = 12;
  q.time = 1.0 / 3.0;
  q.mean_d = {0.1, 1e-300};
  q.std_d = {0.2, 0.0};
  q.mean_f = {std::exp(-0.1), 1.0};
  q.std_f = {0.3, 5e-17};
  q.mean_sigma = {Voigt{1, 2, 3, 4, 5, 6}, Voigt{-1, -2, -3, -4, -5, -6}};
  q.std_sigma = {Voigt{}, Voigt{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  s.snapshots = {q, q};
  s.forces = {{"top", {0.0, 0.1}, {Vec3{1, 2, 3}, Vec3{4, 5, 6}}, {Vec3{}, Vec3{0.7, 0.8, 0.9}}}};
  const UqSummary b = parse_summary(summary_text(s));
  REQUIRE(b.snapshots.size() == 2);
  CHECK(b.snapshots[1].time == q.time);
  CHECK(b.snapshots[1].mean_f == q.mean_f);
  CHECK(b.snapshots[1].std_sigma == q.std_sigma);
  CHECK(b.force("top").std == s.forces[0].std);
  CHECK(summary_text(b) == summary_text(s));
  CHECK_THROWS_AS(parse_summary("garbage"), ValidationError);
}

TEST_CASE("manifest and csv writers") {
  const Manifest m = {{"command", "run-det"}, {"note", "a = b"}, {"x", format_double(0.1)}};
  const auto back = parse_manifest(manifest_text(m));
  CHECK(back.at("command") == "run-det");
  CHECK(back.at("note") == "a = b");
  CHECK(std::stod(back.at("x")) == 0.1);

  ReactionSeries r{"top", {0.0, 0.5}, {Vec3{0, 0, 0}, Vec3{1, 2, 3}}};
  const std::string csv = reaction_csv(r);
  CHECK(csv.rfind("time,Fx,Fy,Fz\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("vtk output") {
  const Mesh m = test::block(2, 1, 1);
  const std::vector<Vec3> u(m.node_count(), Vec3{1e-3, 0, 0});
  const std::string v = vtk_text(m, u, {{"f", {0.5, 0.25}}});
  CHECK(v.rfind("# vtk DataFile Version", 0) == 0);
  CHECK(v.find("POINTS 12 double") != std::string::npos);
  CHECK(v.find("CELLS 2 18") != std::string::npos);
  CHECK(v.find("CELL_TYPES 2\n12\n12\n") != std::string::npos);
  CHECK(v.find("VECTORS displacement double") != std::string::npos);
  CHECK(v.find("SCALARS f double 1") != std::string::npos);
}

TEST_CASE("artifact directories are written atomically") {
  test::TempDir dir("art");
  const auto target = dir / "run";
  {
    ArtifactDir a(target);
    a.write("x.txt", "one");
  }
  CHECK_FALSE(std::filesystem::exists(target));
  CHECK(std::distance(std::filesystem::directory_iterator(dir.path),
                      std::filesystem::directory_iterator{}) == 0);
  {
    ArtifactDir a(target);
    a.write("x.txt", "two");
    a.commit();
  }
  CHECK(read_file(target / "x.txt") == "two");
  {
    ArtifactDir a(target);
    a.write("y.txt", "three");
    a.commit();
  }
  CHECK_FALSE(std::filesystem::exists(target / "x.txt"));
  CHECK(read_file(target / "y.txt") == "three");
}

TEST_CASE("commands write reproducible artifact directories") {
  test::TempDir dir("cmd");
  std::ostringstream log;
  auto with = [&](ConfigEntries e, const std::string& key, const std::string& value) {
    e.emplace_back(key, value);
    return make_config(e);
  };
  const auto det = cmd_run_det(with(quick(dir / "det"), "xi", "0"), log);
  const auto tsm = cmd_run_tsm(make_config(quick(dir / "tsm")), log);
  const auto mc = cmd_run_mc(make_config(quick(dir / "mc")), log);
  const auto mesh = cmd_mesh_gen(make_config(quick(dir / "mesh")), log);

  // Order 0 of the TSM run is the xi = 0 deterministic run.
  CHECK(read_file(det / "reaction_top.csv") == read_file(tsm / "order0_reaction_top.csv"));

  const auto mt = parse_manifest(read_file(tsm / "manifest.txt"));
  CHECK(mt.at("command") == "run-tsm");
  CHECK(mt.at("tsdm_version") == version_string());
  CHECK(mt.at("config_hash") == hex64(fnv1a_hash(read_file(tsm / "config.txt"))));
  CHECK(mt.at("line_path") == "midline");
  for (const char* k : {"wall_order0_s", "wall_order1_s", "wall_post_s", "wall_total_s"})
    CHECK(std::stod(mt.at(k)) >= 0.0);
  const auto mm = parse_manifest(read_file(mc / "manifest.txt"));
  CHECK(mm.at("seed") == "20240601");
  CHECK(mm.at("runs") == "4");
  CHECK(std::filesystem::exists(mc / "samples.csv"));
  CHECK(std::filesystem::exists(mesh / "mesh.vtk"));

  // The stored config reproduces the run.
  const RunConfig again = make_config(parse_config_text(read_file(tsm / "config.txt")));
  CHECK(canonical_config(again) == read_file(tsm / "config.txt"));

  const auto cmp = cmd_compare(tsm, mc, dir / "cmp", 0.5, log);
  const std::string groups = read_file(cmp / "comparison_groups.csv");
  CHECK(groups.find("above") != std::string::npos);
  CHECK(groups.find("below") != std::string::npos);
  CHECK(std::filesystem::exists(cmp / "line_tsm_000.csv"));

  const TimingReport t = report_timing({det, tsm, mc});
  CHECK(t.det_s > 0.0);
  CHECK(t.speedup == doctest::Approx(t.mc_s / t.tsm_s));
  CHECK(t.tsm_over_det == doctest::Approx(t.tsm_s / t.det_s));
  CHECK(timing_text(t).find("speedup") != std::string::npos);

  CHECK_THROWS_AS(cmd_compare(mc, tsm, dir / "bad", 0.5, log), ValidationError);
}

TEST_CASE("exit codes") {
  auto code = [](auto thrower) {
    std::ostringstream err;
    try {
      thrower();
    } catch (...) {
      return exit_code_for_current_exception(err);
    }
    return 0;
  };
  CHECK(code([] { throw ValidationError("v"); }) == 1);
  CHECK(code([] { throw InstabilityError("i", 3); }) == 2);
  CHECK(code([] { throw IoError("io"); }) == 3);
  CHECK(code([] { read_file("/nonexistent/file"); }) == 3);
}

TEST_CASE("command-line entry point") {
  test::TempDir dir("exe");
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("run-det --set bogus=1") == 1);
  CHECK(run_cli("run-det --set eta") == 1);
  CHECK(run_cli("run-det --frobnicate") == 1);
  CHECK(run_cli("run-det --config /nonexistent.cfg") == 3);
  CHECK(run_cli("compare --tsm /nonexistent --mc /nonexistent -o " + (dir / "c").string()) == 3);
  // Oversized fixed step on an elastic plate.
  CHECK(run_cli("run-det -s problem=plate_hole -s resolution=6x8x1 -s eta=1e300 -s dt=1e-5 -o " +
                (dir / "u").string()) == 2);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "problem = plate_hole\nresolution = 6x8x1\ntotal_time = 0.001\n";
  }
  CHECK(run_cli("mesh-gen --config " + (dir / "run.cfg").string() + " -o " +
                (dir / "m").string()) == 0);
  CHECK(std::filesystem::exists(dir / "m" / "manifest.txt"));
}
