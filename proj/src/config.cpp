#include "tsdm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "tsdm/errors.hpp"
#include "tsdm/output.hpp"

namespace tsdm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ValidationError("config key '" + key + "': " + why + " (got '" + value + "')");
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, v, "expected a number");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    bad(key, v, "expected a non-negative integer");
  return x;
}

Axis to_axis(const std::string& key, const std::string& v) {
  if (v == "x") return Axis::x;
  if (v == "y") return Axis::y;
  if (v == "z") return Axis::z;
  bad(key, v, "axis must be x, y or z");
}

const char* axis_name(Axis a) { return a == Axis::x ? "x" : a == Axis::y ? "y" : "z"; }

void apply_preset(RunConfig& c) {
  const double amplitude = c.problem == ProblemKind::double_notch ? 0.01 : 0.001;
  const bool desk = c.scale == TimeScale::desk;
  c.loads = {};
  c.mass_damping = desk ? 8000.0 : 0.0;
  c.dt = 0.0;
  switch (c.problem) {
    case ProblemKind::double_notch:
      c.material.eta = desk ? 3.0e4 : 1.0e9;
      if (!desk) c.dt = 1.6e-6;
      break;
    case ProblemKind::plate_hole:
      c.material.eta = desk ? 400.0 : 5.0e9;
      if (!desk) c.dt = 1.8e-6;
      break;
    case ProblemKind::mesh_file:
      c.loads.total_time = desk ? 0.016 : 1.0;
      return;
  }
  c.loads.total_time = desk ? 0.016 : 1.0;
  const double t = c.loads.total_time;
  if (c.problem == ProblemKind::double_notch) {
    c.loads.dirichlet = {{"top", Axis::y, amplitude, t},
                         {"top", Axis::x, 0.0, 0.0},
                         {"bottom", Axis::x, 0.0, 0.0},
                         {"bottom", Axis::y, 0.0, 0.0},
                         {"bottom", Axis::z, 0.0, 0.0}};
  } else {
    c.loads.dirichlet = {{"top", Axis::y, amplitude, t},
                         {"symmetry_x", Axis::x, 0.0, 0.0},
                         {"symmetry_y", Axis::y, 0.0, 0.0},
                         {"back", Axis::z, 0.0, 0.0}};
  }
}

const std::vector<std::string> kKeys = {
    "problem",        "scale",          "mesh_path",      "resolution",     "width",
    "height",         "thickness",      "notch_depth",    "notch_height",   "hole_radius",
    "lambda",         "mu",             "rho",            "eta",            "mass_damping",
    "total_time",     "dirichlet",      "body_force",     "dt",             "cfl_safety",
    "exchange_interval", "exchange_mode", "exchange_path", "xi_second_moment",
    "sensitivity_law", "mc_samples",    "xi_distribution", "xi_std",        "xi_truncation",
    "seed",           "workers",        "execution",      "snapshot_times", "force_stride",
    "mask_threshold", "xi",             "output_dir"};

}  // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(no) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

RunConfig make_config(const ConfigEntries& entries) {
  RunConfig c;
  for (const auto& [k, v] : entries)
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end())
      throw ValidationError("unknown config key '" + k + "'");

  for (const auto& [k, v] : entries) {
    if (k == "problem") {
      if (v == "double_notch") c.problem = ProblemKind::double_notch;
      else if (v == "plate_hole") c.problem = ProblemKind::plate_hole;
      else if (v == "mesh_file") c.problem = ProblemKind::mesh_file;
      else bad(k, v, "expected double_notch, plate_hole or mesh_file");
    } else if (k == "scale") {
      if (v == "desk") c.scale = TimeScale::desk;
      else if (v == "full") c.scale = TimeScale::full;
      else bad(k, v, "expected desk or full");
    }
  }
  apply_preset(c);

  bool explicit_m2 = false;
  bool own_dirichlet = false;
  for (const auto& [k, v] : entries) {
    if (k == "problem" || k == "scale") continue;
    if (k == "mesh_path") {
      c.mesh_path = v;
    } else if (k == "resolution") {
      const auto parts = split(v, 'x');
      if (parts.size() != 3) bad(k, v, "expected NXxNYxNZ");
      GridResolution r{to_u64(k, parts[0]), to_u64(k, parts[1]), to_u64(k, parts[2])};
      if (r.nx == 0 || r.ny == 0 || r.nz == 0) bad(k, v, "every count must be positive");
      c.resolution = r;
    } else if (k == "width") {
      c.notch.width = c.plate.width = to_double(k, v);
    } else if (k == "height") {
      c.notch.height = c.plate.height = to_double(k, v);
    } else if (k == "thickness") {
      c.notch.thickness = c.plate.thickness = to_double(k, v);
    } else if (k == "notch_depth") {
      c.notch.notch_depth = to_double(k, v);
    } else if (k == "notch_height") {
      c.notch.notch_height = to_double(k, v);
    } else if (k == "hole_radius") {
      c.plate.hole_radius = to_double(k, v);
    } else if (k == "lambda") {
      c.material.lambda = to_double(k, v);
    } else if (k == "mu") {
      c.material.mu = to_double(k, v);
    } else if (k == "rho") {
      c.material.rho = to_double(k, v);
    } else if (k == "eta") {
      c.material.eta = to_double(k, v);
    } else if (k == "mass_damping") {
      c.mass_damping = to_double(k, v);
      if (!(c.mass_damping >= 0.0)) bad(k, v, "must be non-negative");
    } else if (k == "total_time") {
      const double t_old = c.loads.total_time;
      c.loads.total_time = to_double(k, v);
      if (!(c.loads.total_time > 0.0)) bad(k, v, "must be positive");
      // Preset ramps end at the horizon; keep them there.
      if (!own_dirichlet)
        for (auto& d : c.loads.dirichlet)
          if (d.ramp_end == t_old) d.ramp_end = c.loads.total_time;
    } else if (k == "dirichlet") {
      const auto w = words(v);
      if (w.size() != 4) bad(k, v, "expected 'set axis amplitude ramp_end'");
      if (!own_dirichlet) c.loads.dirichlet.clear();
      own_dirichlet = true;
      c.loads.dirichlet.push_back({w[0], to_axis(k, w[1]), to_double(k, w[2]), to_double(k, w[3])});
    } else if (k == "body_force") {
      const auto w = words(v);
      if (w.size() != 3) bad(k, v, "expected three components");
      c.loads.body_force = {to_double(k, w[0]), to_double(k, w[1]), to_double(k, w[2])};
    } else if (k == "dt") {
      c.dt = to_double(k, v);
      if (!(c.dt >= 0.0)) bad(k, v, "must be non-negative (0 selects the CFL step)");
    } else if (k == "cfl_safety") {
      c.cfl_safety = to_double(k, v);
      if (!(c.cfl_safety > 0.0) || c.cfl_safety > 1.0) bad(k, v, "must lie in (0, 1]");
    } else if (k == "exchange_interval") {
      c.tsm.exchange_interval = to_u64(k, v);
      if (c.tsm.exchange_interval < 1) bad(k, v, "must be at least 1");
    } else if (k == "exchange_mode") {
      if (v == "in_memory") c.tsm.exchange_mode = ExchangeMode::in_memory;
      else if (v == "file") c.tsm.exchange_mode = ExchangeMode::file;
      else bad(k, v, "expected in_memory or file");
    } else if (k == "exchange_path") {
      c.tsm.exchange_path = v;
    } else if (k == "xi_second_moment") {
      c.tsm.xi_second_moment = to_double(k, v);
      if (!(c.tsm.xi_second_moment >= 0.0) || !(c.tsm.xi_second_moment < 1.0))
        bad(k, v, "must lie in [0, 1)");
      explicit_m2 = true;
    } else if (k == "sensitivity_law") {
      if (v == "exact_derivative") c.tsm.law = DamageSensitivityLaw::exact_derivative;
      else if (v == "full_quadratic_drive") c.tsm.law = DamageSensitivityLaw::full_quadratic_drive;
      else bad(k, v, "expected exact_derivative or full_quadratic_drive");
    } else if (k == "mc_samples") {
      c.mc_samples = to_u64(k, v);
      if (c.mc_samples < 2) bad(k, v, "need at least 2 samples");
    } else if (k == "xi_distribution") {
      if (v == "normal") c.xi.kind = XiKind::normal;
      else if (v == "uniform") c.xi.kind = XiKind::uniform;
      else bad(k, v, "expected normal or uniform");
    } else if (k == "xi_std") {
      c.xi.std = to_double(k, v);
    } else if (k == "xi_truncation") {
      c.xi.truncation = to_double(k, v);
    } else if (k == "seed") {
      c.xi.seed = to_u64(k, v);
    } else if (k == "workers") {
      const auto w = to_u64(k, v);
      if (w < 1 || w > 1024) bad(k, v, "must lie in [1, 1024]");
      c.workers = static_cast<int>(w);
    } else if (k == "execution") {
      if (v == "serial") c.execution = Execution::serial;
      else if (v == "openmp") c.execution = Execution::openmp;
      else bad(k, v, "expected serial or openmp");
    } else if (k == "snapshot_times") {
      c.snapshot_times.clear();
      for (const auto& p : split(v, ',')) c.snapshot_times.push_back(to_double(k, p));
    } else if (k == "force_stride") {
      c.force_stride = to_u64(k, v);
      if (c.force_stride < 1) bad(k, v, "must be at least 1");
    } else if (k == "mask_threshold") {
      c.mask_threshold = to_double(k, v);
    } else if (k == "xi") {
      c.realization_xi = to_double(k, v);
      if (!(1.0 + c.realization_xi > 0.0)) bad(k, v, "needs 1 + xi > 0");
    } else if (k == "output_dir") {
      c.output_dir = v;
    }
  }

  try {
    c.xi.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config keys 'xi_std'/'xi_truncation': ") + e.what());
  }
  if (!explicit_m2) c.tsm.xi_second_moment = c.xi.std * c.xi.std;
  c.material.xi_second_moment = c.tsm.xi_second_moment;
  try {
    c.material.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("material keys: ") + e.what());
  }
  if (c.problem != ProblemKind::mesh_file && !c.mesh_path.empty())
    throw ValidationError("config key 'mesh_path' conflicts with the built-in problem; set problem = mesh_file");
  if (c.problem == ProblemKind::mesh_file) {
    if (c.mesh_path.empty()) throw ValidationError("config key 'mesh_path' is required for problem = mesh_file");
    if (!std::filesystem::exists(c.mesh_path))
      throw ValidationError("config key 'mesh_path': file '" + c.mesh_path.string() + "' does not exist");
    if (c.loads.dirichlet.empty())
      throw ValidationError("config key 'dirichlet' is required for problem = mesh_file");
  }
  for (double t : c.snapshot_times)
    if (!(t >= 0.0) || t > c.loads.total_time * (1.0 + 1e-12))
      throw ValidationError("config key 'snapshot_times': " + format_double(t) +
                            " lies outside [0, total_time]");
  return c;
}

std::string RunConfig::line_path() const {
  switch (problem) {
    case ProblemKind::double_notch: return "centerline";
    case ProblemKind::plate_hole: return "midline";
    case ProblemKind::mesh_file: break;
  }
  return "";
}

Mesh RunConfig::build_mesh() const {
  switch (problem) {
    case ProblemKind::double_notch:
      return generate_double_notch(notch, resolution.value_or(kDoubleNotchBenchmarkResolution));
    case ProblemKind::plate_hole:
      return generate_plate_with_hole(plate, resolution.value_or(kPlateBenchmarkResolution));
    case ProblemKind::mesh_file:
      break;
  }
  return load_mesh(mesh_path);
}

Problem RunConfig::build_problem() const {
  Problem p{build_mesh(), loads, material, mass_damping};
  p.validate();
  return p;
}

double RunConfig::time_step(const Mesh& mesh) const {
  return dt > 0.0 ? dt : stable_timestep(mesh, material, cfl_safety);
}

OutputRequest RunConfig::outputs() const {
  OutputRequest o;
  o.snapshot_times = snapshot_times;
  if (o.snapshot_times.empty())
    for (int q = 1; q <= 4; ++q) o.snapshot_times.push_back(loads.total_time * q / 4.0);
  o.force_stride = force_stride;
  return o;
}

std::string canonical_config(const RunConfig& c) {
  Manifest m;
  auto put = [&](const std::string& k, const std::string& v) { m.emplace_back(k, v); };
  auto num = [](double v) { return format_double(v); };
  put("problem", c.problem == ProblemKind::double_notch ? "double_notch"
                 : c.problem == ProblemKind::plate_hole ? "plate_hole"
                                                        : "mesh_file");
  put("scale", c.scale == TimeScale::desk ? "desk" : "full");
  if (c.problem == ProblemKind::mesh_file) put("mesh_path", c.mesh_path.string());
  if (c.resolution)
    put("resolution", std::to_string(c.resolution->nx) + "x" + std::to_string(c.resolution->ny) +
                          "x" + std::to_string(c.resolution->nz));
  if (c.problem == ProblemKind::double_notch) {
    put("width", num(c.notch.width));
    put("height", num(c.notch.height));
    put("thickness", num(c.notch.thickness));
    put("notch_depth", num(c.notch.notch_depth));
    put("notch_height", num(c.notch.notch_height));
  } else if (c.problem == ProblemKind::plate_hole) {
    put("width", num(c.plate.width));
    put("height", num(c.plate.height));
    put("thickness", num(c.plate.thickness));
    put("hole_radius", num(c.plate.hole_radius));
  }
  put("lambda", num(c.material.lambda));
  put("mu", num(c.material.mu));
  put("rho", num(c.material.rho));
  put("eta", num(c.material.eta));
  put("mass_damping", num(c.mass_damping));
  put("total_time", num(c.loads.total_time));
  for (const auto& d : c.loads.dirichlet)
    put("dirichlet", d.node_set + " " + axis_name(d.axis) + " " + num(d.amplitude) + " " +
                         num(d.ramp_end));
  put("body_force", num(c.loads.body_force[0]) + " " + num(c.loads.body_force[1]) + " " +
                        num(c.loads.body_force[2]));
  put("dt", num(c.dt));
  put("cfl_safety", num(c.cfl_safety));
  put("exchange_interval", std::to_string(c.tsm.exchange_interval));
  put("exchange_mode", c.tsm.exchange_mode == ExchangeMode::file ? "file" : "in_memory");
  if (!c.tsm.exchange_path.empty()) put("exchange_path", c.tsm.exchange_path.string());
  put("xi_second_moment", num(c.tsm.xi_second_moment));
  put("sensitivity_law", c.tsm.law == DamageSensitivityLaw::exact_derivative
                             ? "exact_derivative"
                             : "full_quadratic_drive");
  put("mc_samples", std::to_string(c.mc_samples));
  put("xi_distribution", c.xi.kind == XiKind::normal ? "normal" : "uniform");
  put("xi_std", num(c.xi.std));
  put("xi_truncation", num(c.xi.truncation));
  put("seed", std::to_string(c.xi.seed));
  put("workers", std::to_string(c.workers));
  put("execution", c.execution == Execution::openmp ? "openmp" : "serial");
  std::string times;
  for (double t : c.snapshot_times) times += (times.empty() ? "" : ",") + num(t);
  if (!times.empty()) put("snapshot_times", times);
  put("force_stride", std::to_string(c.force_stride));
  put("mask_threshold", num(c.mask_threshold));
  put("xi", num(c.realization_xi));
  return manifest_text(m);
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace tsdm
