#include "tsdm/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tsdm/errors.hpp"

namespace tsdm {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError("not a number: '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError("not a count: '" + s + "'");
  return v;
}

std::vector<double> cell_average(const std::vector<double>& gp, const Mesh& mesh) {
  std::vector<double> out(mesh.element_count());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = element_average(gp, e);
  return out;
}

std::vector<double> cell_norm(const std::vector<Voigt>& gp, const Mesh& mesh) {
  std::vector<double> out(mesh.element_count());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = stress_norm(element_average(gp, e));
  return out;
}

}  // namespace

std::string vtk_text(const Mesh& mesh, const std::vector<Vec3>& u, const CellFields& cells,
                     const std::string& title) {
  std::ostringstream o;
  o << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o << "POINTS " << mesh.node_count() << " double\n";
  for (const auto& x : mesh.nodes)
    o << format_double(x[0]) << ' ' << format_double(x[1]) << ' ' << format_double(x[2]) << '\n';
  o << "CELLS " << mesh.element_count() << ' ' << mesh.element_count() * 9 << '\n';
  for (const auto& el : mesh.elements) {
    o << 8;
    for (std::size_t n : el) o << ' ' << n;
    o << '\n';
  }
  o << "CELL_TYPES " << mesh.element_count() << '\n';
  for (std::size_t e = 0; e < mesh.element_count(); ++e) o << "12\n";
  if (!cells.empty()) {
    o << "CELL_DATA " << mesh.element_count() << '\n';
    for (const auto& [name, values] : cells) {
      if (values.size() != mesh.element_count())
        throw ValidationError("cell field '" + name + "' has the wrong length");
      o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) o << format_double(v) << '\n';
    }
  }
  if (!u.empty()) {
    if (u.size() != mesh.node_count()) throw ValidationError("displacement has the wrong length");
    o << "POINT_DATA " << mesh.node_count() << "\nVECTORS displacement double\n";
    for (const auto& v : u)
      o << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << '\n';
  }
  return o.str();
}

CellFields snapshot_cells(const Snapshot& s, const Mesh& mesh) {
  std::vector<double> f(s.d.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = damage_function(s.d[i]);
  return {{"d", cell_average(s.d, mesh)},
          {"f", cell_average(f, mesh)},
          {"stress_norm", cell_norm(s.sigma, mesh)}};
}

CellFields summary_cells(const UqSnapshot& s, const Mesh& mesh) {
  return {{"mean_d", cell_average(s.mean_d, mesh)},
          {"std_d", cell_average(s.std_d, mesh)},
          {"mean_f", cell_average(s.mean_f, mesh)},
          {"std_f", cell_average(s.std_f, mesh)},
          {"mean_stress_norm", cell_norm(s.mean_sigma, mesh)},
          {"std_stress_norm", cell_norm(s.std_sigma, mesh)}};
}

std::string reaction_csv(const ReactionSeries& r) {
  std::ostringstream o;
  o << "time,Fx,Fy,Fz\n";
  for (std::size_t i = 0; i < r.time.size(); ++i)
    o << format_double(r.time[i]) << ',' << format_double(r.force[i][0]) << ','
      << format_double(r.force[i][1]) << ',' << format_double(r.force[i][2]) << '\n';
  return o.str();
}

std::string force_summary_csv(const UqForceSeries& f) {
  std::ostringstream o;
  o << "time,mean_Fx,mean_Fy,mean_Fz,std_Fx,std_Fy,std_Fz\n";
  for (std::size_t i = 0; i < f.time.size(); ++i) {
    o << format_double(f.time[i]);
    for (double v : f.mean[i]) o << ',' << format_double(v);
    for (double v : f.std[i]) o << ',' << format_double(v);
    o << '\n';
  }
  return o.str();
}

std::string line_csv(const std::vector<LineRow>& rows) {
  std::ostringstream o;
  o << "position,element,x,y,z,mean_f,std_f,mean_d,std_d,mean_stress_norm,std_stress_norm\n";
  for (const auto& r : rows)
    o << r.position << ',' << r.element << ',' << format_double(r.centroid[0]) << ','
      << format_double(r.centroid[1]) << ',' << format_double(r.centroid[2]) << ','
      << format_double(r.mean_f) << ',' << format_double(r.std_f) << ',' << format_double(r.mean_d)
      << ',' << format_double(r.std_d) << ',' << format_double(r.mean_sigma_norm) << ','
      << format_double(r.std_sigma_norm) << '\n';
  return o.str();
}

std::string comparison_csv(const ComparisonReport& rep) {
  std::ostringstream o;
  o << "snapshot,time,element,above_mask,mean_f_tsm,mean_f_mc,std_f_tsm,std_f_mc,"
       "err_mean_f,err_std_f,err_mean_stress,err_std_stress\n";
  for (const auto& r : rep.rows)
    o << r.snapshot << ',' << format_double(r.time) << ',' << r.element << ','
      << (r.above_mask ? 1 : 0) << ',' << format_double(r.mean_f_tsm) << ','
      << format_double(r.mean_f_mc) << ',' << format_double(r.std_f_tsm) << ','
      << format_double(r.std_f_mc) << ',' << format_double(r.err_mean_f) << ','
      << format_double(r.err_std_f) << ',' << format_double(r.err_mean_sigma) << ','
      << format_double(r.err_std_sigma) << '\n';
  return o.str();
}

std::string comparison_groups_csv(const ComparisonReport& rep) {
  std::ostringstream o;
  o << "group,mask_threshold,count,max_err_mean_f,max_err_std_f,mean_err_std_f,"
       "max_err_mean_stress,max_err_std_stress\n";
  auto row = [&](const char* name, const GroupErrors& g) {
    o << name << ',' << format_double(rep.mask_threshold) << ',' << g.count << ','
      << format_double(g.max_err_mean_f) << ',' << format_double(g.max_err_std_f) << ','
      << format_double(g.mean_err_std_f) << ',' << format_double(g.max_err_mean_sigma) << ','
      << format_double(g.max_err_std_sigma) << '\n';
  };
  row("above", rep.above);
  row("below", rep.below);
  GroupErrors all = rep.above;
  all.count += rep.below.count;
  all.max_err_mean_f = std::max(all.max_err_mean_f, rep.below.max_err_mean_f);
  all.max_err_std_f = std::max(all.max_err_std_f, rep.below.max_err_std_f);
  all.max_err_mean_sigma = std::max(all.max_err_mean_sigma, rep.below.max_err_mean_sigma);
  all.max_err_std_sigma = std::max(all.max_err_std_sigma, rep.below.max_err_std_sigma);
  all.mean_err_std_f =
      all.count == 0 ? 0.0
                     : (rep.above.mean_err_std_f * static_cast<double>(rep.above.count) +
                        rep.below.mean_err_std_f * static_cast<double>(rep.below.count)) /
                           static_cast<double>(all.count);
  row("all", all);
  o << "\nforce_set,err_mean_Fx,err_mean_Fy,err_mean_Fz,err_std_Fx,err_std_Fy,err_std_Fz\n";
  for (const auto& f : rep.forces) {
    o << f.node_set;
    for (double v : f.err_mean) o << ',' << format_double(v);
    for (double v : f.err_std) o << ',' << format_double(v);
    o << '\n';
  }
  return o.str();
}

// --- Summary text ----------------------------------------------------------

std::string summary_text(const UqSummary& s) {
  std::ostringstream o;
  const std::size_t ngp = s.snapshots.empty() ? 0 : s.snapshots.front().mean_d.size();
  o << "TSDM-UQ 1\nSNAPSHOTS " << s.snapshots.size() << " GAUSS " << ngp << '\n';
  for (const auto& u : s.snapshots) {
    if (u.mean_d.size() != ngp) throw ValidationError("summary snapshots differ in size");
    o << "SNAPSHOT " << u.step << ' ' << format_double(u.time) << '\n';
    for (std::size_t gp = 0; gp < ngp; ++gp) {
      o << format_double(u.mean_d[gp]) << ' ' << format_double(u.std_d[gp]) << ' '
        << format_double(u.mean_f[gp]) << ' ' << format_double(u.std_f[gp]);
      for (double v : u.mean_sigma[gp]) o << ' ' << format_double(v);
      for (double v : u.std_sigma[gp]) o << ' ' << format_double(v);
      o << '\n';
    }
  }
  o << "FORCES " << s.forces.size() << '\n';
  for (const auto& f : s.forces) {
    o << "FORCE " << f.node_set << ' ' << f.time.size() << '\n';
    for (std::size_t i = 0; i < f.time.size(); ++i) {
      o << format_double(f.time[i]);
      for (double v : f.mean[i]) o << ' ' << format_double(v);
      for (double v : f.std[i]) o << ' ' << format_double(v);
      o << '\n';
    }
  }
  return o.str();
}

UqSummary parse_summary(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  auto word = [&](const char* what) {
    if (!(in >> tok)) throw ValidationError(std::string("summary ends early, expected ") + what);
    return tok;
  };
  auto expect = [&](const char* key) {
    if (word(key) != key)
      throw ValidationError(std::string("summary: expected '") + key + "', got '" + tok + "'");
  };
  auto num = [&]() { return parse_double(word("a number")); };
  auto count = [&]() { return parse_size(word("a count")); };

  expect("TSDM-UQ");
  if (word("version") != "1") throw ValidationError("unsupported summary version " + tok);
  expect("SNAPSHOTS");
  const std::size_t ns = count();
  expect("GAUSS");
  const std::size_t ngp = count();
  UqSummary s;
  for (std::size_t i = 0; i < ns; ++i) {
    expect("SNAPSHOT");
    UqSnapshot u;
    u.step = count();
    u.time = num();
    u.mean_d.resize(ngp);
    u.std_d.resize(ngp);
    u.mean_f.resize(ngp);
    u.std_f.resize(ngp);
    u.mean_sigma.resize(ngp);
    u.std_sigma.resize(ngp);
    for (std::size_t gp = 0; gp < ngp; ++gp) {
      u.mean_d[gp] = num();
      u.std_d[gp] = num();
      u.mean_f[gp] = num();
      u.std_f[gp] = num();
      for (double& v : u.mean_sigma[gp]) v = num();
      for (double& v : u.std_sigma[gp]) v = num();
    }
    s.snapshots.push_back(std::move(u));
  }
  expect("FORCES");
  const std::size_t nf = count();
  for (std::size_t k = 0; k < nf; ++k) {
    expect("FORCE");
    UqForceSeries f;
    f.node_set = word("a set name");
    const std::size_t n = count();
    f.time.resize(n);
    f.mean.resize(n);
    f.std.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      f.time[i] = num();
      for (double& v : f.mean[i]) v = num();
      for (double& v : f.std[i]) v = num();
    }
    s.forces.push_back(std::move(f));
  }
  if (in >> tok) throw ValidationError("summary has trailing content '" + tok + "'");
  return s;
}

// --- Files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream o;
  o << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return o.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

ArtifactDir::ArtifactDir(std::filesystem::path target) : target_(std::move(target)) {
  if (target_.empty()) throw ValidationError("output directory is empty");
  if (!target_.has_filename()) target_ = target_.parent_path();
  staging_ = target_;
  staging_ += ".staging-" + std::to_string(::getpid());
  std::error_code ec;
  std::filesystem::remove_all(staging_, ec);
  std::filesystem::create_directories(staging_, ec);
  if (ec) throw IoError("cannot create '" + staging_.string() + "': " + ec.message());
}

ArtifactDir::~ArtifactDir() {
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
  }
}

std::filesystem::path ArtifactDir::staged(const std::string& name) const { return staging_ / name; }

void ArtifactDir::write(const std::string& name, const std::string& content) {
  std::ofstream out(staging_ / name, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + (staging_ / name).string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write to '" + (staging_ / name).string() + "' failed");
}

void ArtifactDir::commit() {
  std::error_code ec;
  std::filesystem::remove_all(target_, ec);
  if (ec) throw IoError("cannot replace '" + target_.string() + "': " + ec.message());
  std::filesystem::rename(staging_, target_, ec);
  if (ec) throw IoError("cannot move artifacts into '" + target_.string() + "': " + ec.message());
  committed_ = true;
}

std::string manifest_text(const Manifest& m) {
  std::ostringstream o;
  for (const auto& [k, v] : m) o << k << " = " << v << '\n';
  return o.str();
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

}  // namespace tsdm
