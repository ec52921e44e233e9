#include "tsdm/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tsdm/errors.hpp"
#include "tsdm/hex8.hpp"

namespace tsdm {

namespace {

std::array<Vec3, 8> element_coordinates(const Mesh& mesh, std::size_t e) {
  std::array<Vec3, 8> x{};
  for (std::size_t i = 0; i < 8; ++i) x[i] = mesh.nodes[mesh.elements[e][i]];
  return x;
}

std::string element_label(std::size_t e) { return "element " + std::to_string(e); }

}  // namespace

const std::vector<std::size_t>& Mesh::node_set(const std::string& name) const {
  auto it = node_sets.find(name);
  if (it == node_sets.end()) throw ValidationError("unknown node set '" + name + "'");
  return it->second;
}

const std::vector<std::size_t>& Mesh::element_path(const std::string& name) const {
  auto it = element_paths.find(name);
  if (it == element_paths.end())
    throw ValidationError("unknown element path '" + name + "'");
  return it->second;
}

void validate(const Mesh& mesh) {
  const std::size_t n = mesh.node_count();
  for (const auto& x : mesh.nodes)
    for (double c : x)
      if (!std::isfinite(c)) throw ValidationError("non-finite node coordinate");

  const auto gps = hex8::gauss_points();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[e];
    for (std::size_t i = 0; i < 8; ++i) {
      if (el[i] >= n)
        throw ValidationError(element_label(e) + " references node " +
                              std::to_string(el[i]) + " but the mesh has " +
                              std::to_string(n) + " nodes");
      for (std::size_t j = 0; j < i; ++j)
        if (el[j] == el[i])
          throw ValidationError(element_label(e) + " repeats node " +
                                std::to_string(el[i]));
    }
    const auto x = element_coordinates(mesh, e);
    for (const auto& r : gps) {
      if (!(hex8::map(x, r).det_j > 0.0))
        throw ValidationError(element_label(e) +
                              " has a non-positive Jacobian determinant");
    }
  }

  for (const auto& [name, members] : mesh.node_sets) {
    std::set<std::size_t> seen;
    for (std::size_t i : members) {
      if (i >= n)
        throw ValidationError("node set '" + name + "' references node " +
                              std::to_string(i) + " but the mesh has " +
                              std::to_string(n) + " nodes");
      if (!seen.insert(i).second)
        throw ValidationError("node set '" + name + "' lists node " +
                              std::to_string(i) + " twice");
    }
  }

  for (const auto& [name, path] : mesh.element_paths) {
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (path[k] >= mesh.element_count())
        throw ValidationError("element path '" + name + "' references element " +
                              std::to_string(path[k]));
      if (k == 0) continue;
      const auto& a = mesh.elements[path[k - 1]];
      const auto& b = mesh.elements[path[k]];
      std::size_t shared = 0;
      for (std::size_t i : a)
        shared += static_cast<std::size_t>(std::count(b.begin(), b.end(), i));
      if (shared < 4)
        throw ValidationError("element path '" + name + "' is not face-contiguous at position " +
                              std::to_string(k));
    }
  }
}

double element_volume(const Mesh& mesh, std::size_t element) {
  const auto x = element_coordinates(mesh, element);
  double v = 0.0;
  for (const auto& r : hex8::gauss_points()) v += hex8::map(x, r).det_j * hex8::kGaussWeight;
  return v;
}

double total_volume(const Mesh& mesh) {
  double v = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) v += element_volume(mesh, e);
  return v;
}

Vec3 element_centroid(const Mesh& mesh, std::size_t element) {
  Vec3 c{0, 0, 0};
  for (std::size_t i : mesh.elements[element])
    for (std::size_t k = 0; k < 3; ++k) c[k] += mesh.nodes[i][k] / 8.0;
  return c;
}

double DirichletRamp::value(double t) const {
  if (ramp_end <= 0.0) return amplitude;
  // Extends linearly for t < 0 so the prescribed motion is already underway
  // at t = 0 and its finite-difference acceleration vanishes there.
  return amplitude * std::min(t / ramp_end, 1.0);
}

void validate(const LoadCase& loads, const Mesh& mesh) {
  if (!(loads.total_time > 0.0) || !std::isfinite(loads.total_time))
    throw ValidationError("load case total_time must be positive");
  for (double b : loads.body_force)
    if (!std::isfinite(b)) throw ValidationError("body force must be finite");

  std::map<std::size_t, std::size_t> prescribed;  // dof -> ramp index
  for (std::size_t r = 0; r < loads.dirichlet.size(); ++r) {
    const auto& ramp = loads.dirichlet[r];
    if (!std::isfinite(ramp.amplitude) || !std::isfinite(ramp.ramp_end) || ramp.ramp_end < 0.0)
      throw ValidationError("Dirichlet ramp on '" + ramp.node_set + "' has invalid values");
    if (ramp.ramp_end > loads.total_time)
      throw ValidationError("Dirichlet ramp on '" + ramp.node_set +
                            "' ends after total_time");
    for (std::size_t node : mesh.node_set(ramp.node_set)) {
      const std::size_t dof = 3 * node + static_cast<std::size_t>(ramp.axis);
      auto [it, inserted] = prescribed.emplace(dof, r);
      if (!inserted) {
        const auto& other = loads.dirichlet[it->second];
        if (other.amplitude != ramp.amplitude || other.ramp_end != ramp.ramp_end)
          throw ValidationError("node " + std::to_string(node) +
                                " receives conflicting prescriptions from sets '" +
                                other.node_set + "' and '" + ramp.node_set + "'");
      }
    }
  }

  // The constrained DOFs must pin all six rigid-body modes: the Gram matrix
  // of the modes restricted to those DOFs has to be positive definite.
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{-lo[0], -lo[1], -lo[2]};
  for (const auto& x : mesh.nodes)
    for (std::size_t k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], x[k]);
      hi[k] = std::max(hi[k], x[k]);
    }
  Vec3 c{};
  double diag = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    c[k] = 0.5 * (lo[k] + hi[k]);
    diag += (hi[k] - lo[k]) * (hi[k] - lo[k]);
  }
  const double scale = diag > 0.0 ? 1.0 / std::sqrt(diag) : 1.0;

  double gram[6][6] = {};
  for (const auto& [dof, unused] : prescribed) {
    const std::size_t node = dof / 3;
    const std::size_t axis = dof % 3;
    const Vec3& x = mesh.nodes[node];
    const double rx = (x[0] - c[0]) * scale, ry = (x[1] - c[1]) * scale,
                 rz = (x[2] - c[2]) * scale;
    // Rigid modes: translations, then rotations about x, y, z.
    const double modes[6][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                {0, -rz, ry}, {rz, 0, -rx}, {-ry, rx, 0}};
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) gram[a][b] += modes[a][axis] * modes[b][axis];
  }
  double max_diag = 0.0;
  for (std::size_t a = 0; a < 6; ++a) max_diag = std::max(max_diag, gram[a][a]);
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t p = 0; p < k; ++p) gram[k][k] -= gram[k][p] * gram[k][p];
    if (!(gram[k][k] > 1e-10 * max_diag))
      throw ValidationError(
          "Dirichlet constraints leave a rigid-body mode unrestrained");
    const double piv = std::sqrt(gram[k][k]);
    gram[k][k] = piv;
    for (std::size_t i = k + 1; i < 6; ++i) {
      for (std::size_t p = 0; p < k; ++p) gram[i][k] -= gram[i][p] * gram[k][p];
      gram[i][k] /= piv;
    }
  }
}

// --- Structured generators -------------------------------------------------

namespace {

struct StructuredGrid {
  std::size_t nx, ny, nz;
  double w, h, t;
  std::vector<char> active;  // nx * ny, same for every layer

  bool is_active(std::size_t i, std::size_t j) const { return active[j * nx + i] != 0; }
  double x(std::size_t i) const { return w * static_cast<double>(i) / static_cast<double>(nx); }
  double y(std::size_t j) const { return h * static_cast<double>(j) / static_cast<double>(ny); }
  double z(std::size_t k) const { return t * static_cast<double>(k) / static_cast<double>(nz); }
  double xc(std::size_t i) const { return w * (static_cast<double>(i) + 0.5) / static_cast<double>(nx); }
  double yc(std::size_t j) const { return h * (static_cast<double>(j) + 0.5) / static_cast<double>(ny); }
};

struct Built {
  Mesh mesh;
  std::vector<std::array<std::size_t, 3>> node_index;  // (i, j, k) per node
  std::vector<std::size_t> element_of_cell;            // (j * nx + i) at k = 0
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

Built build(const StructuredGrid& g) {
  const std::size_t sx = g.nx + 1, sy = g.ny + 1, sz = g.nz + 1;
  auto grid_id = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * sy + j) * sx + i; };
  std::vector<char> used(sx * sy * sz, 0);
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        if (!g.is_active(i, j)) continue;
        for (std::size_t dk = 0; dk < 2; ++dk)
          for (std::size_t dj = 0; dj < 2; ++dj)
            for (std::size_t di = 0; di < 2; ++di) used[grid_id(i + di, j + dj, k + dk)] = 1;
      }

  Built b;
  std::vector<std::size_t> id(used.size(), kNone);
  for (std::size_t k = 0; k < sz; ++k)
    for (std::size_t j = 0; j < sy; ++j)
      for (std::size_t i = 0; i < sx; ++i) {
        const std::size_t gid = grid_id(i, j, k);
        if (!used[gid]) continue;
        id[gid] = b.mesh.nodes.size();
        b.mesh.nodes.push_back({g.x(i), g.y(j), g.z(k)});
        b.node_index.push_back({i, j, k});
      }

  b.element_of_cell.assign(g.nx * g.ny, kNone);
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        if (!g.is_active(i, j)) continue;
        if (k == 0) b.element_of_cell[j * g.nx + i] = b.mesh.elements.size();
        b.mesh.elements.push_back({id[grid_id(i, j, k)], id[grid_id(i + 1, j, k)],
                                   id[grid_id(i + 1, j + 1, k)], id[grid_id(i, j + 1, k)],
                                   id[grid_id(i, j, k + 1)], id[grid_id(i + 1, j, k + 1)],
                                   id[grid_id(i + 1, j + 1, k + 1)], id[grid_id(i, j + 1, k + 1)]});
      }
  return b;
}

template <class Pred>
std::vector<std::size_t> select_nodes(const Built& b, Pred pred) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < b.node_index.size(); ++n) {
    const auto& [i, j, k] = b.node_index[n];
    if (pred(i, j, k)) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> row_path(const Built& b, const StructuredGrid& g, std::size_t j) {
  std::vector<std::size_t> path;
  for (std::size_t i = 0; i < g.nx; ++i)
    if (g.is_active(i, j)) path.push_back(b.element_of_cell[j * g.nx + i]);
  return path;
}

void check_resolution(const GridResolution& res) {
  if (res.nx == 0 || res.ny == 0 || res.nz == 0)
    throw ValidationError("grid resolution must be at least 1 in every direction");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string(what) + " must be positive");
}

}  // namespace

Mesh generate_double_notch(const DoubleNotchGeometry& geom, const GridResolution& res) {
  check_resolution(res);
  require_positive(geom.width, "width");
  require_positive(geom.height, "height");
  require_positive(geom.thickness, "thickness");
  if (geom.notch_depth < 0.0 || geom.notch_height < 0.0)
    throw ValidationError("notch dimensions must be non-negative");
  if (geom.notch_depth > 0.0 && geom.notch_height > 0.0) {
    if (geom.notch_depth >= 0.5 * geom.width)
      throw ValidationError("notches overlap: notch depth must be below half the width");
    if (geom.notch_height >= geom.height)
      throw ValidationError("notch height must be below the specimen height");
  }

  StructuredGrid g{res.nx, res.ny, res.nz, geom.width, geom.height, geom.thickness, {}};
  g.active.assign(res.nx * res.ny, 1);
  const double mid = 0.5 * geom.height;
  for (std::size_t j = 0; j < res.ny; ++j)
    for (std::size_t i = 0; i < res.nx; ++i) {
      const double xc = g.xc(i), yc = g.yc(j);
      const bool in_band = std::abs(yc - mid) < 0.5 * geom.notch_height;
      const bool at_edge = xc < geom.notch_depth || xc > geom.width - geom.notch_depth;
      if (in_band && at_edge) g.active[j * res.nx + i] = 0;
    }
  for (std::size_t j = 0; j < res.ny; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < res.nx; ++i) any = any || g.is_active(i, j);
    if (!any) throw ValidationError("notches remove an entire row of cells; the specimen is cut through");
  }

  Built b = build(g);
  const std::size_t nx = res.nx, ny = res.ny;
  b.mesh.node_sets["top"] = select_nodes(b, [&](auto, auto j, auto) { return j == ny; });
  b.mesh.node_sets["bottom"] = select_nodes(b, [](auto, auto j, auto) { return j == 0; });
  b.mesh.node_sets["left"] = select_nodes(b, [](auto i, auto, auto) { return i == 0; });
  b.mesh.node_sets["right"] = select_nodes(b, [&](auto i, auto, auto) { return i == nx; });
  b.mesh.node_sets["back"] = select_nodes(b, [](auto, auto, auto k) { return k == 0; });

  // Row of cells nearest to half height; the lower one when two are equidistant.
  const std::size_t centre_row = (ny - 1) / 2;
  b.mesh.element_paths["centerline"] = row_path(b, g, centre_row);
  return b.mesh;
}

Mesh generate_plate_with_hole(const PlateWithHoleGeometry& geom, const GridResolution& res) {
  check_resolution(res);
  require_positive(geom.width, "width");
  require_positive(geom.height, "height");
  require_positive(geom.thickness, "thickness");
  if (geom.hole_radius < 0.0) throw ValidationError("hole radius must be non-negative");
  if (geom.hole_radius >= std::min(geom.width, geom.height))
    throw ValidationError("hole radius must be below both quarter-plate dimensions");

  StructuredGrid g{res.nx, res.ny, res.nz, geom.width, geom.height, geom.thickness, {}};
  g.active.assign(res.nx * res.ny, 1);
  const double r2 = geom.hole_radius * geom.hole_radius;
  for (std::size_t j = 0; j < res.ny; ++j)
    for (std::size_t i = 0; i < res.nx; ++i) {
      const double xc = g.xc(i), yc = g.yc(j);
      if (xc * xc + yc * yc < r2) g.active[j * res.nx + i] = 0;
    }
  bool row0 = false, col0 = false;
  for (std::size_t i = 0; i < res.nx; ++i) row0 = row0 || g.is_active(i, 0);
  for (std::size_t j = 0; j < res.ny; ++j) col0 = col0 || g.is_active(0, j);
  if (!row0 || !col0)
    throw ValidationError("hole removes an entire symmetry edge; refine the grid or shrink the hole");

  Built b = build(g);
  const std::size_t nx = res.nx, ny = res.ny;
  auto removed = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(nx) || j >= static_cast<long>(ny)) return false;
    return !g.is_active(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  b.mesh.node_sets["top"] = select_nodes(b, [&](auto, auto j, auto) { return j == ny; });
  b.mesh.node_sets["right"] = select_nodes(b, [&](auto i, auto, auto) { return i == nx; });
  b.mesh.node_sets["symmetry_x"] = select_nodes(b, [](auto i, auto, auto) { return i == 0; });
  b.mesh.node_sets["symmetry_y"] = select_nodes(b, [](auto, auto j, auto) { return j == 0; });
  b.mesh.node_sets["back"] = select_nodes(b, [](auto, auto, auto k) { return k == 0; });
  b.mesh.node_sets["hole_edge"] = select_nodes(b, [&](auto i, auto j, auto) {
    const long li = static_cast<long>(i), lj = static_cast<long>(j);
    return removed(li - 1, lj - 1) || removed(li, lj - 1) || removed(li - 1, lj) || removed(li, lj);
  });
  b.mesh.element_paths["midline"] = row_path(b, g, 0);
  return b.mesh;
}

std::optional<GridResolution> sweep_resolution(
    const std::function<std::size_t(const GridResolution&)>& count_elements,
    std::size_t target_elements, double width, double height, std::size_t max_nx,
    std::size_t max_ny, std::size_t nz) {
  std::optional<GridResolution> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t nx = 1; nx <= max_nx; ++nx)
    for (std::size_t ny = 1; ny <= max_ny; ++ny) {
      const GridResolution res{nx, ny, nz};
      std::size_t count = 0;
      try {
        count = count_elements(res);
      } catch (const ValidationError&) {
        continue;
      }
      if (count != target_elements) continue;
      const double aspect = (width / static_cast<double>(nx)) / (height / static_cast<double>(ny));
      const double score = std::abs(std::log(aspect));
      if (score < best_score) {
        best_score = score;
        best = res;
      }
    }
  return best;
}

// --- Text format -----------------------------------------------------------

namespace {

void put_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ss(line);
      std::vector<std::string> tok;
      for (std::string t; ss >> t;) tok.push_back(t);
      if (!tok.empty()) return tok;
    }
    throw ValidationError("mesh file ended early; expected " + std::string(expecting));
  }

  bool at_end() {
    std::string line;
    auto pos = in_.tellg();
    auto no = line_no_;
    while (std::getline(in_, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        in_.clear();
        in_.seekg(pos);
        line_no_ = no;
        return false;
      }
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("mesh file line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

double parse_double(LineReader& r, const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) r.fail("bad number '" + s + "'");
  return v;
}

std::size_t parse_index(LineReader& r, const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) r.fail("bad index '" + s + "'");
  return v;
}

std::size_t section(LineReader& r, const char* name) {
  auto tok = r.next(name);
  if (tok.size() != 2 || tok[0] != name) r.fail(std::string("expected '") + name + " <count>'");
  return parse_index(r, tok[1]);
}

void parse_groups(LineReader& r, const char* name,
                  std::map<std::string, std::vector<std::size_t>>& out) {
  const std::size_t count = section(r, name);
  for (std::size_t s = 0; s < count; ++s) {
    auto tok = r.next(name);
    if (tok.size() < 2) r.fail("expected '<name> <count> <indices...>'");
    const std::size_t k = parse_index(r, tok[1]);
    if (tok.size() != k + 2) r.fail("record for '" + tok[0] + "' has the wrong length");
    std::vector<std::size_t> ids;
    ids.reserve(k);
    for (std::size_t i = 0; i < k; ++i) ids.push_back(parse_index(r, tok[i + 2]));
    if (!out.emplace(tok[0], std::move(ids)).second) r.fail("duplicate name '" + tok[0] + "'");
  }
}

}  // namespace

std::string to_text(const Mesh& mesh) {
  std::string out = "TSDM-MESH 1\n";
  out += "NODES " + std::to_string(mesh.node_count()) + "\n";
  for (const auto& x : mesh.nodes) {
    put_double(out, x[0]);
    out += ' ';
    put_double(out, x[1]);
    out += ' ';
    put_double(out, x[2]);
    out += '\n';
  }
  out += "ELEMENTS " + std::to_string(mesh.element_count()) + "\n";
  for (const auto& el : mesh.elements) {
    for (std::size_t i = 0; i < 8; ++i) {
      if (i) out += ' ';
      out += std::to_string(el[i]);
    }
    out += '\n';
  }
  auto groups = [&](const char* name, const auto& m) {
    out += std::string(name) + " " + std::to_string(m.size()) + "\n";
    for (const auto& [key, ids] : m) {
      out += key + " " + std::to_string(ids.size());
      for (std::size_t i : ids) out += " " + std::to_string(i);
      out += '\n';
    }
  };
  groups("SETS", mesh.node_sets);
  groups("PATHS", mesh.element_paths);
  return out;
}

Mesh parse_mesh(const std::string& text) {
  LineReader r(text);
  auto head = r.next("header");
  if (head.size() != 2 || head[0] != "TSDM-MESH" || head[1] != "1")
    r.fail("expected header 'TSDM-MESH 1'");

  Mesh mesh;
  const std::size_t nn = section(r, "NODES");
  mesh.nodes.reserve(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    auto tok = r.next("node record");
    if (tok.size() != 3) r.fail("node record needs 3 coordinates");
    mesh.nodes.push_back({parse_double(r, tok[0]), parse_double(r, tok[1]), parse_double(r, tok[2])});
  }
  const std::size_t ne = section(r, "ELEMENTS");
  mesh.elements.reserve(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    auto tok = r.next("element record");
    if (tok.size() != 8) r.fail("element record needs 8 node indices");
    Element el{};
    for (std::size_t i = 0; i < 8; ++i) el[i] = parse_index(r, tok[i]);
    mesh.elements.push_back(el);
  }
  parse_groups(r, "SETS", mesh.node_sets);
  parse_groups(r, "PATHS", mesh.element_paths);
  if (!r.at_end()) r.fail("unexpected trailing content");
  validate(mesh);
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_text(mesh);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

}  // namespace tsdm
