#include "tsdm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsdm/errors.hpp"

namespace tsdm {

void Problem::validate() const {
  tsdm::validate(mesh);
  tsdm::validate(loads, mesh);
  material.validate();
}

// --- DamageConstitutive ----------------------------------------------------

DamageConstitutive::DamageConstitutive(const MaterialParams& params, double xi, Execution exec)
    : stiffness_(stiffness_voigt(params.lambda, params.mu)), eta_(params.eta), exec_(exec) {
  if (!(1.0 + xi > 0.0)) throw ValidationError("realization needs 1 + xi > 0");
  for (auto& row : stiffness_)
    for (double& c : row) c *= (1.0 + xi);
}

void DamageConstitutive::initialize(std::span<const Voigt> eps, GaussFields& fields) {
  for (std::size_t gp = 0; gp < eps.size(); ++gp) {
    fields.eps[gp] = eps[gp];
    fields.sigma[gp] = stress_order0(fields.d[gp], eps[gp], stiffness_);
  }
}

void DamageConstitutive::advance(std::size_t, double dt, std::span<const Voigt> eps_new,
                                 GaussFields& fields) {
  const long n = static_cast<long>(eps_new.size());
  auto body = [&](std::size_t gp) {
    const double d = update_damage_order0(fields.d[gp], fields.eps[gp], stiffness_, eta_, dt);
    fields.d[gp] = d;
    fields.eps[gp] = eps_new[gp];
    fields.sigma[gp] = stress_order0(d, eps_new[gp], stiffness_);
  };
  if (exec_ == Execution::openmp) {
#pragma omp parallel for schedule(static)
    for (long gp = 0; gp < n; ++gp) body(static_cast<std::size_t>(gp));
  } else {
    for (long gp = 0; gp < n; ++gp) body(static_cast<std::size_t>(gp));
  }
}

// --- Free functions --------------------------------------------------------

std::vector<double> lumped_mass(const Mesh& mesh, double rho) {
  if (!(rho > 0.0)) throw ValidationError("density must be positive");
  const auto q = ElementQuadrature::build(mesh);
  std::vector<double> m(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (std::size_t g = 0; g < kGaussPerElement; ++g) {
      const std::size_t gp = e * kGaussPerElement + g;
      for (std::size_t i = 0; i < 8; ++i)
        m[mesh.elements[e][i]] += rho * q.shape[gp][i] * q.weight[gp];
    }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!(m[i] > 0.0))
      throw ValidationError("node " + std::to_string(i) + " has no mass (unused or zero volume)");
  return m;
}

std::vector<Vec3> internal_force(const Mesh& mesh, const ElementQuadrature& q,
                                 std::span<const Voigt> sigma) {
  std::vector<Vec3> f(mesh.node_count());
  kernels::serial::assemble_internal_force(mesh, q, sigma, f);
  return f;
}

double stable_timestep(const Mesh& mesh, const MaterialParams& params, double safety) {
  static constexpr std::size_t kEdges[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                                {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& el : mesh.elements)
    for (const auto& edge : kEdges) {
      const Vec3& a = mesh.nodes[el[edge[0]]];
      const Vec3& b = mesh.nodes[el[edge[1]]];
      const double l = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
      shortest = std::min(shortest, l);
    }
  return safety * shortest / characteristic_scales(params).wave_speed;
}

double kinetic_energy(const DynamicState& state, const std::vector<double>& mass) {
  double k = 0.0;
  for (std::size_t n = 0; n < state.v.size(); ++n)
    for (double c : state.v[n]) k += 0.5 * mass[n] * c * c;
  return k;
}

double strain_energy(const GaussFields& fields, const ElementQuadrature& q) {
  double w = 0.0;
  for (std::size_t gp = 0; gp < fields.eps.size(); ++gp)
    w += 0.5 * dot(fields.eps[gp], fields.sigma[gp]) * q.weight[gp];
  return w;
}

// --- ExplicitDynamics ------------------------------------------------------

ExplicitDynamics::ExplicitDynamics(const Mesh& mesh, const LoadCase& loads, double rho,
                                   Execution exec, double mass_damping)
    : mesh_(&mesh),
      loads_(&loads),
      quadrature_(ElementQuadrature::build(mesh)),
      assembler_(mesh, quadrature_, exec),
      mass_(lumped_mass(mesh, rho)),
      body_force_(mesh.node_count(), Vec3{0.0, 0.0, 0.0}),
      constrained_(3 * mesh.node_count(), -1),
      eps_scratch_(mesh.gauss_count()),
      alpha_(mass_damping) {
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_))
    throw ValidationError("mass damping must be finite and non-negative");
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    for (std::size_t g = 0; g < kGaussPerElement; ++g) {
      const std::size_t gp = e * kGaussPerElement + g;
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t k = 0; k < 3; ++k)
          body_force_[mesh.elements[e][i]][k] +=
              quadrature_.shape[gp][i] * quadrature_.weight[gp] * loads.body_force[k];
    }
  for (std::size_t r = 0; r < loads.dirichlet.size(); ++r) {
    const auto& ramp = loads.dirichlet[r];
    for (std::size_t node : mesh.node_set(ramp.node_set)) {
      const std::size_t dof = 3 * node + static_cast<std::size_t>(ramp.axis);
      if (constrained_[dof] < 0) {
        constrained_[dof] = static_cast<int>(r);
        constrained_dofs_.push_back(dof);
      }
      auto& own = set_dofs_[ramp.node_set];
      if (std::find(own.begin(), own.end(), dof) == own.end()) own.push_back(dof);
    }
    if (std::find(reaction_sets_.begin(), reaction_sets_.end(), ramp.node_set) ==
        reaction_sets_.end())
      reaction_sets_.push_back(ramp.node_set);
  }
  std::sort(constrained_dofs_.begin(), constrained_dofs_.end());
}

double ExplicitDynamics::prescribed(std::size_t dof, double t, BoundaryMode mode) const {
  if (mode == BoundaryMode::homogeneous) return 0.0;
  return loads_->dirichlet[static_cast<std::size_t>(constrained_[dof])].value(t);
}

void ExplicitDynamics::accelerations(DynamicState& state, double dt, BoundaryMode mode) const {
  const bool loaded = mode == BoundaryMode::prescribed;
  for (std::size_t n = 0; n < mesh_->node_count(); ++n) {
    const double inv_m = 1.0 / mass_[n];
    for (std::size_t k = 0; k < 3; ++k) {
      const double fext = loaded ? body_force_[n][k] : 0.0;
      // state.v holds the half-step velocity here.
      state.a[n][k] = (fext - state.f_int[n][k]) * inv_m - alpha_ * state.v[n][k];
    }
  }
  const double t = static_cast<double>(state.step) * dt;
  for (std::size_t dof : constrained_dofs_) {
    const double gm = prescribed(dof, t - dt, mode);
    const double g0 = prescribed(dof, t, mode);
    const double gp = prescribed(dof, t + dt, mode);
    state.a[dof / 3][dof % 3] = (gp - 2.0 * g0 + gm) / (dt * dt);
  }
}

DynamicState ExplicitDynamics::initial_state(Constitutive& law, double dt, BoundaryMode mode) {
  const std::size_t nn = mesh_->node_count();
  DynamicState s;
  s.u.assign(nn, Vec3{0.0, 0.0, 0.0});
  s.v.assign(nn, Vec3{0.0, 0.0, 0.0});
  s.a.assign(nn, Vec3{0.0, 0.0, 0.0});
  s.f_int.assign(nn, Vec3{0.0, 0.0, 0.0});
  s.gauss.resize(mesh_->gauss_count());
  for (std::size_t dof : constrained_dofs_) {
    s.u[dof / 3][dof % 3] = prescribed(dof, 0.0, mode);
    s.v[dof / 3][dof % 3] = (prescribed(dof, dt, mode) - prescribed(dof, -dt, mode)) / (2.0 * dt);
  }
  assembler_.strains(s.u, eps_scratch_);
  law.initialize(eps_scratch_, s.gauss);
  assembler_.internal_force(s.gauss.sigma, s.f_int);
  accelerations(s, dt, mode);
  return s;
}

void ExplicitDynamics::step(DynamicState& s, double dt, Constitutive& law, BoundaryMode mode) {
  const std::size_t nn = mesh_->node_count();
  const std::size_t n = s.step;
  const double t_next = static_cast<double>(n + 1) * dt;

  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      s.v[i][k] += 0.5 * dt * s.a[i][k];
      s.u[i][k] += dt * s.v[i][k];
    }
  for (std::size_t dof : constrained_dofs_) {
    const double g1 = prescribed(dof, t_next, mode);
    const double g0 = prescribed(dof, t_next - dt, mode);
    s.u[dof / 3][dof % 3] = g1;
    s.v[dof / 3][dof % 3] = (g1 - g0) / dt;
  }

  assembler_.strains(s.u, eps_scratch_);
  law.advance(n + 1, dt, eps_scratch_, s.gauss);
  assembler_.internal_force(s.gauss.sigma, s.f_int);

  s.step = n + 1;
  s.time = t_next;
  accelerations(s, dt, mode);
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t k = 0; k < 3; ++k) s.v[i][k] += 0.5 * dt * s.a[i][k];
  for (std::size_t dof : constrained_dofs_) {
    const double gp = prescribed(dof, t_next + dt, mode);
    const double gm = prescribed(dof, t_next - dt, mode);
    s.v[dof / 3][dof % 3] = (gp - gm) / (2.0 * dt);
  }

  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      if (!std::isfinite(s.u[i][k]) || !std::isfinite(s.a[i][k]))
        throw InstabilityError("non-finite displacement or acceleration at step " +
                                   std::to_string(s.step),
                               s.step);
}

Vec3 ExplicitDynamics::reaction_force(const DynamicState& s, const std::string& node_set,
                                      BoundaryMode mode) const {
  const double load = mode == BoundaryMode::prescribed ? 1.0 : 0.0;
  Vec3 f{0.0, 0.0, 0.0};
  const auto it = set_dofs_.find(node_set);
  if (it == set_dofs_.end()) {
    mesh_->node_set(node_set);  // rejects unknown names
    return f;
  }
  for (std::size_t dof : it->second) {
    const std::size_t node = dof / 3, k = dof % 3;
    f[k] += s.f_int[node][k] + mass_[node] * (s.a[node][k] + alpha_ * s.v[node][k]) -
            load * body_force_[node][k];
  }
  return f;
}

// --- Histories -------------------------------------------------------------

const ReactionSeries& History::reaction(const std::string& node_set) const {
  for (const auto& r : reactions)
    if (r.node_set == node_set) return r;
  throw ValidationError("history has no reaction series for set '" + node_set + "'");
}

std::size_t step_count(double total_time, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  const double n = std::round(total_time / dt);
  if (n < 1.0) throw ValidationError("time horizon is shorter than one step");
  return static_cast<std::size_t>(n);
}

HistoryRecorder::HistoryRecorder(const OutputRequest& request, double dt, std::size_t steps,
                                 const std::vector<std::string>& reaction_sets)
    : request_(request) {
  if (request_.force_stride == 0) throw ValidationError("force_stride must be at least 1");
  history_.dt = dt;
  history_.steps = steps;
  for (double t : request_.snapshot_times) {
    if (!(t >= 0.0)) throw ValidationError("snapshot times must be non-negative");
    const auto s = static_cast<std::size_t>(std::llround(t / dt));
    if (s > steps) throw ValidationError("snapshot time " + std::to_string(t) + " is past the horizon");
    if (!snapshot_steps_.empty() && s <= snapshot_steps_.back())
      throw ValidationError("snapshot times must map to strictly increasing steps");
    snapshot_steps_.push_back(s);
  }
  for (const auto& name : reaction_sets) history_.reactions.push_back({name, {}, {}});
}

void HistoryRecorder::observe(const DynamicState& s, const ExplicitDynamics& dyn,
                              BoundaryMode mode) {
  if (next_snapshot_ < snapshot_steps_.size() && snapshot_steps_[next_snapshot_] == s.step) {
    Snapshot snap;
    snap.step = s.step;
    snap.time = s.time;
    if (request_.keep_nodal) {
      snap.u = s.u;
      snap.a = s.a;
    }
    snap.d = s.gauss.d;
    if (request_.keep_strain) snap.eps = s.gauss.eps;
    snap.sigma = s.gauss.sigma;
    history_.snapshots.push_back(std::move(snap));
    ++next_snapshot_;
  }
  if (s.step % request_.force_stride == 0)
    for (auto& r : history_.reactions) {
      r.time.push_back(s.time);
      r.force.push_back(dyn.reaction_force(s, r.node_set, mode));
    }
}

History HistoryRecorder::finish() { return std::move(history_); }

History run_deterministic(const Problem& problem, double xi, double dt,
                          const OutputRequest& outputs, Execution exec,
                          const StepObserver& observer) {
  problem.validate();
  ExplicitDynamics dyn(problem.mesh, problem.loads, problem.material.rho, exec,
                       problem.mass_damping);
  DamageConstitutive law(problem.material, xi, exec);
  const std::size_t steps = step_count(problem.loads.total_time, dt);
  HistoryRecorder recorder(outputs, dt, steps, dyn.reaction_sets());

  DynamicState state = dyn.initial_state(law, dt, BoundaryMode::prescribed);
  recorder.observe(state, dyn);
  if (observer) observer(state);
  for (std::size_t n = 0; n < steps; ++n) {
    dyn.step(state, dt, law, BoundaryMode::prescribed);
    recorder.observe(state, dyn);
    if (observer) observer(state);
  }
  return recorder.finish();
}

}  // namespace tsdm
