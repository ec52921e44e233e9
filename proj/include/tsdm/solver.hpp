#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tsdm/kernels.hpp"
#include "tsdm/material.hpp"
#include "tsdm/mesh.hpp"
#include "tsdm/types.hpp"

namespace tsdm {

struct Problem {
  Mesh mesh;
  LoadCase loads;
  MaterialParams material;
  /// Mass-proportional damping coefficient alpha (1/s): a force -alpha m v
  /// on every free DOF. Zero gives the undamped balance equation.
  double mass_damping = 0.0;

  void validate() const;
};

/// Per-Gauss-point fields of one expansion order (or one realization).
struct GaussFields {
  std::vector<double> d;
  std::vector<Voigt> eps;
  std::vector<Voigt> sigma;

  void resize(std::size_t n) {
    d.assign(n, 0.0);
    eps.assign(n, Voigt{});
    sigma.assign(n, Voigt{});
  }
};

struct DynamicState {
  std::vector<Vec3> u, v, a;
  std::vector<Vec3> f_int;  // internal force at the current step
  GaussFields gauss;
  double time = 0.0;
  std::size_t step = 0;
};

/// Material update at every Gauss point.
class Constitutive {
 public:
  virtual ~Constitutive() = default;
  /// Stress at step 0 from the initial strain and damage.
  virtual void initialize(std::span<const Voigt> eps, GaussFields& fields) = 0;
  /// Advances damage from the step-n state held in `fields`, then evaluates
  /// the step-(n+1) stress for `eps_new`. `step_new` is n + 1.
  virtual void advance(std::size_t step_new, double dt, std::span<const Voigt> eps_new,
                       GaussFields& fields) = 0;
};

/// Damage law for one realization with stiffness (1 + xi) E0.
class DamageConstitutive final : public Constitutive {
 public:
  DamageConstitutive(const MaterialParams& params, double xi, Execution exec);
  void initialize(std::span<const Voigt> eps, GaussFields& fields) override;
  void advance(std::size_t step_new, double dt, std::span<const Voigt> eps_new,
               GaussFields& fields) override;
  const Matrix6& stiffness() const { return stiffness_; }

 private:
  Matrix6 stiffness_;
  double eta_;
  Execution exec_;
};

enum class BoundaryMode {
  prescribed,   // ramp values and body force of the load case
  homogeneous,  // zero on every constrained DOF, no body force
};

/// Central-difference (velocity Verlet) integrator with lumped mass.
class ExplicitDynamics {
 public:
  ExplicitDynamics(const Mesh& mesh, const LoadCase& loads, double rho,
                   Execution exec = Execution::serial, double mass_damping = 0.0);
  ExplicitDynamics(const ExplicitDynamics&) = delete;
  ExplicitDynamics& operator=(const ExplicitDynamics&) = delete;

  const Mesh& mesh() const { return *mesh_; }
  const ElementQuadrature& quadrature() const { return quadrature_; }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<std::string>& reaction_sets() const { return reaction_sets_; }
  bool is_constrained(std::size_t dof) const { return constrained_[dof] >= 0; }

  DynamicState initial_state(Constitutive& law, double dt, BoundaryMode mode);
  void step(DynamicState& state, double dt, Constitutive& law, BoundaryMode mode);

  /// Internal, inertial and damping force, minus body force, summed over the
  /// DOFs constrained by the set's own ramps (zero for a set without ramps).
  /// The homogeneous mode has no body force.
  Vec3 reaction_force(const DynamicState& state, const std::string& node_set,
                      BoundaryMode mode = BoundaryMode::prescribed) const;

 private:
  double prescribed(std::size_t dof, double t, BoundaryMode mode) const;
  void accelerations(DynamicState& state, double dt, BoundaryMode mode) const;

  const Mesh* mesh_;
  const LoadCase* loads_;
  ElementQuadrature quadrature_;
  ForceAssembler assembler_;
  std::vector<double> mass_;       // per node
  std::vector<Vec3> body_force_;   // consistent nodal body force
  std::vector<int> constrained_;   // per dof: ramp index or -1
  std::vector<std::size_t> constrained_dofs_;
  std::vector<std::string> reaction_sets_;
  std::map<std::string, std::vector<std::size_t>> set_dofs_;
  std::vector<Voigt> eps_scratch_;
  double alpha_;
};

/// Row-sum lumped mass per node; valid for every DOF axis.
std::vector<double> lumped_mass(const Mesh& mesh, double rho);

/// Assembles sum over Gauss points of B^T sigma detJ w (serial reference).
std::vector<Vec3> internal_force(const Mesh& mesh, const ElementQuadrature& q,
                                 std::span<const Voigt> sigma);

/// safety * min over elements of (shortest edge / sqrt(E / rho)).
double stable_timestep(const Mesh& mesh, const MaterialParams& params, double safety = 0.5);

double kinetic_energy(const DynamicState& state, const std::vector<double>& mass);
/// Sum over Gauss points of 1/2 eps . sigma detJ w.
double strain_energy(const GaussFields& fields, const ElementQuadrature& q);

// --- Histories -------------------------------------------------------------

struct OutputRequest {
  std::vector<double> snapshot_times;  // s; rounded to the nearest step
  std::size_t force_stride = 1;        // record reactions every n steps
  bool keep_strain = true;
  bool keep_nodal = true;              // u and a
};

struct Snapshot {
  std::size_t step = 0;
  double time = 0.0;
  std::vector<Vec3> u, a;
  std::vector<double> d;
  std::vector<Voigt> eps, sigma;
};

struct ReactionSeries {
  std::string node_set;
  std::vector<double> time;
  std::vector<Vec3> force;
};

struct History {
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<Snapshot> snapshots;
  std::vector<ReactionSeries> reactions;

  const ReactionSeries& reaction(const std::string& node_set) const;
};

std::size_t step_count(double total_time, double dt);

/// Records snapshots and reaction series while a run advances.
class HistoryRecorder {
 public:
  HistoryRecorder(const OutputRequest& request, double dt, std::size_t steps,
                  const std::vector<std::string>& reaction_sets);
  void observe(const DynamicState& state, const ExplicitDynamics& dynamics,
               BoundaryMode mode = BoundaryMode::prescribed);
  History finish();

 private:
  OutputRequest request_;
  std::vector<std::size_t> snapshot_steps_;
  std::size_t next_snapshot_ = 0;
  History history_;
};

using StepObserver = std::function<void(const DynamicState&)>;

/// One realization: stiffness (1 + xi) E0 with the standard damage law.
/// `observer`, when set, sees the completed state of every step.
History run_deterministic(const Problem& problem, double xi, double dt,
                          const OutputRequest& outputs, Execution exec = Execution::serial,
                          const StepObserver& observer = {});

}  // namespace tsdm
