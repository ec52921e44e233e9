#include <benchmark/benchmark.h>

#include "tsdm/config.hpp"
#include "tsdm/kernels.hpp"
#include "tsdm/solver.hpp"

using namespace tsdm;

namespace {

// The 646-element double-notch specimen halfway through its ramp.
struct Fixture {
  Problem problem;
  ElementQuadrature q;
  std::vector<Vec3> u;
  std::vector<Voigt> sigma;
  double dt;

  Fixture() {
    const RunConfig c = make_config({{"problem", "double_notch"}});
    problem = c.build_problem();
    q = ElementQuadrature::build(problem.mesh);
    dt = c.time_step(problem.mesh);
    u.resize(problem.mesh.node_count());
    for (std::size_t n = 0; n < u.size(); ++n) {
      const Vec3& x = problem.mesh.nodes[n];
      u[n] = {-1e-3 * x[0], 0.05 * x[1], -1e-3 * x[2]};
    }
    const Matrix6 E = stiffness_voigt(problem.material.lambda, problem.material.mu);
    std::vector<Voigt> eps(problem.mesh.gauss_count());
    kernels::serial::compute_strains(problem.mesh, q, u, eps);
    sigma.resize(eps.size());
    for (std::size_t g = 0; g < eps.size(); ++g) sigma[g] = E * eps[g];
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::openmp;
}

void BM_Strains(benchmark::State& state) {
  const Fixture& f = fixture();
  ForceAssembler a(f.problem.mesh, f.q, mode(state));
  std::vector<Voigt> eps(f.problem.mesh.gauss_count());
  for (auto _ : state) {
    a.strains(f.u, eps);
    benchmark::DoNotOptimize(eps.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(eps.size()));
}

void BM_InternalForce(benchmark::State& state) {
  const Fixture& f = fixture();
  ForceAssembler a(f.problem.mesh, f.q, mode(state));
  std::vector<Vec3> force(f.problem.mesh.node_count());
  for (auto _ : state) {
    a.internal_force(f.sigma, force);
    benchmark::DoNotOptimize(force.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.problem.mesh.element_count()));
}

void BM_Step(benchmark::State& state) {
  const Fixture& f = fixture();
  const Execution exec = mode(state);
  ExplicitDynamics dyn(f.problem.mesh, f.problem.loads, f.problem.material.rho, exec,
                       f.problem.mass_damping);
  DamageConstitutive law(f.problem.material, 0.0, exec);
  DynamicState s = dyn.initial_state(law, f.dt, BoundaryMode::prescribed);
  for (auto _ : state) {
    dyn.step(s, f.dt, law, BoundaryMode::prescribed);
    benchmark::DoNotOptimize(s.u.data());
  }
}

}  // namespace

BENCHMARK(BM_Strains)->ArgName("openmp")->Arg(0)->Arg(1);
BENCHMARK(BM_InternalForce)->ArgName("openmp")->Arg(0)->Arg(1);
BENCHMARK(BM_Step)->ArgName("openmp")->Arg(0)->Arg(1);

BENCHMARK_MAIN();
