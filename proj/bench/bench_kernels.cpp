// Timing comparison of the OpenMP kernels against their serial reference
// twins, plus the multigrid building blocks. Arguments: grid edge (default
// 48) and repetitions (default 3).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "ihom/fem.hpp"
#include "ihom/multigrid.hpp"
#include "ihom/parallel.hpp"

using namespace ihom;

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double time_ms(int reps, F&& body) {
  body();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) body();
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

DensityField random_density(IVec3 n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(kRhoMin, 1.0);
  DensityField f(n);
  for (double& x : f.v) x = dist(rng);
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 48;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const GridLevel g({n, n, n});
  const BaseMaterial mat(1e6, 0.3);
  const auto ks = ElementStiffness::from_material(mat);
  const StiffnessTables tab(ks);
  const auto rho = random_density(g.n, 1);

  std::vector<double> coeff(std::size_t(g.element_count()));
  for (std::int64_t i = 0; i < g.element_count(); ++i)
    coeff[std::size_t(i)] = std::pow(rho[i], 3.0);
  std::vector<float> coeff_f(coeff.begin(), coeff.end());

  NodalField u(g), y(g), f(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& x : u.a) x = dist(rng);
  for (double& x : f.a) x = dist(rng);

  std::printf("grid %d^3, %lld vertices, %d workers, %d reps\n", n,
              (long long)g.vertex_count(), worker_count(), reps);

  const double t_apply = time_ms(reps, [&] {
    apply_stiffness_kernel<double>(g, tab, coeff.data(), u.a.data(), y.a.data());
  });
  const double t_apply_f = time_ms(reps, [&] {
    apply_stiffness_kernel<float>(g, tab, coeff_f.data(), u.a.data(), y.a.data());
  });
  const double t_apply_ref = time_ms(1, [&] { ref::apply_stiffness(g, rho, 3.0, u, ks); });
  std::printf("stiffness apply    omp double %8.2f ms | omp mixed %8.2f ms | serial ref %8.2f ms\n",
              t_apply, t_apply_f, t_apply_ref);

  NodalField u2 = u;
  const double t_gs = time_ms(reps, [&] {
    gauss_seidel_kernel<double>(g, tab, coeff.data(), f.a.data(), u2.a.data());
  });
  NodalField u3 = u;
  const double t_gs_ref = time_ms(1, [&] { ref::gauss_seidel_sweep(g, rho, 3.0, f, u3, ks); });
  std::printf("gauss-seidel sweep omp double %8.2f ms |                     serial ref %8.2f ms\n",
              t_gs, t_gs_ref);

  const double t_force = time_ms(reps, [&] {
    macro_force_kernel<double>(g, tab, coeff.data(), 0, y.a.data());
  });
  const double t_force_ref =
      time_ms(1, [&] { ref::assemble_macro_force(g, rho, 3.0, 0, ks); });
  std::printf("macro force        omp double %8.2f ms |                     serial ref %8.2f ms\n",
              t_force, t_force_ref);

  if (g.can_coarsen()) {
    const GridLevel gc = g.coarsened();
    NodalField rc(gc);
    const double t_restrict = time_ms(reps, [&] { restrict_residual_field(y, rc); });
    NodalField uf(g);
    const double t_prolong = time_ms(reps, [&] { prolong_add_field(rc, uf); });
    std::printf("restrict %.2f ms | prolong %.2f ms\n", t_restrict, t_prolong);

    Hierarchy<double> h(g, mat, 3.0);
    const double t_setup = time_ms(1, [&] { h.set_density(rho); });
    h.level(0).f = f;
    remove_translations(h.level(0).f);
    SolverOptions opts;
    const double t_vcycle = time_ms(reps, [&] { h.v_cycle(opts); });
    std::printf("hierarchy rebuild %.2f ms | v-cycle %.2f ms\n", t_setup, t_vcycle);
  }
  return 0;
}
