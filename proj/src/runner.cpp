#include "ihom/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "ihom/io.hpp"
#include "ihom/oc.hpp"
#include "ihom/parallel.hpp"

namespace ihom {

Expr make_objective(const RunConfig& cfg, int iter) {
  switch (cfg.obj) {
    case Objective::bulk: return bulk_objective();
    case Objective::shear: return shear_objective();
    case Objective::npr_relaxed: return npr_relaxed(cfg.beta, iter);
    case Objective::npr_log: return npr_log(cfg.eta, cfg.tau, cfg.gamma);
  }
  throw std::logic_error("unknown objective");
}

namespace {

DensityField initial_density(const RunConfig& cfg, bool& fallback) {
  const IVec3 reso{cfg.reso, cfg.reso, cfg.reso};
  switch (cfg.init) {
    case InitKind::constant: return init_constant(cfg.vol, reso);
    case InitKind::trig: {
      TrigInitSpec spec;
      spec.basis_n = cfg.basis_n;
      spec.seed = cfg.seed;
      spec.volume = cfg.vol;
      auto res = init_trig(spec, reso);
      fallback = res.fallback;
      return std::move(res.field);
    }
    case InitKind::file: {
      DensityField f = import_density_raw(cfg.init_file, reso);
      for (double& x : f.v) x = std::clamp(x, kRhoMin, 1.0);
      return f;
    }
  }
  throw std::logic_error("unknown init");
}

void clamp_bounds(DensityField& f) {
  parallel_for(f.size(), [&](std::int64_t i) { f[i] = std::clamp(f[i], kRhoMin, 1.0); });
}

template <typename T>
OptimizationReport run_impl(const RunConfig& cfg, const IterObserver& obs) {
  set_worker_count(cfg.workers);
  const IVec3 reso{cfg.reso, cfg.reso, cfg.reso};
  const BaseMaterial mat(cfg.youngs, cfg.poisson);
  SolverOptions sopts;
  sopts.tol = cfg.tol;
  sopts.max_cycles = cfg.max_cycles;
  // The density expression already applies the SIMP power, so the element
  // coefficient is its output as is: the homogenizer runs with exponent 1
  // and the chain rule through pow/conv lives in DensityExpr::backward.
  Homogenizer<T> hom(reso, mat, 1.0, sopts);

  OptimizationReport report;
  DensityField rho = initial_density(cfg, report.init_fallback);
  if (cfg.sym != Symmetry::none) {
    symmetrize(rho, cfg.sym);
    clamp_bounds(rho);
  }

  const bool density_filter =
      cfg.filter_placement == FilterPlacement::density && cfg.filter_radius >= 1.0;
  DensityExpr expr = density_filter
                         ? DensityExpr(cfg.filter_radius, cfg.kernel, cfg.penal)
                         : DensityExpr::pow_only(cfg.penal);

  OCConfig occfg;
  occfg.volume = cfg.vol;
  occfg.step_limit = cfg.step;
  occfg.damp = cfg.damp;
  ConvergeChecker conv;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const DensityField rho_phys = expr.eval(rho);
    hom.set_density(rho_phys);
    const CellSolveStats stats = hom.solve_cell_problems();
    const ElasticTensor ch = hom.effective_tensor();
    const Expr objective = make_objective(cfg, iter);
    const double fval = objective.eval(ch.c);

    IterationRecord rec;
    rec.iter = iter;
    rec.objective = fval;
    rec.volume = field_mean(rho);
    rec.cycles = stats.total_cycles;
    rec.residual = stats.worst_residual;
    rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                 .count();
    report.records.push_back(rec);
    report.tensors.push_back(ch.c);
    report.tensor = ch.c;
    report.poisson_est = poisson_ratio_report(ch.c);

    if (!stats.converged) {
      report.solver_failed = true;
      break;
    }
    if (conv.update(fval)) {
      report.converged = true;
      break;
    }
    if (iter + 1 == cfg.max_iter) break;

    const Matrix6 seed = objective.backward(1.0, ch.c);
    DensityField grad = hom.tensor_sensitivity(seed);
    DensityField grad_design(rho.n);
    grad_design.v = expr.backward(grad.v);
    if (cfg.filter_placement == FilterPlacement::sensitivity && cfg.filter_radius >= 1.0)
      grad_design = sensitivity_filter(grad_design, rho, cfg.filter_radius);
    symmetrize(grad_design.v, grad_design.n, cfg.sym);

    OCResult oc = oc_update(rho, grad_design, occfg);
    if (!oc.bisection_ok) report.oc_warning = true;
    DensityField prev = std::move(rho);
    rho = std::move(oc.rho);
    if (cfg.sym != Symmetry::none) {
      symmetrize(rho, cfg.sym);
      clamp_bounds(rho);
    }
    if (obs && !obs(iter, prev, rho, ch.c, rec)) break;
  }

  report.density = std::move(rho);
  return report;
}

}  // namespace

OptimizationReport run_optimization(const RunConfig& cfg, const IterObserver& obs) {
  if (cfg.precision == Precision::all_double) return run_impl<double>(cfg, obs);
  return run_impl<float>(cfg, obs);
}

void write_report(const OptimizationReport& report, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const auto path = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };

  export_density(report.density, path("rho.raw"), DensityFormat::raw);
  write_density_meta(report.density, path("rho.meta.json"), cfg.vol, cfg.seed);
  export_density(report.density, path("rho.vti"), DensityFormat::vti);
  export_tensor(report.tensor, path("Ch.txt"));

  std::ofstream log(path("log.csv"));
  log << "iter,objective,volume,cycles,residual,ms\n";
  char buf[160];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d,%.6g,%.3f\n", r.iter, r.objective,
                  r.volume, r.cycles, r.residual, r.ms);
    log << buf;
  }

  std::ofstream cfgout(path("config.resolved.json"));
  cfgout << config_to_json(cfg) << "\n";
}

double hs_bulk_bound(double youngs, double poisson, double f) {
  const double k = youngs / (3.0 * (1.0 - 2.0 * poisson));
  const double g = youngs / (2.0 * (1.0 + poisson));
  return 4.0 * f * g * k / (4.0 * g + 3.0 * (1.0 - f) * k);
}

double hs_shear_bound(double youngs, double poisson, double f) {
  const double k = youngs / (3.0 * (1.0 - 2.0 * poisson));
  const double g = youngs / (2.0 * (1.0 + poisson));
  const double q = (1.0 - f) * 6.0 * (k + 2.0 * g) / (5.0 * (3.0 * k + 4.0 * g));
  return f * g / (1.0 + q);
}

}  // namespace ihom
