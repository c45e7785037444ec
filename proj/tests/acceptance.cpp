// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the exit code is the number of failures. Run with no arguments for
// all criteria or with a list of criterion numbers (dependencies of 8 and 10
// are gathered on demand when 6/7 were not run).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ihom/homogenization.hpp"
#include "ihom/io.hpp"
#include "ihom/multigrid.hpp"
#include "ihom/objective.hpp"
#include "ihom/oc.hpp"
#include "ihom/parallel.hpp"
#include "ihom/runner.hpp"
#include "oracles.hpp"

using namespace ihom;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-10;
  o.max_cycles = 300;
  return o;
}

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Invariant statistics accumulated over the long optimization runs of
// criteria 6 and 7, evaluated by criterion 8.
struct InvariantStats {
  double worst_volume_excess = -1e300;  // mean(rho) - V after updates
  double worst_bound_violation = -1e300;
  double worst_step_excess = -1e300;  // |drho|_inf - step limit
  long iterations = 0;

  void observe(const RunConfig& cfg, const DensityField& prev, const DensityField& next,
               const IterationRecord& rec) {
    (void)rec;
    double mean = 0.0, bound = -1e300, step = -1e300;
    for (std::int64_t i = 0; i < next.size(); ++i) {
      mean += next[i];
      bound = std::max(bound, std::max(kRhoMin - next[i], next[i] - 1.0));
      step = std::max(step, std::abs(next[i] - prev[i]) - cfg.step);
    }
    mean /= double(next.size());
    worst_volume_excess = std::max(worst_volume_excess, mean - cfg.vol);
    worst_bound_violation = std::max(worst_bound_violation, bound);
    worst_step_excess = std::max(worst_step_excess, step);
    ++iterations;
  }
};

InvariantStats g_stats;
std::map<std::uint64_t, double> g_bulk_final;  // seed -> final objective (criterion 6)
bool g_have_runs = false;

RunConfig hs_run_config(Objective obj, std::uint64_t seed) {
  RunConfig cfg;
  cfg.reso = 32;
  cfg.vol = 0.3;
  cfg.obj = obj;
  cfg.init = InitKind::trig;
  cfg.basis_n = 2;
  cfg.seed = seed;
  cfg.precision = Precision::all_double;
  return cfg;
}

OptimizationReport run_with_stats(const RunConfig& cfg) {
  return run_optimization(cfg, [&](int, const DensityField& prev, const DensityField& next,
                                   const Matrix6&, const IterationRecord& rec) {
    g_stats.observe(cfg, prev, next, rec);
    return true;
  });
}

// --- criterion 1 ---------------------------------------------------------

bool criterion1(std::string& detail) {
  const auto t0 = Clock::now();
  Homogenizer<double> hom({16, 16, 16}, BaseMaterial(1e6, 0.3), 3.0, tight());
  hom.set_density(DensityField({16, 16, 16}, 1.0));
  if (!hom.solve_cell_problems().converged) {
    detail = "cell problems did not converge";
    return false;
  }
  const Matrix6 c = hom.effective_tensor().c;
  const double bulk = bulk_objective().eval(c);
  const double elapsed = seconds_since(t0);

  const struct {
    int i, j;
    double expect;
  } entries[] = {{0, 0, 1346153.846153846}, {0, 1, 576923.0769230769}, {3, 3, 384615.3846153846}};
  bool ok = true;
  for (const auto& e : entries)
    ok = ok && std::abs(c(e.i, e.j) - e.expect) <= 1e-6 * std::abs(e.expect);
  ok = ok && std::abs(bulk - (-833333.3333333333)) <= 1e-3;
  ok = ok && elapsed < 10.0;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "C00=%.2f C01=%.2f C33=%.2f bulk=%.4f in %.2fs (caps 1e-6 rel, 1e-3, 10s)",
                c(0, 0), c(0, 1), c(3, 3), bulk, elapsed);
  detail = buf;
  return ok;
}

// --- criterion 2 ---------------------------------------------------------

bool criterion2(std::string& detail) {
  double worst = 0.0;
  for (const int n : {4, 6, 8}) {
    for (const std::uint64_t seed : {11ull, 12ull}) {
      const IVec3 reso{n, n, n};
      const auto rho = oracle::random_density(reso, seed);
      Homogenizer<double> hom(reso, BaseMaterial(1e6, 0.3), 3.0, tight());
      hom.set_density(rho);
      if (!hom.solve_cell_problems().converged) {
        detail = "tight solve failed";
        return false;
      }
      const Matrix6 c = hom.effective_tensor().c;
      const Matrix6 cref = oracle::homogenized_tensor(GridLevel(reso), rho, 3.0,
                                                      BaseMaterial(1e6, 0.3));
      const double scale = cref.cwiseAbs().maxCoeff();
      for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j)
          worst = std::max(worst, std::abs(c(i, j) - cref(i, j)) / scale);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst relative entry error %.3g (cap 1e-6)", worst);
  detail = buf;
  return worst < 1e-6;
}

// --- criterion 3 ---------------------------------------------------------

bool criterion3(std::string& detail) {
  const IVec3 reso{6, 6, 6};
  const BaseMaterial mat(1e6, 0.3);
  const auto rho = oracle::random_density(reso, 299, 0.35, 0.65);

  const Expr objectives[] = {bulk_objective(), shear_objective(), npr_log(0.6, -1e-3, 0.5)};
  const char* names[] = {"bulk", "shear", "npr-log"};
  double worst_fraction = 1.0;
  std::string parts;

  for (int o = 0; o < 3; ++o) {
    const Expr& obj = objectives[o];
    // the expression carries the SIMP power, so the homogenizer runs with
    // exponent 1, matching the optimization loop
    auto evaluate = [&](const DensityField& design) {
      DensityExpr expr(2.0, FilterKernel::linear, 3.0);
      const DensityField phys = expr.eval(design);
      Homogenizer<double> hom(reso, mat, 1.0, tight());
      hom.set_density(phys);
      hom.solve_cell_problems();
      return obj.eval(hom.effective_tensor().c);
    };

    // analytic chain gradient
    DensityExpr expr(2.0, FilterKernel::linear, 3.0);
    const DensityField phys = expr.eval(rho);
    Homogenizer<double> hom(reso, mat, 1.0, tight());
    hom.set_density(phys);
    hom.solve_cell_problems();
    const Matrix6 seed = obj.backward(1.0, hom.effective_tensor().c);
    const DensityField gphys = hom.tensor_sensitivity(seed);
    const std::vector<double> grad = expr.backward(gphys.v);

    const DensityField fd = oracle::finite_difference(rho, 1e-4, evaluate);
    double fdmax = 0.0;
    for (const double x : fd.v) fdmax = std::max(fdmax, std::abs(x));
    std::int64_t good = 0;
    for (std::int64_t i = 0; i < rho.size(); ++i) {
      const double denom = std::max(std::abs(fd[i]), 1e-6 * fdmax);
      if (std::abs(grad[std::size_t(i)] - fd[i]) / denom < 1e-3) ++good;
    }
    const double fraction = double(good) / double(rho.size());
    worst_fraction = std::min(worst_fraction, fraction);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s %.1f%% ", names[o], 100.0 * fraction);
    parts += buf;
  }
  detail = parts + "(floor 99%)";
  return worst_fraction >= 0.99;
}

// --- criterion 4 ---------------------------------------------------------

Eigen::MatrixXd stencil_matrix(const Level<double>& lev) {
  const GridLevel& g = lev.grid;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * g.vertex_count(), 3 * g.vertex_count());
  for (std::int64_t loc = 0; loc < g.vertex_count(); ++loc) {
    const IVec3 v = vertex_at(loc, g);
    for (int n = 0; n < 27; ++n) {
      const IVec3 t = neighbor_offset(n);
      const IVec3 w = wrap_vertex({v[0] + t[0], v[1] + t[1], v[2] + t[2]}, g);
      const std::int64_t wloc = color_block_location(w, g);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          a(3 * loc + r, 3 * wloc + c) +=
              lev.stencil[std::size_t(243 * loc + 9 * n + 3 * r + c)];
    }
  }
  return a;
}

bool criterion4(std::string& detail) {
  const BaseMaterial mat(1e6, 0.3);
  // Galerkin identity on 16^3 for both coarse levels
  Hierarchy<double> h(GridLevel({16, 16, 16}), mat, 3.0);
  const auto rho = oracle::random_density({16, 16, 16}, 401);
  h.set_density(rho);

  const auto ks = ElementStiffness::from_material(mat);
  const auto k0 = oracle::global_stiffness(h.level(0).grid, rho, 3.0, ks.k0);
  const auto i01 = oracle::interpolation_matrix(h.level(0).grid, h.level(1).grid);
  const Eigen::MatrixXd k1 = stencil_matrix(h.level(1));
  const double gal1 = (k1 - Eigen::MatrixXd(i01.transpose() * k0 * i01)).norm() /
                      Eigen::MatrixXd(i01.transpose() * k0 * i01).norm();
  const auto i12 = oracle::interpolation_matrix(h.level(1).grid, h.level(2).grid);
  const Eigen::MatrixXd rk1i = i12.transpose() * k1 * i12;
  const double gal2 = (stencil_matrix(h.level(2)) - rk1i).norm() / rk1i.norm();

  // transfer adjointness
  const NodalField r = oracle::random_nodal(h.level(0).grid, 403);
  const NodalField v = oracle::random_nodal(h.level(1).grid, 405);
  NodalField rr(h.level(1).grid);
  restrict_residual_field(r, rr);
  NodalField iv(h.level(0).grid);
  prolong_add_field(v, iv);
  const double adj =
      std::abs(field_dot(rr, v) - field_dot(r, iv)) / std::abs(field_dot(r, iv));

  // 32^3 macro-strain solves within 20 V-cycles to 1e-2: uniform density is
  // the literal contract (its macro load vanishes, so it converges
  // immediately); a seeded trig field and a rough random field make the
  // bound meaningful.
  int worst_cycles = 0;
  bool all_converged = true;
  SolverOptions opts;
  opts.tol = 1e-2;
  opts.max_cycles = 20;
  const IVec3 reso{32, 32, 32};
  std::vector<DensityField> densities;
  densities.push_back(DensityField(reso, 1.0));
  TrigInitSpec spec;
  spec.basis_n = 2;
  spec.seed = 424;
  spec.volume = 0.3;
  densities.push_back(init_trig(spec, reso).field);
  densities.push_back(oracle::random_density(reso, 427, 0.1, 1.0));
  for (const auto& d : densities) {
    Hierarchy<double> h32(GridLevel(reso), mat, 3.0);
    h32.set_density(d);
    Level<double>& l0 = h32.level(0);
    NodalField f(l0.grid);
    macro_force_kernel<double>(l0.grid, h32.tables(), l0.coeff.data(), 0, f.a.data());
    NodalField u(l0.grid);
    const SolveStats stats = h32.solve(f, u, opts);
    all_converged = all_converged && stats.converged;
    worst_cycles = std::max(worst_cycles, stats.cycles);
  }

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "galerkin %.2g/%.2g (cap 1e-10), adjoint %.2g (cap 1e-12), "
                "macro solves <= %d cycles (cap 20)",
                gal1, gal2, adj, worst_cycles);
  detail = buf;
  return gal1 < 1e-10 && gal2 < 1e-10 && adj < 1e-12 && all_converged && worst_cycles <= 20;
}

// --- criterion 5 ---------------------------------------------------------

bool criterion5(std::string& detail) {
  // Material isolated from every corner: a centered ball.
  const int n = 32;
  const IVec3 reso{n, n, n};
  DensityField ball(reso, kRhoMin);
  const GridLevel g(reso);
  for (std::int64_t i = 0; i < ball.size(); ++i) {
    const IVec3 e = element_at(i, g);
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double x = (e[k] + 0.5) / n - 0.5;
      d2 += x * x;
    }
    if (d2 < 0.3 * 0.3) ball[i] = 1.0;
  }
  const std::string path = temp_file("ihom_acceptance_ball.raw");
  export_density(ball, path, DensityFormat::raw);

  RunConfig cfg;
  cfg.reso = n;
  cfg.vol = field_mean(ball);
  cfg.obj = Objective::bulk;
  cfg.init = InitKind::file;
  cfg.init_file = path;
  cfg.sym = Symmetry::none;
  cfg.max_iter = 100;
  cfg.precision = Precision::all_double;

  const auto report = run_optimization(cfg);
  std::remove(path.c_str());
  if (report.solver_failed) {
    detail = "solver failure (residual blow-up)";
    return false;
  }
  double first = report.records.front().residual;
  double worst = 0.0;
  bool finite = true;
  for (const auto& r : report.records) {
    worst = std::max(worst, r.residual);
    finite = finite && std::isfinite(r.objective) && std::isfinite(r.residual);
  }
  const double growth = worst / std::max(first, cfg.tol);
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "%zu iterations, residual growth factor %.3g (cap 1e3), %s",
                report.records.size(), growth,
                report.converged ? "converged early" : "ran to the cap");
  detail = buf;
  return finite && growth <= 1e3 &&
         (report.converged || int(report.records.size()) == cfg.max_iter);
}

// --- criterion 6 ---------------------------------------------------------

bool criterion6(std::string& detail) {
  const auto t0 = Clock::now();
  const double ku = hs_bulk_bound(1e6, 0.3, 0.3);
  const double gu = hs_shear_bound(1e6, 0.3, 0.3);

  double best_bulk = 0.0, worst_bulk = 0.0;
  bool all_bulk_bounded = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RunConfig cfg = hs_run_config(Objective::bulk, seed);
    const auto report = run_with_stats(cfg);
    if (report.solver_failed) {
      detail = "solver failure in bulk run";
      return false;
    }
    const double bulk = -report.records.back().objective;
    g_bulk_final[seed] = report.records.back().objective;
    best_bulk = std::max(best_bulk, bulk);
    worst_bulk = std::max(worst_bulk, bulk);
    all_bulk_bounded = all_bulk_bounded && bulk <= 1.02 * ku;
  }

  double best_shear = 0.0;
  bool all_shear_bounded = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RunConfig cfg = hs_run_config(Objective::shear, seed);
    const auto report = run_with_stats(cfg);
    if (report.solver_failed) {
      detail = "solver failure in shear run";
      return false;
    }
    const double shear = -report.records.back().objective;
    best_shear = std::max(best_shear, shear);
    all_shear_bounded = all_shear_bounded && shear <= 1.02 * gu;
  }
  g_have_runs = true;

  const double elapsed = seconds_since(t0);
  const int hw = worker_count();
  const double budget = hw >= 8 ? 3600.0 : 3600.0 * 8.0 / hw;

  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "best bulk %.0f (floor %.0f, cap %.0f), best shear %.0f (floor %.0f, cap %.0f), "
                "%.0fs on %d workers (budget %.0fs)",
                best_bulk, 0.55 * ku, 1.02 * ku, best_shear, 0.55 * gu, 1.02 * gu, elapsed,
                hw, budget);
  detail = buf;
  return all_bulk_bounded && best_bulk >= 0.55 * ku && all_shear_bounded &&
         best_shear >= 0.55 * gu && elapsed < budget;
}

// --- criterion 7 ---------------------------------------------------------

bool criterion7(std::string& detail) {
  double best = 1.0;
  for (const std::uint64_t seed : {0ull, 1ull, 2ull}) {
    RunConfig cfg;
    cfg.reso = 64;
    cfg.vol = 0.2;
    cfg.obj = Objective::npr_log;
    cfg.sym = Symmetry::reflect6;
    cfg.init = InitKind::trig;
    cfg.basis_n = 2;
    cfg.seed = seed;
    cfg.max_iter = 300;

    double run_best = 1.0;
    const auto report = run_optimization(
        cfg, [&](int, const DensityField& prev, const DensityField& next,
                 const Matrix6& tensor, const IterationRecord& rec) {
          g_stats.observe(cfg, prev, next, rec);
          run_best = std::min(run_best, poisson_ratio_report(tensor));
          return run_best > -0.2;  // stop once the target is reached
        });
    if (!report.solver_failed) run_best = std::min(run_best, report.poisson_est);
    best = std::min(best, run_best);
    g_have_runs = true;
    if (best <= -0.2) break;  // success; remaining seeds unnecessary
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "best poisson estimate %.3f (target <= -0.2)", best);
  detail = buf;
  return best <= -0.2;
}

// --- criterion 8 ---------------------------------------------------------

bool criterion8(std::string& detail) {
  if (!g_have_runs) {
    // gather statistics from a short representative run when 6/7 were skipped
    RunConfig cfg = hs_run_config(Objective::bulk, 3);
    cfg.reso = 16;
    cfg.max_iter = 20;
    run_with_stats(cfg);
  }
  const bool volume_ok = g_stats.worst_volume_excess <= 1e-6;
  const bool bounds_ok = g_stats.worst_bound_violation <= 0.0;
  const bool step_ok = g_stats.worst_step_excess <= 1e-12;

  // stopping rule on synthetic traces
  bool rule_ok = true;
  {
    ConvergeChecker c;
    c.update(1.0);
    c.update(1.0);
    c.update(1.0);
    rule_ok = rule_ok && !c.update(1.0 * (1.0 + 6e-4));  // broken run resets
    ConvergeChecker flat;
    flat.update(1.0);
    flat.update(1.0);
    flat.update(1.0);
    rule_ok = rule_ok && flat.update(1.0);
    ConvergeChecker runs;
    double v = 1.0;
    runs.update(v);
    const double rel[] = {4e-4, 4e-4, 6e-4, 4e-4, 4e-4, 4e-4};
    std::vector<bool> fired;
    for (const double r : rel) {
      v *= 1.0 + r;
      fired.push_back(runs.update(v));
    }
    rule_ok = rule_ok && fired == std::vector<bool>{false, false, false, false, false, true};
    ConvergeChecker alt;
    double f = 10.0;
    for (int i = 0; i < 20; ++i) {
      f = (i % 2) ? 11.0 : 10.0;
      rule_ok = rule_ok && !alt.update(f);
    }
  }

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "over %ld logged updates: volume excess %.2g (cap 1e-6), bound violation %.2g "
                "(cap 0), step excess %.2g (cap ~0), stop rule %s",
                g_stats.iterations, g_stats.worst_volume_excess,
                g_stats.worst_bound_violation, g_stats.worst_step_excess,
                rule_ok ? "exact" : "wrong");
  detail = buf;
  return volume_ok && bounds_ok && step_ok && rule_ok;
}

// --- criterion 9 ---------------------------------------------------------

bool criterion9(std::string& detail) {
  RunConfig cfg;
  cfg.reso = 16;
  cfg.vol = 0.3;
  cfg.obj = Objective::bulk;
  cfg.init = InitKind::trig;
  cfg.seed = 7;
  cfg.max_iter = 8;
  cfg.precision = Precision::all_double;

  std::vector<std::string> blobs;
  for (const int workers : {1, 4, 8}) {
    cfg.workers = workers;
    const auto report = run_optimization(cfg);
    const std::string path = temp_file("ihom_acceptance_det.raw");
    export_density(report.density, path, DensityFormat::raw);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    blobs.push_back(ss.str());
    std::remove(path.c_str());
  }
  set_worker_count(1);
  const bool ok = blobs[0] == blobs[1] && blobs[1] == blobs[2];
  detail = ok ? "rho.raw bit-identical across 1, 4, 8 workers"
              : "rho.raw differs across worker counts";
  return ok;
}

// --- criterion 10 --------------------------------------------------------

bool criterion10(std::string& detail) {
  const std::uint64_t seed = 1;
  double f_double;
  if (const auto it = g_bulk_final.find(seed); it != g_bulk_final.end()) {
    f_double = it->second;
  } else {
    const auto report = run_optimization(hs_run_config(Objective::bulk, seed));
    if (report.solver_failed) {
      detail = "double-mode run failed";
      return false;
    }
    f_double = report.records.back().objective;
  }
  RunConfig cfg = hs_run_config(Objective::bulk, seed);
  cfg.precision = Precision::mixed;
  const auto mixed = run_optimization(cfg);
  if (mixed.solver_failed) {
    detail = "mixed-mode run failed";
    return false;
  }
  const double f_mixed = mixed.records.back().objective;
  const double rel = std::abs(f_mixed - f_double) / std::abs(f_double);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "bulk objective double %.1f vs mixed %.1f, gap %.3f%% (cap 1%%)",
                f_double, f_mixed, 100.0 * rel);
  detail = buf;
  return rel <= 0.01;
}

struct Criterion {
  int id;
  const char* name;
  bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "analytic full-solid tensor", criterion1},
    {2, "sparse-FEM oracle equivalence", criterion2},
    {3, "gradient correctness vs finite differences", criterion3},
    {4, "multigrid contracts", criterion4},
    {5, "null-space robustness (isolated material)", criterion5},
    {6, "Hashin-Shtrikman bound consistency", criterion6},
    {7, "negative Poisson's ratio", criterion7},
    {8, "constraint and update invariants", criterion8},
    {9, "determinism across worker counts", criterion9},
    {10, "mixed-precision sanity", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
