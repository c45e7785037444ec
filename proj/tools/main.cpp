#include <cstdio>
#include <exception>
#include <string>

#include "ihom/parallel.hpp"
#include "ihom/runner.hpp"

namespace {

void usage() {
  std::puts(
      "ihom - inverse homogenization on periodic voxel grids\n"
      "\n"
      "usage: ihom [--config file.json] [--key value ...]\n"
      "\n"
      "  --reso N              cubic grid resolution (default 64)\n"
      "  --vol V               volume fraction in (0,1] (default 0.3)\n"
      "  --obj NAME            bulk | shear | npr-relaxed | npr-log\n"
      "  --beta B              npr-relaxed relaxation base (default 0.8)\n"
      "  --eta X --tau X --gamma X   npr-log parameters\n"
      "  --E X --nu X          base material (default 1e6, 0.3)\n"
      "  --penal P             SIMP exponent (default 3)\n"
      "  --filter-radius R     filter radius in elements (default 2)\n"
      "  --filter-placement P  density | sensitivity\n"
      "  --kernel K            spline4 | linear\n"
      "  --sym S               none | reflect3 | reflect6 | rotate3\n"
      "  --init I              constant | trig | file:<path>\n"
      "  --basis-n N           trig basis order (default 2)\n"
      "  --seed S              RNG seed for trig init\n"
      "  --max-iter N          iteration cap (default 300)\n"
      "  --step S --damp D     OC step limit and damping\n"
      "  --tol T               solver relative-residual target (default 1e-2)\n"
      "  --max-cycles N        V-cycle cap per solve (default 50)\n"
      "  --precision P         mixed | double\n"
      "  --workers N           worker threads (0 = runtime default)\n"
      "  --out DIR             output directory (default ./out)\n"
      "\n"
      "Outputs: rho.raw, rho.meta.json, rho.vti, Ch.txt, log.csv,\n"
      "config.resolved.json in the output directory.");
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--help" || a == "-h") {
      usage();
      return 0;
    }
  }
  try {
    const ihom::RunConfig cfg = ihom::parse_config(argc, argv);
    ihom::set_worker_count(cfg.workers);

    std::printf("grid %d^3  vol %.3f  obj %s  sym %s  precision %s  workers %d\n", cfg.reso,
                cfg.vol, ihom::objective_name(cfg.obj).c_str(),
                ihom::symmetry_name(cfg.sym).c_str(),
                cfg.precision == ihom::Precision::mixed ? "mixed" : "double",
                ihom::worker_count());

    const auto report = ihom::run_optimization(
        cfg, [](int iter, const ihom::DensityField&, const ihom::DensityField&,
                const ihom::Matrix6&, const ihom::IterationRecord& rec) {
          if (iter % 10 == 0)
            std::printf("iter %4d  f %.6g  vol %.4f  cycles %d  resid %.3g  %.0f ms\n",
                        rec.iter, rec.objective, rec.volume, rec.cycles, rec.residual, rec.ms);
          return true;
        });
    ihom::write_report(report, cfg);

    const auto& last = report.records.back();
    std::printf("%s after %zu iterations: f = %.8g, volume = %.5f, poisson estimate = %.4f\n",
                report.converged      ? "converged"
                : report.solver_failed ? "solver failure (partial report written)"
                                       : "stopped at max-iter",
                report.records.size(), last.objective, last.volume, report.poisson_est);
    if (report.init_fallback)
      std::puts("warning: trig init bisection fell back to a constant field");
    if (report.oc_warning) std::puts("warning: OC volume bisection hit its bracket");
    return report.solver_failed ? 2 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
