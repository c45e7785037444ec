#pragma once

#include <functional>
#include <vector>

#include "ihom/config.hpp"
#include "ihom/homogenization.hpp"
#include "ihom/objective.hpp"

namespace ihom {

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double volume = 0.0;
  int cycles = 0;
  double residual = 0.0;
  double ms = 0.0;
};

struct OptimizationReport {
  std::vector<IterationRecord> records;
  std::vector<Matrix6> tensors;  // C^H per logged iteration
  Matrix6 tensor = Matrix6::Zero();
  DensityField density;  // final design density
  double poisson_est = 0.0;
  bool converged = false;
  bool solver_failed = false;
  bool init_fallback = false;
  bool oc_warning = false;
};

// Called after every density update with the previous and the new design
// field plus the tensor behind the logged objective; used for invariant
// monitoring. Returning false stops the optimization after this iteration.
using IterObserver =
    std::function<bool(int iter, const DensityField& prev, const DensityField& next,
                       const Matrix6& tensor, const IterationRecord& rec)>;

OptimizationReport run_optimization(const RunConfig& cfg, const IterObserver& obs = {});

// Writes rho.raw / rho.meta.json / rho.vti / Ch.txt / log.csv /
// config.resolved.json into cfg.out_dir.
void write_report(const OptimizationReport& report, const RunConfig& cfg);

// Solid-void Hashin-Shtrikman upper bounds on bulk and shear modulus at
// volume fraction f.
double hs_bulk_bound(double youngs, double poisson, double f);
double hs_shear_bound(double youngs, double poisson, double f);

Expr make_objective(const RunConfig& cfg, int iter);

}  // namespace ihom
