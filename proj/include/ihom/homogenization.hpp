#pragma once

#include <array>

#include "ihom/multigrid.hpp"

namespace ihom {

struct ElasticTensor {
  Matrix6 c = Matrix6::Zero();
};

struct CellSolveStats {
  int total_cycles = 0;
  double worst_residual = 0.0;
  int worst_load = -1;
  bool converged = true;
};

// Drives the six periodic cell problems over one hierarchy and evaluates the
// homogenized elastic tensor and its per-element density sensitivities from
// the stored displacement set. Displacements persist between set_density
// calls and warm-start the next solve. With T = float the displacements are
// read back through a single-precision snapshot during evaluation;
// accumulation is always double.
template <typename T>
class Homogenizer {
 public:
  Homogenizer(IVec3 reso, const BaseMaterial& mat, double penal, const SolverOptions& opts);

  void set_density(const DensityField& rho_phys);
  CellSolveStats solve_cell_problems();

  ElasticTensor effective_tensor() const;
  // Chain rule from a symmetric d(objective)/dC seed to d(objective)/d(rho_phys).
  DensityField tensor_sensitivity(const Matrix6& seed) const;

  NodalField& displacement(int i) { return u_[std::size_t(i)]; }
  const NodalField& displacement(int i) const { return u_[std::size_t(i)]; }
  Hierarchy<T>& hierarchy() { return hier_; }
  SolverOptions& options() { return opts_; }
  const DensityField& density() const { return rho_; }

 private:
  Hierarchy<T> hier_;
  SolverOptions opts_;
  double penal_;
  DensityField rho_;
  std::array<NodalField, 6> u_;
  bool density_set_ = false;
};

using HomogenizerF = Homogenizer<float>;
using HomogenizerD = Homogenizer<double>;

}  // namespace ihom
