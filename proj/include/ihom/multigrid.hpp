#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ihom/fem.hpp"

namespace ihom {

// Trilinear transfer between adjacent periodic levels. Restriction is the
// transpose of interpolation; both wrap at the boundary.
void restrict_residual_field(const NodalField& fine_r, NodalField& coarse_f);
void prolong_add_field(const NodalField& coarse_u, NodalField& fine_u);

// Remove the three rigid-translation components (per-axis mean).
void remove_translations(NodalField& f);

double field_norm(const NodalField& f);
double field_dot(const NodalField& a, const NodalField& b);

struct SolverOptions {
  double tol = 1e-2;
  int max_cycles = 50;
  int pre_sweeps = 1;
  int post_sweeps = 1;
};

struct SolveStats {
  int cycles = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// One level of the multigrid hierarchy. Level 0 is matrix-free over the
// per-element coefficients rho^p; coarser levels carry an assembled
// 27-neighbor stencil (3x3 blocks, [vertex][neighbor][entry]).
template <typename T>
struct Level {
  GridLevel grid;
  NodalField u, f, r;
  std::vector<T> coeff;
  std::vector<T> stencil;

  explicit Level(const GridLevel& g) : grid(g), u(g), f(g), r(g) {}
};

// Geometric multigrid hierarchy for the periodic elasticity system.
// Resolution halves per level while it stays even and at least 4; the
// coarsest level is solved directly with the translation null space
// deflated. T selects the storage precision of densities and stencils;
// nodal data and accumulation stay double.
template <typename T>
class Hierarchy {
 public:
  Hierarchy(const GridLevel& root, const BaseMaterial& mat, double penal);

  // Rebuild coefficients, coarse stencils and the coarsest factorization for
  // a new physical density. Must be called before any solve.
  void set_density(const DensityField& rho_phys);

  int num_levels() const { return int(levels_.size()); }
  Level<T>& level(int l) { return levels_[std::size_t(l)]; }
  const Level<T>& level(int l) const { return levels_[std::size_t(l)]; }
  const StiffnessTables& tables() const { return tab_; }
  const ElementStiffness& element_stiffness() const { return ks_; }

  // y = K_l x
  void apply(int l, const NodalField& x, NodalField& y) const;
  void relax(int l, int sweeps);
  void compute_residual(int l);  // r_l = f_l - K_l u_l
  void coarsest_solve();
  double v_cycle(const SolverOptions& opts);  // returns level-0 |r|/|f|

  // Iterate V-cycles until |r|/|f| <= tol; u holds the warm start on entry
  // and the solution on exit. f is projected onto balanced loads once here.
  SolveStats solve(const NodalField& fload, NodalField& u, const SolverOptions& opts);

 private:
  void assemble_stencil_from_elements(int coarse);
  void assemble_stencil_from_stencil(int coarse);
  void factor_coarsest();
  Eigen::MatrixXd assemble_dense(int l) const;

  BaseMaterial mat_;
  double penal_;
  ElementStiffness ks_;
  StiffnessTables tab_;
  std::vector<Level<T>> levels_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_ldlt_;
  Eigen::MatrixXd coarse_matrix_;
  bool density_set_ = false;
};

using HierarchyF = Hierarchy<float>;
using HierarchyD = Hierarchy<double>;

}  // namespace ihom
