#pragma once

// Independent reference computations used as test oracles. Everything here
// is built from first principles (explicit sparse assembly, dense direct
// solves, brute-force loops) and stays off the library's optimized paths.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <random>

#include "ihom/density.hpp"
#include "ihom/fem.hpp"
#include "ihom/material.hpp"

namespace oracle {

using ihom::DensityField;
using ihom::GridLevel;
using ihom::IVec3;
using ihom::Matrix6;
using ihom::NodalField;
using SparseMat = Eigen::SparseMatrix<double>;

// Unit-element stiffness by 3x3x3 Gauss quadrature on natural coordinates
// [-1,1]^3 with an explicit Jacobian; independently coded from the library's
// quadrature.
Eigen::Matrix<double, 24, 24> element_stiffness_quadrature(double youngs, double poisson);

// Explicit global stiffness of the periodic grid; dof = 3*color_block_location + c.
SparseMat global_stiffness(const GridLevel& g, const DensityField& rho, double p,
                           const Eigen::Matrix<double, 24, 24>& k0);

// Macro-strain load by per-element scatter of K_e * chi.
Eigen::VectorXd macro_force(const GridLevel& g, const DensityField& rho, double p, int load,
                            const Eigen::Matrix<double, 24, 24>& k0);

// Explicit trilinear interpolation matrix (fine dofs x coarse dofs).
SparseMat interpolation_matrix(const GridLevel& fine, const GridLevel& coarse);

// Dense direct solve with the translation null space projected out of both
// the load and the solution.
Eigen::VectorXd solve_deflated(const Eigen::MatrixXd& k, Eigen::VectorXd f);

// Homogenized tensor by direct solves and the energy identity
// M*C_ij = chi_i' K chi_j - u_j' f_i, an algebraic route distinct from the
// library's per-element evaluation.
Matrix6 homogenized_tensor(const GridLevel& g, const DensityField& rho, double p,
                           const ihom::BaseMaterial& mat);

// Brute-force periodic radial convolution (double loop over all elements).
DensityField conv_brute(const DensityField& f, double radius, ihom::FilterKernel kernel);

// Helpers shared by tests.
DensityField random_density(IVec3 n, std::uint64_t seed, double lo = ihom::kRhoMin,
                            double hi = 1.0);
NodalField random_nodal(const GridLevel& g, std::uint64_t seed, double scale = 1.0);

Eigen::VectorXd to_vector(const NodalField& f);
NodalField from_vector(const GridLevel& g, const Eigen::VectorXd& v);

// Central finite difference of a scalar functional of the density.
template <class F>
DensityField finite_difference(const DensityField& rho, double h, F&& functional) {
  DensityField g(rho.n);
  DensityField work = rho;
  for (std::int64_t i = 0; i < rho.size(); ++i) {
    work[i] = rho[i] + h;
    const double fp = functional(work);
    work[i] = rho[i] - h;
    const double fm = functional(work);
    work[i] = rho[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace oracle
