#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include "ihom/grid.hpp"

namespace ihom {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix24 = Eigen::Matrix<double, 24, 24>;

// Isotropic base material. The scaled Lame constants lambda()/72 and mu()/72
// are the natural unit in which every entry of the unit-element stiffness
// matrix is a small integer combination.
struct BaseMaterial {
  double youngs = 1.0;
  double poisson = 0.3;

  BaseMaterial() = default;
  BaseMaterial(double e, double nu) : youngs(e), poisson(nu) {
    if (!(e > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5))
      throw std::invalid_argument("Poisson's ratio must lie in (-1, 0.5)");
  }

  double lambda() const {
    return youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  }
  double mu() const { return youngs / (2.0 * (1.0 + poisson)); }

  // 6x6 constitutive matrix in engineering order 11,22,33,12,23,13.
  Matrix6 elasticity() const;
};

// 24x24 stiffness of the 8-node trilinear hexahedron on the unit cube,
// dofs vertex-major in the local vertex order of grid.hpp.
struct ElementStiffness {
  Matrix24 k0;
  static ElementStiffness from_material(const BaseMaterial& mat);
};

// Displacement of a vertex at local corner x in {0,1}^3 under the unit macro
// strain with engineering index i. Coordinates are element-relative.
Eigen::Vector3d macro_strain_displacement(int i, const IVec3& x);

// Engineering index order used throughout: 11->0, 22->1, 33->2, 12->3,
// 23->4, 13->5.
inline constexpr int kNumLoadCases = 6;

}  // namespace ihom
