#include "ihom/material.hpp"

#include <cmath>

namespace ihom {

Matrix6 BaseMaterial::elasticity() const {
  const double l = lambda();
  const double m = mu();
  Matrix6 c = Matrix6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = l;
    c(i, i) = l + 2.0 * m;
    c(3 + i, 3 + i) = m;
  }
  return c;
}

namespace {

// Trilinear shape function gradients at a point p in [0,1]^3, local vertex
// order x-fastest.
void shape_gradients(const double p[3], double grad[8][3]) {
  for (int j = 0; j < 8; ++j) {
    const IVec3 d = local_vertex_offset(j);
    double f[3], g[3];
    for (int k = 0; k < 3; ++k) {
      f[k] = d[k] ? p[k] : 1.0 - p[k];
      g[k] = d[k] ? 1.0 : -1.0;
    }
    grad[j][0] = g[0] * f[1] * f[2];
    grad[j][1] = f[0] * g[1] * f[2];
    grad[j][2] = f[0] * f[1] * g[2];
  }
}

}  // namespace

ElementStiffness ElementStiffness::from_material(const BaseMaterial& mat) {
  const Matrix6 c = mat.elasticity();
  Matrix24 k = Matrix24::Zero();
  // 2x2x2 Gauss points mapped to [0,1]; exact for the trilinear integrand.
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  const double w = 1.0 / 8.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int cidx = 0; cidx < 2; ++cidx) {
        const double p[3] = {gp[a], gp[b], gp[cidx]};
        double grad[8][3];
        shape_gradients(p, grad);
        Eigen::Matrix<double, 6, 24> B = Eigen::Matrix<double, 6, 24>::Zero();
        for (int j = 0; j < 8; ++j) {
          const int col = 3 * j;
          B(0, col + 0) = grad[j][0];
          B(1, col + 1) = grad[j][1];
          B(2, col + 2) = grad[j][2];
          B(3, col + 0) = grad[j][1];  // gamma_12
          B(3, col + 1) = grad[j][0];
          B(4, col + 1) = grad[j][2];  // gamma_23
          B(4, col + 2) = grad[j][1];
          B(5, col + 0) = grad[j][2];  // gamma_13
          B(5, col + 2) = grad[j][0];
        }
        k += w * B.transpose() * c * B;
      }
  ElementStiffness out;
  out.k0 = 0.5 * (k + k.transpose());
  return out;
}

Eigen::Vector3d macro_strain_displacement(int i, const IVec3& x) {
  const double x0 = x[0], x1 = x[1], x2 = x[2];
  switch (i) {
    case 0: return {x0, 0.0, 0.0};
    case 1: return {0.0, x1, 0.0};
    case 2: return {0.0, 0.0, x2};
    case 3: return {x1 / 2.0, x0 / 2.0, 0.0};
    case 4: return {0.0, x2 / 2.0, x1 / 2.0};
    case 5: return {x2 / 2.0, 0.0, x0 / 2.0};
    default: throw std::invalid_argument("macro strain index must be in [0, 6)");
  }
}

}  // namespace ihom
