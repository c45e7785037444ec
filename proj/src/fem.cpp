#include "ihom/fem.hpp"

#include <cmath>
#include <cstring>

#include "ihom/parallel.hpp"

namespace ihom {

StiffnessTables::StiffnessTables(const ElementStiffness& ks) {
  for (int ke = 0; ke < 8; ++ke) {
    const int row = 7 - ke;
    const IVec3 de = local_vertex_offset(ke);
    for (int j = 0; j < 8; ++j) {
      const IVec3 dj = local_vertex_offset(j);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          const double x = ks.k0(3 * row + r, 3 * j + c);
          blk[ke][j][3 * r + c] = x;
          blk_f[ke][j][3 * r + c] = float(x);
        }
      ngb[ke][j] = neighbor_index({de[0] + dj[0] - 1, de[1] + dj[1] - 1, de[2] + dj[2] - 1});
      groups[std::size_t(ngb[ke][j])].push_back({std::uint8_t(ke), std::uint8_t(j)});
    }
    for (int i = 0; i < kNumLoadCases; ++i) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int j = 0; j < 8; ++j) {
        const Eigen::Vector3d chi = macro_strain_displacement(i, local_vertex_offset(j));
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) acc[r] += blk[ke][j][3 * r + c] * chi[c];
      }
      for (int r = 0; r < 3; ++r) fmacro[ke][i][r] = acc[r];
    }
  }
}

void gather_neighborhood(const GridLevel& g, const IVec3& v, VertexNeighborhood& nb) {
  // Per axis: parity bit and halved index of the wrapped coordinates
  // v[k]-1, v[k], v[k]+1.
  int par[3][3], half[3][3], ecoord[3][2];
  for (int k = 0; k < 3; ++k) {
    const int n = g.n[k];
    const int x = v[k];
    const int xm = (x == 0) ? n - 1 : x - 1;
    const int xp = (x + 1 == n) ? 0 : x + 1;
    par[k][0] = xm & 1;
    par[k][1] = x & 1;
    par[k][2] = xp & 1;
    half[k][0] = xm >> 1;
    half[k][1] = x >> 1;
    half[k][2] = xp >> 1;
    ecoord[k][0] = xm;  // incident elements sit at v-1+bits
    ecoord[k][1] = x;
  }
  int idx = 0;
  for (int t2 = 0; t2 < 3; ++t2)
    for (int t1 = 0; t1 < 3; ++t1)
      for (int t0 = 0; t0 < 3; ++t0, ++idx) {
        const int id = par[0][t0] | (par[1][t1] << 1) | (par[2][t2] << 2);
        const IVec3& d = g.color_dim[id];
        nb.vloc[idx] = g.color_base[id] + half[0][t0] +
                       (std::int64_t(half[1][t1]) + std::int64_t(half[2][t2]) * d[1]) * d[0];
      }
  for (int ke = 0; ke < 8; ++ke)
    nb.eidx[ke] = ecoord[0][ke & 1] +
                  std::int64_t(g.n[0]) * (ecoord[1][(ke >> 1) & 1] +
                                          std::int64_t(g.n[1]) * ecoord[2][(ke >> 2) & 1]);
}

namespace detail {

void solve3(const double m[9], const double rhs[3], double out[3]) {
  double a[9];
  std::memcpy(a, m, sizeof(a));
  double b[3] = {rhs[0], rhs[1], rhs[2]};
  int piv[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int best = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[3 * piv[r] + c]) > std::abs(a[3 * piv[best] + c])) best = r;
    std::swap(piv[c], piv[best]);
    const double d = a[3 * piv[c] + c];
    for (int r = c + 1; r < 3; ++r) {
      const double fac = a[3 * piv[r] + c] / d;
      for (int cc = c; cc < 3; ++cc) a[3 * piv[r] + cc] -= fac * a[3 * piv[c] + cc];
      b[piv[r]] -= fac * b[piv[c]];
    }
  }
  for (int c = 2; c >= 0; --c) {
    double s = b[piv[c]];
    for (int cc = c + 1; cc < 3; ++cc) s -= a[3 * piv[c] + cc] * out[cc];
    out[c] = s / a[3 * piv[c] + c];
  }
}

}  // namespace detail

template <typename T>
void apply_stiffness_kernel(const GridLevel& g, const StiffnessTables& tab,
                            const T* coeff, const double* u, double* y) {
  parallel_for(g.vertex_count(), [&](std::int64_t loc) {
    VertexNeighborhood nb;
    gather_neighborhood(g, vertex_at(loc, g), nb);
    vertex_apply(tab, coeff, nb, u, y + 3 * loc);
  });
}

template <typename T>
void residual_kernel(const GridLevel& g, const StiffnessTables& tab, const T* coeff,
                     const double* u, const double* f, double* r) {
  parallel_for(g.vertex_count(), [&](std::int64_t loc) {
    VertexNeighborhood nb;
    gather_neighborhood(g, vertex_at(loc, g), nb);
    double y[3];
    vertex_apply(tab, coeff, nb, u, y);
    r[3 * loc + 0] = f[3 * loc + 0] - y[0];
    r[3 * loc + 1] = f[3 * loc + 1] - y[1];
    r[3 * loc + 2] = f[3 * loc + 2] - y[2];
  });
}

template <typename T>
void gauss_seidel_kernel(const GridLevel& g, const StiffnessTables& tab,
                         const T* coeff, const double* f, double* u) {
  for (int color = 0; color < 8; ++color) {
    const std::int64_t base = g.color_base[color];
    parallel_for(g.color_size[color], [&](std::int64_t i) {
      const std::int64_t loc = base + i;
      VertexNeighborhood nb;
      gather_neighborhood(g, vertex_at(loc, g), nb);
      double s[9], m[3];
      vertex_split_apply(tab, coeff, nb, u, s, m);
      const double rhs[3] = {f[3 * loc] - m[0], f[3 * loc + 1] - m[1], f[3 * loc + 2] - m[2]};
      detail::solve3(s, rhs, u + 3 * loc);
    });
  }
}

template <typename T>
void macro_force_kernel(const GridLevel& g, const StiffnessTables& tab,
                        const T* coeff, int load, double* f) {
  parallel_for(g.vertex_count(), [&](std::int64_t loc) {
    VertexNeighborhood nb;
    gather_neighborhood(g, vertex_at(loc, g), nb);
    double y[3] = {0.0, 0.0, 0.0};
    for (int ke = 0; ke < 8; ++ke) {
      const double q = double(coeff[nb.eidx[ke]]);
      y[0] += q * tab.fmacro[ke][load][0];
      y[1] += q * tab.fmacro[ke][load][1];
      y[2] += q * tab.fmacro[ke][load][2];
    }
    f[3 * loc + 0] = y[0];
    f[3 * loc + 1] = y[1];
    f[3 * loc + 2] = y[2];
  });
}

template void apply_stiffness_kernel<float>(const GridLevel&, const StiffnessTables&,
                                            const float*, const double*, double*);
template void apply_stiffness_kernel<double>(const GridLevel&, const StiffnessTables&,
                                             const double*, const double*, double*);
template void residual_kernel<float>(const GridLevel&, const StiffnessTables&, const float*,
                                     const double*, const double*, double*);
template void residual_kernel<double>(const GridLevel&, const StiffnessTables&, const double*,
                                      const double*, const double*, double*);
template void gauss_seidel_kernel<float>(const GridLevel&, const StiffnessTables&,
                                         const float*, const double*, double*);
template void gauss_seidel_kernel<double>(const GridLevel&, const StiffnessTables&,
                                          const double*, const double*, double*);
template void macro_force_kernel<float>(const GridLevel&, const StiffnessTables&,
                                        const float*, int, double*);
template void macro_force_kernel<double>(const GridLevel&, const StiffnessTables&,
                                         const double*, int, double*);

namespace {

std::vector<double> density_coeff(const DensityField& rho, double p) {
  std::vector<double> c(rho.v.size());
  parallel_for(rho.size(), [&](std::int64_t i) { c[std::size_t(i)] = std::pow(rho[i], p); });
  return c;
}

}  // namespace

NodalField apply_stiffness(const GridLevel& g, const DensityField& rho, double p,
                           const NodalField& u, const ElementStiffness& ks) {
  const StiffnessTables tab(ks);
  const auto coeff = density_coeff(rho, p);
  NodalField y(g);
  apply_stiffness_kernel<double>(g, tab, coeff.data(), u.a.data(), y.a.data());
  return y;
}

NodalField assemble_macro_force(const GridLevel& g, const DensityField& rho, double p,
                                int load, const ElementStiffness& ks) {
  const StiffnessTables tab(ks);
  const auto coeff = density_coeff(rho, p);
  NodalField f(g);
  macro_force_kernel<double>(g, tab, coeff.data(), load, f.a.data());
  return f;
}

Eigen::Matrix3d diag_block(const GridLevel& g, const DensityField& rho, double p,
                           const IVec3& v, const ElementStiffness& ks) {
  const StiffnessTables tab(ks);
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (int ke = 0; ke < 8; ++ke) {
    const IVec3 de = local_vertex_offset(ke);
    const IVec3 e = wrap_element({v[0] - 1 + de[0], v[1] - 1 + de[1], v[2] - 1 + de[2]}, g);
    const double q = std::pow(rho[element_index(e, g)], p);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) s(r, c) += q * tab.blk[ke][7 - ke][3 * r + c];
  }
  if (!(s.trace() > 0.0)) throw std::runtime_error("singular vertex diagonal block");
  return s;
}

namespace ref {

NodalField apply_stiffness(const GridLevel& g, const DensityField& rho, double p,
                           const NodalField& u, const ElementStiffness& ks) {
  NodalField y(g);
  for (int ez = 0; ez < g.n[2]; ++ez)
    for (int ey = 0; ey < g.n[1]; ++ey)
      for (int ex = 0; ex < g.n[0]; ++ex) {
        const IVec3 e{ex, ey, ez};
        const double q = std::pow(rho[element_index(e, g)], p);
        const auto verts = element_vertices(e, g);
        Eigen::Matrix<double, 24, 1> ue;
        for (int j = 0; j < 8; ++j) {
          const double* uv = u.at(color_block_location(verts[j], g));
          ue.segment<3>(3 * j) = Eigen::Vector3d(uv[0], uv[1], uv[2]);
        }
        const Eigen::Matrix<double, 24, 1> fe = q * (ks.k0 * ue);
        for (int j = 0; j < 8; ++j) {
          double* yv = y.at(color_block_location(verts[j], g));
          yv[0] += fe[3 * j + 0];
          yv[1] += fe[3 * j + 1];
          yv[2] += fe[3 * j + 2];
        }
      }
  return y;
}

NodalField assemble_macro_force(const GridLevel& g, const DensityField& rho, double p,
                                int load, const ElementStiffness& ks) {
  NodalField f(g);
  Eigen::Matrix<double, 24, 1> chi;
  for (int j = 0; j < 8; ++j)
    chi.segment<3>(3 * j) = macro_strain_displacement(load, local_vertex_offset(j));
  for (int ez = 0; ez < g.n[2]; ++ez)
    for (int ey = 0; ey < g.n[1]; ++ey)
      for (int ex = 0; ex < g.n[0]; ++ex) {
        const IVec3 e{ex, ey, ez};
        const double q = std::pow(rho[element_index(e, g)], p);
        const Eigen::Matrix<double, 24, 1> fe = q * (ks.k0 * chi);
        const auto verts = element_vertices(e, g);
        for (int j = 0; j < 8; ++j) {
          double* fv = f.at(color_block_location(verts[j], g));
          fv[0] += fe[3 * j + 0];
          fv[1] += fe[3 * j + 1];
          fv[2] += fe[3 * j + 2];
        }
      }
  return f;
}

void gauss_seidel_sweep(const GridLevel& g, const DensityField& rho, double p,
                        const NodalField& f, NodalField& u, const ElementStiffness& ks) {
  for (int color = 0; color < 8; ++color)
    for (std::int64_t i = 0; i < g.color_size[color]; ++i) {
      const std::int64_t loc = g.color_base[color] + i;
      const IVec3 v = vertex_at(loc, g);
      Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
      Eigen::Vector3d m = Eigen::Vector3d::Zero();
      for (int ke = 0; ke < 8; ++ke) {
        const IVec3 de = local_vertex_offset(ke);
        const IVec3 e = wrap_element({v[0] - 1 + de[0], v[1] - 1 + de[1], v[2] - 1 + de[2]}, g);
        const double q = std::pow(rho[element_index(e, g)], p);
        const int row = 7 - ke;
        for (int j = 0; j < 8; ++j) {
          const IVec3 dj = local_vertex_offset(j);
          const Eigen::Matrix3d b = ks.k0.block<3, 3>(3 * row, 3 * j);
          if (j == row) {
            s += q * b;
            continue;
          }
          const IVec3 w =
              wrap_vertex({v[0] - 1 + de[0] + dj[0], v[1] - 1 + de[1] + dj[1],
                           v[2] - 1 + de[2] + dj[2]}, g);
          const double* uv = u.at(color_block_location(w, g));
          m += q * (b * Eigen::Vector3d(uv[0], uv[1], uv[2]));
        }
      }
      const Eigen::Vector3d rhs(f.at(loc)[0] - m[0], f.at(loc)[1] - m[1], f.at(loc)[2] - m[2]);
      const Eigen::Vector3d x = s.ldlt().solve(rhs);
      double* uv = u.at(loc);
      uv[0] = x[0];
      uv[1] = x[1];
      uv[2] = x[2];
    }
}

}  // namespace ref

}  // namespace ihom
