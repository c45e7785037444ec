#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ihom/density.hpp"
#include "ihom/grid.hpp"
#include "ihom/material.hpp"

namespace ihom {

// Per-vertex 3-vector field on one grid level; vertex-major xyz storage in
// the color-block vertex order.
struct NodalField {
  GridLevel grid;
  std::vector<double> a;

  NodalField() = default;
  explicit NodalField(const GridLevel& g)
      : grid(g), a(std::size_t(3 * g.vertex_count()), 0.0) {}

  double* at(std::int64_t loc) { return a.data() + 3 * loc; }
  const double* at(std::int64_t loc) const { return a.data() + 3 * loc; }
  void set_zero() { std::fill(a.begin(), a.end(), 0.0); }
};

// 27-neighborhood offsets in {-1,0,1}^3, x fastest; index 13 is the vertex
// itself.
inline int neighbor_index(const IVec3& t) {
  return (t[0] + 1) + 3 * (t[1] + 1) + 9 * (t[2] + 1);
}
inline IVec3 neighbor_offset(int idx) {
  return {idx % 3 - 1, (idx / 3) % 3 - 1, idx / 9 - 1};
}

// Element-stiffness lookup shared by all matrix-free level-0 kernels.
//
// Incident element ke in [0,8) of a vertex v sits at v - (1,1,1) + bits(ke)
// and sees v as its local vertex 7-ke. blk[ke][j] is the (7-ke, j) block of
// K0 and ngb[ke][j] the 27-neighborhood index of that element's j-th vertex
// relative to v. groups[n] lists the (ke, j) pairs hitting neighbor n, which
// lets a kernel merge all single-precision coefficients of one neighbor
// before touching the double-precision displacement.
struct StiffnessTables {
  double blk[8][8][9];
  float blk_f[8][8][9];
  int ngb[8][8];
  double fmacro[8][6][3];
  struct Pair {
    std::uint8_t ke, j;
  };
  std::array<std::vector<Pair>, 27> groups;

  explicit StiffnessTables(const ElementStiffness& ks);

  // Flat [8][8][9] block table in the requested precision.
  template <typename T>
  const T* flat_blocks() const {
    if constexpr (sizeof(T) == sizeof(float))
      return &blk_f[0][0][0];
    else
      return &blk[0][0][0];
  }
};

// Gathered addressing context of one vertex: locations of its 27 neighbor
// vertices and the linear indices of its 8 incident elements. Everything is
// computed arithmetically from the coordinate; no topology is stored.
struct VertexNeighborhood {
  std::int64_t vloc[27];
  std::int64_t eidx[8];
};

void gather_neighborhood(const GridLevel& g, const IVec3& v, VertexNeighborhood& nb);

namespace detail {

// 3x3 solve with partial pivoting; the blocks involved are SPD.
void solve3(const double m[9], const double rhs[3], double out[3]);

}  // namespace detail

// y = K(coeff) u at one vertex, like-term grouped path: coefficients of each
// neighbor are merged in T precision, then applied to the double nodal data.
template <typename T>
inline void vertex_apply(const StiffnessTables& tab, const T* coeff,
                         const VertexNeighborhood& nb, const double* u, double y[3]) {
  const T* blocks = tab.flat_blocks<T>();
  y[0] = y[1] = y[2] = 0.0;
  T q[8];
  for (int ke = 0; ke < 8; ++ke) q[ke] = coeff[nb.eidx[ke]];
  for (int n = 0; n < 27; ++n) {
    T c[9] = {};
    for (const auto& pr : tab.groups[std::size_t(n)]) {
      const T w = q[pr.ke];
      const T* b = blocks + (pr.ke * 8 + pr.j) * 9;
      for (int e = 0; e < 9; ++e) c[e] += w * b[e];
    }
    const double* un = u + 3 * nb.vloc[n];
    y[0] += double(c[0]) * un[0] + double(c[1]) * un[1] + double(c[2]) * un[2];
    y[1] += double(c[3]) * un[0] + double(c[4]) * un[1] + double(c[5]) * un[2];
    y[2] += double(c[6]) * un[0] + double(c[7]) * un[1] + double(c[8]) * un[2];
  }
}

// Same merge, split into the diagonal block S and the off-diagonal part M u;
// used by the Gauss-Seidel update S u_v = f_v - M u.
template <typename T>
inline void vertex_split_apply(const StiffnessTables& tab, const T* coeff,
                               const VertexNeighborhood& nb, const double* u,
                               double s[9], double m[3]) {
  const T* blocks = tab.flat_blocks<T>();
  m[0] = m[1] = m[2] = 0.0;
  T q[8];
  for (int ke = 0; ke < 8; ++ke) q[ke] = coeff[nb.eidx[ke]];
  for (int n = 0; n < 27; ++n) {
    T c[9] = {};
    for (const auto& pr : tab.groups[std::size_t(n)]) {
      const T w = q[pr.ke];
      const T* b = blocks + (pr.ke * 8 + pr.j) * 9;
      for (int e = 0; e < 9; ++e) c[e] += w * b[e];
    }
    if (n == 13) {
      for (int e = 0; e < 9; ++e) s[e] = double(c[e]);
      continue;
    }
    const double* un = u + 3 * nb.vloc[n];
    m[0] += double(c[0]) * un[0] + double(c[1]) * un[1] + double(c[2]) * un[2];
    m[1] += double(c[3]) * un[0] + double(c[4]) * un[1] + double(c[5]) * un[2];
    m[2] += double(c[6]) * un[0] + double(c[7]) * un[1] + double(c[8]) * un[2];
  }
}

// --- whole-grid level-0 kernels (OpenMP-parallel over vertices) ---

template <typename T>
void apply_stiffness_kernel(const GridLevel& g, const StiffnessTables& tab,
                            const T* coeff, const double* u, double* y);

// r = f - K u
template <typename T>
void residual_kernel(const GridLevel& g, const StiffnessTables& tab, const T* coeff,
                     const double* u, const double* f, double* r);

// One sweep: colors relaxed in order 0..7, vertices of one color in parallel.
template <typename T>
void gauss_seidel_kernel(const GridLevel& g, const StiffnessTables& tab,
                         const T* coeff, const double* f, double* u);

template <typename T>
void macro_force_kernel(const GridLevel& g, const StiffnessTables& tab,
                        const T* coeff, int load, double* f);

// --- spec-level convenience entry points (build tables per call) ---

NodalField apply_stiffness(const GridLevel& g, const DensityField& rho, double p,
                           const NodalField& u, const ElementStiffness& ks);

NodalField assemble_macro_force(const GridLevel& g, const DensityField& rho, double p,
                                int load, const ElementStiffness& ks);

Eigen::Matrix3d diag_block(const GridLevel& g, const DensityField& rho, double p,
                           const IVec3& v, const ElementStiffness& ks);

// Serial reference implementations: straightforward per-element loops over
// the untransformed K0, kept as the baseline the parallel kernels are tested
// and benchmarked against.
namespace ref {

NodalField apply_stiffness(const GridLevel& g, const DensityField& rho, double p,
                           const NodalField& u, const ElementStiffness& ks);

NodalField assemble_macro_force(const GridLevel& g, const DensityField& rho, double p,
                                int load, const ElementStiffness& ks);

void gauss_seidel_sweep(const GridLevel& g, const DensityField& rho, double p,
                        const NodalField& f, NodalField& u, const ElementStiffness& ks);

}  // namespace ref

}  // namespace ihom
