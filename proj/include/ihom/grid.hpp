#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace ihom {

using IVec3 = std::array<int, 3>;

inline IVec3 color_origin(int id) { return {id & 1, (id >> 1) & 1, (id >> 2) & 1}; }

// One level of a periodic voxel grid. There are n[k] elements along axis k
// and, by periodic identification (vertex n[k] == vertex 0), also n[k]
// vertices. Vertex storage is color-major: the eight parity classes
// (x0 mod 2, x1 mod 2, x2 mod 2) occupy consecutive blocks, and within a
// block vertices are ordered x-fastest by their halved coordinates.
struct GridLevel {
  IVec3 n{0, 0, 0};
  int level = 0;
  double dx = 0.0;  // element edge length on the unit cube, 1/n[0]

  std::array<IVec3, 8> color_dim{};
  std::array<std::int64_t, 8> color_base{};
  std::array<std::int64_t, 8> color_size{};

  GridLevel() = default;

  explicit GridLevel(IVec3 reso, int lvl = 0) : n(reso), level(lvl) {
    for (int k = 0; k < 3; ++k)
      if (n[k] < 4) throw std::invalid_argument("grid resolution must be >= 4 per axis");
    dx = 1.0 / n[0];
    std::int64_t base = 0;
    for (int id = 0; id < 8; ++id) {
      const IVec3 o = color_origin(id);
      for (int k = 0; k < 3; ++k) color_dim[id][k] = (n[k] - o[k] + 1) / 2;
      color_base[id] = base;
      color_size[id] =
          std::int64_t(color_dim[id][0]) * color_dim[id][1] * color_dim[id][2];
      base += color_size[id];
    }
  }

  std::int64_t vertex_count() const { return std::int64_t(n[0]) * n[1] * n[2]; }
  std::int64_t element_count() const { return std::int64_t(n[0]) * n[1] * n[2]; }

  bool even() const { return n[0] % 2 == 0 && n[1] % 2 == 0 && n[2] % 2 == 0; }

  bool can_coarsen() const {
    return even() && n[0] / 2 >= 4 && n[1] / 2 >= 4 && n[2] / 2 >= 4;
  }

  GridLevel coarsened() const {
    return GridLevel({n[0] / 2, n[1] / 2, n[2] / 2}, level + 1);
  }
};

inline IVec3 wrap_vertex(IVec3 c, const GridLevel& g) {
  for (int k = 0; k < 3; ++k) {
    c[k] %= g.n[k];
    if (c[k] < 0) c[k] += g.n[k];
  }
  return c;
}

inline IVec3 wrap_element(IVec3 c, const GridLevel& g) { return wrap_vertex(c, g); }

inline int color_of(const IVec3& v) {
  return (v[0] & 1) | ((v[1] & 1) << 1) | ((v[2] & 1) << 2);
}

// Memory location of a canonical vertex in the color-major layout.
inline std::int64_t color_block_location(const IVec3& v, const GridLevel& g) {
  const int id = color_of(v);
  const IVec3& d = g.color_dim[id];
  return g.color_base[id] + (v[0] >> 1) +
         (std::int64_t(v[1] >> 1) + std::int64_t(v[2] >> 1) * d[1]) * d[0];
}

// Inverse of color_block_location.
inline IVec3 vertex_at(std::int64_t loc, const GridLevel& g) {
  int id = 7;
  while (id > 0 && loc < g.color_base[id]) --id;
  std::int64_t r = loc - g.color_base[id];
  const IVec3& d = g.color_dim[id];
  const IVec3 o = color_origin(id);
  const int i0 = int(r % d[0]);
  r /= d[0];
  const int i1 = int(r % d[1]);
  const int i2 = int(r / d[1]);
  return {2 * i0 + o[0], 2 * i1 + o[1], 2 * i2 + o[2]};
}

// Local vertex order of an element: offsets {0,1}^3, x fastest, then y, then z.
inline IVec3 local_vertex_offset(int j) { return {j & 1, (j >> 1) & 1, (j >> 2) & 1}; }

inline std::array<IVec3, 8> element_vertices(const IVec3& e, const GridLevel& g) {
  std::array<IVec3, 8> out;
  for (int j = 0; j < 8; ++j) {
    const IVec3 d = local_vertex_offset(j);
    out[j] = wrap_vertex({e[0] + d[0], e[1] + d[1], e[2] + d[2]}, g);
  }
  return out;
}

// Elements are stored x-fastest in plain row order (this is also the layout
// of the exported density volume).
inline std::int64_t element_index(const IVec3& e, const GridLevel& g) {
  return e[0] + std::int64_t(g.n[0]) * (e[1] + std::int64_t(g.n[1]) * e[2]);
}

inline IVec3 element_at(std::int64_t idx, const GridLevel& g) {
  const int x = int(idx % g.n[0]);
  idx /= g.n[0];
  return {x, int(idx % g.n[1]), int(idx / g.n[1])};
}

}  // namespace ihom
