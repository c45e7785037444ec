#include <set>

#include "doctest.h"
#include "ihom/grid.hpp"

using namespace ihom;

TEST_SUITE("grid") {

TEST_CASE("wrap_vertex canonicalizes and is idempotent") {
  const GridLevel g({8, 8, 8});
  CHECK(wrap_vertex({-1, 0, 5}, g) == IVec3{7, 0, 5});
  CHECK(wrap_vertex({8, 8, 8}, g) == IVec3{0, 0, 0});
  CHECK(wrap_vertex({3, 3, 3}, g) == IVec3{3, 3, 3});
  for (int x = -17; x < 17; ++x) {
    const IVec3 once = wrap_vertex({x, 2 * x, -x}, g);
    CHECK(wrap_vertex(once, g) == once);
  }
}

TEST_CASE("color_of parity formula") {
  CHECK(color_of({0, 0, 0}) == 0);
  CHECK(color_of({1, 0, 1}) == 5);
  CHECK(color_of({1, 1, 1}) == 7);
  CHECK(color_of({2, 3, 4}) == 2);
}

TEST_CASE("color_block_location examples and bijectivity") {
  const GridLevel g({8, 8, 8});
  CHECK(color_block_location({0, 0, 0}, g) == g.color_base[0] + 0);
  CHECK(color_block_location({2, 0, 0}, g) == g.color_base[0] + 1);

  std::set<std::int64_t> seen;
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const std::int64_t loc = color_block_location({x, y, z}, g);
        CHECK(loc >= 0);
        CHECK(loc < g.vertex_count());
        CHECK(seen.insert(loc).second);
        CHECK(vertex_at(loc, g) == IVec3{x, y, z});
      }
  CHECK(std::int64_t(seen.size()) == g.vertex_count());
}

TEST_CASE("color_block_location bijective on odd resolution") {
  const GridLevel g({5, 5, 5});
  std::set<std::int64_t> seen;
  for (int z = 0; z < 5; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) {
        const std::int64_t loc = color_block_location({x, y, z}, g);
        CHECK(seen.insert(loc).second);
        CHECK(vertex_at(loc, g) == IVec3{x, y, z});
      }
  CHECK(std::int64_t(seen.size()) == g.vertex_count());
}

TEST_CASE("element_vertices order and periodic corner") {
  const GridLevel g({8, 8, 8});
  const auto v0 = element_vertices({0, 0, 0}, g);
  const std::array<IVec3, 8> expected = {IVec3{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                                         {0, 0, 1},      {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  CHECK(v0 == expected);
  const auto vc = element_vertices({7, 7, 7}, g);
  CHECK(vc[7] == IVec3{0, 0, 0});
}

TEST_CASE("every element owns one vertex of each color") {
  const GridLevel g({4, 4, 4});
  for (std::int64_t ei = 0; ei < g.element_count(); ++ei) {
    const auto verts = element_vertices(element_at(ei, g), g);
    std::set<int> colors;
    for (const auto& v : verts) colors.insert(color_of(v));
    CHECK(colors.size() == 8);
  }
}

TEST_CASE("grid rejects resolutions below 4") {
  CHECK_THROWS_AS(GridLevel({1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(GridLevel({4, 4, 3}), std::invalid_argument);
}

TEST_CASE("coarsening rules") {
  CHECK(GridLevel({8, 8, 8}).can_coarsen());
  CHECK(!GridLevel({6, 6, 6}).can_coarsen());   // 3 < 4
  CHECK(!GridLevel({5, 5, 5}).can_coarsen());   // odd
  CHECK(GridLevel({20, 20, 20}).coarsened().n == IVec3{10, 10, 10});
}

}  // TEST_SUITE
