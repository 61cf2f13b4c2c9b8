#include <doctest.h>

#include <stdexcept>

#include <set>

#include "aplab/mesh.hpp"

using namespace aplab;

TEST_CASE("mesh geometry and cell math") {
  const Mesh mesh(0.0, 0.25, 2);
  CHECK(mesh.num_cells() == 4);
  CHECK(mesh.cell_left(0) == 0.0);
  CHECK(mesh.cell_right(3) == 1.0);
  CHECK(mesh.whole() == Interval{0, 4});
  CHECK(mesh.top_cube() == Cube{2, 0});
  CHECK(mesh.cells(Cube{2, 0}) == Interval{0, 4});
  CHECK(mesh.cells(Cube{1, 1}) == Interval{2, 4});
  CHECK(mesh.cells(Cube{0, 3}) == Interval{3, 4});
  CHECK(mesh.length(Interval{1, 3}) == 0.5);
}

TEST_CASE("dyadic enumeration is largest-first and ids are distinct") {
  const Mesh mesh(0.0, 0.125, 3);
  const std::vector<Cube> dyadic = mesh.enumerate_dyadic();
  CHECK(dyadic.size() == 15);  // 1 + 2 + 4 + 8
  CHECK(dyadic.front() == mesh.top_cube());
  std::set<std::size_t> ids;
  for (std::size_t i = 0; i < dyadic.size(); ++i) {
    if (i > 0) {
      const bool ordered = dyadic[i - 1].level > dyadic[i].level ||
                           (dyadic[i - 1].level == dyadic[i].level &&
                            dyadic[i - 1].offset < dyadic[i].offset);
      CHECK(ordered);
    }
    ids.insert(mesh.cube_id(dyadic[i]));
  }
  CHECK(ids.size() == dyadic.size());
}

TEST_CASE("interval enumeration covers every nonempty cell range once") {
  const Mesh mesh(0.0, 0.25, 2);
  const std::vector<Interval> intervals = mesh.enumerate_intervals();
  CHECK(intervals.size() == 10);  // n(n+1)/2 for n = 4
  std::set<std::pair<cell_index, cell_index>> seen;
  for (Interval r : intervals) {
    CHECK(r.start_cell >= 0);
    CHECK(r.start_cell < r.end_cell);
    CHECK(r.end_cell <= 4);
    seen.insert({r.start_cell, r.end_cell});
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("containment relations") {
  const Mesh mesh(0.0, 0.25, 2);
  CHECK(mesh.contains(Cube{2, 0}, Cube{0, 3}));
  CHECK(mesh.contains(Cube{1, 1}, Cube{0, 2}));
  CHECK_FALSE(mesh.contains(Cube{0, 2}, Cube{1, 1}));
  CHECK_FALSE(mesh.contains(Cube{1, 0}, Cube{0, 2}));
  CHECK(mesh.contains(Interval{0, 4}, Interval{1, 3}));
  CHECK_FALSE(mesh.contains(Interval{1, 3}, Interval{0, 4}));
  CHECK(mesh.contains(Cube{1, 1}, Interval{2, 3}));
  CHECK(mesh.contains(Interval{0, 3}, Cube{1, 0}));
  CHECK(mesh.contains(Cube{1, 0}, cell_index{1}));
  CHECK_FALSE(mesh.contains(Cube{1, 0}, cell_index{2}));
}
