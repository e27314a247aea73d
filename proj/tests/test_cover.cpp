#include <doctest.h>

#include "gerbelab/cover.hpp"

#include <random>

using namespace gerbelab;

namespace {

// The segment [x, x + ext] lies in the arc [lo, hi].
bool covers(int lo, int hi, int x, int ext) { return lo <= x && x + ext <= hi; }

}  // namespace

TEST_CASE("circle cover nerve is a triangle boundary") {
  auto X = build_torus_complex(1, 6);
  auto U = good_cover_torus(X);
  CHECK(U.set_count() == 3);
  CHECK(U.nerve().count(0) == 3);
  CHECK(U.nerve().count(1) == 3);
  CHECK(U.nerve().count(2) == 0);
  CHECK(U.nerve_cohomology(1).group().betti == 1);
  CHECK(U.all_certified());
}

TEST_CASE("nerve simplex counts and cohomology on T^3") {
  auto X = build_torus_complex(3, 4);
  auto U = good_cover_torus(X);
  CHECK(U.set_count() == 27);
  const int expect[] = {27, 351, 1188, 1809, 1512};
  for (int k = 0; k <= 4; ++k) CHECK(U.nerve().count(k) == expect[k]);
  CHECK(U.nerve_cohomology(1).group().betti == 3);
  CHECK(U.nerve_cohomology(2).group().betti == 3);
  CHECK(U.nerve_cohomology(3).group().betti == 1);
  for (int k = 1; k <= 3; ++k) CHECK(U.nerve_cohomology(k).group().torsion.empty());
  CHECK(U.nerve_homology2().betti == 3);
  CHECK(U.all_certified());
}

TEST_CASE("T^2 cover: intersections contractible, nerve matches torus") {
  auto X = build_torus_complex(2, 5);
  auto U = good_cover_torus(X);
  CHECK(U.set_count() == 9);
  CHECK(U.all_certified());
  CHECK(U.nerve_cohomology(1).group().betti == 2);
  CHECK(U.nerve_cohomology(2).group().betti == 1);
  CHECK(U.nerve_cohomology(3).group().betti == 0);
  // Every nonempty 4-fold intersection is certified; count matches enumeration.
  int nonempty4 = 0;
  for (int a = 0; a < 9; ++a)
    for (int b = a + 1; b < 9; ++b)
      for (int c = b + 1; c < 9; ++c)
        for (int e = c + 1; e < 9; ++e) {
          bool any = false;
          for (int v = 0; v < X.vertex_count() && !any; ++v) {
            Cell cl{0, X.vertex_coords(v)};
            bool all = true;
            for (int s : {a, b, c, e}) all = all && (U.membership(0, X.cell_index(cl)) >> s & 1u);
            any = all;
          }
          nonempty4 += any;
        }
  CHECK(U.nerve().count(3) == nonempty4);
}

TEST_CASE("membership agrees with direct arc tests") {
  auto X = build_torus_complex(3, 5);
  auto U = good_cover_torus(X);
  const auto cuts = U.cut_points();
  for (int k = 0; k <= 3; ++k)
    for (int c = 0; c < X.cell_count(k); ++c) {
      const Cell cl = X.cell(k, c);
      std::uint32_t expect = 0;
      for (int alpha = 0; alpha < 27; ++alpha) {
        const auto j = U.arcs(alpha);
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
          const int x = cl.base[a], ext = (cl.axes >> a) & 1u;
          bool ok = false;
          for (int shift : {0, X.resolution()}) ok = ok || covers(cuts[j[a]], cuts[j[a] + 1], x + shift, ext);
          inside = inside && ok;
        }
        if (inside) expect |= 1u << alpha;
      }
      CHECK(U.membership(k, c) == expect);
      CHECK(U.membership(k, c) != 0);
    }
}

TEST_CASE("homotopy contracts boxes under both root rules") {
  auto X = build_torus_complex(3, 7);
  BoxChart chart(X, Box{{5, 1, 2}, {3, 2, 4}});
  CHECK(verify_contraction(chart, RootRule::Lowest));
  CHECK(verify_contraction(chart, RootRule::Highest));
  BoxChart thin(X, Box{{0, 3, 6}, {0, 2, 0}});
  CHECK(verify_contraction(thin, RootRule::Lowest));
  CHECK(verify_contraction(thin, RootRule::Highest));
  CHECK_THROWS_AS(BoxChart(X, Box{{0, 0, 0}, {7, 1, 1}}), std::invalid_argument);
}

TEST_CASE("small resolution is rejected") {
  auto X = build_torus_complex(2, 2);
  CHECK_THROWS_AS(good_cover_torus(X), std::invalid_argument);
}
