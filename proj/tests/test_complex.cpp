#include <doctest.h>

#include "gerbelab/complex.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gerbelab;

namespace {

constexpr std::int64_t kPrime = 1000003;

std::int64_t powmod(std::int64_t b, std::int64_t e) {
  std::int64_t r = 1;
  b %= kPrime;
  while (e) {
    if (e & 1) r = r * b % kPrime;
    b = b * b % kPrime;
    e >>= 1;
  }
  return r;
}

// Rank by Gaussian elimination over F_p (independent of the Smith engine).
int rank_mod_p(const IntSparse& s) {
  std::vector<std::vector<std::int64_t>> m(s.rows(), std::vector<std::int64_t>(s.cols(), 0));
  for (int k = 0; k < s.outerSize(); ++k)
    for (IntSparse::InnerIterator it(s, k); it; ++it) m[it.row()][it.col()] = ((it.value() % kPrime) + kPrime) % kPrime;
  int rank = 0;
  const int rows = int(s.rows()), cols = int(s.cols());
  for (int c = 0; c < cols && rank < rows; ++c) {
    int p = rank;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[rank]);
    std::int64_t inv = powmod(m[rank][c], kPrime - 2);
    for (int r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] == 0) continue;
      std::int64_t f = m[r][c] * inv % kPrime;
      for (int j = c; j < cols; ++j) m[r][j] = ((m[r][j] - f * m[rank][j]) % kPrime + kPrime) % kPrime;
    }
    ++rank;
  }
  return rank;
}

int binom(int n, int k) {
  int r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

IntegerCochain random_int_cochain(const CubicalTorusComplex& X, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(-5, 5);
  IntegerCochain c{k, IntVector(X.cell_count(k))};
  for (Eigen::Index i = 0; i < c.values.size(); ++i) c.values(i) = u(rng);
  return c;
}

int Smith_rank(const IntSparse& s) { return smith_normal_form(IntMatrix::from_sparse(s), {}).rank(); }

}  // namespace

TEST_CASE("cell counts and zero boundary composition") {
  for (int d = 1; d <= 3; ++d)
    for (int N = 2; N <= 6; ++N) {
      auto X = build_torus_complex(d, N);
      for (int k = 0; k <= d; ++k) CHECK(X.cell_count(k) == binom(d, k) * int(std::pow(N, d)));
      for (int k = 2; k <= d; ++k) {
        IntSparse dd = X.boundary(k - 1) * X.boundary(k);
        dd.prune([](Eigen::Index, Eigen::Index, std::int64_t v) { return v != 0; });
        CHECK(dd.nonZeros() == 0);
      }
    }
  auto X = build_torus_complex(1, 4);
  CHECK(X.cell_count(0) == 4);
  CHECK(X.cell_count(1) == 4);
  auto Y = build_torus_complex(3, 2);
  CHECK(Y.cell_count(0) == 8);
  CHECK(Y.cell_count(1) == 24);
  CHECK(Y.cell_count(2) == 24);
  CHECK(Y.cell_count(3) == 8);
}

TEST_CASE("boundary column structure") {
  auto X = build_torus_complex(1, 3);
  const auto& d1 = boundary_operator(X, 1);
  for (int c = 0; c < d1.cols(); ++c) {
    std::int64_t sum = 0;
    int nz = 0;
    for (IntSparse::InnerIterator it(d1, c); it; ++it) {
      sum += it.value();
      ++nz;
      CHECK(std::abs(it.value()) == 1);
    }
    CHECK(nz == 2);
    CHECK(sum == 0);
  }
  auto Y = build_torus_complex(3, 2);
  const auto& d3 = boundary_operator(Y, 3);
  for (int c = 0; c < d3.cols(); ++c) {
    int nz = 0;
    for (IntSparse::InnerIterator it(d3, c); it; ++it) ++nz;
    CHECK(nz == 6);
  }
  auto Z = build_torus_complex(2, 3);
  const auto& d2 = boundary_operator(Z, 2);
  for (int c = 0; c < d2.cols(); ++c) {
    int nz = 0;
    for (IntSparse::InnerIterator it(d2, c); it; ++it) ++nz;
    CHECK(nz == 4);
  }
  // Total rank of d_2 on T^2_3 against the F_p oracle: 9 faces, one relation.
  CHECK(rank_mod_p(d2) == 8);
  CHECK(Smith_rank(d2) == 8);
}

TEST_CASE("Betti numbers are binomial coefficients") {
  for (int d = 1; d <= 3; ++d)
    for (int N = 2; N <= 6; ++N) {
      auto X = build_torus_complex(d, N);
      for (int k = 0; k <= d; ++k) {
        auto h = integer_cohomology(X, k);
        CHECK(h.betti == binom(d, k));
        CHECK(h.torsion.empty());
        for (const auto& g : h.free_generators) {
          if (k < d) CHECK((X.coboundary(k) * g).isZero());
        }
        // Rank oracle over F_p.
        const int rin = k > 0 ? rank_mod_p(X.coboundary(k - 1)) : 0;
        const int rout = k < d ? rank_mod_p(X.coboundary(k)) : 0;
        CHECK(X.cell_count(k) - rin - rout == h.betti);
      }
    }
}

TEST_CASE("T^2_4 cohomology (1,2,1)") {
  auto X = build_torus_complex(2, 4);
  CHECK(integer_cohomology(X, 0).betti == 1);
  CHECK(integer_cohomology(X, 1).betti == 2);
  CHECK(integer_cohomology(X, 2).betti == 1);
  CHECK(integer_homology(X, 1).betti == 2);
}

TEST_CASE("generator classes are independent and coboundaries classify to zero") {
  std::mt19937_64 rng(3);
  auto X = build_torus_complex(3, 3);
  for (int k = 1; k <= 3; ++k) {
    auto h = cohomology_engine(X, k);
    // Class matrix of the coordinate cocycles must be unimodular.
    IntMatrix m(h.group().betti, h.group().betti);
    int col = 0;
    for (AxisMask s : X.orientations(k)) {
      auto z = coordinate_cocycle(X, s);
      auto c = h.classify(z.values);
      for (int i = 0; i < h.group().betti; ++i) m(i, col) = c.free(i);
      ++col;
    }
    CHECK(std::abs(integer_determinant(m)) == 1);
    auto b = random_int_cochain(X, k - 1, rng);
    auto db = coboundary(X, b);
    CHECK(h.classify(db.values).is_zero());
    auto pre = h.preimage(db.values);
    REQUIRE(pre.has_value());
    CHECK(coboundary(X, IntegerCochain{k - 1, *pre}).values == db.values);
    CHECK(!h.preimage(coordinate_cocycle(X, X.orientations(k)[0]).values).has_value());
  }
}

TEST_CASE("coordinate cycles and cocycles are dual bases") {
  auto X = build_torus_complex(3, 4);
  for (int k = 0; k <= 3; ++k)
    for (AxisMask s : X.orientations(k))
      for (AxisMask t : X.orientations(k))
        CHECK(evaluate(coordinate_cocycle(X, s), coordinate_cycle(X, t)) == (s == t ? 1 : 0));
}

TEST_CASE("wedge pairing of dual generators") {
  auto X = build_torus_complex(3, 4);
  auto a = coordinate_cocycle(X, 0b001);
  auto b = coordinate_cocycle(X, 0b110);
  CHECK(wedge_pairing(X, a, b) == 1);
  CHECK(wedge_pairing(X, coordinate_cocycle(X, 0b010), coordinate_cocycle(X, 0b101)) == -1);
  CHECK(wedge_pairing(X, coordinate_cocycle(X, 0b100), coordinate_cocycle(X, 0b011)) == 1);
  CHECK(wedge_pairing(X, a, coordinate_cocycle(X, 0b011)) == 0);
  CHECK_THROWS_AS(wedge_pairing(X, a, a), std::invalid_argument);
}

TEST_CASE("Leibniz rule and adjointness hold exactly") {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 3; ++d) {
    auto X = build_torus_complex(d, 3);
    for (int k = 0; k < d; ++k)
      for (int l = 0; k + l < d; ++l) {
        auto a = random_int_cochain(X, k, rng);
        auto b = random_int_cochain(X, l, rng);
        auto lhs = coboundary(X, cup_product(X, a, b));
        auto r1 = cup_product(X, coboundary(X, a), b);
        auto r2 = cup_product(X, a, coboundary(X, b));
        const std::int64_t sign = k % 2 ? -1 : 1;
        CHECK(lhs.values == r1.values + sign * r2.values);
      }
    // <a, dc> = (-1)^(k+1) <da, c> for deg a = k, deg c = d-k-1.
    for (int k = 0; k < d; ++k) {
      auto a = random_int_cochain(X, k, rng);
      auto c = random_int_cochain(X, d - k - 1, rng);
      const std::int64_t sign = k % 2 ? 1 : -1;
      CHECK(wedge_pairing(X, a, coboundary(X, c)) == sign * wedge_pairing(X, coboundary(X, a), c));
    }
  }
}

TEST_CASE("Stokes: closed against exact pairs to zero") {
  std::mt19937_64 rng(9);
  auto X = build_torus_complex(3, 4);
  auto a = coordinate_cocycle(X, 0b001);
  auto c = random_int_cochain(X, 1, rng);
  CHECK(wedge_pairing(X, a, coboundary(X, c)) == 0);
}

TEST_CASE("wedge pairing matches smooth closed forms on T^2_4") {
  // alpha = c1 dx + c2 dy + df, beta = e1 dx + e2 dy + dg, with f, g periodic.
  // Discretized by exact edge integrals; the integral of alpha ^ beta is c1 e2 - c2 e1.
  const double tau = 2 * std::numbers::pi;
  auto X = build_torus_complex(2, 4);
  const int N = X.resolution();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    double c1 = u(rng), c2 = u(rng), e1 = u(rng), e2 = u(rng), p = u(rng), q = u(rng);
    auto f = [&](double x, double y) { return p * std::sin(tau * x) * std::cos(tau * y); };
    auto g = [&](double x, double y) { return q * std::cos(tau * (x + 2 * y)); };
    RealCochain a{1, Eigen::VectorXd(X.cell_count(1))}, b{1, Eigen::VectorXd(X.cell_count(1))};
    for (int i = 0; i < X.cell_count(1); ++i) {
      Cell cl = X.cell(1, i);
      const double x = double(cl.base[0]) / N, y = double(cl.base[1]) / N, h = 1.0 / N;
      if (cl.axes == 0b01) {
        a.values(i) = c1 * h + f(x + h, y) - f(x, y);
        b.values(i) = e1 * h + g(x + h, y) - g(x, y);
      } else {
        a.values(i) = c2 * h + f(x, y + h) - f(x, y);
        b.values(i) = e2 * h + g(x, y + h) - g(x, y);
      }
    }
    CHECK(std::abs(wedge_pairing(X, a, b) - (c1 * e2 - c2 * e1)) < 1e-10);
  }
}

TEST_CASE("invalid construction") {
  CHECK_THROWS_AS(build_torus_complex(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_torus_complex(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_torus_complex(2, 1), std::invalid_argument);
  auto X = build_torus_complex(2, 3);
  CHECK_THROWS_AS(boundary_operator(X, 0), std::out_of_range);
  CHECK_THROWS_AS(boundary_operator(X, 3), std::out_of_range);
}
