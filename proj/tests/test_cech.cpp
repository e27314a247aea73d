#include <doctest.h>

#include "gerbelab/cech.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace gerbelab;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct Fixture {
  std::shared_ptr<const CubicalTorusComplex> X;
  std::shared_ptr<const GoodCover> U;
  explicit Fixture(int d, int N)
      : X(std::make_shared<CubicalTorusComplex>(build_torus_complex(d, N))),
        U(std::make_shared<GoodCover>(good_cover_torus(X))) {}
};

// Constant form m * 2pi / N^q on every q-cell oriented along `axes`.
RealCochain constant_form(const CubicalTorusComplex& X, AxisMask axes, double m) {
  const int q = std::popcount(axes);
  RealCochain G{q, Eigen::VectorXd::Zero(X.cell_count(q))};
  for (int c = 0; c < X.cell_count(q); ++c)
    if (X.cell(q, c).axes == axes) G.values(c) = m * kTwoPi / std::pow(X.resolution(), q);
  return G;
}

CircleCochain random_cochain(std::shared_ptr<const GoodCover> U, int k, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Eigen::VectorXd> lifts;
  for (int i = 0; i < U->nerve().count(k); ++i) {
    Eigen::VectorXd v(U->chart(k, i).slots(0));
    for (auto& x : v) x = u(rng);
    lifts.push_back(v);
  }
  return CircleCochain::from_real(U, k, lifts);
}

int orientation_position(const CubicalTorusComplex& X, AxisMask axes) {
  const auto o = X.orientations(std::popcount(axes));
  return int(std::find(o.begin(), o.end(), axes) - o.begin());
}

}  // namespace

TEST_CASE("frac and distance to integer") {
  CHECK(frac(2.25) == doctest::Approx(0.25));
  CHECK(frac(-0.25) == doctest::Approx(0.75));
  CHECK(frac(-1e-18) < 1.0);
  CHECK(distance_to_integer(2.9) == doctest::Approx(0.1));
}

TEST_CASE("circle coboundary squares to zero") {
  Fixture F(2, 5);
  std::mt19937 rng(7);
  for (int k = 0; k <= 1; ++k) {
    auto c = random_cochain(F.U, k, rng);
    auto dd = circle_coboundary(circle_coboundary(c));
    CHECK(dd.is_zero(1e-9));
    CHECK(cocycle_check(circle_coboundary(c)).ok());
  }
}

TEST_CASE("lift reproduces values and rejects inconsistent increments") {
  Fixture F(2, 4);
  std::mt19937 rng(3);
  auto c = random_cochain(F.U, 1, rng);
  auto back = CircleCochain::from_real(F.U, 1, c.lift());
  CHECK(back.distance(c) < 1e-12);
  c.increments(0)(0) += 0.3;
  CHECK_THROWS_AS(c.lift(), TopologyError);
}

TEST_CASE("antisymmetric tuple access") {
  Fixture F(2, 4);
  std::mt19937 rng(5);
  auto c = random_cochain(F.U, 1, rng);
  const auto& s = F.U->nerve().simplex(1, 0);
  const int v = F.U->chart(1, 0).global_vertex({0, 0, 0});
  const double a = c.value({s[0], s[1]}, v), b = c.value({s[1], s[0]}, v);
  CHECK(distance_to_integer(a + b) < 1e-12);
  CHECK(c.value({s[0], s[0]}, v) == 0.0);
}

TEST_CASE("dual nerve cocycles pair to the identity") {
  Fixture F(3, 4);
  for (int q = 1; q <= 3; ++q) {
    const auto D = dual_nerve_cocycles(*F.U, q);
    const auto Z = coordinate_nerve_cycles(*F.U, q);
    REQUIRE(D.size() == Z.size());
    for (std::size_t s = 0; s < D.size(); ++s) {
      CHECK((F.U->nerve().coboundary(q) * D[s]).isZero());
      for (std::size_t t = 0; t < Z.size(); ++t) CHECK(D[s].dot(Z[t]) == (s == t ? 1 : 0));
    }
  }
}

TEST_CASE("total chain lift is a nerve cycle and independent of assignment") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  for (AxisMask S : X.orientations(2)) {
    const auto cyc = coordinate_cycle(X, S);
    auto low = total_chain_lift(*F.U, cyc);
    auto high = total_chain_lift(*F.U, cyc, nullptr, HubRule::Highest);
    if (F.U->nerve().max_dimension() >= 3) CHECK((F.U->nerve().coboundary(1).transpose() * low.nerve_cycle).isZero());
    // Different hubs give homologous nerve cycles: same pairing with every cocycle.
    for (const auto& z : F.U->nerve_cohomology(2).group().free_generators)
      CHECK(z.dot(low.nerve_cycle) == z.dot(high.nerve_cycle));
    std::vector<int> assign(X.cell_count(2));
    for (int c = 0; c < X.cell_count(2); ++c) assign[c] = 31 - std::countl_zero(F.U->membership(2, c));
    auto other = total_chain_lift(*F.U, cyc, &assign);
    for (const auto& z : F.U->nerve_cohomology(2).group().free_generators)
      CHECK(z.dot(other.nerve_cycle) == z.dot(low.nerve_cycle));
  }
}

TEST_CASE("staircase of the volume form gives the generator class") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  for (int m : {0, 1, 2}) {
    auto res = derham_to_cech(F.U, constant_form(X, 7u, m));
    REQUIRE(res.cocycle);
    CHECK(res.constant_deviation < 1e-9);
    CHECK(res.rounding_gap < 1e-9);
    CHECK(res.adjustment_residual < 1e-9);
    CHECK(res.periods(0) == m);
    GerbeCocycle g(*res.cocycle);
    auto cls = characteristic_class(g.g);
    CHECK(cls.periods(0) == m);
    CHECK(cls.is_zero() == (m == 0));
    auto t = trivialize(g);
    CHECK(t.trivialization.has_value() == (m == 0));
    CHECK(t.characteristic.periods(0) == m);
  }
}

TEST_CASE("staircase in degree one and two matches periods") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  for (AxisMask S : X.orientations(2)) {
    auto res = derham_to_cech(F.U, constant_form(X, S, 1));
    const int pos = orientation_position(X, S);
    for (int t = 0; t < 3; ++t) CHECK(res.periods(t) == (t == pos ? 1 : 0));
    auto cls = characteristic_class(*res.cocycle);
    CHECK(cls.periods == res.periods);
  }
  for (AxisMask S : X.orientations(1)) {
    auto res = derham_to_cech(F.U, constant_form(X, S, -2));
    const int pos = orientation_position(X, S);
    for (int t = 0; t < 3; ++t) CHECK(res.periods(t) == (t == pos ? -2 : 0));
    CHECK(characteristic_class(*res.cocycle).periods == res.periods);
  }
}

TEST_CASE("class is additive and invariant under coboundaries") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  auto V = *derham_to_cech(F.U, constant_form(X, 7u, 1)).cocycle;
  auto V2 = *derham_to_cech(F.U, constant_form(X, 7u, 2)).cocycle;
  auto diff = V2 - V.scaled(2);
  CHECK(cocycle_check(diff).ok());
  CHECK(characteristic_class(diff).is_zero());
  CHECK(characteristic_class(V + V).periods(0) == 2);
  std::mt19937 rng(11);
  auto regauged = V + circle_coboundary(random_cochain(F.U, 1, rng));
  CHECK(characteristic_class(regauged).periods(0) == 1);
  CHECK_FALSE(characteristic_class(regauged).is_zero());
}

TEST_CASE("trivialization round trip and difference classes") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  std::mt19937 rng(19);
  GerbeCocycle g(circle_coboundary(random_cochain(F.U, 1, rng)));
  auto t = trivialize(g);
  REQUIRE(t.trivialization);
  CHECK(circle_coboundary(t.trivialization->f).distance(g.g) < 1e-9);

  // Twisting by a line cocycle of Chern class (0, 0, 1) changes the difference class.
  auto line = *derham_to_cech(F.U, constant_form(X, 3u, 1)).cocycle;
  Trivialization other(t.trivialization->f + line);
  auto diff = difference_of_trivializations(*t.trivialization, other);
  CHECK(diff.h.distance(line) < 1e-9);
  CHECK_FALSE(diff.chern.is_zero());
  CHECK(diff.chern.periods(orientation_position(X, 3u)) == 1);
  CHECK(diff.chern.periods.cwiseAbs().sum() == 1);

  auto same = difference_of_trivializations(*t.trivialization, *t.trivialization);
  CHECK(same.chern.is_zero());

  Trivialization unrelated(random_cochain(F.U, 1, rng));
  CHECK_THROWS_AS(difference_of_trivializations(*t.trivialization, unrelated), std::invalid_argument);
}

TEST_CASE("staircase rejects bad input") {
  Fixture F(3, 4);
  const auto& X = *F.X;
  CHECK_THROWS_AS(derham_to_cech(F.U, constant_form(X, 7u, 0.5)), TopologyError);
  RealCochain bump{2, Eigen::VectorXd::Zero(X.cell_count(2))};
  bump.values(0) = 1.0;
  CHECK_THROWS_AS(derham_to_cech(F.U, bump), TopologyError);
  std::mt19937 rng(2);
  auto c = random_cochain(F.U, 2, rng);
  CHECK_THROWS_AS(GerbeCocycle{c}, TopologyError);
}

TEST_CASE("circle on a triangle nerve") {
  Fixture F(1, 6);
  auto res = derham_to_cech(F.U, constant_form(*F.X, 1u, 1));
  CHECK(res.periods(0) == 1);
  auto cls = characteristic_class(*res.cocycle);
  CHECK(cls.periods(0) == 1);
  CHECK(cocycle_check(*res.cocycle).ok());
}

TEST_CASE("JSON round trip") {
  Fixture F(2, 4);
  std::mt19937 rng(23);
  auto c = random_cochain(F.U, 1, rng);
  auto j = to_json(c);
  auto back = circle_cochain_from_json(F.U, nlohmann::json::parse(j.dump()));
  CHECK(back.distance(c) == 0.0);
  j["simplices"][0]["values"][0] = 1.5;
  CHECK_THROWS_AS(circle_cochain_from_json(F.U, j), std::invalid_argument);
}
