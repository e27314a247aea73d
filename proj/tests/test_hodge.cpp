#include <doctest.h>

#include "gerbelab/hodge.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace gerbelab;

namespace {

RealCochain random_cochain(const CubicalTorusComplex& X, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealCochain c{k, Eigen::VectorXd(X.cell_count(k))};
  for (Eigen::Index i = 0; i < c.values.size(); ++i) c.values(i) = g(rng);
  return c;
}

const double kTwoPi = 2 * std::numbers::pi;

}  // namespace

TEST_CASE("volume normalization") {
  for (int d = 1; d <= 3; ++d) {
    auto m = make_flat_metric(d, 4);
    CHECK(std::abs(m.total_volume() - kTwoPi) < 1e-12);
    for (int k = 0; k <= d; ++k) CHECK(m.star_weight(k) > 0);
  }
  auto m = make_flat_metric(3, 4);
  RealCochain one{0, Eigen::VectorXd::Ones(m.complex().cell_count(0))};
  auto v = hodge_star(m, one);
  CHECK(v.dual);
  CHECK((v.cochain.values - m.volume().values).lpNorm<Eigen::Infinity>() < 1e-15);
  CHECK(std::abs(v.cochain.values.sum() - kTwoPi) < 1e-12);
}

TEST_CASE("star squares to the standard sign") {
  std::mt19937_64 rng(1);
  for (int d = 1; d <= 3; ++d) {
    auto m = make_flat_metric(d, 4);
    for (int k = 0; k <= d; ++k) {
      auto a = random_cochain(m.complex(), k, rng);
      auto ss = hodge_star(m, hodge_star(m, a));
      CHECK(!ss.dual);
      const double sign = (k * (d - k)) % 2 ? -1 : 1;
      CHECK((ss.cochain.values - sign * a.values).lpNorm<Eigen::Infinity>() < 1e-12);
    }
  }
}

TEST_CASE("star of dx_1 is the flat continuum value") {
  // On a cube of side L, *dx_1 = (1/L) du_2 ^ du_3 with u = L x; over a face of
  // side h this integrates to h^2 / L = h / N.
  auto m = make_flat_metric(3, 4);
  const auto& X = m.complex();
  const auto& dx1 = m.integral_harmonic_basis(1).basis[0];
  auto s = hodge_star(m, dx1);
  REQUIRE(s.cochain.degree == 2);
  const double expect = m.spacing() / X.resolution();
  for (int i = 0; i < X.cell_count(2); ++i) {
    Cell c = X.cell(2, i);
    CHECK(std::abs(s.cochain.values(i) - (c.axes == 0b110 ? expect : 0.0)) < 1e-14);
  }
}

TEST_CASE("Laplacian equals d d* + d* d built from stars") {
  std::mt19937_64 rng(2);
  for (int d = 2; d <= 3; ++d) {
    auto m = make_flat_metric(d, 3);
    const auto& X = m.complex();
    for (int k = 0; k <= d; ++k) {
      auto a = random_cochain(X, k, rng);
      Eigen::VectorXd via = Eigen::VectorXd::Zero(a.values.size());
      // d* = (-1)^(d(k+1)+1) * d * on k-forms.
      auto dstar = [&](const RealCochain& c) {
        const int kk = c.degree;
        auto s = hodge_star(m, c);
        FormCochain ds{coboundary(X, s.cochain), true};
        auto back = hodge_star(m, ds);
        const double sign = (d * (kk + 1) + 1) % 2 ? -1 : 1;
        return RealCochain{kk - 1, sign * back.cochain.values};
      };
      if (k > 0) {
        auto c = dstar(a);
        CHECK((c.values - codifferential(m, a).values).lpNorm<Eigen::Infinity>() < 1e-12);
        via += coboundary(X, c).values;
      }
      if (k < d) via += dstar(coboundary(X, a)).values;
      CHECK((via - apply_laplacian(m, a).values).lpNorm<Eigen::Infinity>() < 1e-11);
    }
  }
}

TEST_CASE("kernel dimension equals Betti numbers") {
  for (int d = 1; d <= 3; ++d)
    for (int N = 2; N <= (d == 3 ? 4 : 5); ++N) {
      auto m = make_flat_metric(d, N);
      for (int k = 0; k <= d; ++k) {
        Eigen::MatrixXd L = Eigen::MatrixXd(m.laplacian(k));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
        int zero = 0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) zero += std::abs(es.eigenvalues()(i)) < 1e-9;
        CHECK(zero == int(integer_cohomology(m.complex(), k).betti));
        CHECK(int(m.harmonic_projector_basis(k).cols()) == zero);
      }
    }
}

TEST_CASE("integral harmonic basis") {
  auto m = make_flat_metric(3, 4);
  const auto& X = m.complex();
  auto hb = harmonic_basis(m, 1);
  REQUIRE(hb.basis.size() == 3);
  CHECK((hb.periods - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() < 1e-12);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < X.cell_count(1); ++c) {
      const double expect = X.cell(1, c).axes == (1u << i) ? 1.0 / X.resolution() : 0.0;
      CHECK(std::abs(hb.basis[i].values(c) - expect) < 1e-12);
    }
  auto h0 = harmonic_basis(m, 0);
  REQUIRE(h0.basis.size() == 1);
  CHECK((h0.basis[0].values.array() - 1.0).abs().maxCoeff() < 1e-12);

  // Cross-check with a dense eigensolver on T^2_5.
  auto m2 = make_flat_metric(2, 5);
  auto hb2 = harmonic_basis(m2, 1);
  CHECK(hb2.basis.size() == 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m2.laplacian(1)));
  Eigen::MatrixXd K = es.eigenvectors().leftCols(2);
  for (const auto& b : hb2.basis) {
    CHECK((m2.laplacian(1) * b.values).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((b.values - K * (K.transpose() * b.values)).norm() < 1e-9);
  }
}

TEST_CASE("Poisson solves") {
  std::mt19937_64 rng(4);
  auto m = make_flat_metric(3, 4);
  const auto& X = m.complex();
  auto z = solve_poisson(m, RealCochain{3, Eigen::VectorXd::Zero(X.cell_count(3))});
  CHECK(z.values.isZero());

  std::array<double, 3> p{0.1, 0.2, 0.3};
  RealCochain rhs{3, m.volume().values - kTwoPi * delta_current(m, p).values};
  CHECK(std::abs(rhs.values.sum()) < 1e-12);
  SolverStats st;
  auto H = solve_poisson(m, rhs, &st);
  CHECK((apply_laplacian(m, H).values - rhs.values).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(std::abs(H.values.sum()) < 1e-10);

  for (int k = 0; k <= 3; ++k) {
    auto u = random_cochain(X, k, rng);
    auto u0 = RealCochain{k, u.values - harmonic_projection(m, u).values};
    auto back = solve_poisson(m, apply_laplacian(m, u));
    CHECK((back.values - u0.values).lpNorm<Eigen::Infinity>() < 1e-8);
    for (const auto& h : m.integral_harmonic_basis(k).basis) CHECK(std::abs(back.values.dot(h.values)) < 1e-10);
  }

  RealCochain bad{3, m.volume().values};
  CHECK_THROWS_AS(solve_poisson(m, bad), HarmonicComponentError);
  try {
    solve_poisson(m, bad);
  } catch (const HarmonicComponentError& e) {
    CHECK(std::abs(e.magnitude() - kTwoPi / 8) < 1e-12);
  }
}

TEST_CASE("delta current") {
  auto m = make_flat_metric(3, 4);
  auto d0 = delta_current(m, {0, 0, 0});
  CHECK(d0.values(0) == 1.0);
  CHECK(d0.values.sum() == 1.0);
  auto d1 = delta_current(m, {0.99, 0.5, 0.01});
  CHECK(d1.values.sum() == 1.0);
  CHECK(d1.values(m.complex().cell_index(0b111, {3, 2, 0})) == 1.0);
  CHECK(std::abs((kTwoPi * d1.values - m.volume().values).sum()) < 1e-12);
}

TEST_CASE("Hodge decomposition reassembles") {
  std::mt19937_64 rng(8);
  auto m = make_flat_metric(3, 4);
  auto a = random_cochain(m.complex(), 1, rng);
  auto hd = hodge_decomposition(m, a);
  CHECK(hd.residual < 1e-9);
  CHECK((hd.exact.values + hd.coexact.values + hd.harmonic.values - a.values).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(coboundary(m.complex(), hd.exact).values.lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(codifferential(m, hd.coexact).values.lpNorm<Eigen::Infinity>() < 1e-9);
}
