// Acceptance criteria 1-8.  Prints one line per criterion and exits nonzero
// when any criterion fails.

#include "gerbelab/connection.hpp"
#include "gerbelab/equivalence.hpp"
#include "gerbelab/exterior.hpp"
#include "gerbelab/syz.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace gerbelab;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

std::shared_ptr<const CubicalTorusComplex> torus(int d, int N) {
  return std::make_shared<CubicalTorusComplex>(build_torus_complex(d, N));
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::int64_t max_abs(const IntSparse& A) {
  std::int64_t m = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (IntSparse::InnerIterator it(A, k); it; ++it) m = std::max<std::int64_t>(m, std::abs(it.value()));
  return m;
}

double connection_residual(const ConnectionDiagnostics& d) {
  return std::max({d.curvature_residual, d.closed_residual, d.overlap_residual, d.cocycle_residual});
}

// 1. Exact algebra.
void exact_algebra(Outcome& o) {
  const auto t0 = Clock::now();
  int complexes = 0, covers = 0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int d = 1; d <= 3; ++d)
    for (int N = 2; N <= 6; ++N) {
      auto X = torus(d, N);
      ++complexes;
      for (int k = 2; k <= d; ++k)
        o.require(max_abs(IntSparse(X->boundary(k - 1) * X->boundary(k))) == 0, "dd d=" + std::to_string(d));
      for (int k = 0; k + 2 <= d; ++k)
        o.require(max_abs(IntSparse(X->coboundary(k + 1) * X->coboundary(k))) == 0, "delta delta");
      for (int k = 0; k <= d; ++k) {
        const auto g = integer_cohomology(*X, k);
        o.require(g.betti == binom(d, k) && g.torsion.empty(),
                  "betti d=" + std::to_string(d) + " N=" + std::to_string(N) + " k=" + std::to_string(k));
      }
      if (N < 3) continue;
      auto U = std::make_shared<const GoodCover>(X);
      ++covers;
      o.require(U->all_certified(), "contractible intersections");
      const Nerve& nv = U->nerve();
      for (int k = 0; k + 1 < nv.max_dimension(); ++k)
        o.require(max_abs(IntSparse(nv.coboundary(k + 1) * nv.coboundary(k))) == 0, "nerve delta delta");
      const IntSparse none(nv.count(0), 0);
      o.require(IntegerCohomology(none, nv.coboundary(0), 0).group().betti == 1, "nerve H^0");
      for (int k = 1; k <= d; ++k) {
        const auto& g = U->nerve_cohomology(k).group();
        o.require(g.betti == binom(d, k) && g.torsion.empty(), "nerve betti k=" + std::to_string(k));
      }
      // Circle-valued Cech cochains.
      for (int k = 0; k + 2 < nv.max_dimension() && k <= 1; ++k) {
        Eigen::VectorXd v(nv.count(k));
        for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
        const auto c = CircleCochain::constant(U, k, v);
        o.require(circle_coboundary(circle_coboundary(c)).is_zero(1e-12), "circle delta delta");
      }
    }
  const double t = seconds_since(t0);
  o.require(t < 10, "runtime");
  o.detail << complexes << " complexes (d<=3, N<=6), " << covers << " covers; exact; " << t << " s (limit 10 s)";
}

// 2. Point gerbe.
void point_gerbe(Outcome& o) {
  const std::array<double, 3> p{0.1, 0.2, 0.3};
  double worst_poisson = 0, worst_sphere = 0, t8 = 0;
  for (int N : {4, 6, 8}) {
    const auto t0 = Clock::now();
    auto X = torus(3, N);
    auto U = std::make_shared<const GoodCover>(X);
    const FlatMetric m(X);
    const auto pg = point_gerbe_connection(m, p, U);
    const auto cls = characteristic_class(pg.connection->g.g);
    worst_poisson = std::max(worst_poisson, pg.poisson_residual);
    worst_sphere = std::max(worst_sphere, std::abs(pg.sphere_integral + kTwoPi));
    o.require(pg.poisson_residual < 1e-10, "poisson N=" + std::to_string(N));
    o.require(std::abs(pg.sphere_integral + kTwoPi) < 1e-6, "sphere N=" + std::to_string(N));
    o.require(cls.periods.size() == 1 && cls.periods(0) == 1, "class N=" + std::to_string(N));
    if (N == 8) t8 = seconds_since(t0);
  }
  o.require(t8 < 60, "runtime");
  o.detail << "N=4,6,8: max |Delta H - (V - 2pi delta_p)| = " << worst_poisson << " (tol 1e-10), max |sphere + 2pi| = "
           << worst_sphere << " (tol 1e-6), class 1; N=8 in " << t8 << " s (limit 60 s)";
}

// 3. Staircase round trip.
void staircase(Outcome& o) {
  double worst = 0;
  for (int N : {4, 5}) {
    auto X = torus(3, N);
    auto U = std::make_shared<const GoodCover>(X);
    for (int mult : {0, 1, 2}) {
      RealCochain G{3, Eigen::VectorXd::Constant(X->cell_count(3), mult * kTwoPi / std::pow(N, 3))};
      const auto st = derham_to_cech(U, G);
      if (!st.cocycle) {
        o.require(false, "no cocycle");
        continue;
      }
      const auto cls = characteristic_class(*st.cocycle);
      o.require(st.periods(0) == mult && cls.periods(0) == mult, "class of " + std::to_string(mult) + "V");
      const double r = connection_residual(validate_connection(connection_from_staircase(st, G)));
      worst = std::max(worst, r);
      o.require(r < 1e-9, "connection residual");
    }
  }
  o.detail << "G in {0, V, 2V} on T^3_4, T^3_5: classes 0, 1, 2 exact; max connection residual " << worst << " (tol 1e-9)";
}

// 4. Holonomy well-definedness.
IntegerCochain translated(const CubicalTorusComplex& X, const IntegerCochain& S, std::array<int, 3> shift) {
  IntegerCochain out{S.degree, IntVector::Zero(S.values.size())};
  for (int i = 0; i < X.cell_count(S.degree); ++i) {
    if (!S.values(i)) continue;
    Cell cl = X.cell(S.degree, i);
    for (int a = 0; a < 3; ++a) cl.base[a] = (cl.base[a] + shift[a]) % X.resolution();
    out.values(X.cell_index(cl)) = S.values(i);
  }
  return out;
}

void holonomy_invariance(Outcome& o) {
  auto X = torus(3, 4);
  auto U = std::make_shared<const GoodCover>(X);
  const std::vector<double> periods{0.5, 0, 0};
  const auto c = flat_connection(U, constant_two_form(*X, periods));
  const auto lo = holonomy(c, RootRule::Lowest);
  const auto hi = holonomy(c, RootRule::Highest);

  // Regauge: F_a += d beta_a, A_ab += beta_b - beta_a.
  GerbeConnection g = c;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::VectorXd> beta;
  for (int a = 0; a < U->nerve().count(0); ++a) {
    const auto& ch = U->chart(0, a);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ch.slots(1));
    for (int s = 0; s < ch.slots(1); ++s)
      if (ch.valid(1, s)) b(s) = u(rng);
    g.F[a] += ch.coboundary(1, b);
    beta.push_back(b);
  }
  const auto db = real_coboundary(*U, 0, 1, beta);
  for (std::size_t i = 0; i < g.A.size(); ++i) g.A[i] += db[i];
  const auto gh = holonomy(g);

  double gauge = 0, root = 0, homology = 0, value = 0;
  const auto o2 = X->orientations(2);
  for (std::size_t t = 0; t < o2.size(); ++t) {
    const int ti = int(t);
    gauge = std::max(gauge, distance_to_integer(gh.periods(ti) - lo.periods(ti)));
    root = std::max(root, distance_to_integer(hi.periods(ti) - lo.periods(ti)));
    const auto S = coordinate_cycle(*X, o2[t]);
    const double v = surface_holonomy(c, S);
    for (auto shift : {std::array<int, 3>{1, 0, 0}, {0, 2, 0}, {1, 2, 3}})
      homology = std::max(homology, distance_to_integer(surface_holonomy(c, translated(*X, S, shift)) - v));
    homology = std::max(homology, distance_to_integer(surface_holonomy(c, S, nullptr, HubRule::Highest) - v));
    homology = std::max(homology, distance_to_integer(surface_holonomy(g, S) - v));
    value = std::max(value, distance_to_integer(v - periods[t]));
  }
  o.require(gauge < 1e-9, "regauging");
  o.require(root < 1e-9, "root change");
  o.require(homology < 1e-9, "homology class");
  o.require(value < 1e-9, "periods (1/2, 0, 0)");
  o.detail << "regauge " << gauge << ", root change " << root << ", homologous surfaces " << homology
           << ", |hol - (1/2, 0, 0)| " << value << " (tol 1e-9)";
}

// 5. Dual-criterion agreement.
void dual_criterion(Outcome& o) {
  auto X = torus(3, 4);
  auto U = std::make_shared<const GoodCover>(X);
  const FlatMetric m(X);
  std::mt19937_64 rng(7);
  const auto o2 = X->orientations(2);
  int agree = 0;
  double gap = 0;
  for (int t = 0; t < 100; ++t) {
    const int degree = 1 + t % 3;
    auto [P, Q] = sample_divisor_pair(rng, 4, degree, t % 2 == 0);
    const auto lin = linearly_equivalent(m, P, Q);
    const auto hol = holonomy_equivalent(m, U, P, Q, 1e-6, true);
    agree += lin.verdict == hol.result.verdict;
    Eigen::VectorXd uq = Eigen::VectorXd::Zero(3);
    for (const auto& [x, k] : Q.terms) uq += k * abel_jacobi(m, {0, 0, 0}, x).coords;
    for (const auto& [x, k] : P.terms) uq -= k * abel_jacobi(m, {0, 0, 0}, x).coords;
    for (std::size_t s = 0; s < o2.size(); ++s) {
      const int a = std::countr_zero(unsigned(~o2[s] & 7u));
      const int sign = -shuffle_sign(AxisMask(1u << a), o2[s]);
      gap = std::max(gap, distance_to_integer(hol.gerbe_holonomy->periods(int(s)) - sign * uq(a)));
    }
  }
  std::vector<Eigen::VectorXd> images;
  for (int v = 0; v < X->vertex_count(); ++v) {
    const auto cv = X->vertex_coords(v);
    images.push_back(abel_jacobi(m, {0, 0, 0}, {cv[0] / 4.0, cv[1] / 4.0, cv[2] / 4.0}).coords);
  }
  int collisions = 0;
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      double d = 0;
      for (int a = 0; a < 3; ++a) d = std::max(d, distance_to_integer(images[i](a) - images[j](a)));
      collisions += d < 1e-9;
    }
  o.require(agree == 100, "agreement");
  o.require(gap < 1e-6, "holonomy class");
  o.require(collisions == 0, "Abel-Jacobi injectivity");
  o.detail << "T^3_4, 100 pairs (seed 7): agreement " << agree << "/100, max |hol - (sum u(q) - sum u(p))| mod 1 = "
           << gap << " (tol 1e-6); AJ collisions " << collisions << " over " << images.size() * (images.size() - 1) / 2
           << " vertex pairs";
}

// 6. Monge-Ampere.
void monge_ampere(Outcome& o) {
  const auto t0 = Clock::now();
  const auto init = HessianPotential::from_fourier(Eigen::MatrixXd::Identity(2, 2), 64,
                                                   {{{1, 0, 0}, 0.01, 0}, {{1, 1, 0}, 0.006, 0}});
  const auto sol = solve_monge_ampere(init);
  const auto r = sol.residuals();
  const double slope = convergence_slope(r);
  const double ricci = ricci_tensor(sol.phi).norm;
  const double t = seconds_since(t0);
  o.require(slope >= 1.8, "slope");
  o.require(r.back() < 1e-10, "residual");
  o.require(ricci < 1e-8, "Ricci");
  o.require(t < 30, "runtime");
  o.detail << "n=2, M=64: " << sol.log.size() << " Newton steps, slope " << slope << " (>= 1.8), residual " << r.back()
           << " (tol 1e-10), Ricci " << ricci << " (tol 1e-8), " << t << " s (limit 30 s)";
}

// 7. Mirror / Legendre.
void mirror(Outcome& o) {
  Eigen::MatrixXd Q(2, 2);
  Q << 2, 0.3, 0.3, 1.5;
  const auto phi = HessianPotential::from_fourier(Q, 32, {{{1, 0, 0}, 0.01, 0}, {{1, 1, 0}, 0.004, 0.002}});
  const double inv = legendre_involution_error(phi);
  const auto mc = mirror_metric_check(phi);
  double quad = 0;
  Eigen::MatrixXd Q3(3, 3);
  Q3 << 1.5, 0.2, 0, 0.2, 1, 0.1, 0, 0.1, 1.2;
  for (const Eigen::MatrixXd& A : {Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)), Q, Q3}) {
    const auto q = HessianPotential::quadratic(A, 8);
    const auto lt = legendre_transform(q);
    const Eigen::MatrixXd Ai = A.inverse();
    quad = std::max(quad, (lt.dual.Q() - Ai).cwiseAbs().maxCoeff());
    const Eigen::VectorXd vals = lt.dual.node_values();
    const auto H = lt.dual.hessian_field();
    for (int i = 0; i < q.grid().size(); ++i) {
      const Eigen::VectorXd xi = lt.dual.node_point(i);
      quad = std::max(quad, std::abs(vals(i) - 0.5 * xi.dot(Ai * xi)));
      quad = std::max(quad, (H[i] - Ai).cwiseAbs().maxCoeff());
    }
  }
  o.require(inv < 1e-8, "involution");
  o.require(mc.hessian_inverse_error < 1e-6, "Hessian inverse");
  o.require(mc.pullback_error < 1e-6, "pullback");
  o.require(quad < 1e-12, "quadratic");
  o.detail << "involution " << inv << " (tol 1e-8), Hessian inverse " << mc.hessian_inverse_error
           << " (tol 1e-6), pullback " << mc.pullback_error << " (tol 1e-6), quadratic duals " << quad << " (tol 1e-12)";
}

// 8. Flat Calabi-Yau identities.
void flat_cy(Outcome& o) {
  int total = 0, held = 0;
  bool normal_identity = false;
  for (int n : {2, 3}) {
    const auto rep = flat_cy_check(n);
    for (const auto& c : rep.checks) {
      ++total;
      held += c.holds;
      o.require(c.holds, "n=" + std::to_string(n) + ": " + c.name);
      if (n == 3 && c.name == "{y = 0}: iota(X) omega = -* iota(X) Omega_2 for normal X") normal_identity = c.holds;
    }
  }
  o.require(normal_identity, "normal-field identity on the coordinate plane");
  o.detail << held << "/" << total << " identities exact (n = 2, 3), including iota(X) omega = -* iota(X) Omega_2 on {y = 0}";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"exact algebra suite", exact_algebra},
      {"point-gerbe connection", point_gerbe},
      {"staircase round trip", staircase},
      {"holonomy well-definedness", holonomy_invariance},
      {"dual-criterion agreement", dual_criterion},
      {"Monge-Ampere solver", monge_ampere},
      {"mirror/Legendre suite", mirror},
      {"flat Calabi-Yau identities", flat_cy},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.detail.precision(3);
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
