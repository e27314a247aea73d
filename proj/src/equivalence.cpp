#include "gerbelab/equivalence.hpp"

#include <cmath>
#include <sstream>

namespace gerbelab {

PointDivisor::PointDivisor(std::vector<std::pair<Point3, int>> t) : terms(std::move(t)) {
  for (auto& [p, mult] : terms)
    for (double& x : p) x = frac(x);
}

int PointDivisor::degree() const {
  int d = 0;
  for (const auto& term : terms) d += term.second;
  return d;
}

SnappedPoint snap(const CubicalTorusComplex& X, const Point3& p) {
  const int N = X.resolution();
  SnappedPoint s;
  std::array<int, 3> v{0, 0, 0};
  for (int a = 0; a < X.dimension(); ++a) {
    const double t = frac(p[a]) * N;
    const double r = std::round(t);
    s.remainder[a] = t - r;
    v[a] = int(r) % N;
  }
  s.vertex = X.vertex_linear(v);
  return s;
}

IntegerCochain lattice_path(const CubicalTorusComplex& X, int a, int b, std::array<int, 3> winding) {
  const int N = X.resolution(), d = X.dimension();
  IntegerCochain path{1, IntVector::Zero(X.cell_count(1))};
  auto pos = X.vertex_coords(a);
  const auto target = X.vertex_coords(b);
  for (int ax = 0; ax < d; ++ax) {
    int t = ((target[ax] - pos[ax]) % N + N) % N;
    if (t > N / 2) t -= N;
    t += winding[ax] * N;
    const AxisMask mask = AxisMask(1u << ax);
    for (; t > 0; --t) {
      path.values(X.cell_index(mask, pos)) += 1;
      pos[ax] = (pos[ax] + 1) % N;
    }
    for (; t < 0; ++t) {
      pos[ax] = (pos[ax] + N - 1) % N;
      path.values(X.cell_index(mask, pos)) -= 1;
    }
  }
  return path;
}

namespace {

// Integral of each harmonic basis form from the snapped vertex to the point.
Eigen::VectorXd subcell_correction(const FlatMetric& m, const SnappedPoint& s) {
  const auto& X = m.complex();
  const auto& basis = m.integral_harmonic_basis(1).basis;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(int(basis.size()));
  const auto v = X.vertex_coords(s.vertex);
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (int a = 0; a < X.dimension(); ++a)
      out(j) += s.remainder[a] * basis[j].values(X.cell_index(AxisMask(1u << a), v));
  return out;
}

Eigen::VectorXd pair_with_basis(const FlatMetric& m, const Eigen::VectorXd& chain) {
  const auto& basis = m.integral_harmonic_basis(1).basis;
  Eigen::VectorXd out(int(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) out(j) = basis[j].values.dot(chain);
  return out;
}

// Path chain sum_Q mult * (o -> q) - sum_P mult * (o -> p) from the origin
// vertex, and the matching sub-cell corrections.
std::pair<IntegerCochain, Eigen::VectorXd> divisor_chain(const FlatMetric& m, const PointDivisor& P,
                                                         const PointDivisor& Q) {
  if (P.degree() != Q.degree()) {
    std::ostringstream os;
    os << "divisor degrees differ: " << P.degree() << " vs " << Q.degree();
    throw std::invalid_argument(os.str());
  }
  const auto& X = m.complex();
  IntegerCochain chain{1, IntVector::Zero(X.cell_count(1))};
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(int(m.integral_harmonic_basis(1).basis.size()));
  auto add = [&](const PointDivisor& D, int sign) {
    for (const auto& [p, mult] : D.terms) {
      const auto s = snap(X, p);
      chain.values += std::int64_t(sign * mult) * lattice_path(X, 0, s.vertex).values;
      corr += double(sign * mult) * subcell_correction(m, s);
    }
  };
  add(Q, 1);
  add(P, -1);
  return {chain, corr};
}

EquivalenceResult make_result(const Eigen::VectorXd& integrals, double tol) {
  EquivalenceResult r;
  r.integrals = integrals;
  r.fractional = integrals.unaryExpr([](double x) { return frac(x); });
  r.verdict = classify_pairings(integrals, tol);
  return r;
}

}  // namespace

AbelJacobiClass abel_jacobi(const FlatMetric& m, const Point3& p, const Point3& x, std::array<int, 3> winding) {
  const auto& X = m.complex();
  const auto sp = snap(X, p), sx = snap(X, x);
  const auto path = lattice_path(X, sp.vertex, sx.vertex, winding);
  AbelJacobiClass u;
  u.raw = pair_with_basis(m, path.values.cast<double>()) + subcell_correction(m, sx) - subcell_correction(m, sp);
  u.coords = u.raw.unaryExpr([](double t) { return frac(t); });
  return u;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "EQUIVALENT";
    case Verdict::NotEquivalent: return "NOT_EQUIVALENT";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

Verdict classify_pairings(const Eigen::VectorXd& pairings, double tol) {
  bool all_integral = true, decisive = false;
  for (double x : pairings) {
    const double dist = distance_to_integer(x);
    if (dist > tol) all_integral = false;
    if (dist >= 0.25 - tol) decisive = true;  // closed band, up to round-off
  }
  if (all_integral) return Verdict::Equivalent;
  return decisive ? Verdict::NotEquivalent : Verdict::Inconclusive;
}

EquivalenceResult linearly_equivalent(const FlatMetric& m, const PointDivisor& P, const PointDivisor& Q, double tol) {
  auto [chain, corr] = divisor_chain(m, P, Q);
  return make_result(pair_with_basis(m, chain.values.cast<double>()) + corr, tol);
}

HolonomyEquivalence holonomy_equivalent(const FlatMetric& m, std::shared_ptr<const GoodCover> cover,
                                        const PointDivisor& P, const PointDivisor& Q, double tol, bool with_gerbe) {
  auto [chain, corr] = divisor_chain(m, P, Q);
  RealCochain gamma{1, chain.values.cast<double>()};
  const auto dec = hodge_decomposition(m, gamma);
  HolonomyEquivalence out;
  out.decomposition_residual = dec.residual;
  if (dec.residual > 1e-8) {
    std::ostringstream os;
    os << "Hodge decomposition of the path chain failed (residual " << dec.residual << ")";
    throw NumericalError(os.str());
  }
  const Eigen::VectorXd harmonic = pair_with_basis(m, dec.harmonic.values);
  out.harmonic_residual = (harmonic - pair_with_basis(m, gamma.values)).lpNorm<Eigen::Infinity>();
  out.result = make_result(harmonic + corr, tol);

  if (with_gerbe) {
    GerbeConnection total = zero_connection(cover);
    auto add = [&](const PointDivisor& D, int sign) {
      for (const auto& [p, mult] : D.terms) {
        const auto pg = point_gerbe_connection(m, p, cover);
        for (int k = 0; k < std::abs(mult); ++k) total = tensor(total, *pg.connection, mult > 0 ? sign : -sign);
      }
    };
    add(Q, 1);
    add(P, -1);
    out.gerbe_holonomy = holonomy(total);
  }
  return out;
}

std::pair<PointDivisor, PointDivisor> sample_divisor_pair(std::mt19937_64& rng, int N, int degree, bool equivalent) {
  if (degree < 1) throw std::invalid_argument("degree must be positive");
  std::uniform_int_distribution<int> coord(0, N - 1);
  auto grid_point = [&] { return Point3{double(coord(rng)) / N, double(coord(rng)) / N, double(coord(rng)) / N}; };
  std::vector<std::pair<Point3, int>> p, q;
  std::array<int, 3> sum{0, 0, 0};
  for (int i = 0; i < degree; ++i) {
    auto x = grid_point();
    for (int a = 0; a < 3; ++a) sum[a] += int(std::lround(x[a] * N));
    p.push_back({x, 1});
  }
  for (int i = 0; i < degree; ++i) {
    auto x = grid_point();
    if (equivalent && i == degree - 1) {
      for (int a = 0; a < 3; ++a) x[a] = double(((sum[a] % N) + N) % N) / N;
    } else {
      for (int a = 0; a < 3; ++a) sum[a] -= int(std::lround(x[a] * N));
    }
    q.push_back({x, 1});
  }
  return {PointDivisor(std::move(p)), PointDivisor(std::move(q))};
}

}  // namespace gerbelab
