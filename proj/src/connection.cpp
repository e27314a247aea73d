#include "gerbelab/connection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gerbelab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

void require_three_dimensional(const GoodCover& cover) {
  if (cover.complex().dimension() != 3) throw std::invalid_argument("gerbe connections are built on T^3");
}

// Value of a local box cochain at a global cell.
double at_cell(const BoxChart& chart, const Eigen::VectorXd& v, const Cell& c) {
  const int s = chart.local(c);
  if (s < 0) throw std::logic_error("cell outside the intersection box");
  return v(s);
}

}  // namespace

GerbeConnection zero_connection(std::shared_ptr<const GoodCover> cover) {
  require_three_dimensional(*cover);
  GerbeConnection c{GerbeCocycle(CircleCochain(cover, 2)), {}, {}, {}};
  for (int a = 0; a < cover->nerve().count(0); ++a) c.F.push_back(Eigen::VectorXd::Zero(cover->chart(0, a).slots(2)));
  for (int i = 0; i < cover->nerve().count(1); ++i) c.A.push_back(Eigen::VectorXd::Zero(cover->chart(1, i).slots(1)));
  c.G = RealCochain{3, Eigen::VectorXd::Zero(cover->complex().cell_count(3))};
  return c;
}

GerbeConnection connection_from_staircase(const CechDeRham& s, const RealCochain& G) {
  if (s.q != 3 || !s.cocycle) throw std::invalid_argument("connection needs a degree-3 staircase");
  require_three_dimensional(s.cocycle->cover());
  return GerbeConnection{GerbeCocycle(*s.cocycle), s.levels[0], s.levels[1], G};
}

RealCochain constant_two_form(const CubicalTorusComplex& X, const std::vector<double>& periods) {
  const auto o = X.orientations(2);
  if (X.dimension() != 3 || periods.size() != o.size())
    throw std::invalid_argument("constant_two_form needs d = 3 and three periods");
  RealCochain w{2, Eigen::VectorXd::Zero(X.cell_count(2))};
  const double N2 = double(X.resolution()) * X.resolution();
  for (int c = 0; c < X.cell_count(2); ++c) {
    const auto axes = X.cell(2, c).axes;
    for (std::size_t t = 0; t < o.size(); ++t)
      if (o[t] == axes) w.values(c) = 2 * std::numbers::pi * periods[t] / N2;
  }
  return w;
}

GerbeConnection flat_connection(std::shared_ptr<const GoodCover> cover, const RealCochain& w) {
  if (w.degree != 2 || w.values.size() != cover->complex().cell_count(2))
    throw std::invalid_argument("flat_connection needs a 2-cochain on the cover's complex");
  if (coboundary(cover->complex(), w).values.cwiseAbs().maxCoeff() > 1e-9)
    throw TopologyError("flat_connection: 2-form is not closed");
  auto c = zero_connection(cover);
  for (int a = 0; a < cover->nerve().count(0); ++a) c.F[a] = cover->chart(0, a).restrict(2, w.values);
  return c;
}

GerbeConnection tensor(const GerbeConnection& a, const GerbeConnection& b, int sign) {
  if (a.cover_ptr() != b.cover_ptr()) throw std::invalid_argument("connections live on different covers");
  GerbeConnection c = a;
  c.g = GerbeCocycle(sign > 0 ? a.g.g + b.g.g : a.g.g - b.g.g);
  for (std::size_t i = 0; i < c.F.size(); ++i) c.F[i] += sign * b.F[i];
  for (std::size_t i = 0; i < c.A.size(); ++i) c.A[i] += sign * b.A[i];
  c.G.values += sign * b.G.values;
  return c;
}

ConnectionDiagnostics validate_connection(const GerbeConnection& c) {
  const auto& cover = c.cover();
  const auto& nerve = cover.nerve();
  ConnectionDiagnostics out;
  for (int a = 0; a < nerve.count(0); ++a) {
    const auto& ch = cover.chart(0, a);
    out.curvature_residual =
        std::max(out.curvature_residual, inf_norm(ch.coboundary(2, c.F[a]) - ch.restrict(3, c.G.values)));
  }
  // G is top-degree on T^3, so dG = 0 holds identically.
  out.closed_residual = 0;
  auto dF = real_coboundary(cover, 0, 2, c.F);
  for (int i = 0; i < nerve.count(1); ++i) {
    const double r = inf_norm(dF[i] - cover.chart(1, i).coboundary(1, c.A[i]));
    out.overlap_by_simplex.push_back(r);
    out.overlap_residual = std::max(out.overlap_residual, r);
  }
  auto dA = real_coboundary(cover, 1, 1, c.A);
  for (int i = 0; i < nerve.count(2); ++i) {
    const double r = inf_norm(dA[i] - kTwoPi * c.g.g.increments(i));
    out.cocycle_by_simplex.push_back(r);
    out.cocycle_residual = std::max(out.cocycle_residual, r);
  }
  out.curvature_norm = inf_norm(c.G.values);
  out.is_flat = out.curvature_norm < 1e-9;
  return out;
}

double HolonomyClass::distance_to_zero() const {
  double m = 0;
  for (double p : periods) m = std::max(m, distance_to_integer(p));
  return m;
}

namespace {

struct FlatStaircase {
  std::vector<Eigen::VectorXd> B, f;
  HolonomyClass cls;
};

FlatStaircase flat_staircase(const GerbeConnection& c, RootRule rule) {
  const auto& cover = c.cover();
  const auto& nerve = cover.nerve();
  const double g_norm = inf_norm(c.G.values);
  if (g_norm >= 1e-9) {
    std::ostringstream os;
    os << "holonomy needs a flat connection, |G| = " << g_norm;
    throw TopologyError(os.str());
  }
  FlatStaircase s;
  for (int a = 0; a < nerve.count(0); ++a) s.B.push_back(cover.chart(0, a).homotopy(2, c.F[a], rule));
  auto dB = real_coboundary(cover, 0, 1, s.B);
  for (int i = 0; i < nerve.count(1); ++i) s.f.push_back(cover.chart(1, i).homotopy(1, c.A[i] - dB[i], rule));
  auto df = real_coboundary(cover, 1, 0, s.f);
  auto lifts = c.g.g.lift();
  s.cls.nerve_constants = Eigen::VectorXd(nerve.count(2));
  for (int i = 0; i < nerve.count(2); ++i) {
    Eigen::VectorXd r = df[i] / kTwoPi - lifts[i];
    const double mean = r.mean();
    s.cls.constant_deviation = std::max(s.cls.constant_deviation, (r.array() - mean).abs().maxCoeff());
    s.cls.nerve_constants(i) = mean;
  }
  if (s.cls.constant_deviation > 1e-6) {
    std::ostringstream os;
    os << "holonomy constants vary across an intersection by " << s.cls.constant_deviation;
    throw NumericalError(os.str());
  }
  const auto cycles = coordinate_nerve_cycles(cover, 2);
  s.cls.raw = Eigen::VectorXd(int(cycles.size()));
  s.cls.periods = Eigen::VectorXd(int(cycles.size()));
  for (std::size_t t = 0; t < cycles.size(); ++t) {
    s.cls.raw(t) = s.cls.nerve_constants.dot(cycles[t].cast<double>());
    s.cls.periods(t) = frac(s.cls.raw(t));
  }
  return s;
}

}  // namespace

HolonomyClass holonomy(const GerbeConnection& c, RootRule rule) { return flat_staircase(c, rule).cls; }

FlatTrivializationData flat_trivialization(const GerbeConnection& c, RootRule rule) {
  const auto& cover = c.cover();
  const auto& nerve = cover.nerve();
  FlatStaircase s = flat_staircase(c, rule);

  const auto cls = characteristic_class(c.g.g);
  auto pre = cover.nerve_cohomology(3).preimage(cls.cocycle);
  if (!pre) throw TopologyError("flat connection on a gerbe with nonzero characteristic class");
  const Eigen::VectorXd m0 = -pre->cast<double>();

  const auto cycles = coordinate_nerve_cycles(cover, 2);
  const auto duals = dual_nerve_cocycles(cover, 2);
  FlatTrivializationData out;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nerve.count(2));
  for (std::size_t t = 0; t < cycles.size(); ++t) {
    const double p = (s.cls.nerve_constants - m0).dot(cycles[t].cast<double>());
    out.rounding_gap = std::max(out.rounding_gap, distance_to_integer(p));
    z += std::round(p) * duals[t].cast<double>();
  }
  if (out.rounding_gap > 1e-6) {
    std::ostringstream os;
    os << "holonomy is not trivial (distance " << out.rounding_gap << ")";
    throw NonzeroHolonomyError(os.str(), s.cls);
  }
  double residual = 0;
  out.k = solve_nerve_coboundary(cover, 1, -s.cls.nerve_constants + m0 + z, &residual);
  if (residual > 1e-8) {
    std::ostringstream os;
    os << "flat trivialization constants failed (residual " << residual << ")";
    throw NumericalError(os.str());
  }
  std::vector<Eigen::VectorXd> lifts(nerve.count(1));
  for (int i = 0; i < nerve.count(1); ++i) lifts[i] = (s.f[i] / kTwoPi).array() + out.k(i);
  out.h.emplace(CircleCochain::from_real(c.cover_ptr(), 1, lifts));
  out.cocycle_residual = circle_coboundary(out.h->f).distance(c.g.g);
  auto dB = real_coboundary(cover, 0, 1, s.B);
  for (int i = 0; i < nerve.count(1); ++i)
    out.compatibility_residual =
        std::max(out.compatibility_residual, inf_norm(c.A[i] - dB[i] - kTwoPi * out.h->f.increments(i)));
  out.B = std::move(s.B);
  return out;
}

Eigen::VectorXd line_holonomy(const FlatTrivializationData& a, const FlatTrivializationData& b) {
  if (!a.h || !b.h) throw std::invalid_argument("incomplete flat trivialization");
  const auto& cover = a.h->f.cover();
  const auto& X = cover.complex();
  const CircleCochain ell = b.h->f - a.h->f;
  const auto orients = X.orientations(1);
  Eigen::VectorXd out(int(orients.size()));
  for (std::size_t t = 0; t < orients.size(); ++t) {
    const auto lift = total_chain_lift(cover, coordinate_cycle(X, orients[t]));
    double conn = 0, trans = 0;
    for (const auto& [key, coef] : lift.levels[0])
      conn += coef * at_cell(cover.chart(0, key.second), b.B[key.second] - a.B[key.second], X.cell(1, key.first));
    for (const auto& [key, coef] : lift.levels[1])
      trans += coef * at_cell(cover.chart(1, key.second), ell.values(key.second), X.cell(0, key.first));
    out(t) = frac(conn / kTwoPi - trans);
  }
  return out;
}

double surface_holonomy(const GerbeConnection& c, const IntegerCochain& S, const std::vector<int>* assignment,
                        HubRule rule) {
  if (S.degree != 2) throw std::invalid_argument("surface must be a 2-chain");
  const auto& cover = c.cover();
  const auto& X = cover.complex();
  const auto lift = total_chain_lift(cover, S, assignment, rule);
  double faces = 0, edges = 0, vertices = 0;
  for (const auto& [key, coef] : lift.levels[0])
    faces += coef * at_cell(cover.chart(0, key.second), c.F[key.second], X.cell(2, key.first));
  for (const auto& [key, coef] : lift.levels[1])
    edges += coef * at_cell(cover.chart(1, key.second), c.A[key.second], X.cell(1, key.first));
  for (const auto& [key, coef] : lift.levels[2])
    vertices += coef * at_cell(cover.chart(2, key.second), c.g.g.values(key.second), X.cell(0, key.first));
  return frac((faces + edges) / kTwoPi - vertices);
}

PointGerbe point_gerbe_connection(const FlatMetric& m, const std::array<double, 3>& p,
                                  std::shared_ptr<const GoodCover> cover) {
  const auto& X = m.complex();
  if (cover->complex().dimension() != X.dimension() || cover->complex().resolution() != X.resolution())
    throw std::invalid_argument("metric and cover use different complexes");
  require_three_dimensional(*cover);
  const int N = X.resolution();
  if (N < 4) throw std::invalid_argument("point gerbe needs N >= 4");
  const double h = m.spacing();

  PointGerbe out;
  const RealCochain delta = delta_current(m, p);
  RealCochain rhs{3, m.volume().values - kTwoPi * delta.values};
  out.H = solve_poisson(m, rhs);
  out.poisson_residual = inf_norm(apply_laplacian(m, out.H).values - rhs.values);
  out.F0 = codifferential(m, out.H);

  const Cell centre = X.cell(3, containing_cube(X, p));
  out.ball = IntegerCochain{3, IntVector::Zero(X.cell_count(3))};
  out.H1 = RealCochain{3, Eigen::VectorXd::Zero(X.cell_count(3))};
  for (int c = 0; c < X.cell_count(3); ++c) {
    const Cell cube = X.cell(3, c);
    int dist = 0, sq = 0;
    for (int a = 0; a < 3; ++a) {
      int t = ((cube.base[a] - centre.base[a]) % N + N) % N;
      if (t > N / 2) t -= N;
      dist += std::abs(t);
      sq += t * t;
    }
    if (dist <= 1) out.ball.values(c) = 1;
    if (dist <= 2) out.H1.values(c) = -std::pow(h, 5) * sq / 6.0;
  }
  out.F1 = codifferential(m, out.H1);
  const auto lap1 = apply_laplacian(m, out.H1);
  for (int c = 0; c < X.cell_count(3); ++c)
    if (out.ball.values(c)) out.local_residual = std::max(out.local_residual, std::abs(lap1.values(c) - m.volume().values(c)));
  out.ball_boundary = IntegerCochain{2, X.boundary(3) * out.ball.values};
  out.sphere_integral = out.ball_boundary.values.cast<double>().dot(out.F0.values - out.F1.values);

  // F_a = d*H, corrected on the sets that contain p's cube so that dF_a = V.
  std::vector<Eigen::VectorXd> F;
  for (int a = 0; a < cover->nerve().count(0); ++a) {
    const auto& ch = cover->chart(0, a);
    Eigen::VectorXd Fa = ch.restrict(2, out.F0.values);
    const Eigen::VectorXd d = ch.restrict(3, delta.values);
    if (d.lpNorm<Eigen::Infinity>() > 0) Fa += kTwoPi * ch.homotopy(3, d);
    F.push_back(std::move(Fa));
  }
  out.staircase = staircase_from_local(cover, 3, std::move(F));
  out.connection.emplace(connection_from_staircase(out.staircase, m.volume()));
  return out;
}

nlohmann::json to_json(const GerbeConnection& c) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["cocycle"] = to_json(c.g.g);
  j["F"] = nlohmann::json::array();
  for (const auto& f : c.F) j["F"].push_back(vec(f));
  j["A"] = nlohmann::json::array();
  for (const auto& a : c.A) j["A"].push_back(vec(a));
  j["G"] = vec(c.G.values);
  return j;
}

}  // namespace gerbelab
