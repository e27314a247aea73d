#include "gerbelab/cech.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gerbelab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Sort a tuple, returning the permutation sign (0 if it has repeats).
int sort_with_sign(std::vector<int>& t) {
  int sign = 1;
  for (std::size_t i = 1; i < t.size(); ++i)
    for (std::size_t j = i; j > 0 && t[j - 1] > t[j]; --j) {
      std::swap(t[j - 1], t[j]);
      sign = -sign;
    }
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] == t[i - 1]) return 0;
  return sign;
}

Cell chart_cell(const CubicalTorusComplex& X, const BoxChart& chart, int k, int slot) {
  Cell c;
  c.axes = chart.axes(k, slot);
  const auto o = chart.offset(slot);
  for (int a = 0; a < X.dimension(); ++a) c.base[a] = chart.box().start[a] + o[a];
  return c;
}

}  // namespace

double frac(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

double distance_to_integer(double x) { return std::abs(x - std::round(x)); }

CircleCochain::CircleCochain(std::shared_ptr<const GoodCover> cover, int degree)
    : cover_(std::move(cover)), degree_(degree) {
  if (degree_ < 0 || degree_ > cover_->nerve().max_dimension())
    throw std::out_of_range("circle cochain degree out of range");
  const int n = cover_->nerve().count(degree_);
  values_.resize(n);
  increments_.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& ch = cover_->chart(degree_, i);
    values_[i] = Eigen::VectorXd::Zero(ch.slots(0));
    increments_[i] = Eigen::VectorXd::Zero(ch.slots(1));
  }
}

CircleCochain CircleCochain::from_real(std::shared_ptr<const GoodCover> cover, int degree,
                                       const std::vector<Eigen::VectorXd>& lifts) {
  CircleCochain c(cover, degree);
  if (int(lifts.size()) != c.simplex_count()) throw std::invalid_argument("from_real: wrong number of simplices");
  for (int i = 0; i < c.simplex_count(); ++i) {
    const auto& ch = cover->chart(degree, i);
    if (lifts[i].size() != ch.slots(0)) throw std::invalid_argument("from_real: wrong box size");
    c.values_[i] = lifts[i].unaryExpr([](double x) { return frac(x); });
    c.increments_[i] = ch.coboundary(0, lifts[i]);
  }
  return c;
}

CircleCochain CircleCochain::constant(std::shared_ptr<const GoodCover> cover, int degree,
                                      const Eigen::VectorXd& per_simplex) {
  CircleCochain c(cover, degree);
  if (per_simplex.size() != c.simplex_count()) throw std::invalid_argument("constant: wrong number of simplices");
  for (int i = 0; i < c.simplex_count(); ++i) c.values_[i].setConstant(frac(per_simplex(i)));
  return c;
}

double CircleCochain::value(const std::vector<int>& tuple, int global_vertex) const {
  auto t = tuple;
  const int sign = sort_with_sign(t);
  if (sign == 0) return 0.0;
  const int i = cover_->nerve().index(t);
  if (i < 0) throw std::out_of_range("tuple is not a nerve simplex");
  const auto& X = cover_->complex();
  const int s = cover_->chart(degree_, i).local(Cell{0, X.vertex_coords(global_vertex)});
  if (s < 0) throw std::out_of_range("vertex outside the intersection");
  return sign > 0 ? values_[i](s) : frac(-values_[i](s));
}

std::vector<Eigen::VectorXd> CircleCochain::lift() const {
  std::vector<Eigen::VectorXd> out(values_.size());
  const int d = cover_->complex().dimension();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const auto& ch = cover_->chart(degree_, int(i));
    Eigen::VectorXd L(ch.slots(0));
    for (int s = 0; s < ch.slots(0); ++s) {
      const auto o = ch.offset(s);
      int a = -1;
      for (int b = d - 1; b >= 0; --b)
        if (o[b] > 0) {
          a = b;
          break;
        }
      if (a < 0) {
        L(s) = values_[i](s);
        continue;
      }
      auto prev = o;
      prev[a] -= 1;
      L(s) = L(ch.slot(0, prev)) + increments_[i](ch.slot(1u << a, prev));
      if (distance_to_integer(L(s) - values_[i](s)) > 1e-9) {
        std::ostringstream os;
        os << "circle cochain increments disagree with values by " << distance_to_integer(L(s) - values_[i](s));
        throw TopologyError(os.str());
      }
    }
    out[i] = std::move(L);
  }
  return out;
}

CircleCochain CircleCochain::operator+(const CircleCochain& o) const {
  if (o.degree_ != degree_ || o.cover_ != cover_) throw std::invalid_argument("circle cochains are incompatible");
  CircleCochain r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    r.values_[i] = (values_[i] + o.values_[i]).unaryExpr([](double x) { return frac(x); });
    r.increments_[i] = increments_[i] + o.increments_[i];
  }
  return r;
}

CircleCochain CircleCochain::operator-(const CircleCochain& o) const { return *this + o.scaled(-1); }

CircleCochain CircleCochain::scaled(std::int64_t k) const {
  CircleCochain r(*this);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    r.values_[i] = (double(k) * values_[i]).unaryExpr([](double x) { return frac(x); });
    r.increments_[i] = double(k) * increments_[i];
  }
  return r;
}

double CircleCochain::distance(const CircleCochain& o) const {
  if (o.degree_ != degree_ || o.values_.size() != values_.size())
    throw std::invalid_argument("circle cochains are incompatible");
  double m = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    for (Eigen::Index s = 0; s < values_[i].size(); ++s)
      m = std::max(m, distance_to_integer(values_[i](s) - o.values_[i](s)));
    if (increments_[i].size()) m = std::max(m, (increments_[i] - o.increments_[i]).lpNorm<Eigen::Infinity>());
  }
  return m;
}

bool CircleCochain::is_zero(double tol) const { return distance(CircleCochain(cover_, degree_)) <= tol; }

Eigen::VectorXd restrict_between(const BoxChart& from, const BoxChart& to, int k, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(to.slots(k));
  const int d = to.dimension();
  for (int s = 0; s < to.slots(k); ++s) {
    if (!to.valid(k, s)) continue;
    Cell c;
    c.axes = to.axes(k, s);
    const auto o = to.offset(s);
    for (int a = 0; a < d; ++a) c.base[a] = to.box().start[a] + o[a];
    const int t = from.local(c);
    if (t < 0) throw std::logic_error("restriction target is not inside the source box");
    out(s) = v(t);
  }
  return out;
}

std::vector<Eigen::VectorXd> real_coboundary(const GoodCover& cover, int j, int p,
                                             const std::vector<Eigen::VectorXd>& c) {
  const auto& nerve = cover.nerve();
  if (int(c.size()) != nerve.count(j)) throw std::invalid_argument("real_coboundary: wrong number of simplices");
  std::vector<Eigen::VectorXd> out(nerve.count(j + 1));
  for (int r = 0; r < nerve.count(j + 1); ++r) {
    const auto& to = cover.chart(j + 1, r);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(to.slots(p));
    const auto& s = nerve.simplex(j + 1, r);
    for (int i = 0; i <= j + 1; ++i) {
      auto f = s;
      f.erase(f.begin() + i);
      const int fi = nerve.index(f);
      const double sgn = i % 2 ? -1 : 1;
      acc += sgn * restrict_between(cover.chart(j, fi), to, p, c[fi]);
    }
    out[r] = std::move(acc);
  }
  return out;
}

CircleCochain circle_coboundary(const CircleCochain& c) {
  const auto& cover = c.cover();
  const int k = c.degree();
  if (k + 1 > cover.nerve().max_dimension()) throw std::out_of_range("coboundary exceeds the nerve dimension");
  std::vector<Eigen::VectorXd> vals(c.simplex_count()), incs(c.simplex_count());
  for (int i = 0; i < c.simplex_count(); ++i) {
    vals[i] = c.values(i);
    incs[i] = c.increments(i);
  }
  auto dv = real_coboundary(cover, k, 0, vals);
  auto di = real_coboundary(cover, k, 1, incs);
  CircleCochain out(c.cover_ptr(), k + 1);
  for (int r = 0; r < out.simplex_count(); ++r) {
    out.values(r) = dv[r].unaryExpr([](double x) { return frac(x); });
    out.increments(r) = di[r];
  }
  return out;
}

CochainCheck cocycle_check(const CircleCochain& c) {
  CochainCheck chk;
  auto dc = circle_coboundary(c);
  for (int r = 0; r < dc.simplex_count(); ++r) {
    for (Eigen::Index s = 0; s < dc.values(r).size(); ++s)
      chk.value_residual = std::max(chk.value_residual, distance_to_integer(dc.values(r)(s)));
    if (dc.increments(r).size())
      chk.increment_residual = std::max(chk.increment_residual, dc.increments(r).lpNorm<Eigen::Infinity>());
  }
  return chk;
}

GerbeCocycle::GerbeCocycle(CircleCochain c) : g(std::move(c)) {
  if (g.degree() != 2) throw std::invalid_argument("gerbe cocycle must have degree 2");
  auto chk = cocycle_check(g);
  if (!chk.ok()) {
    std::ostringstream os;
    os << "not a cocycle: value residual " << chk.value_residual << ", increment residual " << chk.increment_residual;
    throw TopologyError(os.str());
  }
}

Trivialization::Trivialization(CircleCochain c) : f(std::move(c)) {
  if (f.degree() != 1) throw std::invalid_argument("trivialization must have degree 1");
}

int canonical_sign(int q) {
  const int j = q - 1;
  const int s = ((j * (j - 1) / 2) % 2) ? -1 : 1;
  return -s;
}

TotalChain total_chain_lift(const GoodCover& cover, const IntegerCochain& cycle, const std::vector<int>* assignment,
                            HubRule rule) {
  const auto& X = cover.complex();
  const auto& nerve = cover.nerve();
  const int k = cycle.degree;
  if (cycle.values.size() != X.cell_count(k)) throw std::invalid_argument("cycle length does not match degree");
  if (k > 0 && !(X.boundary(k) * cycle.values).isZero()) throw std::invalid_argument("chain is not closed");
  if (k > nerve.max_dimension()) throw std::out_of_range("cycle degree exceeds nerve dimension");

  auto hub = [&](int deg, int cell) {
    const std::uint32_t m = cover.membership(deg, cell);
    return rule == HubRule::Lowest ? std::countr_zero(m) : 31 - std::countl_zero(m);
  };

  TotalChain out;
  out.levels.resize(k + 1);
  for (int c = 0; c < X.cell_count(k); ++c) {
    const std::int64_t coef = cycle.values(c);
    if (coef == 0) continue;
    const int alpha = assignment ? (*assignment)[c] : hub(k, c);
    if (alpha < 0 || alpha >= cover.set_count() || !(cover.membership(k, c) >> alpha & 1u))
      throw std::invalid_argument("cell assignment is not subordinate to the cover");
    out.levels[0][{c, alpha}] += coef;
  }
  for (int j = 0; j < k; ++j) {
    const IntSparse& B = X.boundary(k - j);
    std::map<std::pair<int, int>, std::int64_t> bd;
    for (const auto& [key, coef] : out.levels[j]) {
      if (coef == 0) continue;
      for (IntSparse::InnerIterator it(B, key.first); it; ++it) bd[{int(it.row()), key.second}] += it.value() * coef;
    }
    for (const auto& [key, coef] : bd) {
      if (coef == 0) continue;
      const int r = hub(k - j - 1, key.first);
      auto s = nerve.simplex(j, key.second);
      if (std::find(s.begin(), s.end(), r) != s.end()) continue;
      int greater = 0;
      for (int a : s) greater += a > r;
      s.push_back(r);
      std::sort(s.begin(), s.end());
      const int idx = nerve.index(s);
      if (idx < 0) throw std::logic_error("cone simplex missing from the nerve");
      out.levels[j + 1][{key.first, idx}] += (greater % 2 ? -1 : 1) * coef;
    }
  }
  out.nerve_cycle = IntVector::Zero(nerve.count(k));
  for (const auto& [key, coef] : out.levels[k]) out.nerve_cycle(key.second) += coef;
  return out;
}

std::vector<IntVector> coordinate_nerve_cycles(const GoodCover& cover, int q) {
  std::vector<IntVector> out;
  for (AxisMask s : cover.complex().orientations(q))
    out.push_back(total_chain_lift(cover, coordinate_cycle(cover.complex(), s)).nerve_cycle);
  return out;
}

std::vector<IntVector> dual_nerve_cocycles(const GoodCover& cover, int q) {
  const auto& gens = cover.nerve_cohomology(q).group().free_generators;
  const auto cycles = coordinate_nerve_cycles(cover, q);
  const int b = int(gens.size());
  if (int(cycles.size()) != b) throw std::logic_error("nerve Betti number differs from torus");
  Eigen::MatrixXd P(b, b);
  for (int i = 0; i < b; ++i)
    for (int t = 0; t < b; ++t) P(i, t) = double(gens[i].dot(cycles[t]));
  Eigen::MatrixXd M = P.inverse();
  std::vector<IntVector> out;
  for (int t = 0; t < b; ++t) {
    IntVector D = IntVector::Zero(gens.empty() ? 0 : gens[0].size());
    for (int i = 0; i < b; ++i) {
      const double m = std::round(M(t, i));
      if (std::abs(m - M(t, i)) > 1e-9) throw std::logic_error("nerve pairing matrix is not unimodular");
      D += std::int64_t(m) * gens[i];
    }
    for (int u = 0; u < b; ++u)
      if (D.dot(cycles[u]) != (t == u ? 1 : 0)) throw std::logic_error("dual nerve cocycles are not dual");
    out.push_back(std::move(D));
  }
  return out;
}

CharacteristicClass characteristic_class(const CircleCochain& g) {
  const auto& cover = g.cover();
  const int k = g.degree();
  auto lifts = g.lift();
  auto dn = real_coboundary(cover, k, 0, lifts);
  CharacteristicClass cls;
  cls.degree = k + 1;
  cls.cocycle = IntVector::Zero(int(dn.size()));
  for (std::size_t r = 0; r < dn.size(); ++r) {
    const double n0 = std::round(dn[r](0));
    const double dev = (dn[r].array() - n0).abs().maxCoeff();
    if (dev > 1e-9) {
      std::ostringstream os;
      os << "lift coboundary is not integral and constant (deviation " << dev << ")";
      throw TopologyError(os.str());
    }
    cls.cocycle(r) = std::int64_t(n0);
  }
  cls.snf = cover.nerve_cohomology(k + 1).classify(cls.cocycle);
  const auto cycles = coordinate_nerve_cycles(cover, k + 1);
  cls.periods = IntVector(int(cycles.size()));
  for (std::size_t s = 0; s < cycles.size(); ++s) cls.periods(s) = canonical_sign(k + 1) * cls.cocycle.dot(cycles[s]);
  return cls;
}

namespace {

// Cocycle g with trivial class -> f with delta f = g, via the lowest set
// containing each vertex.
CircleCochain contract_cocycle(const CircleCochain& g, const CharacteristicClass& cls) {
  const auto& cover = g.cover();
  const auto& X = cover.complex();
  const auto& nerve = cover.nerve();
  const int k = g.degree();
  auto m = cover.nerve_cohomology(k + 1).preimage(cls.cocycle);
  if (!m) throw std::logic_error("trivial class without a preimage");
  auto lifts = g.lift();
  for (int i = 0; i < int(lifts.size()); ++i) lifts[i].array() -= double((*m)(i));

  std::vector<Eigen::VectorXd> fh(nerve.count(k - 1));
  for (int i = 0; i < nerve.count(k - 1); ++i) {
    const auto& ch = cover.chart(k - 1, i);
    const auto& tau = nerve.simplex(k - 1, i);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ch.slots(0));
    for (int s = 0; s < ch.slots(0); ++s) {
      const Cell c = chart_cell(X, ch, 0, s);
      const int hub = cover.hub(0, X.cell_index(c));
      std::vector<int> t{hub};
      t.insert(t.end(), tau.begin(), tau.end());
      const int sign = sort_with_sign(t);
      if (sign == 0) continue;
      const int idx = nerve.index(t);
      const int loc = cover.chart(k, idx).local(c);
      v(s) = sign * lifts[idx](loc);
    }
    fh[i] = std::move(v);
  }
  return CircleCochain::from_real(g.cover_ptr(), k - 1, fh);
}

}  // namespace

TrivializationResult trivialize(const GerbeCocycle& g) {
  TrivializationResult res;
  res.characteristic = characteristic_class(g.g);
  if (!res.characteristic.is_zero()) return res;
  res.trivialization.emplace(contract_cocycle(g.g, res.characteristic));
  return res;
}

LineCocycle difference_of_trivializations(const Trivialization& f, const Trivialization& f2) {
  const double gap = circle_coboundary(f.f).distance(circle_coboundary(f2.f));
  if (gap > 1e-9) {
    std::ostringstream os;
    os << "trivializations of different cocycles (distance " << gap << ")";
    throw std::invalid_argument(os.str());
  }
  CircleCochain h = f2.f - f.f;
  CharacteristicClass c = characteristic_class(h);
  return LineCocycle{std::move(h), std::move(c)};
}

Eigen::VectorXd solve_nerve_coboundary(const GoodCover& cover, int k, const Eigen::VectorXd& r, double* residual) {
  Eigen::SparseMatrix<double> D = cover.nerve().coboundary(k).cast<double>();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(D.cols());
  if (r.size() && r.lpNorm<Eigen::Infinity>() > 0) {
    Eigen::LeastSquaresConjugateGradient<Eigen::SparseMatrix<double>> solver;
    solver.setTolerance(1e-15);
    solver.setMaxIterations(20 * int(D.cols()) + 100);
    solver.compute(D);
    b = solver.solve(r);
  }
  if (residual) *residual = r.size() ? (D * b - r).lpNorm<Eigen::Infinity>() : 0.0;
  return b;
}

CechDeRham derham_to_cech(std::shared_ptr<const GoodCover> cover_ptr, const RealCochain& G, RootRule rule) {
  const GoodCover& cover = *cover_ptr;
  const auto& X = cover.complex();
  const auto& nerve = cover.nerve();
  const int q = G.degree, d = X.dimension();
  if (q < 1 || q > d) throw std::invalid_argument("staircase degree must be between 1 and d");
  if (G.values.size() != X.cell_count(q)) throw std::invalid_argument("cochain length does not match degree");
  if (q < d) {
    const double dg = coboundary(X, G).values.lpNorm<Eigen::Infinity>();
    if (dg > 1e-9 * std::max(1.0, G.values.lpNorm<Eigen::Infinity>())) {
      std::ostringstream os;
      os << "form is not closed: |dG| = " << dg;
      throw TopologyError(os.str());
    }
  }

  std::vector<Eigen::VectorXd> top;
  for (int a = 0; a < nerve.count(0); ++a) {
    const auto& ch = cover.chart(0, a);
    top.push_back(ch.homotopy(q, ch.restrict(q, G.values), rule));
  }
  return staircase_from_local(std::move(cover_ptr), q, std::move(top), rule);
}

CechDeRham staircase_from_local(std::shared_ptr<const GoodCover> cover_ptr, int q, std::vector<Eigen::VectorXd> top,
                                RootRule rule) {
  const GoodCover& cover = *cover_ptr;
  const auto& nerve = cover.nerve();
  if (q < 1 || q > cover.complex().dimension()) throw std::invalid_argument("staircase degree must be between 1 and d");
  if (int(top.size()) != nerve.count(0)) throw std::invalid_argument("one local form per cover set is required");
  CechDeRham out;
  out.q = q;
  out.levels.resize(q);
  out.levels[0] = std::move(top);
  for (int j = 0; j + 1 < q; ++j) {
    auto D = real_coboundary(cover, j, q - 1 - j, out.levels[j]);
    for (int r = 0; r < nerve.count(j + 1); ++r)
      out.levels[j + 1].push_back(cover.chart(j + 1, r).homotopy(q - 1 - j, D[r], rule));
  }

  auto C = real_coboundary(cover, q - 1, 0, out.levels[q - 1]);
  Eigen::VectorXd c(nerve.count(q));
  for (int r = 0; r < nerve.count(q); ++r) {
    const double mean = C[r].mean();
    out.constant_deviation = std::max(out.constant_deviation, (C[r].array() - mean).abs().maxCoeff());
    c(r) = mean / kTwoPi;
  }
  if (out.constant_deviation > 1e-6) {
    std::ostringstream os;
    os << "staircase constants vary across an intersection by " << out.constant_deviation;
    throw NumericalError(os.str());
  }

  const auto cycles = coordinate_nerve_cycles(cover, q);
  const auto duals = dual_nerve_cocycles(cover, q);
  IntVector n = IntVector::Zero(nerve.count(q));
  IntVector raw(int(cycles.size()));
  for (std::size_t s = 0; s < cycles.size(); ++s) {
    const double p = c.dot(cycles[s].cast<double>());
    out.rounding_gap = std::max(out.rounding_gap, distance_to_integer(p));
    raw(s) = std::int64_t(std::round(p));
    n += raw(s) * duals[s];
  }
  if (out.rounding_gap > 1e-6) {
    std::ostringstream os;
    os << "class of G / 2pi is not integral (gap " << out.rounding_gap << ")";
    throw TopologyError(os.str());
  }
  // Integral constants need no adjustment; a real one would add a spurious
  // flat class in H^{q-1}(R/Z).
  const Eigen::VectorXd rounded = c.array().round();
  if ((c - rounded).lpNorm<Eigen::Infinity>() <= 1e-9) {
    n = rounded.cast<std::int64_t>();
    out.adjustment = Eigen::VectorXd::Zero(nerve.count(q - 1));
    out.adjustment_residual = (c - rounded).lpNorm<Eigen::Infinity>();
  } else {
    out.adjustment = solve_nerve_coboundary(cover, q - 1, c - n.cast<double>(), &out.adjustment_residual);
  }
  out.integer_cocycle = n;
  if (out.adjustment_residual > 1e-8) {
    std::ostringstream os;
    os << "integer adjustment of staircase constants failed (residual " << out.adjustment_residual << ")";
    throw NumericalError(os.str());
  }
  std::vector<Eigen::VectorXd> lifts(nerve.count(q - 1));
  for (int i = 0; i < nerve.count(q - 1); ++i) {
    out.levels[q - 1][i].array() -= kTwoPi * out.adjustment(i);
    lifts[i] = out.levels[q - 1][i] / kTwoPi;
  }
  out.cocycle.emplace(CircleCochain::from_real(cover_ptr, q - 1, lifts));
  out.periods = canonical_sign(q) * raw;
  return out;
}

nlohmann::json to_json(const CircleCochain& c) {
  nlohmann::json j;
  j["degree"] = c.degree();
  j["simplices"] = nlohmann::json::array();
  for (int i = 0; i < c.simplex_count(); ++i) {
    nlohmann::json e;
    e["simplex"] = c.cover().nerve().simplex(c.degree(), i);
    e["values"] = std::vector<double>(c.values(i).data(), c.values(i).data() + c.values(i).size());
    e["increments"] = std::vector<double>(c.increments(i).data(), c.increments(i).data() + c.increments(i).size());
    j["simplices"].push_back(std::move(e));
  }
  return j;
}

CircleCochain circle_cochain_from_json(std::shared_ptr<const GoodCover> cover, const nlohmann::json& j) {
  const int k = j.at("degree").get<int>();
  CircleCochain c(cover, k);
  const auto& arr = j.at("simplices");
  if (int(arr.size()) != c.simplex_count()) throw std::invalid_argument("wrong number of simplices in JSON cochain");
  for (const auto& e : arr) {
    const auto s = e.at("simplex").get<std::vector<int>>();
    const int i = cover->nerve().index(s);
    if (i < 0) throw std::invalid_argument("JSON cochain references a missing simplex");
    const auto v = e.at("values").get<std::vector<double>>();
    const auto inc = e.at("increments").get<std::vector<double>>();
    if (int(v.size()) != c.values(i).size() || int(inc.size()) != c.increments(i).size())
      throw std::invalid_argument("JSON cochain has wrong box sizes");
    for (std::size_t t = 0; t < v.size(); ++t) {
      if (!(v[t] >= 0 && v[t] < 1)) throw std::invalid_argument("JSON cochain value outside [0,1)");
      c.values(i)(t) = v[t];
    }
    for (std::size_t t = 0; t < inc.size(); ++t) c.increments(i)(t) = inc[t];
  }
  return c;
}

}  // namespace gerbelab
