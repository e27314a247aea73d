#include "gerbelab/scenario.hpp"

#include "gerbelab/connection.hpp"
#include "gerbelab/equivalence.hpp"
#include "gerbelab/exterior.hpp"
#include "gerbelab/syz.hpp"

#include <Eigen/Cholesky>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#ifndef GERBELAB_VERSION
#define GERBELAB_VERSION "0.0.0"
#endif

namespace gerbelab {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kTwoPi = 2 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Schema helpers

std::string type_name(const json& j) { return j.type_name(); }

class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object, got " + type_name(j_));
  }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(where_ + ": " + what); }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t lo, std::int64_t hi) {
    const json* v = get(key);
    if (!v) return def;
    return as_integer(*v, key, lo, hi);
  }

  double number(const std::string& key, double def, double lo, double hi) {
    const json* v = get(key);
    if (!v) return def;
    return as_number(*v, key, lo, hi);
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) fail("'" + key + "' must be a boolean");
    return v->get<bool>();
  }

  std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) fail("'" + key + "' must be a string");
    const auto s = v->get<std::string>();
    for (const auto& a : allowed)
      if (a == s) return s;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    fail("'" + key + "' must be one of " + list + ", got '" + s + "'");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def, std::size_t size) {
    const json* v = get(key);
    if (!v) return def;
    return as_numbers(*v, key, size);
  }

  std::int64_t as_integer(const json& v, const std::string& key, std::int64_t lo, std::int64_t hi) const {
    if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi)
      fail("'" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
           std::to_string(x));
    return x;
  }

  double as_number(const json& v, const std::string& key, double lo, double hi) const {
    if (!v.is_number()) fail("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) fail("'" + key + "' is out of range [" + format_double(lo) + ", " + format_double(hi) + "]");
    return x;
  }

  std::vector<double> as_numbers(const json& v, const std::string& key, std::size_t size) const {
    if (!v.is_array() || (size && v.size() != size))
      fail("'" + key + "' must be an array" + (size ? " of " + std::to_string(size) + " numbers" : std::string()));
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("'" + key + "' must contain numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail("unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

// Named tolerances of a kind with their defaults.
using ToleranceTable = std::vector<std::pair<std::string, double>>;

const std::map<std::string, ToleranceTable>& tolerance_defaults() {
  static const std::map<std::string, ToleranceTable> t = {
      {"cohomology", {}},
      {"gerbe-class", {{"connection", 1e-9}, {"holonomy", 1e-9}}},
      {"point-gerbe", {{"poisson", 1e-10}, {"sphere", 1e-6}, {"connection", 1e-8}}},
      {"linear-equivalence", {{"verdict", 1e-6}, {"holonomy", 1e-6}}},
      {"syz-mirror", {{"involution", 1e-8}, {"hessian_inverse", 1e-6}, {"pullback", 1e-6}, {"quadratic", 1e-12}}},
      {"ma-solve", {{"residual", 1e-10}, {"ricci", 1e-8}, {"recovery", 1e-8}}},
      {"flat-cy", {}},
  };
  return t;
}

ojson parse_tolerances(Params& P, const std::string& kind) {
  const auto& table = tolerance_defaults().at(kind);
  ojson out = ojson::object();
  for (const auto& [k, v] : table) out[k] = v;
  const json* t = P.get("tolerances");
  if (!t) return out;
  Params T(*t, "tolerances");
  for (const auto& [k, v] : table) out[k] = T.number(k, v, 0, 1e300);
  T.finish();
  return out;
}

ojson parse_matrix(Params& P, const std::string& key, int n) {
  const json* v = P.get(key);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
  if (v) {
    if (!v->is_array() || int(v->size()) != n) P.fail("'" + key + "' must be an " + std::to_string(n) + "x" + std::to_string(n) + " array");
    for (int i = 0; i < n; ++i) {
      const auto row = P.as_numbers((*v)[i], key, n);
      for (int j = 0; j < n; ++j) Q(i, j) = row[j];
    }
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) P.fail("'" + key + "' must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) P.fail("'" + key + "' must be positive definite");
  ojson out = ojson::array();
  for (int i = 0; i < n; ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < n; ++j) row.push_back(Q(i, j));
    out.push_back(row);
  }
  return out;
}

std::array<int, 3> parse_wavevector(Params& P, const json& v, int n) {
  if (!v.is_array() || int(v.size()) != n) P.fail("'k' must be an array of " + std::to_string(n) + " integers");
  std::array<int, 3> k{0, 0, 0};
  for (int a = 0; a < n; ++a) k[a] = int(P.as_integer(v[a], "k", -64, 64));
  return k;
}

ojson term_json(const std::array<int, 3>& k, int n, double c, double s) {
  ojson kk = ojson::array();
  for (int a = 0; a < n; ++a) kk.push_back(k[a]);
  return ojson{{"k", kk}, {"cos", c}, {"sin", s}};
}

// A periodic part: absent (zero), an explicit Fourier table, or a named
// family expanded into one.
ojson parse_periodic(Params& P, const std::string& key, int n) {
  const json* v = P.get(key);
  ojson out{{"family", "none"}, {"terms", ojson::array()}};
  if (!v) return out;
  Params S(*v, key);
  const std::string family = S.choice("family", "table", {"table", "cosine", "product"});
  out["family"] = family;
  if (family == "table") {
    const json* terms = S.get("terms");
    if (!terms || !terms->is_array()) S.fail("'terms' must be an array");
    for (const auto& t : *terms) {
      Params T(t, key + ".terms");
      const json* k = T.get("k");
      if (!k) T.fail("missing 'k'");
      const auto kv = parse_wavevector(T, *k, n);
      const double c = T.number("cos", 0, -1e3, 1e3);
      const double s = T.number("sin", 0, -1e3, 1e3);
      T.finish();
      out["terms"].push_back(term_json(kv, n, c, s));
    }
  } else if (family == "cosine") {
    // amplitude * cos(2 pi k.s)
    const double a = S.number("amplitude", 0, -1e3, 1e3);
    const json* k = S.get("k");
    std::array<int, 3> kv{1, 0, 0};
    if (k) kv = parse_wavevector(S, *k, n);
    out["amplitude"] = a;
    out["terms"].push_back(term_json(kv, n, a, 0));
  } else {
    // amplitude * cos(2 pi s_1) cos(2 pi s_2)
    const double a = S.number("amplitude", 0, -1e3, 1e3);
    out["amplitude"] = a;
    out["terms"].push_back(term_json({1, 1, 0}, n, a / 2, 0));
    out["terms"].push_back(term_json({1, -1, 0}, n, a / 2, 0));
  }
  S.finish();
  return out;
}

ojson parse_point_list(Params& P, const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) P.fail("'" + key + "' must be a non-empty array of points");
  ojson out = ojson::array();
  for (const auto& e : v) {
    if (!e.is_array() || (e.size() != 3 && e.size() != 4)) P.fail("'" + key + "' entries are [x, y, z] or [x, y, z, multiplicity]");
    const auto x = P.as_numbers(json::array({e[0], e[1], e[2]}), key, 3);
    const std::int64_t mult = e.size() == 4 ? P.as_integer(e[3], key + " multiplicity", -64, 64) : 1;
    out.push_back(ojson::array({x[0], x[1], x[2], mult}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization per kind

ojson normalize_kind(Params& P, const std::string& kind) {
  ojson s;
  if (kind == "cohomology") {
    s["d"] = P.integer("d", 3, 1, 3);
    s["N"] = P.integer("N", 4, 3, 8);
    s["nerve"] = P.boolean("nerve", true);
  } else if (kind == "gerbe-class") {
    s["N"] = P.integer("N", 4, 3, 8);
    ojson mult = ojson::array();
    if (const json* m = P.get("multiples")) {
      if (!m->is_array()) P.fail("'multiples' must be an array of integers");
      for (const auto& e : *m) mult.push_back(P.as_integer(e, "multiples", -1000, 1000));
    } else {
      mult = ojson::array({0, 1, 2});
    }
    s["multiples"] = mult;
    s["flat_periods"] = P.numbers("flat_periods", {0.5, 0.0, 0.0}, 3);
    s["regauge"] = P.boolean("regauge", true);
  } else if (kind == "point-gerbe") {
    s["N"] = P.integer("N", 6, 4, 12);
    s["p"] = P.numbers("p", {0.1, 0.2, 0.3}, 3);
  } else if (kind == "linear-equivalence") {
    s["N"] = P.integer("N", 4, 3, 8);
    s["pairs"] = P.integer("pairs", 100, 0, 100000);
    s["degree_min"] = P.integer("degree_min", 1, 1, 16);
    s["degree_max"] = P.integer("degree_max", 3, 1, 16);
    if (s["degree_max"].get<int>() < s["degree_min"].get<int>()) P.fail("'degree_max' is below 'degree_min'");
    s["gerbe"] = P.boolean("gerbe", true);
    s["injectivity"] = P.boolean("injectivity", true);
    ojson divs = ojson::array();
    if (const json* d = P.get("divisors")) {
      if (!d->is_array()) P.fail("'divisors' must be an array");
      for (const auto& e : *d) {
        Params D(e, "divisors");
        const json* p = D.get("P");
        const json* q = D.get("Q");
        if (!p || !q) D.fail("each entry needs 'P' and 'Q'");
        ojson entry{{"P", parse_point_list(D, *p, "P")}, {"Q", parse_point_list(D, *q, "Q")}};
        entry["expect"] = D.choice("expect", "any", {"any", "equivalent", "not_equivalent"});
        D.finish();
        divs.push_back(entry);
      }
    }
    s["divisors"] = divs;
  } else if (kind == "syz-mirror") {
    const int n = int(P.integer("n", 2, 2, 3));
    s["n"] = n;
    s["M"] = P.integer("M", n == 2 ? 32 : 12, 4, 256);
    s["Q"] = parse_matrix(P, "Q", n);
    s["psi"] = parse_periodic(P, "psi", n);
    s["scheme"] = P.choice("scheme", "spectral", {"spectral", "fd4"});
  } else if (kind == "ma-solve") {
    const int n = int(P.integer("n", 2, 2, 3));
    s["n"] = n;
    s["M"] = P.integer("M", n == 2 ? 64 : 16, 4, 256);
    s["Q"] = parse_matrix(P, "Q", n);
    s["psi0"] = parse_periodic(P, "psi0", n);
    if (P.get("manufactured")) s["manufactured"] = parse_periodic(P, "manufactured", n);
    s["scheme"] = P.choice("scheme", "spectral", {"spectral", "fd4"});
    s["max_iterations"] = P.integer("max_iterations", 50, 1, 1000);
    s["min_slope"] = P.number("min_slope", 1.8, 0, 10);
    s["require_slope"] = P.boolean("require_slope", true);
  } else if (kind == "flat-cy") {
    s["n"] = P.integer("n", 3, 2, 3);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Checks

class Checks {
 public:
  Checks(const ojson& tolerances, std::optional<double> override_tol) : tol_(tolerances), override_(override_tol) {}

  double tol(const std::string& key) const { return override_ ? *override_ : tol_.at(key).get<double>(); }

  // |value| <= tol
  void small(const std::string& name, double value, const std::string& tol_key) {
    const double t = tol(tol_key);
    add(name, value, t, "abs_le", std::abs(value) <= t);
  }
  // |value - expected| <= tol
  void near(const std::string& name, double value, double expected, const std::string& tol_key) {
    const double t = tol(tol_key);
    ojson c = base(name, value, t, "abs_diff_le", std::abs(value - expected) <= t);
    c["expected"] = expected;
    list_.push_back(c);
  }
  void exact(const std::string& name, double value, double expected) {
    ojson c = base(name, value, 0.0, "eq", value == expected);
    c["expected"] = expected;
    list_.push_back(c);
  }
  void at_least(const std::string& name, double value, double bound) {
    add(name, value, bound, "ge", value >= bound);
  }

  const ojson& list() const { return list_; }
  bool all_pass() const {
    for (const auto& c : list_)
      if (!c["pass"].get<bool>()) return false;
    return true;
  }

 private:
  static ojson base(const std::string& name, double value, double tol, const char* rel, bool pass) {
    ojson c;
    c["name"] = name;
    c["value"] = value;
    c["tolerance"] = tol;
    c["relation"] = rel;
    c["pass"] = pass;
    return c;
  }
  void add(const std::string& name, double value, double tol, const char* rel, bool pass) {
    list_.push_back(base(name, value, tol, rel, pass));
  }

  ojson tol_;
  std::optional<double> override_;
  ojson list_ = ojson::array();
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void row(std::vector<std::string> r) { rows.push_back(std::move(r)); }
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(long long v) { return std::to_string(v); }

struct Context {
  const ojson& s;
  Checks& checks;
  ojson& results;
  std::vector<Table>& tables;
  std::uint64_t seed;
  bool csv;
};

ojson vec_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ojson ivec_json(const IntVector& v) {
  ojson a = ojson::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double max_abs(const IntSparse& A) {
  std::int64_t m = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (IntSparse::InnerIterator it(A, k); it; ++it) m = std::max<std::int64_t>(m, std::abs(it.value()));
  return double(m);
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// ---------------------------------------------------------------------------
// cohomology

void run_cohomology(Context& c) {
  const int d = c.s["d"], N = c.s["N"];
  auto X = std::make_shared<CubicalTorusComplex>(build_torus_complex(d, N));
  ojson betti = ojson::array(), torsion = ojson::array();
  for (int k = 0; k <= d; ++k) {
    const auto g = integer_cohomology(*X, k);
    betti.push_back(g.betti);
    torsion.push_back(int(g.torsion.size()));
    c.checks.exact("betti_" + std::to_string(k), g.betti, double(binom(d, k)));
    c.checks.exact("torsion_" + std::to_string(k), double(g.torsion.size()), 0);
  }
  c.results["betti"] = betti;
  c.results["torsion_factors"] = torsion;
  double dd = 0, deltadelta = 0;
  for (int k = 2; k <= d; ++k) dd = std::max(dd, max_abs(IntSparse(X->boundary(k - 1) * X->boundary(k))));
  for (int k = 0; k + 2 <= d; ++k) deltadelta = std::max(deltadelta, max_abs(IntSparse(X->coboundary(k + 1) * X->coboundary(k))));
  c.checks.exact("boundary_squared", dd, 0);
  c.checks.exact("coboundary_squared", deltadelta, 0);
  if (!c.s["nerve"].get<bool>()) return;

  const GoodCover U(X);
  const Nerve& nv = U.nerve();
  ojson counts = ojson::array();
  for (int k = 0; k <= nv.max_dimension(); ++k) counts.push_back(nv.count(k));
  c.results["nerve_simplices"] = counts;
  ojson nb = ojson::array();
  const IntSparse none(nv.count(0), 0);
  const int b0 = IntegerCohomology(none, nv.coboundary(0), 0).group().betti;
  nb.push_back(b0);
  c.checks.exact("nerve_betti_0", b0, 1);
  for (int k = 1; k <= d; ++k) {
    const int b = U.nerve_cohomology(k).group().betti;
    nb.push_back(b);
    c.checks.exact("nerve_betti_" + std::to_string(k), b, double(binom(d, k)));
  }
  c.results["nerve_betti"] = nb;
  double ndd = 0;
  for (int k = 0; k + 1 < nv.max_dimension(); ++k)
    ndd = std::max(ndd, max_abs(IntSparse(nv.coboundary(k + 1) * nv.coboundary(k))));
  c.checks.exact("nerve_coboundary_squared", ndd, 0);
  c.checks.exact("intersections_contractible", U.all_certified() ? 1 : 0, 1);
}

// ---------------------------------------------------------------------------
// gerbe-class

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

// F_a += d beta_a, A_ab += beta_b - beta_a with random local 1-forms beta.
GerbeConnection regauged(const GerbeConnection& c0, std::uint64_t seed) {
  GerbeConnection c = c0;
  const GoodCover& U = c.cover();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::VectorXd> beta;
  for (int a = 0; a < U.nerve().count(0); ++a) {
    const auto& ch = U.chart(0, a);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(ch.slots(1));
    for (int s = 0; s < ch.slots(1); ++s)
      if (ch.valid(1, s)) b(s) = u(rng);
    c.F[a] += ch.coboundary(1, b);
    beta.push_back(std::move(b));
  }
  const auto db = real_coboundary(U, 0, 1, beta);
  for (std::size_t i = 0; i < c.A.size(); ++i) c.A[i] += db[i];
  return c;
}

double connection_residual(const ConnectionDiagnostics& d) {
  return std::max({d.curvature_residual, d.closed_residual, d.overlap_residual, d.cocycle_residual});
}

void run_gerbe_class(Context& c) {
  const int N = c.s["N"];
  auto X = std::make_shared<CubicalTorusComplex>(build_torus_complex(3, N));
  auto U = std::make_shared<const GoodCover>(X);
  ojson stair = ojson::array();
  for (const auto& mj : c.s["multiples"]) {
    const int m = mj.get<int>();
    const std::string tag = "m" + std::to_string(m);
    RealCochain G{3, Eigen::VectorXd::Constant(X->cell_count(3), m * kTwoPi / std::pow(N, 3))};
    const auto st = derham_to_cech(U, G);
    if (!st.cocycle) throw NumericalError("staircase produced no cocycle for multiple " + std::to_string(m));
    const auto conn = connection_from_staircase(st, G);
    const auto diag = validate_connection(conn);
    const auto cls = characteristic_class(conn.g.g);
    stair.push_back(ojson{{"multiple", m},
                          {"staircase_periods", ivec_json(st.periods)},
                          {"class_periods", ivec_json(cls.periods)},
                          {"rounding_gap", st.rounding_gap},
                          {"constant_deviation", st.constant_deviation},
                          {"connection_residual", connection_residual(diag)}});
    c.checks.exact("staircase_" + tag, double(st.periods(0)), m);
    c.checks.exact("class_" + tag, double(cls.periods(0)), m);
    c.checks.small("connection_" + tag, connection_residual(diag), "connection");
  }
  c.results["staircase"] = stair;

  const std::vector<double> periods = c.s["flat_periods"].get<std::vector<double>>();
  const auto flat = flat_connection(U, constant_two_form(*X, periods));
  const auto diag = validate_connection(flat);
  c.checks.small("flat_connection", connection_residual(diag), "connection");
  const auto lo = holonomy(flat, RootRule::Lowest);
  const auto hi = holonomy(flat, RootRule::Highest);
  const auto o = X->orientations(2);
  ojson surf = ojson::array();
  double root_gap = 0, hub_gap = 0, homology_gap = 0, gauge_gap = 0;
  std::optional<HolonomyClass> gauged;
  if (c.s["regauge"].get<bool>()) gauged = holonomy(regauged(flat, c.seed));
  for (std::size_t t = 0; t < o.size(); ++t) {
    const auto S = coordinate_cycle(*X, o[t]);
    const double v = surface_holonomy(flat, S);
    const double vh = surface_holonomy(flat, S, nullptr, HubRule::Highest);
    const double vt = surface_holonomy(flat, translated(*X, S, {1, 2, 3}));
    root_gap = std::max(root_gap, distance_to_integer(lo.periods(int(t)) - hi.periods(int(t))));
    hub_gap = std::max(hub_gap, distance_to_integer(v - vh));
    homology_gap = std::max(homology_gap, distance_to_integer(v - vt));
    if (gauged) gauge_gap = std::max(gauge_gap, distance_to_integer(gauged->periods(int(t)) - lo.periods(int(t))));
    surf.push_back(ojson{{"orientation", int(o[t])}, {"surface_holonomy", v}, {"holonomy_class", lo.periods(int(t))}});
    c.checks.small("surface_holonomy_" + std::to_string(t), distance_to_integer(v - periods[t]), "holonomy");
  }
  c.results["flat"] = ojson{{"periods", periods}, {"tori", surf}};
  c.checks.small("root_rule_invariance", root_gap, "holonomy");
  c.checks.small("hub_rule_invariance", hub_gap, "holonomy");
  c.checks.small("homology_invariance", homology_gap, "holonomy");
  if (gauged) c.checks.small("gauge_invariance", gauge_gap, "holonomy");
}

// ---------------------------------------------------------------------------
// point-gerbe

void run_point_gerbe(Context& c) {
  const int N = c.s["N"];
  const auto pv = c.s["p"].get<std::vector<double>>();
  const std::array<double, 3> p{pv[0], pv[1], pv[2]};
  auto X = std::make_shared<CubicalTorusComplex>(build_torus_complex(3, N));
  auto U = std::make_shared<const GoodCover>(X);
  const FlatMetric m(X);
  const auto pg = point_gerbe_connection(m, p, U);
  if (!pg.connection) throw NumericalError("point gerbe connection was not built");
  const auto diag = validate_connection(*pg.connection);
  const auto cls = characteristic_class(pg.connection->g.g);
  const double curv = (pg.connection->G.values - m.volume().values).lpNorm<Eigen::Infinity>();
  c.results["poisson_residual"] = pg.poisson_residual;
  c.results["local_residual"] = pg.local_residual;
  c.results["sphere_integral"] = pg.sphere_integral;
  c.results["class"] = ivec_json(cls.periods);
  c.results["total_volume"] = m.total_volume();
  c.results["ball_cubes"] = pg.ball.values.sum();
  c.checks.small("poisson_residual", pg.poisson_residual, "poisson");
  c.checks.near("sphere_integral", pg.sphere_integral, -kTwoPi, "sphere");
  c.checks.exact("class", double(cls.periods(0)), 1);
  c.checks.small("connection_residual", connection_residual(diag), "connection");
  c.checks.small("curvature_is_volume", curv, "connection");
  c.checks.near("total_volume", m.total_volume(), kTwoPi, "connection");
  if (!c.csv) return;
  Table t{"H", {"cell", "i", "j", "k", "s1", "s2", "s3", "H", "F0_flux"}, {}};
  // F0_flux: sum of d*H over the six faces of the cube with outward signs,
  // i.e. (d d* H) on the cube.
  const Eigen::VectorXd div = X->coboundary(2).cast<double>() * pg.F0.values;
  for (int i = 0; i < X->cell_count(3); ++i) {
    const auto cl = X->cell(3, i);
    t.row({fmt((long long)i), fmt((long long)cl.base[0]), fmt((long long)cl.base[1]), fmt((long long)cl.base[2]),
           fmt((cl.base[0] + 0.5) / N), fmt((cl.base[1] + 0.5) / N), fmt((cl.base[2] + 0.5) / N),
           fmt(pg.H.values(i)), fmt(div(i))});
  }
  c.tables.push_back(std::move(t));
}

// ---------------------------------------------------------------------------
// linear-equivalence

PointDivisor divisor_from_json(const ojson& a) {
  std::vector<std::pair<Point3, int>> terms;
  for (const auto& e : a) terms.push_back({Point3{e[0].get<double>(), e[1].get<double>(), e[2].get<double>()}, e[3].get<int>()});
  return PointDivisor(std::move(terms));
}

Eigen::VectorXd abel_jacobi_sum(const FlatMetric& m, const PointDivisor& D) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
  for (const auto& [x, mult] : D.terms) u += mult * abel_jacobi(m, {0, 0, 0}, x).raw;
  return u;
}

void run_linear_equivalence(Context& c) {
  const int N = c.s["N"];
  auto X = std::make_shared<CubicalTorusComplex>(build_torus_complex(3, N));
  auto U = std::make_shared<const GoodCover>(X);
  const FlatMetric m(X);
  const double vtol = c.checks.tol("verdict");
  const bool gerbe = c.s["gerbe"];
  const auto o = X->orientations(2);

  struct Trial {
    PointDivisor P, Q;
    std::string requested;
  };
  std::vector<Trial> trials;
  std::mt19937_64 rng(c.seed);
  const int dmin = c.s["degree_min"], dmax = c.s["degree_max"];
  for (int t = 0; t < c.s["pairs"].get<int>(); ++t) {
    const int deg = dmin + int(rng() % std::uint64_t(dmax - dmin + 1));
    const bool eq = rng() % 2 == 0;
    auto [P, Q] = sample_divisor_pair(rng, N, deg, eq);
    // Unconstrained samples are equivalent by chance with probability N^-3, so
    // only constructed-equivalent pairs carry an expectation.
    trials.push_back({std::move(P), std::move(Q), eq ? "equivalent" : "any"});
  }
  for (const auto& d : c.s["divisors"])
    trials.push_back({divisor_from_json(d["P"]), divisor_from_json(d["Q"]), d["expect"].get<std::string>()});

  Table tab{"trials",
            {"trial", "degree", "expect", "linear", "holonomy", "agree", "u1", "u2", "u3", "holonomy_gap"},
            {}};
  int agree = 0, expected_ok = 0, expected_total = 0;
  double max_gap = 0;
  ojson verdicts = ojson::array();
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& tr = trials[t];
    const auto lin = linearly_equivalent(m, tr.P, tr.Q, vtol);
    const auto hol = holonomy_equivalent(m, U, tr.P, tr.Q, vtol, gerbe);
    const bool ag = lin.verdict == hol.result.verdict;
    agree += ag;
    // Holonomy class against sum u(q_i) - sum u(p_i).  The gerbe period over
    // the coordinate torus S equals -sign(dx_a ^ dx_S) u_a for the
    // complementary axis a.
    const Eigen::VectorXd u = abel_jacobi_sum(m, tr.Q) - abel_jacobi_sum(m, tr.P);
    double gap = 0;
    if (gerbe && hol.gerbe_holonomy) {
      for (std::size_t s = 0; s < o.size(); ++s) {
        const int a = std::countr_zero(unsigned(~o[s] & 7u));
        const int sign = -shuffle_sign(AxisMask(1u << a), o[s]);
        gap = std::max(gap, distance_to_integer(hol.gerbe_holonomy->periods(int(s)) - sign * u(a)));
      }
    } else {
      for (int a = 0; a < 3; ++a) gap = std::max(gap, distance_to_integer(hol.result.integrals(a) - u(a)));
    }
    max_gap = std::max(max_gap, gap);
    if (tr.requested != "any") {
      ++expected_total;
      expected_ok += lin.verdict == (tr.requested == "equivalent" ? Verdict::Equivalent : Verdict::NotEquivalent);
    }
    verdicts.push_back(ojson{{"linear", to_string(lin.verdict)},
                             {"holonomy", to_string(hol.result.verdict)},
                             {"abel_jacobi", vec_json(u.unaryExpr([](double x) { return frac(x); }))}});
    tab.row({fmt((long long)t), fmt((long long)tr.P.degree()), tr.requested, to_string(lin.verdict),
             to_string(hol.result.verdict), ag ? "1" : "0", fmt(frac(u(0))), fmt(frac(u(1))), fmt(frac(u(2))), fmt(gap)});
  }
  c.results["trials"] = int(trials.size());
  c.results["agreement"] = agree;
  c.results["verdicts"] = verdicts;
  c.checks.exact("oracle_agreement", agree, double(trials.size()));
  c.checks.exact("expected_verdicts", expected_ok, expected_total);
  c.checks.small("holonomy_class", max_gap, "holonomy");

  if (c.s["injectivity"].get<bool>()) {
    std::vector<Eigen::VectorXd> images;
    for (int v = 0; v < X->vertex_count(); ++v) {
      const auto cv = X->vertex_coords(v);
      images.push_back(abel_jacobi(m, {0, 0, 0}, {double(cv[0]) / N, double(cv[1]) / N, double(cv[2]) / N}).coords);
    }
    int collisions = 0;
    for (std::size_t i = 0; i < images.size(); ++i)
      for (std::size_t j = i + 1; j < images.size(); ++j) {
        double gap = 0;
        for (int a = 0; a < 3; ++a) gap = std::max(gap, distance_to_integer(images[i](a) - images[j](a)));
        collisions += gap < 1e-9;
      }
    c.results["vertex_pairs"] = images.size() * (images.size() - 1) / 2;
    c.checks.exact("abel_jacobi_collisions", collisions, 0);
  }
  if (c.csv) c.tables.push_back(std::move(tab));
}

// ---------------------------------------------------------------------------
// syz-mirror / ma-solve

Eigen::MatrixXd matrix_from(const ojson& a) {
  const int n = int(a.size());
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Q(i, j) = a[i][j].get<double>();
  return Q;
}

std::vector<FourierTerm> terms_from(const ojson& p) {
  std::vector<FourierTerm> out;
  for (const auto& t : p["terms"]) {
    FourierTerm f;
    f.k = {0, 0, 0};
    for (std::size_t a = 0; a < t["k"].size(); ++a) f.k[a] = t["k"][a].get<int>();
    f.cos_coef = t["cos"];
    f.sin_coef = t["sin"];
    out.push_back(f);
  }
  return out;
}

std::vector<std::string> coordinate_columns(const std::string& prefix, int n) {
  std::vector<std::string> c;
  for (int a = 1; a <= n; ++a) c.push_back(prefix + std::to_string(a));
  return c;
}

void run_syz_mirror(Context& c) {
  const int n = c.s["n"], M = c.s["M"];
  const Eigen::MatrixXd Q = matrix_from(c.s["Q"]);
  const Scheme scheme = scheme_from_string(c.s["scheme"].get<std::string>());
  const auto phi = HessianPotential::from_fourier(Q, M, terms_from(c.s["psi"]), scheme);
  c.results["min_eigenvalue"] = semi_flat_metric(phi).min_eigenvalue;
  const auto lt = legendre_transform(phi);
  const double inv = legendre_involution_error(phi);
  const auto mc = mirror_metric_check(phi, lt);
  c.results["dual_Q"] = ojson::array();
  for (int i = 0; i < n; ++i) c.results["dual_Q"].push_back(vec_json(lt.dual.Q().row(i).transpose()));
  c.results["max_newton_iterations"] = std::max(lt.max_newton_iterations, mc.max_newton_iterations);
  c.results["max_gradient_residual"] = lt.max_gradient_residual;
  c.results["fiber_inverse_error"] = mc.fiber_inverse_error;
  c.checks.small("involution", inv, "involution");
  c.checks.small("hessian_inverse", mc.hessian_inverse_error, "hessian_inverse");
  c.checks.small("pullback", mc.pullback_error, "pullback");

  // Closed-form dual of the quadratic part alone.
  const auto q = HessianPotential::quadratic(Q, M, scheme);
  const auto lq = legendre_transform(q);
  const Eigen::MatrixXd Qi = Q.inverse();
  double qerr = (lq.dual.Q() - Qi).cwiseAbs().maxCoeff();
  const Eigen::VectorXd vals = lq.dual.node_values();
  const auto H = lq.dual.hessian_field();
  for (int i = 0; i < q.grid().size(); ++i) {
    const Eigen::VectorXd xi = lq.dual.node_point(i);
    qerr = std::max(qerr, std::abs(vals(i) - 0.5 * xi.dot(Qi * xi)));
    qerr = std::max(qerr, (H[i] - Qi).cwiseAbs().maxCoeff());
  }
  c.checks.small("quadratic_dual", qerr, "quadratic");

  if (!c.csv) return;
  std::vector<std::string> cols{"node"};
  for (const auto& s : coordinate_columns("xi", n)) cols.push_back(s);
  cols.push_back("dual_value");
  for (const auto& s : coordinate_columns("x", n)) cols.push_back(s);
  Table t{"dual", cols, {}};
  const Eigen::VectorXd dv = lt.dual.node_values();
  for (int i = 0; i < lt.dual.grid().size(); ++i) {
    std::vector<std::string> r{fmt((long long)i)};
    const Eigen::VectorXd xi = lt.dual.node_point(i);
    for (int a = 0; a < n; ++a) r.push_back(fmt(xi(a)));
    r.push_back(fmt(dv(i)));
    for (int a = 0; a < n; ++a) r.push_back(fmt(lt.preimages[i](a)));
    t.row(std::move(r));
  }
  c.tables.push_back(std::move(t));
}

Eigen::VectorXd manufactured_forcing(const HessianPotential& star) {
  const auto F = ma_residual(star);
  Eigen::VectorXd rho = (F.field.array() + F.c_star) / F.c_star;
  return rho / rho.mean();
}

void run_ma_solve(Context& c) {
  const int n = c.s["n"], M = c.s["M"];
  const Eigen::MatrixXd Q = matrix_from(c.s["Q"]);
  const Scheme scheme = scheme_from_string(c.s["scheme"].get<std::string>());
  const auto initial = HessianPotential::from_fourier(Q, M, terms_from(c.s["psi0"]), scheme);
  c.results["initial_min_eigenvalue"] = semi_flat_metric(initial).min_eigenvalue;
  MAOptions opts;
  opts.tol = c.checks.tol("residual");
  opts.max_iterations = c.s["max_iterations"];
  std::optional<HessianPotential> star;
  if (c.s.contains("manufactured")) {
    star = HessianPotential::from_fourier(Q, M, terms_from(c.s["manufactured"]), scheme);
    opts.forcing = manufactured_forcing(*star);
  }
  const auto sol = solve_monge_ampere(initial, opts);
  const auto r = sol.residuals();
  const double slope = convergence_slope(r);
  c.results["initial_residual"] = sol.initial_residual;
  c.results["residuals"] = r;
  c.results["newton_steps"] = int(sol.log.size());
  c.results["slope"] = std::isfinite(slope) ? ojson(slope) : ojson(nullptr);
  c.checks.small("final_residual", r.back(), "residual");
  if (std::isfinite(slope))
    c.checks.at_least("convergence_slope", slope, c.s["min_slope"].get<double>());
  else if (c.s["require_slope"].get<bool>())
    c.checks.at_least("convergence_slope", -1, c.s["min_slope"].get<double>());
  if (star) {
    const double rec = (sol.phi.psi() - star->psi()).cwiseAbs().maxCoeff();
    c.results["recovery_error"] = rec;
    c.checks.small("recovery", rec, "recovery");
  } else {
    const auto ric = ricci_tensor(sol.phi);
    c.results["ricci_norm"] = ric.norm;
    c.checks.small("ricci", ric.norm, "ricci");
  }
  if (!c.csv) return;
  Table log{"log", {"step", "residual", "damping", "krylov_iterations", "krylov_error", "min_eigenvalue"}, {}};
  for (std::size_t k = 0; k < sol.log.size(); ++k) {
    const auto& st = sol.log[k];
    log.row({fmt((long long)k + 1), fmt(st.residual), fmt(st.step), fmt((long long)st.krylov_iterations),
             fmt(st.krylov_error), fmt(st.min_eigenvalue)});
  }
  c.tables.push_back(std::move(log));
  std::vector<std::string> cols{"node"};
  for (const auto& s : coordinate_columns("x", n)) cols.push_back(s);
  cols.push_back("psi");
  Table field{"psi", cols, {}};
  for (int i = 0; i < sol.phi.grid().size(); ++i) {
    std::vector<std::string> row{fmt((long long)i)};
    const Eigen::VectorXd x = sol.phi.node_point(i);
    for (int a = 0; a < n; ++a) row.push_back(fmt(x(a)));
    row.push_back(fmt(sol.phi.psi()(i)));
    field.row(std::move(row));
  }
  c.tables.push_back(std::move(field));
}

// ---------------------------------------------------------------------------
// flat-cy

void run_flat_cy(Context& c) {
  const auto rep = flat_cy_check(c.s["n"].get<int>());
  c.results["c"] = to_string(rep.c);
  ojson ids = ojson::array();
  for (const auto& chk : rep.checks) {
    ids.push_back(ojson{{"name", chk.name}, {"holds", chk.holds}, {"detail", chk.detail}});
    c.checks.exact(chk.name, chk.holds ? 1 : 0, 1);
  }
  c.results["identities"] = ids;
}

const std::map<std::string, std::function<void(Context&)>>& runners() {
  static const std::map<std::string, std::function<void(Context&)>> r = {
      {"cohomology", run_cohomology},   {"gerbe-class", run_gerbe_class},       {"point-gerbe", run_point_gerbe},
      {"linear-equivalence", run_linear_equivalence}, {"syz-mirror", run_syz_mirror},
      {"ma-solve", run_ma_solve},       {"flat-cy", run_flat_cy},
  };
  return r;
}

std::int64_t default_seed(const std::string& kind) { return kind == "linear-equivalence" ? 7 : 0; }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_text(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k = {"cohomology", "gerbe-class", "point-gerbe", "linear-equivalence",
                                             "syz-mirror", "ma-solve",    "flat-cy"};
  return k;
}

const char* version_string() { return GERBELAB_VERSION; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path resolve_out_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("GERBELAB_OUT"); env && *env) return env;
  return "gerbelab-out";
}

namespace {

ojson normalize_ordered(const json& config) {
  Params P(config, "scenario");
  const std::string kind = P.choice("kind", "", scenario_kinds());
  if (kind.empty()) P.fail("missing 'kind'");
  ojson s;
  s["kind"] = kind;
  if (const json* n = P.get("name")) {
    if (!n->is_string() || n->get<std::string>().empty()) P.fail("'name' must be a non-empty string");
    const auto name = n->get<std::string>();
    if (name.find_first_of("/\\") != std::string::npos) P.fail("'name' must not contain path separators");
    s["name"] = name;
  }
  s["seed"] = P.integer("seed", default_seed(kind), 0, std::numeric_limits<std::int64_t>::max());
  s["csv"] = P.boolean("csv", true);
  s["params"] = normalize_kind(P, kind);
  s["tolerances"] = parse_tolerances(P, kind);
  P.finish();
  return s;
}

}  // namespace

json normalize_scenario(const json& config) { return json::parse(normalize_ordered(config).dump()); }

ScenarioResult run_scenario(const json& config, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const ojson s = normalize_ordered(config);
  ojson echo;
  echo["kind"] = s["kind"];
  if (s.contains("name")) echo["name"] = s["name"];
  echo["seed"] = opts.seed ? *opts.seed : s["seed"].get<std::int64_t>();
  echo["csv"] = s["csv"];
  echo["params"] = s["params"];
  echo["tolerances"] = s["tolerances"];
  if (opts.tol) echo["tol_override"] = *opts.tol;
  const std::string kind = echo["kind"];
  const std::string name =
      echo.contains("name") ? echo["name"].get<std::string>() : (opts.name.empty() ? kind : opts.name);

  ScenarioResult out;
  ojson report;
  report["tool"] = "gerbelab";
  report["version"] = version_string();
  report["name"] = name;
  report["kind"] = kind;
  report["scenario"] = echo;

  Checks checks(echo["tolerances"], opts.tol);
  ojson results = ojson::object();
  std::vector<Table> tables;
  Context ctx{echo["params"], checks, results, tables, std::uint64_t(echo["seed"].get<std::int64_t>()),
              echo["csv"].get<bool>() && opts.write_files};
  std::string status;
  try {
    runners().at(kind)(ctx);
    status = checks.all_pass() ? "pass" : "fail";
    out.exit_code = checks.all_pass() ? 0 : 1;
  } catch (const ConvexityError& e) {
    ojson nodes = ojson::array();
    for (int i : e.nodes()) nodes.push_back(i);
    report["error"] = ojson{{"type", "convexity"}, {"message", e.what()}, {"nodes", nodes}, {"min_eigenvalue", e.min_eigenvalue()}};
    status = "error";
    out.exit_code = 3;
  } catch (const NonzeroHolonomyError& e) {
    report["error"] = ojson{{"type", "holonomy"}, {"message", e.what()}, {"periods", vec_json(e.holonomy.periods)}};
    status = "error";
    out.exit_code = 3;
  } catch (const NumericalError& e) {
    report["error"] = ojson{{"type", "numerical"}, {"message", e.what()}};
    status = "error";
    out.exit_code = 3;
  } catch (const TopologyError& e) {
    report["error"] = ojson{{"type", "topology"}, {"message", e.what()}};
    status = "error";
    out.exit_code = 3;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("scenario parameters rejected: ") + e.what());
  }
  report["results"] = results;
  report["checks"] = checks.list();
  report["status"] = status;
  report["pass"] = status == "pass";

  ojson files = ojson::array();
  if (opts.write_files && !opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    for (const auto& t : tables) {
      const auto file = name + "." + t.name + ".csv";
      write_text(opts.out_dir / file, csv_text(t));
      out.written.push_back(opts.out_dir / file);
      files.push_back(file);
    }
  }
  report["files"] = files;
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report["timestamp"] = ojson{{"utc", utc_now()}, {"elapsed_seconds", elapsed}};
  if (opts.write_files && !opts.out_dir.empty()) {
    const auto file = opts.out_dir / (name + ".json");
    write_text(file, report.dump(2) + "\n");
    out.written.insert(out.written.begin(), file);
  }
  out.report = json::parse(report.dump());
  return out;
}

}  // namespace gerbelab
