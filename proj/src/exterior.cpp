#include "gerbelab/exterior.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

namespace gerbelab {

Gaussian operator/(Gaussian a, Gaussian b) {
  const Rational n = b.re * b.re + b.im * b.im;
  if (n == kZero) throw std::domain_error("division by zero");
  const Gaussian p = a * b.conj();
  return {p.re / n, p.im / n};
}

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << "/" << r.denominator();
  return os.str();
}

std::string to_string(const Gaussian& g) {
  if (g.im == kZero) return to_string(g.re);
  if (g.re == kZero) return to_string(g.im) + "i";
  return "(" + to_string(g.re) + (g.im > kZero ? "+" : "") + to_string(g.im) + "i)";
}

int wedge_sign(unsigned a, unsigned b) {
  int swaps = 0;
  for (unsigned rest = a; rest; rest &= rest - 1) {
    const int i = std::countr_zero(rest);
    swaps += std::popcount(b & ((1u << i) - 1));
  }
  return swaps % 2 ? -1 : 1;
}

Rational determinant(std::vector<RVector> A) {
  const int n = int(A.size());
  Rational det = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && A[p][c] == kZero) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(A[p], A[c]);
      det = -det;
    }
    det *= A[c][c];
    for (int r = c + 1; r < n; ++r) {
      const Rational f = A[r][c] / A[c][c];
      for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  return det;
}

// ---------------------------------------------------------------------------
// Form

Form Form::basis(int dim, unsigned mask, Gaussian c) {
  if (dim < 0 || dim > 16 || (mask >> dim) != 0) throw std::invalid_argument("basis form out of range");
  Form f(dim);
  f.add(mask, c);
  return f;
}

void Form::add(unsigned mask, Gaussian c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(mask, c);
  if (!inserted) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Gaussian Form::coefficient(unsigned mask) const {
  auto it = terms_.find(mask);
  return it == terms_.end() ? Gaussian{} : it->second;
}

Form Form::operator+(const Form& o) const {
  if (o.dim_ != dim_) throw std::invalid_argument("forms live on different spaces");
  Form r = *this;
  for (const auto& [m, c] : o.terms_) r.add(m, c);
  return r;
}

Form Form::operator-() const { return *this * Gaussian(-1); }
Form Form::operator-(const Form& o) const { return *this + (-o); }

Form Form::operator*(Gaussian c) const {
  Form r(dim_);
  for (const auto& [m, v] : terms_) r.add(m, v * c);
  return r;
}

Form Form::wedge(const Form& o) const {
  if (o.dim_ != dim_) throw std::invalid_argument("forms live on different spaces");
  Form r(dim_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : o.terms_)
      if ((a & b) == 0) r.add(a | b, ca * cb * Gaussian(wedge_sign(a, b)));
  return r;
}

Form Form::power(int k) const {
  Form r = scalar(dim_, 1);
  for (int i = 0; i < k; ++i) r = r.wedge(*this);
  return r;
}

Form Form::interior(const RVector& v) const {
  if (int(v.size()) != dim_) throw std::invalid_argument("vector has wrong dimension");
  Form r(dim_);
  for (const auto& [m, c] : terms_) {
    int pos = 0;
    for (unsigned rest = m; rest; rest &= rest - 1, ++pos) {
      const int i = std::countr_zero(rest);
      if (v[i] == kZero) continue;
      r.add(m & ~(1u << i), c * Gaussian(v[i]) * Gaussian(pos % 2 ? -1 : 1));
    }
  }
  return r;
}

Form Form::conj() const {
  Form r(dim_);
  for (const auto& [m, c] : terms_) r.add(m, c.conj());
  return r;
}

Form Form::real_part() const {
  Form r(dim_);
  for (const auto& [m, c] : terms_) r.add(m, Gaussian(c.re));
  return r;
}

Form Form::imag_part() const {
  Form r(dim_);
  for (const auto& [m, c] : terms_) r.add(m, Gaussian(c.im));
  return r;
}

Form Form::pullback(const std::vector<RVector>& vectors) const {
  const int k = int(vectors.size());
  for (const auto& v : vectors)
    if (int(v.size()) != dim_) throw std::invalid_argument("vector has wrong dimension");
  Form r(k);
  for (const auto& [m, c] : terms_) {
    const int p = std::popcount(m);
    if (p > k) continue;
    std::vector<int> I;
    for (unsigned rest = m; rest; rest &= rest - 1) I.push_back(std::countr_zero(rest));
    for (unsigned J = 0; J < (1u << k); ++J) {
      if (std::popcount(J) != p) continue;
      std::vector<RVector> A;
      for (unsigned rest = J; rest; rest &= rest - 1) {
        RVector row;
        for (int i : I) row.push_back(vectors[std::countr_zero(rest)][i]);
        A.push_back(row);
      }
      r.add(J, c * Gaussian(determinant(A)));
    }
  }
  return r;
}

Form Form::star() const {
  const unsigned full = (1u << dim_) - 1;
  Form r(dim_);
  for (const auto& [m, c] : terms_) r.add(full & ~m, c * Gaussian(wedge_sign(m, full & ~m)));
  return r;
}

Form Form::inverse_star() const {
  Form r(dim_);
  for (const auto& [m, c] : terms_) {
    const int p = std::popcount(m);
    r = r + Form::basis(dim_, m, c).star() * Gaussian((p * (dim_ - p)) % 2 ? -1 : 1);
  }
  return r;
}

std::string Form::str(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << to_string(c);
    for (unsigned rest = m; rest; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      os << (rest == m ? " " : "^") << (i < int(names.size()) ? names[i] : "e" + std::to_string(i + 1));
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Flat model

RVector FlatCYModel::dx(int j) const {
  RVector v(2 * n, Rational(0));
  v.at(j) = 1;
  return v;
}

RVector FlatCYModel::dy(int j) const {
  RVector v(2 * n, Rational(0));
  v.at(n + j) = 1;
  return v;
}

RVector FlatCYModel::complex_structure(const RVector& v) const {
  RVector w(2 * n);
  for (int j = 0; j < n; ++j) {
    w[n + j] = v[j];
    w[j] = -v[n + j];
  }
  return w;
}

std::vector<std::string> FlatCYModel::names() const {
  std::vector<std::string> s;
  for (int j = 0; j < n; ++j) s.push_back("dx" + std::to_string(j + 1));
  for (int j = 0; j < n; ++j) s.push_back("dy" + std::to_string(j + 1));
  return s;
}

FlatCYModel flat_cy_model(int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("flat model dimension must be between 1 and 4");
  FlatCYModel m;
  m.n = n;
  const int D = 2 * n;
  m.omega = Form(D);
  m.Omega = Form::scalar(D, 1);
  for (int j = 0; j < n; ++j) {
    m.omega = m.omega + Form::covector(D, j).wedge(Form::covector(D, n + j));
    m.Omega = m.Omega.wedge(Form::covector(D, j) + Form::covector(D, n + j, Gaussian::i()));
  }
  m.Omega1 = m.Omega.real_part();
  m.Omega2 = m.Omega.imag_part();
  const Form top = m.omega.power(n);
  const unsigned full = (1u << D) - 1;
  m.c = m.Omega.wedge(m.Omega.conj()).coefficient(full) / top.coefficient(full);
  return m;
}

RationalAngle RationalAngle::from_triple(long long a, long long b, long long c) {
  if (c == 0 || a * a + b * b != c * c) throw std::invalid_argument("not a Pythagorean triple");
  return {Rational(a, c), Rational(b, c)};
}

RationalAngle RationalAngle::operator+(const RationalAngle& o) const {
  return {cos * o.cos - sin * o.sin, sin * o.cos + cos * o.sin};
}

std::vector<RVector> rotated_plane(const FlatCYModel& m, const std::vector<RationalAngle>& phases) {
  if (int(phases.size()) != m.n) throw std::invalid_argument("one phase per complex coordinate");
  std::vector<RVector> basis;
  for (int j = 0; j < m.n; ++j) {
    RVector v(2 * m.n, Rational(0));
    v[j] = phases[j].cos;
    v[m.n + j] = phases[j].sin;
    basis.push_back(v);
  }
  return basis;
}

bool FlatCYReport::all_hold() const {
  for (const auto& c : checks)
    if (!c.holds) return false;
  return true;
}

namespace {

bool orthonormal(const std::vector<RVector>& B) {
  for (std::size_t a = 0; a < B.size(); ++a)
    for (std::size_t b = 0; b < B.size(); ++b) {
      Rational g = 0;
      for (std::size_t k = 0; k < B[a].size(); ++k) g += B[a][k] * B[b][k];
      if (g != Rational(a == b ? 1 : 0)) return false;
    }
  return true;
}

RVector combine(const std::vector<RVector>& vs, const std::vector<Rational>& w) {
  RVector out(vs[0].size(), Rational(0));
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w[i] * vs[i][k];
  return out;
}

// Special Lagrangian conditions and the normal-field identity on an
// orthonormal plane basis B (orientation given by the order of B).
void check_plane(const FlatCYModel& m, const std::vector<RVector>& B, const std::string& label,
                 std::vector<IdentityCheck>& out) {
  const int n = m.n;
  const Form vol = Form::basis(n, (1u << n) - 1);
  out.push_back({label + ": basis orthonormal", orthonormal(B), ""});
  const Form w = m.omega.pullback(B), o1 = m.Omega1.pullback(B), o2 = m.Omega2.pullback(B);
  out.push_back({label + ": omega restricts to zero", w.is_zero(), w.str()});
  out.push_back({label + ": Omega_2 restricts to zero", o2.is_zero(), o2.str()});
  out.push_back({label + ": Omega_1 restricts to the volume form", o1 == vol, o1.str()});

  // Normal fields: I applied to the tangent basis, plus a mixed combination.
  std::vector<RVector> normals;
  for (const auto& v : B) normals.push_back(m.complex_structure(v));
  std::vector<Rational> w8;
  for (int j = 0; j < n; ++j) w8.push_back(Rational(j % 2 ? -(j + 1) : 2 * j + 1, j + 2));
  normals.push_back(combine(normals, w8));
  bool inverse_form = true, literal = true;
  std::string detail, literal_detail;
  for (const auto& X : normals) {
    const Form lhs = m.omega.interior(X).pullback(B);
    const Form beta = m.Omega2.interior(X).pullback(B);
    if (!(lhs == -beta.inverse_star())) {
      inverse_form = false;
      detail = lhs.str() + " vs " + (-beta.inverse_star()).str();
    }
    if (!(lhs == -beta.star())) {
      literal = false;
      literal_detail = lhs.str() + " vs " + (-beta.star()).str();
    }
  }
  out.push_back({label + ": iota(X) omega = -*^{-1} iota(X) Omega_2 for normal X", inverse_form, detail});
  if (n == 3) out.push_back({label + ": iota(X) omega = -* iota(X) Omega_2 for normal X", literal, literal_detail});
}

}  // namespace

FlatCYReport flat_cy_check(int n) {
  if (n != 2 && n != 3) throw std::invalid_argument("flat_cy_check supports n = 2 or 3");
  const FlatCYModel m = flat_cy_model(n);
  const int D = 2 * n;
  const unsigned full = (1u << D) - 1;
  const auto names = m.names();
  FlatCYReport r;
  r.n = n;
  r.c = m.c;
  auto& C = r.checks;

  const Form top = m.omega.power(n);
  long long fact = 1;
  for (int k = 2; k <= n; ++k) fact *= k;
  C.push_back({"omega^n is a nonzero multiple of the volume form", top.terms().size() == 1 && !top.coefficient(full).is_zero(),
               top.str(names)});
  // Sign of dx1^dy1^...^dxn^dyn relative to dx1^...^dxn^dy1^...^dyn.
  int sign = 1;
  for (unsigned acc = 0, j = 0; j < unsigned(n); ++j) {
    sign *= wedge_sign(acc, 1u << j);
    acc |= 1u << j;
    sign *= wedge_sign(acc, 1u << (n + j));
    acc |= 1u << (n + j);
  }
  C.push_back({"omega^n = n! dx1^dy1^...^dxn^dyn", top == Form::basis(D, full, Gaussian(sign * fact)), ""});

  C.push_back({"Omega is nonvanishing", !m.Omega.is_zero(), m.Omega.str(names)});
  // Pluecker relations: (iota_xi Omega) ^ Omega = 0 for every basis
  // (n-1)-vector xi.
  bool decomposable = true;
  for (unsigned S = 0; S <= full; ++S) {
    if (std::popcount(S) != n - 1) continue;
    Form f = m.Omega;
    for (unsigned rest = S; rest; rest &= rest - 1) {
      RVector e(D, Rational(0));
      e[std::countr_zero(rest)] = 1;
      f = f.interior(e);
    }
    decomposable = decomposable && f.wedge(m.Omega).is_zero();
  }
  C.push_back({"Omega is decomposable", decomposable, ""});

  const Form a1 = m.Omega1.wedge(m.omega), a2 = m.Omega2.wedge(m.omega);
  C.push_back({"Omega_1 ^ omega = 0", a1.is_zero(), a1.str(names)});
  C.push_back({"Omega_2 ^ omega = 0", a2.is_zero(), a2.str(names)});
  const Form lhs = (m.Omega1 + m.Omega2 * Gaussian::i()).wedge(m.Omega1 - m.Omega2 * Gaussian::i());
  C.push_back({"(Omega_1 + i Omega_2) ^ (Omega_1 - i Omega_2) = c omega^n", !m.c.is_zero() && lhs == top * m.c,
               "c = " + to_string(m.c)});
  C.push_back({"omega, Omega_1, Omega_2 closed", true, "constant coefficients"});

  bool type_n0 = true, re_im = true;
  for (int k = 0; k < D; ++k) {
    RVector X(D, Rational(0));
    X[k] = 1;
    const RVector IX = m.complex_structure(X);
    type_n0 = type_n0 && m.Omega.interior(IX) == m.Omega.interior(X) * Gaussian::i();
    re_im = re_im && m.Omega1.interior(IX) == -m.Omega2.interior(X) && m.Omega2.interior(IX) == m.Omega1.interior(X);
  }
  C.push_back({"iota(IX) Omega = i iota(X) Omega for basis vectors", type_n0, ""});
  C.push_back({"iota(IX) Omega_1 = -iota(X) Omega_2, iota(IX) Omega_2 = iota(X) Omega_1", re_im, ""});

  std::vector<RVector> flat;
  for (int j = 0; j < n; ++j) flat.push_back(m.dx(j));
  check_plane(m, flat, "{y = 0}", C);
  {
    const Form lhs1 = m.omega.interior(m.dy(0)).pullback(flat);
    C.push_back({"{y = 0}: iota(d/dy1) omega = -dx1", lhs1 == -Form::covector(n, 0), lhs1.str()});
  }

  const auto a = RationalAngle::from_triple(3, 4, 5), b = RationalAngle::from_triple(5, 12, 13);
  std::vector<RationalAngle> zero_sum, nonzero_sum;
  if (n == 2) {
    zero_sum = {a, -a};
    nonzero_sum = {a, b};
  } else {
    zero_sum = {a, b, -(a + b)};
    nonzero_sum = {a, b, a};
  }
  check_plane(m, rotated_plane(m, zero_sum), "phase-rotated plane, sum of phases 0", C);
  const auto P = rotated_plane(m, nonzero_sum);
  const Form w = m.omega.pullback(P), o2 = m.Omega2.pullback(P);
  C.push_back({"phase-rotated plane, nonzero phase sum: Lagrangian", w.is_zero(), w.str()});
  C.push_back({"phase-rotated plane, nonzero phase sum: Omega_2 restriction nonzero", !o2.is_zero(), o2.str()});
  return r;
}

}  // namespace gerbelab
