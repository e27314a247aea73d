#pragma once

// Exact exterior algebra with Gaussian-rational coefficients over R^m, and
// the flat Calabi-Yau model C^n = R^{2n}.  In the flat model the basis
// covectors are dx_1..dx_n (bits 0..n-1) followed by dy_1..dy_n (bits
// n..2n-1); a basis form is the wedge of its set bits in increasing order.

#include <boost/rational.hpp>

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace gerbelab {

using Rational = boost::rational<long long>;
// Compare against Rational values only: mixed Rational/int comparisons recurse
// under C++20 rewritten operators in some Boost versions.
inline const Rational kZero{0};

struct Gaussian {
  Rational re{0}, im{0};
  Gaussian() = default;
  Gaussian(Rational r, Rational i = 0) : re(r), im(i) {}
  Gaussian(long long r) : re(r) {}
  static Gaussian i() { return {0, 1}; }
  Gaussian conj() const { return {re, -im}; }
  bool is_zero() const { return re == kZero && im == kZero; }
  friend Gaussian operator+(Gaussian a, Gaussian b) { return {a.re + b.re, a.im + b.im}; }
  friend Gaussian operator-(Gaussian a, Gaussian b) { return {a.re - b.re, a.im - b.im}; }
  friend Gaussian operator-(Gaussian a) { return {-a.re, -a.im}; }
  friend Gaussian operator*(Gaussian a, Gaussian b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
  friend Gaussian operator/(Gaussian a, Gaussian b);
  friend bool operator==(Gaussian a, Gaussian b) { return a.re == b.re && a.im == b.im; }
};
std::string to_string(const Gaussian& g);
std::string to_string(const Rational& r);

/// Constant-coefficient vector with rational components.
using RVector = std::vector<Rational>;

class Form {
 public:
  explicit Form(int dim = 0) : dim_(dim) {}
  static Form basis(int dim, unsigned mask, Gaussian c = 1);
  /// Covector e_k.
  static Form covector(int dim, int k, Gaussian c = 1) { return basis(dim, 1u << k, c); }
  static Form scalar(int dim, Gaussian c) { return basis(dim, 0, c); }

  int dim() const { return dim_; }
  const std::map<unsigned, Gaussian>& terms() const { return terms_; }
  Gaussian coefficient(unsigned mask) const;
  bool is_zero() const { return terms_.empty(); }

  Form operator+(const Form& o) const;
  Form operator-(const Form& o) const;
  Form operator-() const;
  Form operator*(Gaussian c) const;
  friend Form operator*(Gaussian c, const Form& f) { return f * c; }
  bool operator==(const Form& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

  Form wedge(const Form& o) const;
  Form power(int k) const;
  /// Interior product with a real vector.
  Form interior(const RVector& v) const;
  Form conj() const;
  Form real_part() const;
  Form imag_part() const;
  /// Pullback to R^k along the linear map e_j -> vectors[j].
  Form pullback(const std::vector<RVector>& vectors) const;
  /// Hodge star of R^dim with the Euclidean metric and the standard
  /// orientation.
  Form star() const;
  Form inverse_star() const;

  std::string str(const std::vector<std::string>& names = {}) const;

 private:
  void add(unsigned mask, Gaussian c);
  int dim_;
  std::map<unsigned, Gaussian> terms_;
};

/// Sign of moving the bits of a past the bits of b (wedge of basis forms).
int wedge_sign(unsigned a, unsigned b);
/// Determinant of a small square rational matrix (rows given).
Rational determinant(std::vector<RVector> rows);

struct FlatCYModel {
  int n = 0;
  Form omega, Omega, Omega1, Omega2;
  Gaussian c;  // Omega ^ conj(Omega) = c omega^n
  RVector dx(int j) const;  // coordinate vector d/dx_j
  RVector dy(int j) const;
  /// Complex structure I d/dx_j = d/dy_j, I d/dy_j = -d/dx_j.
  RVector complex_structure(const RVector& v) const;
  std::vector<std::string> names() const;
};

/// omega = sum dx_j ^ dy_j, Omega = (dx_1 + i dy_1) ^ ... ^ (dx_n + i dy_n).
FlatCYModel flat_cy_model(int n);

/// Pythagorean rational rotation angle: cos = a/c, sin = b/c.
struct RationalAngle {
  Rational cos, sin;
  static RationalAngle from_triple(long long a, long long b, long long c);
  RationalAngle operator+(const RationalAngle& o) const;
  RationalAngle operator-() const { return {cos, -sin}; }
  bool is_zero() const { return cos == Rational(1) && sin == kZero; }
};

/// Orthonormal basis cos t_j d/dx_j + sin t_j d/dy_j of the plane obtained
/// from {y = 0} by the diagonal phase exp(i t_j).
std::vector<RVector> rotated_plane(const FlatCYModel& m, const std::vector<RationalAngle>& phases);

struct IdentityCheck {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct FlatCYReport {
  int n = 0;
  Gaussian c;
  std::vector<IdentityCheck> checks;
  bool all_hold() const;
};

/// Runs the identity suite: the defining form identities, the type (n,0)
/// relation for interior products, special Lagrangian planes (coordinate and
/// phase-rotated) and the normal-field identity on them.  In the form
/// iota(X) omega = -*^{-1} iota(X) Omega_2 it holds for every n; with * in
/// place of *^{-1} it holds when ** = 1 on (n-1)-forms, i.e. for odd n, and
/// is checked for n = 3 only.
FlatCYReport flat_cy_check(int n);

}  // namespace gerbelab
