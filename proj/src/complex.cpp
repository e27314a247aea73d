#include "gerbelab/complex.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace gerbelab {

namespace {

int mod(int a, int n) {
  int r = a % n;
  return r < 0 ? r + n : r;
}

// Sorted axis list of a mask.
std::vector<int> axes_of(AxisMask s) {
  std::vector<int> out;
  for (int a = 0; a < 3; ++a)
    if (s & (1u << a)) out.push_back(a);
  return out;
}

}  // namespace

int shuffle_sign(AxisMask s, AxisMask t) {
  if (s & t) return 0;
  // Count inversions: pairs (a in S, b in T) with a > b.
  int inv = 0;
  for (int a = 0; a < 3; ++a)
    if (s & (1u << a))
      for (int b = 0; b < a; ++b)
        if (t & (1u << b)) ++inv;
  return inv % 2 ? -1 : 1;
}

CubicalTorusComplex::CubicalTorusComplex(int dimension, int resolution) : d_(dimension), n_(resolution) {
  if (d_ < 1 || d_ > 3) throw std::invalid_argument("torus dimension must be 1, 2 or 3, got " + std::to_string(d_));
  if (n_ < 2) throw std::invalid_argument("torus resolution must be >= 2, got " + std::to_string(n_));
  nd_ = 1;
  for (int a = 0; a < d_; ++a) nd_ *= n_;

  masks_.assign(d_ + 1, {});
  // Lexicographic order of sorted axis tuples within each degree.
  std::vector<std::vector<int>> tuples;
  for (AxisMask s = 0; s < (1u << d_); ++s) tuples.push_back(axes_of(s));
  std::vector<AxisMask> all;
  for (AxisMask s = 0; s < (1u << d_); ++s) all.push_back(s);
  std::sort(all.begin(), all.end(), [&](AxisMask a, AxisMask b) { return tuples[a] < tuples[b]; });
  for (AxisMask s : all) masks_[std::popcount(s)].push_back(s);

  boundary_.resize(d_ + 1);
  coboundary_.resize(d_ + 1);
  for (int k = 1; k <= d_; ++k) {
    std::vector<Eigen::Triplet<std::int64_t>> trip;
    const int cols = cell_count(k);
    for (int c = 0; c < cols; ++c) {
      Cell cl = cell(k, c);
      auto ax = axes_of(cl.axes);
      for (std::size_t i = 0; i < ax.size(); ++i) {
        const int sgn = (i % 2 == 0) ? 1 : -1;
        AxisMask face = cl.axes & ~(1u << ax[i]);
        auto up = cl.base;
        up[ax[i]] += 1;
        trip.emplace_back(cell_index(face, up), c, sgn);
        trip.emplace_back(cell_index(face, cl.base), c, -sgn);
      }
    }
    IntSparse b(cell_count(k - 1), cols);
    b.setFromTriplets(trip.begin(), trip.end());
    b.prune([](Eigen::Index, Eigen::Index, std::int64_t v) { return v != 0; });
    boundary_[k] = b;
    coboundary_[k - 1] = IntSparse(b.transpose());
  }
}

int CubicalTorusComplex::cell_count(int k) const {
  if (k < 0 || k > d_) return 0;
  return int(masks_[k].size()) * nd_;
}

int CubicalTorusComplex::orientation_index(AxisMask s) const {
  const auto& m = masks_.at(std::popcount(s));
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] == s) return int(i);
  throw std::out_of_range("axis mask outside the complex");
}

int CubicalTorusComplex::vertex_linear(std::array<int, 3> base) const {
  int lin = 0;
  for (int a = 0; a < d_; ++a) lin = lin * n_ + mod(base[a], n_);
  return lin;
}

std::array<int, 3> CubicalTorusComplex::vertex_coords(int linear) const {
  std::array<int, 3> x{0, 0, 0};
  for (int a = d_ - 1; a >= 0; --a) {
    x[a] = linear % n_;
    linear /= n_;
  }
  return x;
}

Cell CubicalTorusComplex::cell(int k, int index) const {
  if (index < 0 || index >= cell_count(k)) throw std::out_of_range("cell index out of range");
  return Cell{masks_[k][index / nd_], vertex_coords(index % nd_)};
}

int CubicalTorusComplex::cell_index(AxisMask axes, std::array<int, 3> base) const {
  return orientation_index(axes) * nd_ + vertex_linear(base);
}

const IntSparse& CubicalTorusComplex::boundary(int k) const {
  if (k < 1 || k > d_) throw std::out_of_range("boundary degree out of range: " + std::to_string(k));
  return boundary_[k];
}

const IntSparse& CubicalTorusComplex::coboundary(int k) const {
  if (k < 0 || k >= d_) throw std::out_of_range("coboundary degree out of range: " + std::to_string(k));
  return coboundary_[k];
}

CubicalTorusComplex build_torus_complex(int d, int N) { return CubicalTorusComplex(d, N); }

const IntSparse& boundary_operator(const CubicalTorusComplex& X, int k) { return X.boundary(k); }

IntegerCohomology cohomology_engine(const CubicalTorusComplex& X, int k) {
  const int d = X.dimension();
  if (k < 0 || k > d) throw std::out_of_range("cohomology degree out of range");
  IntSparse in = k > 0 ? X.coboundary(k - 1) : IntSparse(X.cell_count(0), 0);
  IntSparse out = k < d ? X.coboundary(k) : IntSparse(0, X.cell_count(d));
  return IntegerCohomology(in, out, k);
}

CohomologyGroup integer_cohomology(const CubicalTorusComplex& X, int k) { return cohomology_engine(X, k).group(); }

CohomologyGroup integer_homology(const CubicalTorusComplex& X, int k) {
  const int d = X.dimension();
  if (k < 0 || k > d) throw std::out_of_range("homology degree out of range");
  IntSparse in = k < d ? X.boundary(k + 1) : IntSparse(X.cell_count(d), 0);
  IntSparse out = k > 0 ? X.boundary(k) : IntSparse(0, X.cell_count(0));
  return IntegerCohomology(in, out, k).group();
}

template <class Scalar>
Cochain<Scalar> coboundary(const CubicalTorusComplex& X, const Cochain<Scalar>& c) {
  if (c.values.size() != X.cell_count(c.degree)) throw std::invalid_argument("cochain length does not match degree");
  const IntSparse& D = X.coboundary(c.degree);
  Cochain<Scalar> out{c.degree + 1, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(D.rows())};
  for (int j = 0; j < D.outerSize(); ++j)
    for (IntSparse::InnerIterator it(D, j); it; ++it) out.values(it.row()) += Scalar(it.value()) * c.values(j);
  return out;
}

template <class Scalar>
Cochain<Scalar> cup_product(const CubicalTorusComplex& X, const Cochain<Scalar>& a, const Cochain<Scalar>& b) {
  const int k = a.degree, l = b.degree, d = X.dimension();
  if (k + l > d) throw std::invalid_argument("cup product degree exceeds dimension");
  if (a.values.size() != X.cell_count(k) || b.values.size() != X.cell_count(l))
    throw std::invalid_argument("cochain length does not match degree");
  Cochain<Scalar> out{k + l, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(X.cell_count(k + l))};
  for (int c = 0; c < X.cell_count(k + l); ++c) {
    Cell cl = X.cell(k + l, c);
    Scalar acc = 0;
    for (AxisMask s : X.orientations(k)) {
      if ((s & cl.axes) != s) continue;
      AxisMask t = cl.axes & ~s;
      auto shifted = cl.base;
      for (int ax = 0; ax < 3; ++ax)
        if (s & (1u << ax)) shifted[ax] += 1;
      acc += Scalar(shuffle_sign(s, t)) * a.values(X.cell_index(s, cl.base)) * b.values(X.cell_index(t, shifted));
    }
    out.values(c) = acc;
  }
  return out;
}

template <class Scalar>
static Scalar pairing_impl(const CubicalTorusComplex& X, const Cochain<Scalar>& a, const Cochain<Scalar>& b) {
  if (a.degree + b.degree != X.dimension()) throw std::invalid_argument("wedge_pairing: degrees are not complementary");
  return cup_product(X, a, b).values.sum();
}

double wedge_pairing(const CubicalTorusComplex& X, const RealCochain& a, const RealCochain& b) {
  return pairing_impl(X, a, b);
}

std::int64_t wedge_pairing(const CubicalTorusComplex& X, const IntegerCochain& a, const IntegerCochain& b) {
  return pairing_impl(X, a, b);
}

IntegerCochain coordinate_cycle(const CubicalTorusComplex& X, AxisMask s) {
  const int k = std::popcount(s);
  IntegerCochain c{k, IntVector::Zero(X.cell_count(k))};
  for (int v = 0; v < X.vertex_count(); ++v) {
    auto x = X.vertex_coords(v);
    bool on = true;
    for (int a = 0; a < X.dimension(); ++a)
      if (!(s & (1u << a)) && x[a] != 0) on = false;
    if (on) c.values(X.cell_index(s, x)) = 1;
  }
  return c;
}

IntegerCochain coordinate_cocycle(const CubicalTorusComplex& X, AxisMask s) {
  const int k = std::popcount(s);
  IntegerCochain c{k, IntVector::Zero(X.cell_count(k))};
  for (int v = 0; v < X.vertex_count(); ++v) {
    auto x = X.vertex_coords(v);
    bool on = true;
    for (int a = 0; a < X.dimension(); ++a)
      if ((s & (1u << a)) && x[a] != 0) on = false;
    if (on) c.values(X.cell_index(s, x)) = 1;
  }
  return c;
}

template <class Scalar>
Scalar evaluate(const Cochain<Scalar>& c, const IntegerCochain& chain) {
  if (c.degree != chain.degree || c.values.size() != chain.values.size())
    throw std::invalid_argument("evaluate: cochain and chain differ in degree");
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < chain.values.size(); ++i)
    if (chain.values(i) != 0) acc += Scalar(chain.values(i)) * c.values(i);
  return acc;
}

RealCochain to_real(const IntegerCochain& c) { return {c.degree, c.values.cast<double>()}; }

template Cochain<double> coboundary(const CubicalTorusComplex&, const Cochain<double>&);
template Cochain<std::int64_t> coboundary(const CubicalTorusComplex&, const Cochain<std::int64_t>&);
template Cochain<double> cup_product(const CubicalTorusComplex&, const Cochain<double>&, const Cochain<double>&);
template Cochain<std::int64_t> cup_product(const CubicalTorusComplex&, const Cochain<std::int64_t>&,
                                           const Cochain<std::int64_t>&);
template double evaluate(const Cochain<double>&, const IntegerCochain&);
template std::int64_t evaluate(const Cochain<std::int64_t>&, const IntegerCochain&);

}  // namespace gerbelab
