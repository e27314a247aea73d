#pragma once

// Periodic cubical cell complex of the flat torus T^d_N.
//
// A k-cell is [x; S]: base vertex x in (Z/N)^d and an axis set S with |S| = k.
// It spans x + sum_{a in S} t_a e_a, t in [0,1]^k.  Orientation follows the
// increasing axis order of S.  With S = (a_1 < ... < a_k):
//
//   d[x; S] = sum_i (-1)^(i-1) ( [x + e_{a_i}; S \ a_i] - [x; S \ a_i] )
//
// Orientation table (index of S within degree k, d = 3):
//
//   k = 0 : {}
//   k = 1 : {0} {1} {2}
//   k = 2 : {0,1} {0,2} {1,2}
//   k = 3 : {0,1,2}
//
// Cell index = orientation_index * N^d + ((x_0 * N + x_1) * N + x_2).

#include "gerbelab/smith.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace gerbelab {

using AxisMask = unsigned;

struct Cell {
  AxisMask axes = 0;
  std::array<int, 3> base{0, 0, 0};
};

template <class Scalar>
struct Cochain {
  int degree = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
};

using IntegerCochain = Cochain<std::int64_t>;
using RealCochain = Cochain<double>;

class CubicalTorusComplex {
 public:
  CubicalTorusComplex(int dimension, int resolution);

  int dimension() const { return d_; }
  int resolution() const { return n_; }
  int vertex_count() const { return nd_; }
  double edge_length() const { return 1.0 / n_; }

  int cell_count(int k) const;
  const std::vector<AxisMask>& orientations(int k) const { return masks_.at(k); }
  int orientation_index(AxisMask s) const;

  Cell cell(int k, int index) const;
  /// Base coordinates are reduced mod N.
  int cell_index(AxisMask axes, std::array<int, 3> base) const;
  int cell_index(const Cell& c) const { return cell_index(c.axes, c.base); }

  int vertex_linear(std::array<int, 3> base) const;
  std::array<int, 3> vertex_coords(int linear) const;

  /// d_k : C_k -> C_{k-1}, 1 <= k <= d.
  const IntSparse& boundary(int k) const;
  /// delta_k : C^k -> C^{k+1}, 0 <= k < d.  Equals boundary(k+1)^T.
  const IntSparse& coboundary(int k) const;

 private:
  int d_, n_, nd_;
  std::vector<std::vector<AxisMask>> masks_;
  std::vector<IntSparse> boundary_, coboundary_;
};

CubicalTorusComplex build_torus_complex(int d, int N);

/// d_k; throws std::out_of_range unless 1 <= k <= d.
const IntSparse& boundary_operator(const CubicalTorusComplex& X, int k);

/// Integral cohomology in degree k with Smith certificates.
IntegerCohomology cohomology_engine(const CubicalTorusComplex& X, int k);
CohomologyGroup integer_cohomology(const CubicalTorusComplex& X, int k);
/// Integral homology in degree k (cycles as generators).
CohomologyGroup integer_homology(const CubicalTorusComplex& X, int k);

/// Apply delta to a cochain of degree k < d.
template <class Scalar>
Cochain<Scalar> coboundary(const CubicalTorusComplex& X, const Cochain<Scalar>& c);

/// Cubical cup product: for [x; R],
///   (a u b)[x; R] = sum_{S u T = R, |S| = k} sign(S,T) a[x; S] b[x + e_S; T].
template <class Scalar>
Cochain<Scalar> cup_product(const CubicalTorusComplex& X, const Cochain<Scalar>& a, const Cochain<Scalar>& b);

/// Sum over top cells of a u b; deg a + deg b must equal d.
double wedge_pairing(const CubicalTorusComplex& X, const RealCochain& a, const RealCochain& b);
std::int64_t wedge_pairing(const CubicalTorusComplex& X, const IntegerCochain& a, const IntegerCochain& b);

/// Coordinate subtorus through the origin spanned by the axes in S (a cycle).
IntegerCochain coordinate_cycle(const CubicalTorusComplex& X, AxisMask s);
/// Cocycle taking the value 1 on the cells [x; S] with x_a = 0 for a in S.
/// Pairs to 1 with coordinate_cycle(S) and to 0 with the other coordinate cycles.
IntegerCochain coordinate_cocycle(const CubicalTorusComplex& X, AxisMask s);

/// Evaluate a cochain on a chain (both given as coefficient vectors).
template <class Scalar>
Scalar evaluate(const Cochain<Scalar>& c, const IntegerCochain& chain);

/// Sign of the shuffle that sorts the concatenation (S, T).
int shuffle_sign(AxisMask s, AxisMask t);

RealCochain to_real(const IntegerCochain& c);

}  // namespace gerbelab
