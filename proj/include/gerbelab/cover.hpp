#pragma once

// Product cover of T^d_N by 3^d closed boxes, its nerve, and the homotopy
// operators that contract each multi-intersection.
//
// On each axis the circle is split at vertices 0, floor(N/3), floor(2N/3)
// into three closed arcs.  Two distinct arcs meet in one vertex and all three
// have empty common intersection, so the circle nerve is a triangle boundary.
// Every multi-intersection of product sets is a box: per axis a start vertex
// and a length < N.

#include "gerbelab/complex.hpp"
#include "gerbelab/smith.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace gerbelab {

struct Box {
  std::array<int, 3> start{0, 0, 0};
  std::array<int, 3> length{0, 0, 0};
};

/// Where a homotopy contracts a box to.
enum class RootRule { Lowest, Highest };

/// Local slot indexing of the cells of a box.  Slot = orientation_index *
/// vertex_slots + linear(offset), offsets in [0, length] per axis.  Slots whose
/// cell would leave the box along one of its own axes are unused (always 0).
class BoxChart {
 public:
  BoxChart() = default;
  BoxChart(const CubicalTorusComplex& X, const Box& box);

  const Box& box() const { return box_; }
  int dimension() const { return d_; }
  int vertex_slots() const { return nv_; }
  int slots(int k) const;
  bool valid(int k, int slot) const;
  /// Orientation mask and offset of a slot.
  AxisMask axes(int k, int slot) const;
  std::array<int, 3> offset(int slot) const;
  int slot(AxisMask axes, std::array<int, 3> offset) const;
  /// -1 if the cell is not contained in the box.
  int local(const Cell& c) const;
  int global(int k, int slot) const;
  /// Global vertex index of an offset.
  int global_vertex(std::array<int, 3> offset) const;

  Eigen::VectorXd restrict(int k, const Eigen::VectorXd& global) const;
  /// Adds the local vector into a global one.
  void scatter_add(int k, const Eigen::VectorXd& local, Eigen::VectorXd& global) const;

  Eigen::VectorXd coboundary(int k, const Eigen::VectorXd& c) const;
  /// Homotopy K: k-cochains -> (k-1)-cochains with dK + Kd = id - (root evaluation).
  Eigen::VectorXd homotopy(int k, const Eigen::VectorXd& c, RootRule rule = RootRule::Lowest) const;
  /// Offset of the root vertex.
  std::array<int, 3> root(RootRule rule) const;

 private:
  const CubicalTorusComplex* X_ = nullptr;
  Box box_;
  int d_ = 0, nv_ = 0;
  std::array<int, 3> extent_{1, 1, 1};  // length + 1
};

/// Nerve of the cover up to a fixed dimension; simplices are increasing index tuples.
class Nerve {
 public:
  using Simplex = std::vector<int>;

  int max_dimension() const { return int(simplices_.size()) - 1; }
  int count(int k) const { return k < 0 || k > max_dimension() ? 0 : int(simplices_[k].size()); }
  const Simplex& simplex(int k, int i) const { return simplices_.at(k).at(i); }
  const std::vector<Simplex>& simplices(int k) const { return simplices_.at(k); }
  /// Index of an increasing tuple, or -1.
  int index(const Simplex& s) const;
  /// delta_k : C^k -> C^{k+1}, (dc)(s) = sum_i (-1)^i c(s minus s_i).
  const IntSparse& coboundary(int k) const { return coboundary_.at(k); }

 private:
  friend class GoodCover;
  std::vector<std::vector<Simplex>> simplices_;
  std::vector<std::map<Simplex, int>> lookup_;
  std::vector<IntSparse> coboundary_;
};

class GoodCover {
 public:
  static constexpr int kNerveDimension = 4;

  explicit GoodCover(std::shared_ptr<const CubicalTorusComplex> complex);

  const CubicalTorusComplex& complex() const { return *complex_; }
  std::shared_ptr<const CubicalTorusComplex> complex_ptr() const { return complex_; }
  int set_count() const { return int(sets_.size()); }
  const Box& set(int alpha) const { return sets_.at(alpha); }
  /// Arc index along each axis for a set.
  std::array<int, 3> arcs(int alpha) const;
  const std::array<int, 4>& cut_points() const { return cuts_; }

  const Nerve& nerve() const { return nerve_; }
  /// Box and chart of the intersection of a nerve simplex.
  const Box& intersection(int k, int i) const { return boxes_.at(k).at(i); }
  const BoxChart& chart(int k, int i) const { return charts_.at(k).at(i); }
  /// Whether the homotopy identity was verified on this intersection.
  bool certified(int k, int i) const { return certified_.at(k).at(i); }
  bool all_certified() const;

  /// Bit alpha set iff the set contains the cell.
  std::uint32_t membership(int k, int cell) const { return membership_.at(k).at(cell); }
  /// Lowest-index set containing the cell.
  int hub(int k, int cell) const;

  /// Integral cohomology engine of the nerve in degree k (1 <= k <= 3).
  const IntegerCohomology& nerve_cohomology(int k) const;
  /// Integral homology generators (cycles) of the nerve in degree 2.
  const CohomologyGroup& nerve_homology2() const { return homology2_; }

 private:
  std::shared_ptr<const CubicalTorusComplex> complex_;
  std::array<int, 4> cuts_{};
  std::vector<Box> sets_;
  Nerve nerve_;
  std::vector<std::vector<Box>> boxes_;
  std::vector<std::vector<BoxChart>> charts_;
  std::vector<std::vector<bool>> certified_;
  std::vector<std::vector<std::uint32_t>> membership_;
  std::vector<std::optional<IntegerCohomology>> cohomology_;
  CohomologyGroup homology2_;
};

/// The 3^d product cover; requires N >= 3.
GoodCover good_cover_torus(std::shared_ptr<const CubicalTorusComplex> X);
GoodCover good_cover_torus(const CubicalTorusComplex& X);

/// Check dK + Kd = id - root evaluation exactly on integer test cochains.
bool verify_contraction(const BoxChart& chart, RootRule rule = RootRule::Lowest);

}  // namespace gerbelab
