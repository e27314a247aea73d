#pragma once

// Discrete Hodge theory for the flat metric on T^d_N.
//
// The torus has side L = (2*pi)^(1/d), so the total volume is 2*pi, and the
// mesh spacing is h = L / N.  The diagonal star on k-cochains has weight
// w_k = h^(d - 2k) (dual volume over primal volume).  Dual cochains live on
// the complex translated by -(1/2, ..., 1/2): the dual of [x; S] is the cell
// [x - e_{S^c}; S^c] of that translated copy.

#include "gerbelab/complex.hpp"
#include "gerbelab/errors.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <memory>
#include <vector>

namespace gerbelab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Real cochain on the primal complex or on its translated dual copy.
struct FormCochain {
  RealCochain cochain;
  bool dual = false;
};

/// Raised when a Poisson right-hand side has a harmonic component.
class HarmonicComponentError : public TopologyError {
 public:
  HarmonicComponentError(const std::string& what, double magnitude) : TopologyError(what), magnitude_(magnitude) {}
  double magnitude() const { return magnitude_; }

 private:
  double magnitude_;
};

struct HarmonicBasis {
  int degree = 0;
  std::vector<RealCochain> basis;
  /// periods(i, j) = integral of basis[i] over the j-th coordinate cycle
  /// (orientations(k) order).
  Eigen::MatrixXd periods;
};

struct SolverStats {
  int iterations = 0;
  double residual = 0;
};

class FlatMetric {
 public:
  explicit FlatMetric(std::shared_ptr<const CubicalTorusComplex> complex);

  const CubicalTorusComplex& complex() const { return *complex_; }
  std::shared_ptr<const CubicalTorusComplex> complex_ptr() const { return complex_; }
  int dimension() const { return complex_->dimension(); }
  double side() const { return side_; }
  double spacing() const { return h_; }
  double star_weight(int k) const;

  /// Top-degree volume cochain, h^d on every cube.
  const RealCochain& volume() const { return volume_; }
  double total_volume() const { return volume_.values.sum(); }

  /// Delta_k = d M^-1 d^T M + M^-1 d^T M d (symmetric for this metric).
  const SparseMatrix& laplacian(int k) const { return laplacian_.at(k); }

  /// Orthonormal (Euclidean) basis of ker Delta_k, used for deflation.
  const Eigen::MatrixXd& harmonic_projector_basis(int k) const { return harmonic_orthonormal_.at(k); }
  const HarmonicBasis& integral_harmonic_basis(int k) const { return harmonic_.at(k); }

 private:
  std::shared_ptr<const CubicalTorusComplex> complex_;
  double side_, h_;
  RealCochain volume_;
  std::vector<SparseMatrix> laplacian_;
  std::vector<Eigen::MatrixXd> harmonic_orthonormal_;
  std::vector<HarmonicBasis> harmonic_;
};

FlatMetric make_flat_metric(int d, int N);

/// Primal k-cochain -> dual (d-k)-cochain, or dual -> primal; ** = (-1)^(k(d-k)).
FormCochain hodge_star(const FlatMetric& m, const FormCochain& a);
FormCochain hodge_star(const FlatMetric& m, const RealCochain& primal);
FormCochain hodge_star(const FlatMetric& m, const IntegerCochain&) = delete;

/// d* = M_{k-1}^-1 d^T M_k on a primal k-cochain.
RealCochain codifferential(const FlatMetric& m, const RealCochain& a);

/// Delta_k applied to a cochain.
RealCochain apply_laplacian(const FlatMetric& m, const RealCochain& a);

/// Conjugate gradients on Delta_k with harmonic deflation.  rhs must be
/// orthogonal to harmonic k-cochains (|projection| <= 1e-10), otherwise
/// HarmonicComponentError.  The result is orthogonal to harmonics.
RealCochain solve_poisson(const FlatMetric& m, const RealCochain& rhs, SolverStats* stats = nullptr);

/// Euclidean projection onto harmonic k-cochains.
RealCochain harmonic_projection(const FlatMetric& m, const RealCochain& a);

HarmonicBasis harmonic_basis(const FlatMetric& m, int k);

/// Indicator of the cube containing p (unit-torus coordinates, reduced mod 1).
RealCochain delta_current(const FlatMetric& m, const std::array<double, 3>& p);
int containing_cube(const CubicalTorusComplex& X, const std::array<double, 3>& p);

/// a = d(exact_potential) + coexact + harmonic, with coexact = d*(coexact_potential).
struct HodgeDecomposition {
  RealCochain exact_potential;
  RealCochain exact;
  RealCochain coexact;
  RealCochain harmonic;
  double residual = 0;  // |a - exact - coexact - harmonic|_inf
};

HodgeDecomposition hodge_decomposition(const FlatMetric& m, const RealCochain& a);

}  // namespace gerbelab
