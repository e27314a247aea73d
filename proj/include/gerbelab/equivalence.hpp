#pragma once

// Point divisors on T^3, the Abel-Jacobi map and two linear-equivalence
// tests: direct path integrals of integral harmonic 1-forms, and pairings of
// the harmonic part of the Hodge-decomposed path chain.  Points are given in
// unit-torus coordinates; path endpoints snap to the nearest vertex and the
// sub-cell remainder is integrated exactly (harmonic 1-forms are constant).

#include "gerbelab/connection.hpp"
#include "gerbelab/hodge.hpp"

#include <array>
#include <optional>
#include <random>
#include <vector>

namespace gerbelab {

using Point3 = std::array<double, 3>;

struct PointDivisor {
  std::vector<std::pair<Point3, int>> terms;
  /// Reduces every point into [0,1)^3.
  PointDivisor() = default;
  explicit PointDivisor(std::vector<std::pair<Point3, int>> t);
  int degree() const;
};

struct AbelJacobiClass {
  Eigen::VectorXd coords;  // in [0,1), against the integral harmonic 1-forms
  Eigen::VectorXd raw;     // unreduced integral along the chosen path
};

/// Nearest vertex of a point and the remaining displacement in grid units.
struct SnappedPoint {
  int vertex = 0;
  std::array<double, 3> remainder{0, 0, 0};
};
SnappedPoint snap(const CubicalTorusComplex& X, const Point3& p);

/// Edge chain from vertex a to vertex b, moving along axis 0, then 1, then 2
/// by the shortest signed displacement, plus `winding[a]` full loops along a.
IntegerCochain lattice_path(const CubicalTorusComplex& X, int a, int b, std::array<int, 3> winding = {0, 0, 0});

/// Integral of the integral harmonic 1-forms from p to x.
AbelJacobiClass abel_jacobi(const FlatMetric& m, const Point3& p, const Point3& x,
                            std::array<int, 3> winding = {0, 0, 0});

enum class Verdict { Equivalent, NotEquivalent, Inconclusive };
const char* to_string(Verdict v);

/// Within tol of an integer: Equivalent; fractional part in [0.25, 0.75] for
/// some form: NotEquivalent; otherwise Inconclusive.
Verdict classify_pairings(const Eigen::VectorXd& pairings, double tol);

struct EquivalenceResult {
  Verdict verdict = Verdict::Inconclusive;
  bool equivalent() const { return verdict == Verdict::Equivalent; }
  Eigen::VectorXd integrals;   // sum_i int_{p_i}^{q_i} theta_j (unreduced)
  Eigen::VectorXd fractional;  // reduced to [0,1)
};

/// Throws std::invalid_argument on a degree mismatch.
EquivalenceResult linearly_equivalent(const FlatMetric& m, const PointDivisor& P, const PointDivisor& Q,
                                      double tol = 1e-6);

struct HolonomyEquivalence {
  EquivalenceResult result;          // from harmonic pairings
  double decomposition_residual = 0;
  double harmonic_residual = 0;      // |pairing of harmonic part - pairing of the chain|
  std::optional<HolonomyClass> gerbe_holonomy;  // of the difference of point gerbes
};

/// Hodge-decomposes the path chain (as a 1-cochain) and pairs its harmonic
/// part with the integral harmonic 1-forms.  With `with_gerbe`, also the
/// holonomy of (tensor of point gerbes of Q) / (tensor of point gerbes of P).
HolonomyEquivalence holonomy_equivalent(const FlatMetric& m, std::shared_ptr<const GoodCover> cover,
                                        const PointDivisor& P, const PointDivisor& Q, double tol = 1e-6,
                                        bool with_gerbe = false);

/// Random divisor pair of the given degree, points on the vertex grid.  When
/// `equivalent`, the last point of Q is chosen so that sum Q = sum P mod 1.
std::pair<PointDivisor, PointDivisor> sample_divisor_pair(std::mt19937_64& rng, int N, int degree, bool equivalent);

}  // namespace gerbelab
