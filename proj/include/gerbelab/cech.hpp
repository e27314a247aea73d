#pragma once

// Circle-valued Cech cochains on the nerve of a GoodCover, gerbe cocycles,
// characteristic classes, trivializations and the de Rham -> Cech staircase.
//
// R/Z is written additively.  A degree-k circle cochain assigns to every
// increasing nerve k-simplex a function on the vertices of its intersection
// box with values in [0,1), together with real increments on the box edges
// (the discrete d log / 2 pi i).  Increments are consistent with values mod 1
// and determine a real lift by integration along a spanning tree.  Only
// increasing tuples are stored; other orderings carry the permutation sign.

#include "gerbelab/complex.hpp"
#include "gerbelab/cover.hpp"
#include "gerbelab/errors.hpp"

#include <Eigen/Core>

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace gerbelab {

/// Reduce to [0, 1).
double frac(double x);
/// Distance from x to the nearest integer.
double distance_to_integer(double x);

class CircleCochain {
 public:
  CircleCochain(std::shared_ptr<const GoodCover> cover, int degree);

  /// From real lifts: lifts[i] is a real function on the vertex slots of
  /// simplex i's box.  Values are reduced mod 1, increments are differences.
  static CircleCochain from_real(std::shared_ptr<const GoodCover> cover, int degree,
                                 const std::vector<Eigen::VectorXd>& lifts);
  /// Constant value per simplex.
  static CircleCochain constant(std::shared_ptr<const GoodCover> cover, int degree, const Eigen::VectorXd& per_simplex);

  int degree() const { return degree_; }
  const GoodCover& cover() const { return *cover_; }
  std::shared_ptr<const GoodCover> cover_ptr() const { return cover_; }
  int simplex_count() const { return int(values_.size()); }

  const Eigen::VectorXd& values(int i) const { return values_.at(i); }
  const Eigen::VectorXd& increments(int i) const { return increments_.at(i); }
  Eigen::VectorXd& values(int i) { return values_.at(i); }
  Eigen::VectorXd& increments(int i) { return increments_.at(i); }

  /// Value at a global vertex for an arbitrarily ordered tuple (antisymmetric).
  double value(const std::vector<int>& tuple, int global_vertex) const;

  /// Tree-integrated real lift per simplex; throws TopologyError if the
  /// increments disagree with the values mod 1 by more than 1e-9.
  std::vector<Eigen::VectorXd> lift() const;

  CircleCochain operator+(const CircleCochain& o) const;
  CircleCochain operator-(const CircleCochain& o) const;
  CircleCochain scaled(std::int64_t k) const;

  /// Max over simplices of the mod-1 distance of values and of the increment difference.
  double distance(const CircleCochain& o) const;
  bool is_zero(double tol = 1e-9) const;

 private:
  std::shared_ptr<const GoodCover> cover_;
  int degree_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<Eigen::VectorXd> increments_;
};

/// Values of a lower-dimensional box cochain restricted into a sub-box.
Eigen::VectorXd restrict_between(const BoxChart& from, const BoxChart& to, int k, const Eigen::VectorXd& v);

/// Alternating-sum coboundary mod 1 (values) and over R (increments).
CircleCochain circle_coboundary(const CircleCochain& c);

/// Real Cech coboundary of per-simplex box cochains of form degree p.
std::vector<Eigen::VectorXd> real_coboundary(const GoodCover& cover, int simplex_degree, int form_degree,
                                             const std::vector<Eigen::VectorXd>& c);

struct CochainCheck {
  double value_residual = 0;      // max mod-1 distance of delta values from 0
  double increment_residual = 0;  // max |delta increments|
  bool ok(double tol = 1e-9) const { return value_residual <= tol && increment_residual <= tol; }
};

CochainCheck cocycle_check(const CircleCochain& c);

struct GerbeCocycle {
  CircleCochain g;
  explicit GerbeCocycle(CircleCochain c);
};

struct Trivialization {
  CircleCochain f;
  explicit Trivialization(CircleCochain c);
};

/// Cohomology class of delta(lift) for a circle cocycle of degree k.
struct CharacteristicClass {
  int degree = 0;                       // k + 1
  IntVector cocycle;                    // integer nerve (k+1)-cocycle delta(lift)
  IntegerCohomology::ClassCoordinates snf;  // coordinates against the Smith generators
  /// Canonical coordinates against coordinate (k+1)-tori (orientations order),
  /// normalized so that a staircase built from G gives the periods of G / 2 pi.
  IntVector periods;
  bool is_zero() const { return snf.is_zero(); }
};

/// Nerve chains obtained by lifting a cellular cycle through the cover.
struct TotalChain {
  /// levels[j]: pairs (cell of degree k - j, nerve j-simplex) -> coefficient.
  std::vector<std::map<std::pair<int, int>, std::int64_t>> levels;
  /// Sum of the last level over vertices: a nerve k-cycle.
  IntVector nerve_cycle;
};

enum class HubRule { Lowest, Highest };

/// S_0 assigns each cell to `assignment[cell]` (default: lowest containing set);
/// S_{j+1} = cone(boundary S_j) with hubs chosen by `rule`.
TotalChain total_chain_lift(const GoodCover& cover, const IntegerCochain& cycle,
                            const std::vector<int>* assignment = nullptr, HubRule rule = HubRule::Lowest);

/// Nerve q-cycles of the coordinate q-tori, in orientations(q) order.
std::vector<IntVector> coordinate_nerve_cycles(const GoodCover& cover, int q);

CharacteristicClass characteristic_class(const CircleCochain& g);

struct TrivializationResult {
  std::optional<Trivialization> trivialization;
  CharacteristicClass characteristic;
};

TrivializationResult trivialize(const GerbeCocycle& g);

struct LineCocycle {
  CircleCochain h;
  CharacteristicClass chern;
};

LineCocycle difference_of_trivializations(const Trivialization& f, const Trivialization& f2);

/// Output of the staircase for a closed q-cochain G.
struct CechDeRham {
  int q = 0;
  /// levels[j][i]: local (q-1-j)-cochain on the box of nerve j-simplex i
  /// (omega_0 = K(G|), omega_{j+1} = K(delta omega_j), last level adjusted).
  std::vector<std::vector<Eigen::VectorXd>> levels;
  IntVector integer_cocycle;          // n with delta omega_{q-1} = 2 pi n
  Eigen::VectorXd adjustment;         // b on (q-1)-simplices
  double constant_deviation = 0;      // max spread of delta omega_{q-1} on a box
  double rounding_gap = 0;            // max distance of raw periods to integers
  double adjustment_residual = 0;     // |c - n - delta b|_inf
  std::optional<CircleCochain> cocycle;  // degree q-1, values omega_{q-1} / 2 pi
  IntVector periods;                  // canonical class
};

/// G: closed real q-cochain on the complex, 1 <= q <= d, with integral periods of G / 2 pi.
CechDeRham derham_to_cech(std::shared_ptr<const GoodCover> cover, const RealCochain& G,
                          RootRule rule = RootRule::Lowest);

/// Same staircase started from local (q-1)-cochains top[alpha] whose Cech
/// coboundary is closed, e.g. local primitives of a closed q-form.
CechDeRham staircase_from_local(std::shared_ptr<const GoodCover> cover, int q, std::vector<Eigen::VectorXd> top,
                                RootRule rule = RootRule::Lowest);

/// Integer nerve q-cocycles D_S with <D_S, X_T> = delta_ST for the coordinate nerve cycles.
std::vector<IntVector> dual_nerve_cocycles(const GoodCover& cover, int q);

/// Solve delta_{k} b = r on the nerve in the least-squares sense (LSCG); returns b.
Eigen::VectorXd solve_nerve_coboundary(const GoodCover& cover, int k, const Eigen::VectorXd& r, double* residual);

/// Sign relating delta(lift) pairings to periods for a degree-(q-1) cocycle.
int canonical_sign(int q);

nlohmann::json to_json(const CircleCochain& c);
CircleCochain circle_cochain_from_json(std::shared_ptr<const GoodCover> cover, const nlohmann::json& j);

}  // namespace gerbelab
