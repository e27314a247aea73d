#pragma once

// Gerbe connections on the 3^d cover of T^3_N: local 2-forms F_alpha,
// overlap 1-forms A_ab and a circle 2-cocycle g, with
//   F_b - F_a = d A_ab,   (delta A)_abc = 2 pi d g_abc,   d F_a = G|_a.
// Holonomy of flat connections lives in H^2(T^3, R/Z) = (R/Z)^3, reported
// against the coordinate 2-tori in orientations(2) order.

#include "gerbelab/cech.hpp"
#include "gerbelab/hodge.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace gerbelab {

struct GerbeConnection {
  GerbeCocycle g;
  std::vector<Eigen::VectorXd> F;  // per cover set, local 2-cochain
  std::vector<Eigen::VectorXd> A;  // per nerve 1-simplex, local 1-cochain
  RealCochain G;                   // global curvature 3-cochain

  const GoodCover& cover() const { return g.g.cover(); }
  std::shared_ptr<const GoodCover> cover_ptr() const { return g.g.cover_ptr(); }
};

/// Trivial gerbe, zero connection.
GerbeConnection zero_connection(std::shared_ptr<const GoodCover> cover);

/// Connection read off a degree-3 staircase (F = levels[0], A = levels[1]).
GerbeConnection connection_from_staircase(const CechDeRham& s, const RealCochain& G);

/// Constant 2-cochain with integral 2 pi periods[t] over the coordinate
/// 2-torus orientations(2)[t] (d = 3).
RealCochain constant_two_form(const CubicalTorusComplex& X, const std::vector<double>& periods);

/// Flat connection F_a = w restricted to set a, A = 0, g = 1, for a closed
/// 2-cochain w.
GerbeConnection flat_connection(std::shared_ptr<const GoodCover> cover, const RealCochain& w);

/// Componentwise sum, or difference when sign = -1.
GerbeConnection tensor(const GerbeConnection& a, const GerbeConnection& b, int sign = 1);

struct ConnectionDiagnostics {
  double curvature_residual = 0;   // max_a |dF_a - G|_a|
  double closed_residual = 0;      // |dG|
  double overlap_residual = 0;     // max_ab |F_b - F_a - dA_ab|
  double cocycle_residual = 0;     // max_abc |delta A - 2 pi d g|
  std::vector<double> overlap_by_simplex;
  std::vector<double> cocycle_by_simplex;
  double curvature_norm = 0;       // |G|_inf
  bool is_flat = false;            // |G|_inf < 1e-9
  bool ok(double tol = 1e-9) const {
    return curvature_residual <= tol && closed_residual <= tol && overlap_residual <= tol && cocycle_residual <= tol;
  }
};

ConnectionDiagnostics validate_connection(const GerbeConnection& c);

struct HolonomyClass {
  Eigen::VectorXd periods;          // in [0,1), against the coordinate 2-tori
  Eigen::VectorXd raw;              // unreduced pairings
  Eigen::VectorXd nerve_constants;  // c_abc / 2 pi on nerve 2-simplices
  double constant_deviation = 0;
  /// Distance of the class from 0 in (R/Z)^3 (max over components).
  double distance_to_zero() const;
};

/// Requires |G|_inf < 1e-9, otherwise TopologyError.  B_a = K(F_a),
/// f_ab = K(A_ab - B_b + B_a), c = (delta f)/2pi - g.
HolonomyClass holonomy(const GerbeConnection& c, RootRule rule = RootRule::Lowest);

struct FlatTrivializationData {
  std::vector<Eigen::VectorXd> B;  // per set, local 1-cochain with dB_a = F_a
  std::optional<Trivialization> h; // delta h = g
  Eigen::VectorXd k;               // constants added to f_ab / 2 pi
  double cocycle_residual = 0;     // distance(delta h, g)
  double compatibility_residual = 0;  // max |A_ab - (B_b - B_a) - 2 pi dh_ab|
  double rounding_gap = 0;
};

class NonzeroHolonomyError : public TopologyError {
 public:
  NonzeroHolonomyError(const std::string& what, HolonomyClass cls)
      : TopologyError(what), holonomy(std::move(cls)) {}
  HolonomyClass holonomy;
};

/// Flat trivialization of a flat connection with zero holonomy (tolerance 1e-6).
FlatTrivializationData flat_trivialization(const GerbeConnection& c, RootRule rule = RootRule::Lowest);

/// Holonomy in H^1(T^3, R/Z) of the flat line bundle (B' - B, h' - h)
/// separating two flat trivializations of the same connection.
Eigen::VectorXd line_holonomy(const FlatTrivializationData& a, const FlatTrivializationData& b);

/// Sum of F over faces, A over edges (both / 2pi) and g over vertices of the
/// total chain lift of S, mod 1.  S must be a closed 2-chain.
double surface_holonomy(const GerbeConnection& c, const IntegerCochain& S, const std::vector<int>* assignment = nullptr,
                        HubRule rule = HubRule::Lowest);

struct PointGerbe {
  std::optional<GerbeConnection> connection;
  RealCochain H;                 // Delta H = V - 2 pi delta_p
  RealCochain F0;                // d* H
  RealCochain H1;                // local quadratic with dd* H1 = V on the ball
  RealCochain F1;                // d* H1
  IntegerCochain ball;           // indicator of the cubes within distance 1 of p's cube
  IntegerCochain ball_boundary;  // boundary 2-chain of the ball
  double poisson_residual = 0;   // |Delta H - (V - 2 pi delta_p)|_inf
  double local_residual = 0;     // max over ball cubes of |dd* H1 - V|
  double sphere_integral = 0;    // integral of F0 - F1 over the ball boundary
  CechDeRham staircase;
};

/// Point gerbe of p (unit-torus coordinates) on T^3_N; needs N >= 4.
PointGerbe point_gerbe_connection(const FlatMetric& m, const std::array<double, 3>& p,
                                  std::shared_ptr<const GoodCover> cover);

nlohmann::json to_json(const GerbeConnection& c);

}  // namespace gerbelab
