#pragma once

// Semi-flat geometry on the torus fibration R^n x T^n -> R^n: Hessian
// potentials, the real Monge-Ampere equation, Ricci curvature of the Hessian
// metric and the Legendre-transform mirror.
//
// A potential is phi(x) = 1/2 x^T Q x + psi(T^{-1} x) + offset, where psi is
// sampled on the unit-torus grid (mean zero) and T is the period frame.
// Primal potentials have T = I.  The Legendre dual of (Q, psi, T) has
// quadratic part Q^{-1} and frame Q T, so its periodic part is sampled on the
// uniform grid of the dual fundamental domain Q T [0,1)^n.

#include "gerbelab/errors.hpp"
#include "gerbelab/spectral.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace gerbelab {

/// Q + Hess psi failed to be positive definite at the listed grid nodes.
class ConvexityError : public NumericalError {
 public:
  ConvexityError(const std::string& what, std::vector<int> nodes, double min_eigenvalue)
      : NumericalError(what), nodes_(std::move(nodes)), min_eigenvalue_(min_eigenvalue) {}
  const std::vector<int>& nodes() const { return nodes_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::vector<int> nodes_;
  double min_eigenvalue_;
};

struct FourierTerm {
  std::array<int, 3> k{0, 0, 0};
  double cos_coef = 0;  // coefficient of cos(2 pi k.s)
  double sin_coef = 0;  // coefficient of sin(2 pi k.s)
};

class HessianPotential {
 public:
  /// psi has M^n samples; its mean is moved into the offset.  An empty frame
  /// means the identity.
  HessianPotential(Eigen::MatrixXd Q, int M, Eigen::VectorXd psi, Scheme scheme = Scheme::Spectral,
                   Eigen::MatrixXd frame = {}, double offset = 0);
  static HessianPotential quadratic(Eigen::MatrixXd Q, int M, Scheme scheme = Scheme::Spectral);
  static HessianPotential from_fourier(Eigen::MatrixXd Q, int M, const std::vector<FourierTerm>& terms,
                                       Scheme scheme = Scheme::Spectral);

  int dimension() const { return int(Q_.rows()); }
  int resolution() const { return grid_->resolution(); }
  const PeriodicGrid& grid() const { return *grid_; }
  std::shared_ptr<const PeriodicGrid> grid_ptr() const { return grid_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& frame() const { return T_; }
  const Eigen::VectorXd& psi() const { return psi_; }
  double offset() const { return offset_; }
  Scheme scheme() const { return scheme_; }

  /// x = T s for grid node s.
  Eigen::VectorXd node_point(int idx) const;
  /// phi at every node.
  Eigen::VectorXd node_values() const;
  /// Q + T^{-T} Hess_s psi T^{-1} at every node, using the derivative scheme.
  std::vector<Eigen::MatrixXd> hessian_field() const;
  /// Hessian in x of an arbitrary grid field (same frame and scheme).
  std::vector<Eigen::MatrixXd> field_hessian(const Eigen::VectorXd& f) const;
  /// Value, gradient and Hessian at an arbitrary point via the trigonometric
  /// interpolant of psi.
  Jet jet(const Eigen::VectorXd& x) const;

 private:
  Eigen::MatrixXd Q_, T_, Tinv_;
  Eigen::VectorXd psi_;
  double offset_ = 0;
  Scheme scheme_;
  std::shared_ptr<const PeriodicGrid> grid_;
  std::shared_ptr<const TrigInterpolant> interp_;
};

struct ConvexityReport {
  double min_eigenvalue = 0;
  std::vector<int> bad_nodes;
  bool convex() const { return bad_nodes.empty(); }
};
ConvexityReport convexity(const std::vector<Eigen::MatrixXd>& hessians);

struct SemiFlatMetric {
  std::vector<Eigen::MatrixXd> g;  // g_ij(x) at every node
  double min_eigenvalue = 0;
  /// 2n x 2n metric in coordinates (x, y): g on both diagonal blocks.
  Eigen::MatrixXd block(int node) const;
};

/// Throws ConvexityError listing the offending nodes.
SemiFlatMetric semi_flat_metric(const HessianPotential& phi);

struct MAResidual {
  Eigen::VectorXd field;  // det(Hess phi) - c* rho
  double c_star = 0;      // det Q
  double sup_norm = 0;
};

/// `forcing` (rho) is optional: positive with mean 1; empty means rho = 1.
MAResidual ma_residual(const HessianPotential& phi, const Eigen::VectorXd& forcing = {});

struct MAOptions {
  double tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 30;
  Eigen::VectorXd forcing;
};

struct MAStep {
  double residual = 0;    // sup-norm after the step
  double step = 1;        // damping factor used
  int krylov_iterations = 0;
  double krylov_error = 0;
  double min_eigenvalue = 0;
};

struct MASolution {
  HessianPotential phi;
  double initial_residual = 0;
  std::vector<MAStep> log;
  /// initial residual followed by the residual after every step.
  std::vector<double> residuals() const;
};

/// Damped Newton on det(Q + Hess psi) = det Q * rho over mean-zero periodic
/// psi.  Each linearized system is solved by matrix-free GMRES preconditioned
/// with the inverse of the constant-coefficient operator.  Throws
/// ConvexityError when no damped step keeps convexity and decreases the
/// residual, NumericalError when max_iterations is exceeded.
MASolution solve_monge_ampere(const HessianPotential& initial, const MAOptions& opts = {});

/// Least-squares slope of log r_{k+1} against log r_k over the last `steps`
/// pairs whose output residual exceeds `floor`.  NaN when fewer pairs exist.
double convergence_slope(const std::vector<double>& residuals, int steps = 3, double floor = 1e-14);

struct RicciField {
  std::vector<Eigen::MatrixXd> ricci;  // R_{i jbar} = -1/4 d_i d_j log det g
  double norm = 0;                     // max absolute entry
};
RicciField ricci_tensor(const HessianPotential& phi);

struct LegendreOptions {
  double tol = 1e-12;
  int max_iterations = 60;
};

/// Solves grad phi(x) = xi by damped Newton starting from x0.
Eigen::VectorXd invert_gradient(const HessianPotential& phi, const Eigen::VectorXd& xi, Eigen::VectorXd x0,
                                const LegendreOptions& opts = {}, int* iterations = nullptr);

struct LegendreTransform {
  HessianPotential dual;
  std::vector<Eigen::VectorXd> preimages;  // x with grad phi(x) = xi at each dual node
  int max_newton_iterations = 0;
  double max_gradient_residual = 0;
};
LegendreTransform legendre_transform(const HessianPotential& phi, const LegendreOptions& opts = {});

/// max over nodes of |phi^vv - phi| (values, including offsets).
double legendre_involution_error(const HessianPotential& phi, const LegendreOptions& opts = {});

struct MirrorMetric {
  std::vector<Eigen::MatrixXd> base;   // g_ij at primal nodes
  std::vector<Eigen::MatrixXd> fiber;  // g^ij on the eta directions
  Eigen::MatrixXd block(int node) const;
};

struct MirrorCheck {
  MirrorMetric metric;
  double fiber_inverse_error = 0;    // max |g g^{-1} - I|
  double hessian_inverse_error = 0;  // max |Hess phi^v(grad phi(x)) - (Hess phi(x))^{-1}|
  double pullback_error = 0;         // max |J^T g J - Hess phi^v| at dual nodes, J = dx/dxi
  int max_newton_iterations = 0;
};

/// J is obtained by fourth-order central differences (step fd_step) of the
/// inverse gradient map, independently of the Hessian.
MirrorCheck mirror_metric_check(const HessianPotential& phi, const LegendreTransform& lt, double fd_step = 1e-3);
MirrorCheck mirror_metric_check(const HessianPotential& phi, double fd_step = 1e-3);

}  // namespace gerbelab
