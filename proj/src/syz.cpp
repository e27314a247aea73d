#include "gerbelab/syz.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <limits>
#include <sstream>

namespace gerbelab {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

void check_spd(const Eigen::MatrixXd& Q) {
  if (Q.rows() != Q.cols() || Q.rows() < 2 || Q.rows() > 3)
    throw std::invalid_argument("quadratic part must be a 2x2 or 3x3 matrix");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + Q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("quadratic part must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.eigenvalues().minCoeff() <= 0) throw std::invalid_argument("quadratic part must be positive definite");
}

double min_eigenvalue(const Eigen::MatrixXd& H) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

Eigen::MatrixXd cofactor(const Eigen::MatrixXd& H) {
  if (H.rows() == 2) {
    Eigen::MatrixXd C(2, 2);
    C << H(1, 1), -H(0, 1), -H(1, 0), H(0, 0);
    return C;
  }
  Eigen::MatrixXd C(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      C(i, j) = H(i1, j1) * H(i2, j2) - H(i1, j2) * H(i2, j1);
    }
  return C;
}

}  // namespace

// ---------------------------------------------------------------------------
// HessianPotential

HessianPotential::HessianPotential(Eigen::MatrixXd Q, int M, Eigen::VectorXd psi, Scheme scheme,
                                   Eigen::MatrixXd frame, double offset)
    : Q_(std::move(Q)), psi_(std::move(psi)), offset_(offset), scheme_(scheme) {
  check_spd(Q_);
  Q_ = symmetrize(Q_);
  const int n = int(Q_.rows());
  T_ = frame.size() == 0 ? Eigen::MatrixXd::Identity(n, n) : std::move(frame);
  if (T_.rows() != n || T_.cols() != n) throw std::invalid_argument("frame has wrong shape");
  if (std::abs(T_.determinant()) < 1e-12) throw std::invalid_argument("frame is singular");
  Tinv_ = T_.inverse();
  grid_ = std::make_shared<PeriodicGrid>(n, M);
  if (psi_.size() != grid_->size()) {
    std::ostringstream os;
    os << "periodic part has " << psi_.size() << " samples, expected " << grid_->size();
    throw std::invalid_argument(os.str());
  }
  if (!psi_.allFinite()) throw std::invalid_argument("periodic part has non-finite samples");
  const double m = psi_.mean();
  psi_.array() -= m;
  offset_ += m;
  interp_ = std::make_shared<TrigInterpolant>(grid_, psi_);
}

HessianPotential HessianPotential::quadratic(Eigen::MatrixXd Q, int M, Scheme scheme) {
  int size = 1;
  for (int a = 0; a < Q.rows(); ++a) size *= M;
  return HessianPotential(std::move(Q), M, Eigen::VectorXd::Zero(size), scheme);
}

HessianPotential HessianPotential::from_fourier(Eigen::MatrixXd Q, int M, const std::vector<FourierTerm>& terms,
                                                Scheme scheme) {
  const int n = int(Q.rows());
  PeriodicGrid g(n, M);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(g.size());
  for (int idx = 0; idx < g.size(); ++idx) {
    const auto s = g.node(idx);
    for (const auto& t : terms) {
      double phase = 0;
      for (int a = 0; a < n; ++a) phase += t.k[a] * s(a);
      phase *= 2 * M_PI;
      psi(idx) += t.cos_coef * std::cos(phase) + t.sin_coef * std::sin(phase);
    }
  }
  return HessianPotential(std::move(Q), M, std::move(psi), scheme);
}

Eigen::VectorXd HessianPotential::node_point(int idx) const { return T_ * grid_->node(idx); }

Eigen::VectorXd HessianPotential::node_values() const {
  Eigen::VectorXd out(grid_->size());
  for (int idx = 0; idx < grid_->size(); ++idx) {
    const Eigen::VectorXd x = node_point(idx);
    out(idx) = 0.5 * x.dot(Q_ * x) + psi_(idx) + offset_;
  }
  return out;
}

std::vector<Eigen::MatrixXd> HessianPotential::field_hessian(const Eigen::VectorXd& f) const {
  const int n = dimension();
  const auto H = grid_->hessian(f, scheme_);
  std::vector<Eigen::MatrixXd> out(grid_->size(), Eigen::MatrixXd(n, n));
  for (int idx = 0; idx < grid_->size(); ++idx) {
    Eigen::MatrixXd Hs(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) Hs(a, b) = H[a][b](idx);
    out[idx] = Tinv_.transpose() * Hs * Tinv_;
  }
  return out;
}

std::vector<Eigen::MatrixXd> HessianPotential::hessian_field() const {
  auto H = field_hessian(psi_);
  for (auto& h : H) h += Q_;
  return H;
}

Jet HessianPotential::jet(const Eigen::VectorXd& x) const {
  const Jet js = interp_->evaluate(Tinv_ * x);
  Jet out;
  out.value = 0.5 * x.dot(Q_ * x) + js.value + offset_;
  out.gradient = Q_ * x + Tinv_.transpose() * js.gradient;
  out.hessian = Q_ + Tinv_.transpose() * js.hessian * Tinv_;
  return out;
}

ConvexityReport convexity(const std::vector<Eigen::MatrixXd>& hessians) {
  ConvexityReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    const double e = min_eigenvalue(hessians[i]);
    r.min_eigenvalue = std::min(r.min_eigenvalue, e);
    if (!(e > 0)) r.bad_nodes.push_back(int(i));
  }
  return r;
}

namespace {

void require_convex(const ConvexityReport& c, const char* what) {
  if (c.convex()) return;
  std::ostringstream os;
  os << what << ": Hessian not positive definite at " << c.bad_nodes.size() << " nodes (min eigenvalue "
     << c.min_eigenvalue << ")";
  throw ConvexityError(os.str(), c.bad_nodes, c.min_eigenvalue);
}

}  // namespace

Eigen::MatrixXd SemiFlatMetric::block(int node) const {
  const auto& h = g.at(node);
  const int n = int(h.rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n) = h;
  B.bottomRightCorner(n, n) = h;
  return B;
}

SemiFlatMetric semi_flat_metric(const HessianPotential& phi) {
  SemiFlatMetric m;
  m.g = phi.hessian_field();
  const auto c = convexity(m.g);
  require_convex(c, "semi-flat metric");
  m.min_eigenvalue = c.min_eigenvalue;
  return m;
}

// ---------------------------------------------------------------------------
// Monge-Ampere

namespace {

Eigen::VectorXd checked_forcing(const Eigen::VectorXd& rho, int size) {
  if (rho.size() == 0) return Eigen::VectorXd::Ones(size);
  if (rho.size() != size) throw std::invalid_argument("forcing has wrong number of samples");
  if (!(rho.minCoeff() > 0)) throw std::invalid_argument("forcing must be positive");
  if (std::abs(rho.mean() - 1) > 1e-12) throw std::invalid_argument("forcing must have mean 1");
  return rho;
}

MAResidual residual_from(const std::vector<Eigen::MatrixXd>& H, double c_star, const Eigen::VectorXd& rho) {
  MAResidual r;
  r.c_star = c_star;
  r.field.resize(int(H.size()));
  for (std::size_t i = 0; i < H.size(); ++i) r.field(int(i)) = H[i].determinant() - c_star * rho(int(i));
  r.sup_norm = r.field.cwiseAbs().maxCoeff();
  return r;
}

}  // namespace

MAResidual ma_residual(const HessianPotential& phi, const Eigen::VectorXd& forcing) {
  const auto rho = checked_forcing(forcing, phi.grid().size());
  return residual_from(phi.hessian_field(), phi.Q().determinant(), rho);
}

}  // namespace gerbelab

// Matrix-free linearization sum_ab C_ab d_a d_b v + mean(v) for Eigen's GMRES.
namespace gerbelab::detail {
class MALinearization;
}

namespace Eigen::internal {
template <>
struct traits<gerbelab::detail::MALinearization> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace gerbelab::detail {

class MALinearization : public Eigen::EigenBase<MALinearization> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  MALinearization(const PeriodicGrid& g, Scheme s, std::vector<std::vector<Eigen::VectorXd>> coef)
      : grid_(&g), coef_(std::move(coef)) {
    const int n = g.dimension();
    symbols_.assign(n, std::vector<PeriodicGrid::Spectrum>(n));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        symbols_[a][b].resize(g.size());
        for (int idx = 0; idx < g.size(); ++idx) symbols_[a][b][idx] = g.hessian_symbol(s, a, b, idx);
      }
  }

  Eigen::Index rows() const { return grid_->size(); }
  Eigen::Index cols() const { return grid_->size(); }

  template <typename Rhs>
  Eigen::Product<MALinearization, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<MALinearization, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const int n = grid_->dimension();
    const auto vhat = grid_->forward(v);
    Eigen::VectorXd out = Eigen::VectorXd::Constant(v.size(), v.mean());
    PeriodicGrid::Spectrum c(vhat.size());
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = vhat[i] * symbols_[a][b][i];
        const double w = a == b ? 1.0 : 2.0;
        out += w * coef_[a][b].cwiseProduct(grid_->inverse(c));
      }
    return out;
  }

  /// Symbol of the operator with every coefficient replaced by its mean.
  std::vector<double> mean_symbol() const {
    const int n = grid_->dimension();
    std::vector<double> p(grid_->size(), 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        const double w = (a == b ? 1.0 : 2.0) * coef_[a][b].mean();
        for (int idx = 0; idx < grid_->size(); ++idx) p[idx] += w * symbols_[a][b][idx].real();
      }
    p[0] = 1.0;
    return p;
  }

  const PeriodicGrid& grid() const { return *grid_; }

 private:
  const PeriodicGrid* grid_;
  std::vector<std::vector<Eigen::VectorXd>> coef_;
  std::vector<std::vector<PeriodicGrid::Spectrum>> symbols_;
};

class FourierPreconditioner {
 public:
  FourierPreconditioner() = default;
  template <typename M>
  FourierPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  FourierPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  FourierPreconditioner& compute(const M& op) {
    grid_ = &op.grid();
    inv_ = op.mean_symbol();
    const double scale = *std::max_element(inv_.begin(), inv_.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    });
    for (double& x : inv_) x = std::abs(x) > 1e-12 * std::abs(scale) ? 1.0 / x : 0.0;
    return *this;
  }
  template <typename Rhs>
  Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const {
    auto c = grid_->forward(b);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= inv_[i];
    return grid_->inverse(c);
  }
  Eigen::ComputationInfo info() { return Eigen::Success; }

 private:
  const PeriodicGrid* grid_ = nullptr;
  std::vector<double> inv_;
};

}  // namespace gerbelab::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<gerbelab::detail::MALinearization, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<gerbelab::detail::MALinearization, Rhs,
                                generic_product_impl<gerbelab::detail::MALinearization, Rhs>> {
  using Scalar = typename Product<gerbelab::detail::MALinearization, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const gerbelab::detail::MALinearization& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace gerbelab {

std::vector<double> MASolution::residuals() const {
  std::vector<double> r{initial_residual};
  for (const auto& s : log) r.push_back(s.residual);
  return r;
}

MASolution solve_monge_ampere(const HessianPotential& initial, const MAOptions& opts) {
  const int n = initial.dimension(), M = initial.resolution();
  const auto rho = checked_forcing(opts.forcing, initial.grid().size());
  const double c_star = initial.Q().determinant();
  const Eigen::MatrixXd Tinv = initial.frame().inverse();

  HessianPotential phi = initial;
  auto H = phi.hessian_field();
  require_convex(convexity(H), "Monge-Ampere initial guess");
  auto F = residual_from(H, c_star, rho);

  MASolution sol{phi, F.sup_norm, {}};
  for (int it = 0; F.sup_norm >= opts.tol; ++it) {
    if (it >= opts.max_iterations) {
      std::ostringstream os;
      os << "Monge-Ampere Newton did not converge in " << opts.max_iterations << " iterations (residual "
         << F.sup_norm << ")";
      throw NumericalError(os.str());
    }
    // Coefficients in unit-torus coordinates: T^{-1} cof(H) T^{-T}.
    std::vector<std::vector<Eigen::VectorXd>> coef(n, std::vector<Eigen::VectorXd>(n, Eigen::VectorXd(H.size())));
    for (std::size_t i = 0; i < H.size(); ++i) {
      const Eigen::MatrixXd C = Tinv * cofactor(H[i]) * Tinv.transpose();
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) coef[a][b](int(i)) = C(a, b);
    }
    detail::MALinearization L(phi.grid(), phi.scheme(), std::move(coef));
    Eigen::GMRES<detail::MALinearization, detail::FourierPreconditioner> gmres;
    gmres.set_restart(80);
    gmres.setMaxIterations(2000);
    gmres.setTolerance(std::clamp(0.1 * F.sup_norm, 1e-14, 1e-3));
    gmres.compute(L);
    Eigen::VectorXd v = gmres.solve(Eigen::VectorXd(-F.field));
    v.array() -= v.mean();

    MAStep step;
    step.krylov_iterations = int(gmres.iterations());
    step.krylov_error = gmres.error();
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      HessianPotential trial(phi.Q(), M, phi.psi() + step.step * v, phi.scheme(), phi.frame(), phi.offset());
      auto Ht = trial.hessian_field();
      const auto conv = convexity(Ht);
      if (conv.convex()) {
        auto Ft = residual_from(Ht, c_star, rho);
        if (Ft.sup_norm < F.sup_norm) {
          phi = std::move(trial);
          H = std::move(Ht);
          F = std::move(Ft);
          step.min_eigenvalue = conv.min_eigenvalue;
          accepted = true;
          break;
        }
      }
      step.step *= 0.5;
    }
    if (!accepted) {
      const auto conv = convexity(H);
      std::ostringstream os;
      os << "Monge-Ampere Newton: no damped step keeps convexity and decreases the residual (residual "
         << F.sup_norm << ")";
      throw ConvexityError(os.str(), conv.bad_nodes, conv.min_eigenvalue);
    }
    step.residual = F.sup_norm;
    sol.log.push_back(step);
  }
  sol.phi = std::move(phi);
  return sol;
}

double convergence_slope(const std::vector<double>& r, int steps, double floor) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k + 1 < r.size(); ++k)
    if (r[k + 1] > floor && r[k] > 0) pts.emplace_back(std::log(r[k]), std::log(r[k + 1]));
  if (int(pts.size()) < steps || steps < 2) return std::numeric_limits<double>::quiet_NaN();
  pts.erase(pts.begin(), pts.end() - steps);
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= steps;
  my /= steps;
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxy / sxx;
}

RicciField ricci_tensor(const HessianPotential& phi) {
  const auto H = phi.hessian_field();
  require_convex(convexity(H), "Ricci tensor");
  Eigen::VectorXd logdet(int(H.size()));
  for (std::size_t i = 0; i < H.size(); ++i) logdet(int(i)) = std::log(H[i].determinant());
  RicciField r;
  r.ricci = phi.field_hessian(logdet);
  for (auto& R : r.ricci) {
    R *= -0.25;
    r.norm = std::max(r.norm, R.cwiseAbs().maxCoeff());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Legendre transform and mirror metric

Eigen::VectorXd invert_gradient(const HessianPotential& phi, const Eigen::VectorXd& xi, Eigen::VectorXd x,
                                const LegendreOptions& opts, int* iterations) {
  const double tol = opts.tol * std::max(1.0, xi.cwiseAbs().maxCoeff());
  Jet j = phi.jet(x);
  Eigen::VectorXd r = j.gradient - xi;
  double rn = r.cwiseAbs().maxCoeff();
  int it = 0;
  for (; rn > tol; ++it) {
    if (it >= opts.max_iterations) {
      std::ostringstream os;
      os << "gradient inversion did not converge (residual " << rn << ")";
      throw NumericalError(os.str());
    }
    Eigen::LLT<Eigen::MatrixXd> llt(j.hessian);
    if (llt.info() != Eigen::Success) throw NumericalError("gradient inversion met a non-convex point");
    const Eigen::VectorXd dx = llt.solve(-r);
    double t = 1;
    for (int h = 0;; ++h) {
      const Eigen::VectorXd xt = x + t * dx;
      Jet jt = phi.jet(xt);
      const Eigen::VectorXd rt = jt.gradient - xi;
      const double rtn = rt.cwiseAbs().maxCoeff();
      if (rtn < rn || h >= 30) {
        if (!(rtn < rn)) {
          // Stalled at round-off: accept if already close.
          if (rn <= 100 * tol) {
            if (iterations) *iterations = it;
            return x;
          }
          throw NumericalError("gradient inversion stalled");
        }
        x = xt;
        j = std::move(jt);
        r = rt;
        rn = rtn;
        break;
      }
      t *= 0.5;
    }
  }
  if (iterations) *iterations = it;
  return x;
}

LegendreTransform legendre_transform(const HessianPotential& phi, const LegendreOptions& opts) {
  const Eigen::MatrixXd Qinv = symmetrize(phi.Q().inverse());
  const Eigen::MatrixXd dual_frame = phi.Q() * phi.frame();
  const auto& g = phi.grid();
  Eigen::VectorXd psi(g.size());
  std::vector<Eigen::VectorXd> pre(g.size());
  int max_it = 0;
  double max_res = 0;
  for (int idx = 0; idx < g.size(); ++idx) {
    const Eigen::VectorXd xi = dual_frame * g.node(idx);
    int it = 0;
    const Eigen::VectorXd x = invert_gradient(phi, xi, Qinv * xi, opts, &it);
    const Jet j = phi.jet(x);
    max_it = std::max(max_it, it);
    max_res = std::max(max_res, (j.gradient - xi).cwiseAbs().maxCoeff());
    psi(idx) = x.dot(xi) - j.value - 0.5 * xi.dot(Qinv * xi);
    pre[idx] = x;
  }
  return LegendreTransform{HessianPotential(Qinv, g.resolution(), std::move(psi), phi.scheme(), dual_frame),
                           std::move(pre), max_it, max_res};
}

double legendre_involution_error(const HessianPotential& phi, const LegendreOptions& opts) {
  const auto once = legendre_transform(phi, opts);
  const auto twice = legendre_transform(once.dual, opts);
  return (twice.dual.node_values() - phi.node_values()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd MirrorMetric::block(int node) const {
  const int n = int(base.at(node).rows());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  B.topLeftCorner(n, n) = base[node];
  B.bottomRightCorner(n, n) = fiber[node];
  return B;
}

MirrorCheck mirror_metric_check(const HessianPotential& phi, const LegendreTransform& lt, double h) {
  const int n = phi.dimension();
  const auto& g = phi.grid();
  MirrorCheck out;
  out.metric.base = phi.hessian_field();
  require_convex(convexity(out.metric.base), "mirror metric");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  for (const auto& gb : out.metric.base) {
    out.metric.fiber.push_back(symmetrize(gb.inverse()));
    out.fiber_inverse_error = std::max(out.fiber_inverse_error, (gb * out.metric.fiber.back() - I).cwiseAbs().maxCoeff());
  }

  // Hess phi^v at xi = grad phi(x) against the inverse Hessian at primal nodes.
  for (int idx = 0; idx < g.size(); ++idx) {
    const Jet jp = phi.jet(phi.node_point(idx));
    const Jet jd = lt.dual.jet(jp.gradient);
    out.hessian_inverse_error =
        std::max(out.hessian_inverse_error, (jd.hessian - out.metric.fiber[idx]).cwiseAbs().maxCoeff());
  }

  // Pull back g_ij dx dx along x(xi) at dual nodes; compare with the grid
  // Hessian of phi^v.
  const auto dual_hess = lt.dual.hessian_field();
  for (int idx = 0; idx < g.size(); ++idx) {
    const Eigen::VectorXd xi = lt.dual.node_point(idx);
    const Eigen::VectorXd& x0 = lt.preimages[idx];
    Eigen::MatrixXd J(n, n);
    for (int a = 0; a < n; ++a) {
      auto at = [&](double t) {
        Eigen::VectorXd e = xi;
        e(a) += t;
        int it = 0;
        Eigen::VectorXd x = invert_gradient(phi, e, x0, {}, &it);
        out.max_newton_iterations = std::max(out.max_newton_iterations, it);
        return x;
      };
      J.col(a) = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
    const Eigen::MatrixXd gx = phi.jet(x0).hessian;
    out.pullback_error =
        std::max(out.pullback_error, (J.transpose() * gx * J - dual_hess[idx]).cwiseAbs().maxCoeff());
  }
  return out;
}

MirrorCheck mirror_metric_check(const HessianPotential& phi, double h) {
  return mirror_metric_check(phi, legendre_transform(phi), h);
}

}  // namespace gerbelab
