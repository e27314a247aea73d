#include "gerbelab/hodge.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gerbelab {

namespace {

SparseMatrix to_double(const IntSparse& s) { return s.cast<double>(); }

AxisMask full_mask(int d) { return (1u << d) - 1; }

std::array<int, 3> shifted(std::array<int, 3> x, AxisMask s, int sign) {
  for (int a = 0; a < 3; ++a)
    if (s & (1u << a)) x[a] += sign;
  return x;
}

// Deflated conjugate gradients on a symmetric positive semidefinite operator
// whose kernel is spanned by the orthonormal columns of `kernel`.
Eigen::VectorXd deflated_cg(const SparseMatrix& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& kernel,
                            SolverStats* stats) {
  const Eigen::Index n = b.size();
  auto deflate = [&](Eigen::VectorXd& v) {
    if (kernel.cols() > 0) v -= kernel * (kernel.transpose() * v);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0) {
    if (stats) *stats = {0, 0};
    return x;
  }
  const double tol = 1e-12 * bnorm;
  const int maxit = int(10 * n);
  Eigen::VectorXd r = b;
  deflate(r);
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  int it = 0;
  for (; it < maxit && std::sqrt(rr) > tol; ++it) {
    Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0)) break;
    const double alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    deflate(r);
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  deflate(x);
  Eigen::VectorXd bd = b;
  deflate(bd);
  const double residual = (A * x - bd).norm();
  if (stats) *stats = {it, residual};
  if (!(residual <= 1e-10 * std::max(1.0, bnorm))) {
    std::ostringstream os;
    os << "conjugate gradients did not converge: residual " << residual << " after " << it << " iterations";
    throw NumericalError(os.str());
  }
  return x;
}

}  // namespace

FlatMetric::FlatMetric(std::shared_ptr<const CubicalTorusComplex> complex) : complex_(std::move(complex)) {
  const auto& X = *complex_;
  const int d = X.dimension();
  side_ = std::pow(2 * std::numbers::pi, 1.0 / d);
  h_ = side_ / X.resolution();
  volume_ = {d, Eigen::VectorXd::Constant(X.cell_count(d), std::pow(h_, d))};

  laplacian_.resize(d + 1);
  for (int k = 0; k <= d; ++k) {
    SparseMatrix L(X.cell_count(k), X.cell_count(k));
    if (k > 0) {
      SparseMatrix D = to_double(X.coboundary(k - 1));
      L += (star_weight(k) / star_weight(k - 1)) * SparseMatrix(D * SparseMatrix(D.transpose()));
    }
    if (k < d) {
      SparseMatrix D = to_double(X.coboundary(k));
      L += (star_weight(k + 1) / star_weight(k)) * SparseMatrix(SparseMatrix(D.transpose()) * D);
    }
    L.prune(0.0);
    laplacian_[k] = L;
  }

  // Harmonic representatives degree by degree: project the coordinate
  // cocycles, deflating against the already known lower-degree harmonics.
  harmonic_orthonormal_.resize(d + 1);
  harmonic_.resize(d + 1);
  for (int k = 0; k <= d; ++k) {
    const auto& orients = X.orientations(k);
    const int b = int(orients.size());
    std::vector<RealCochain> reps;
    for (AxisMask s : orients) {
      RealCochain z = to_real(coordinate_cocycle(X, s));
      if (k > 0) {
        SparseMatrix D = to_double(X.coboundary(k - 1));
        Eigen::VectorXd rhs = (star_weight(k) / star_weight(k - 1)) * (SparseMatrix(D.transpose()) * z.values);
        Eigen::VectorXd alpha = deflated_cg(laplacian_[k - 1], rhs, harmonic_orthonormal_[k - 1], nullptr);
        z.values -= D * alpha;
      }
      reps.push_back(std::move(z));
    }
    Eigen::MatrixXd P(b, b);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) P(i, j) = evaluate(reps[i], coordinate_cycle(X, orients[j]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(P);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-8)
      throw NumericalError("harmonic period matrix is singular");
    // basis_j = sum_i (P^-1)(j, i) reps_i has periods delta_jl.
    Eigen::MatrixXd C = lu.inverse();
    HarmonicBasis hb;
    hb.degree = k;
    for (int j = 0; j < b; ++j) {
      RealCochain e{k, Eigen::VectorXd::Zero(X.cell_count(k))};
      for (int i = 0; i < b; ++i) e.values += C(j, i) * reps[i].values;
      hb.basis.push_back(std::move(e));
    }
    hb.periods.resize(b, b);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < b; ++j) hb.periods(i, j) = evaluate(hb.basis[i], coordinate_cycle(X, orients[j]));
    Eigen::MatrixXd M(X.cell_count(k), b);
    for (int j = 0; j < b; ++j) M.col(j) = hb.basis[j].values;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    harmonic_orthonormal_[k] = qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), b);
    for (int j = 0; j < b; ++j) {
      const double res = (laplacian_[k] * hb.basis[j].values).lpNorm<Eigen::Infinity>();
      if (res > 1e-10) throw NumericalError("harmonic representative has Laplacian residual above 1e-10");
    }
    harmonic_[k] = std::move(hb);
  }
}

double FlatMetric::star_weight(int k) const { return std::pow(h_, complex_->dimension() - 2 * k); }

FlatMetric make_flat_metric(int d, int N) {
  return FlatMetric(std::make_shared<const CubicalTorusComplex>(build_torus_complex(d, N)));
}

FormCochain hodge_star(const FlatMetric& m, const FormCochain& a) {
  const auto& X = m.complex();
  const int d = X.dimension(), k = a.cochain.degree;
  if (a.cochain.values.size() != X.cell_count(k)) throw std::invalid_argument("hodge_star: cochain length mismatch");
  FormCochain out{{d - k, Eigen::VectorXd::Zero(X.cell_count(d - k))}, !a.dual};
  for (int i = 0; i < X.cell_count(k); ++i) {
    Cell c = X.cell(k, i);
    const AxisMask comp = full_mask(d) & ~c.axes;
    if (!a.dual) {
      const double f = shuffle_sign(c.axes, comp) * m.star_weight(k);
      out.cochain.values(X.cell_index(comp, shifted(c.base, comp, -1))) = f * a.cochain.values(i);
    } else {
      const double f = shuffle_sign(c.axes, comp) / m.star_weight(d - k);
      out.cochain.values(X.cell_index(comp, shifted(c.base, c.axes, +1))) = f * a.cochain.values(i);
    }
  }
  return out;
}

FormCochain hodge_star(const FlatMetric& m, const RealCochain& primal) { return hodge_star(m, FormCochain{primal, false}); }

RealCochain codifferential(const FlatMetric& m, const RealCochain& a) {
  const int k = a.degree;
  if (k == 0) throw std::invalid_argument("codifferential of a 0-cochain");
  SparseMatrix D = to_double(m.complex().coboundary(k - 1));
  return {k - 1, (m.star_weight(k) / m.star_weight(k - 1)) * (SparseMatrix(D.transpose()) * a.values)};
}

RealCochain apply_laplacian(const FlatMetric& m, const RealCochain& a) {
  return {a.degree, m.laplacian(a.degree) * a.values};
}

RealCochain harmonic_projection(const FlatMetric& m, const RealCochain& a) {
  const auto& Q = m.harmonic_projector_basis(a.degree);
  return {a.degree, Q * (Q.transpose() * a.values)};
}

RealCochain solve_poisson(const FlatMetric& m, const RealCochain& rhs, SolverStats* stats) {
  const int k = rhs.degree;
  if (rhs.values.size() != m.complex().cell_count(k)) throw std::invalid_argument("solve_poisson: length mismatch");
  const double proj = harmonic_projection(m, rhs).values.norm();
  if (proj > 1e-10) {
    std::ostringstream os;
    os << "right-hand side has a harmonic component of magnitude " << proj;
    throw HarmonicComponentError(os.str(), proj);
  }
  return {k, deflated_cg(m.laplacian(k), rhs.values, m.harmonic_projector_basis(k), stats)};
}

HarmonicBasis harmonic_basis(const FlatMetric& m, int k) {
  if (k < 0 || k > m.dimension()) throw std::out_of_range("harmonic_basis degree out of range");
  return m.integral_harmonic_basis(k);
}

int containing_cube(const CubicalTorusComplex& X, const std::array<double, 3>& p) {
  const int N = X.resolution();
  std::array<int, 3> base{0, 0, 0};
  for (int a = 0; a < X.dimension(); ++a) {
    double t = p[a] - std::floor(p[a]);
    int i = int(std::floor(t * N));
    base[a] = std::min(std::max(i, 0), N - 1);
  }
  return X.cell_index(full_mask(X.dimension()), base);
}

RealCochain delta_current(const FlatMetric& m, const std::array<double, 3>& p) {
  const auto& X = m.complex();
  RealCochain out{X.dimension(), Eigen::VectorXd::Zero(X.cell_count(X.dimension()))};
  out.values(containing_cube(X, p)) = 1.0;
  return out;
}

HodgeDecomposition hodge_decomposition(const FlatMetric& m, const RealCochain& a) {
  const auto& X = m.complex();
  const int k = a.degree, d = X.dimension();
  HodgeDecomposition out;
  const int n = X.cell_count(k);
  out.exact = {k, Eigen::VectorXd::Zero(n)};
  out.coexact = {k, Eigen::VectorXd::Zero(n)};
  if (k > 0) {
    out.exact_potential = solve_poisson(m, codifferential(m, a));
    out.exact = coboundary(X, out.exact_potential);
  } else {
    out.exact_potential = {-1, Eigen::VectorXd()};
  }
  if (k < d) {
    RealCochain psi = solve_poisson(m, coboundary(X, a));
    out.coexact = codifferential(m, psi);
  }
  out.harmonic = {k, a.values - out.exact.values - out.coexact.values};
  RealCochain hp = harmonic_projection(m, out.harmonic);
  out.residual = (out.harmonic.values - hp.values).lpNorm<Eigen::Infinity>();
  return out;
}

}  // namespace gerbelab
