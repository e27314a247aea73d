#include "gerbelab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gerbelab {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;

// Per-axis tables exp(2 pi i k s_a) indexed by k + M.
std::vector<std::vector<std::complex<double>>> axis_tables(const Eigen::VectorXd& s, int n, int M) {
  std::vector<std::vector<std::complex<double>>> e(n, std::vector<std::complex<double>>(2 * M + 1));
  for (int a = 0; a < n; ++a) {
    const std::complex<double> w = std::polar(1.0, kTwoPi * s(a));
    e[a][M] = 1.0;
    for (int k = 1; k <= M; ++k) {
      e[a][M + k] = e[a][M + k - 1] * w;
      e[a][M - k] = std::conj(e[a][M + k]);
    }
  }
  return e;
}

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::Spectral ? "spectral" : "fd4"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "spectral") return Scheme::Spectral;
  if (s == "fd4") return Scheme::FD4;
  throw std::invalid_argument("unknown derivative scheme '" + s + "'");
}

PeriodicGrid::PeriodicGrid(int n, int M) : n_(n), M_(M), size_(1) {
  if (n < 1 || n > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (M < 4) throw std::invalid_argument("grid resolution must be at least 4");
  for (int a = 0; a < n; ++a) size_ *= M;
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(size_));
  int dims[3] = {M, M, M};
  auto* b = reinterpret_cast<fftw_complex*>(buf_);
  fwd_ = fftw_plan_dft(n, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft(n, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

PeriodicGrid::~PeriodicGrid() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buf_);
}

std::array<int, 3> PeriodicGrid::multi_index(int idx) const {
  std::array<int, 3> i{0, 0, 0};
  for (int a = 0; a < n_; ++a) {
    i[a] = idx % M_;
    idx /= M_;
  }
  return i;
}

int PeriodicGrid::linear_index(std::array<int, 3> i) const {
  int idx = 0;
  for (int a = n_ - 1; a >= 0; --a) idx = idx * M_ + ((i[a] % M_) + M_) % M_;
  return idx;
}

Eigen::VectorXd PeriodicGrid::node(int idx) const {
  const auto i = multi_index(idx);
  Eigen::VectorXd s(n_);
  for (int a = 0; a < n_; ++a) s(a) = double(i[a]) / M_;
  return s;
}

PeriodicGrid::Spectrum PeriodicGrid::forward(const Eigen::VectorXd& f) const {
  if (f.size() != size_) throw std::invalid_argument("sample vector has wrong length");
  for (int i = 0; i < size_; ++i) buf_[i] = f(i);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  return Spectrum(buf_, buf_ + size_);
}

Eigen::VectorXd PeriodicGrid::inverse(const Spectrum& c) const {
  std::copy(c.begin(), c.end(), buf_);
  fftw_execute(static_cast<fftw_plan>(bwd_));
  Eigen::VectorXd out(size_);
  for (int i = 0; i < size_; ++i) out(i) = buf_[i].real() / size_;
  return out;
}

std::complex<double> PeriodicGrid::first_symbol(Scheme s, int j) const {
  if (s == Scheme::Spectral) return is_nyquist(j) ? 0.0 : std::complex<double>(0, kTwoPi * wavenumber(j));
  const double th = kTwoPi * j / M_;
  return {0, (8 * std::sin(th) - std::sin(2 * th)) * M_ / 6};
}

double PeriodicGrid::second_symbol(Scheme s, int j) const {
  if (s == Scheme::Spectral) {
    const double k = kTwoPi * wavenumber(j);
    return is_nyquist(j) ? 0.0 : -k * k;
  }
  const double th = kTwoPi * j / M_;
  return (32 * std::cos(th) - 2 * std::cos(2 * th) - 30) * M_ * M_ / 12;
}

std::complex<double> PeriodicGrid::hessian_symbol(Scheme s, int a, int b, int idx) const {
  const auto i = multi_index(idx);
  if (a == b) return second_symbol(s, i[a]);
  return first_symbol(s, i[a]) * first_symbol(s, i[b]);
}

Eigen::VectorXd PeriodicGrid::derivative(const Eigen::VectorXd& f, int a, Scheme s) const {
  auto c = forward(f);
  for (int idx = 0; idx < size_; ++idx) c[idx] *= first_symbol(s, multi_index(idx)[a]);
  return inverse(c);
}

Eigen::VectorXd PeriodicGrid::second_derivative(const Eigen::VectorXd& f, int a, int b, Scheme s) const {
  auto c = forward(f);
  for (int idx = 0; idx < size_; ++idx) c[idx] *= hessian_symbol(s, a, b, idx);
  return inverse(c);
}

std::vector<std::vector<Eigen::VectorXd>> PeriodicGrid::hessian(const Eigen::VectorXd& f, Scheme s) const {
  return hessian_from_spectrum(forward(f), s);
}

std::vector<std::vector<Eigen::VectorXd>> PeriodicGrid::hessian_from_spectrum(const Spectrum& fhat,
                                                                              Scheme s) const {
  std::vector<std::vector<Eigen::VectorXd>> H(n_, std::vector<Eigen::VectorXd>(n_));
  Spectrum c(size_);
  for (int a = 0; a < n_; ++a)
    for (int b = a; b < n_; ++b) {
      for (int idx = 0; idx < size_; ++idx) c[idx] = fhat[idx] * hessian_symbol(s, a, b, idx);
      H[a][b] = inverse(c);
      if (a != b) H[b][a] = H[a][b];
    }
  return H;
}

TrigInterpolant::TrigInterpolant(std::shared_ptr<const PeriodicGrid> grid, const Eigen::VectorXd& samples)
    : grid_(std::move(grid)) {
  const auto c = grid_->forward(samples);
  const int n = grid_->dimension();
  for (int idx = 0; idx < grid_->size(); ++idx) {
    const auto i = grid_->multi_index(idx);
    bool nyq = false;
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      nyq = nyq || grid_->is_nyquist(i[a]);
      k[a] = grid_->wavenumber(i[a]);
    }
    if (nyq || std::abs(c[idx]) == 0.0) continue;
    // Real samples: keep one mode of each conjugate pair, doubled.
    const auto first = std::find_if(k.begin(), k.end(), [](int x) { return x != 0; });
    if (first != k.end() && *first < 0) continue;
    modes_.push_back(k);
    coef_.push_back(c[idx] * ((first == k.end() ? 1.0 : 2.0) / grid_->size()));
  }
}

Jet TrigInterpolant::evaluate(const Eigen::VectorXd& s) const {
  const int n = grid_->dimension(), M = grid_->resolution();
  const auto e = axis_tables(s, n, M);
  std::complex<double> v = 0;
  std::array<std::complex<double>, 3> g{};
  std::array<std::complex<double>, 9> h{};
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const auto& k = modes_[m];
    std::complex<double> t = coef_[m];
    for (int a = 0; a < n; ++a) t *= e[a][M + k[a]];
    v += t;
    for (int a = 0; a < n; ++a) {
      g[a] += t * double(k[a]);
      for (int b = a; b < n; ++b) h[3 * a + b] += t * double(k[a] * k[b]);
    }
  }
  Jet out;
  out.value = v.real();
  out.gradient.resize(n);
  out.hessian.resize(n, n);
  for (int a = 0; a < n; ++a) {
    out.gradient(a) = -kTwoPi * g[a].imag();
    for (int b = a; b < n; ++b) out.hessian(a, b) = out.hessian(b, a) = -kTwoPi * kTwoPi * h[3 * a + b].real();
  }
  return out;
}

double TrigInterpolant::value(const Eigen::VectorXd& s) const {
  const int n = grid_->dimension(), M = grid_->resolution();
  const auto e = axis_tables(s, n, M);
  std::complex<double> v = 0;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    std::complex<double> t = coef_[m];
    for (int a = 0; a < n; ++a) t *= e[a][M + modes_[m][a]];
    v += t;
  }
  return v.real();
}

}  // namespace gerbelab
