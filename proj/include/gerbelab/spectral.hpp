#pragma once

// Periodic sample grids on the unit n-torus (n = 1, 2, 3) and Fourier
// multiplier derivatives.  Samples are stored with axis 0 fastest:
// index = sum_a i_a M^a, node coordinate s_a = i_a / M.
//
// Both derivative schemes act as Fourier multipliers.  For the spectral
// scheme the Nyquist mode is dropped from odd and mixed derivatives; the
// fourth-order scheme uses the exact symbols of the centered stencils
// (-1, 8, 0, -8, 1)/12h and (-1, 16, -30, 16, -1)/12h^2, so applying it
// through the FFT is the same as applying the stencil.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace gerbelab {

enum class Scheme { Spectral, FD4 };
const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

class PeriodicGrid {
 public:
  using Spectrum = std::vector<std::complex<double>>;

  PeriodicGrid(int n, int M);
  ~PeriodicGrid();
  PeriodicGrid(const PeriodicGrid&) = delete;
  PeriodicGrid& operator=(const PeriodicGrid&) = delete;

  int dimension() const { return n_; }
  int resolution() const { return M_; }
  int size() const { return size_; }

  std::array<int, 3> multi_index(int idx) const;
  int linear_index(std::array<int, 3> i) const;
  Eigen::VectorXd node(int idx) const;  // s in [0,1)^n
  /// Signed wavenumber of FFT bin j in [0, M).
  int wavenumber(int j) const { return j <= M_ / 2 ? j : j - M_; }
  bool is_nyquist(int j) const { return M_ % 2 == 0 && j == M_ / 2; }

  /// Unnormalized forward DFT of real samples.
  Spectrum forward(const Eigen::VectorXd& f) const;
  /// Inverse DFT divided by M^n; returns the real part.
  Eigen::VectorXd inverse(const Spectrum& c) const;

  /// Multiplier of d/ds_a on bin j of that axis.
  std::complex<double> first_symbol(Scheme s, int j) const;
  /// Multiplier of d^2/ds_a^2 on bin j.
  double second_symbol(Scheme s, int j) const;
  /// Multiplier of d^2/ds_a ds_b for the multi-bin of linear index idx.
  std::complex<double> hessian_symbol(Scheme s, int a, int b, int idx) const;

  Eigen::VectorXd derivative(const Eigen::VectorXd& f, int a, Scheme s) const;
  Eigen::VectorXd second_derivative(const Eigen::VectorXd& f, int a, int b, Scheme s) const;
  /// All second derivatives from one forward transform; entry [a][b], a <= b.
  std::vector<std::vector<Eigen::VectorXd>> hessian(const Eigen::VectorXd& f, Scheme s) const;
  std::vector<std::vector<Eigen::VectorXd>> hessian_from_spectrum(const Spectrum& fhat, Scheme s) const;

  double mean(const Eigen::VectorXd& f) const { return f.mean(); }

 private:
  int n_, M_, size_;
  std::complex<double>* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Jet of a trigonometric interpolant at an arbitrary point.
struct Jet {
  double value = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Band-limited interpolant of grid samples (Nyquist bins dropped), evaluated
/// at arbitrary points of R^n with period 1 in every coordinate.
class TrigInterpolant {
 public:
  TrigInterpolant(std::shared_ptr<const PeriodicGrid> grid, const Eigen::VectorXd& samples);
  Jet evaluate(const Eigen::VectorXd& s) const;
  double value(const Eigen::VectorXd& s) const;
  const PeriodicGrid& grid() const { return *grid_; }

 private:
  std::shared_ptr<const PeriodicGrid> grid_;
  std::vector<std::array<int, 3>> modes_;
  std::vector<std::complex<double>> coef_;
};

}  // namespace gerbelab
