#include "gerbelab/smith.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace gerbelab {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in Smith reduction");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in Smith reduction");
  return r;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

IntMatrix IntMatrix::identity(int n) {
  IntMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_sparse(const IntSparse& s) {
  IntMatrix m(int(s.rows()), int(s.cols()));
  for (int k = 0; k < s.outerSize(); ++k)
    for (IntSparse::InnerIterator it(s, k); it; ++it) m(int(it.row()), int(it.col())) += it.value();
  return m;
}

IntVector IntMatrix::column(int j) const {
  IntVector v(rows_);
  for (int i = 0; i < rows_; ++i) v(i) = (*this)(i, j);
  return v;
}

IntVector IntMatrix::operator*(const IntVector& v) const {
  if (v.size() != cols_) throw std::invalid_argument("IntMatrix * vector: size mismatch");
  IntVector out = IntVector::Zero(rows_);
  for (int i = 0; i < rows_; ++i) {
    std::int64_t acc = 0;
    const std::int64_t* row = &data_[std::size_t(i) * cols_];
    for (int j = 0; j < cols_; ++j)
      if (row[j] != 0 && v(j) != 0) acc = checked_add(acc, checked_mul(row[j], v(j)));
    out(i) = acc;
  }
  return out;
}

void IntMatrix::add_row_multiple(int i, int j, std::int64_t c) {
  if (c == 0) return;
  std::int64_t* ri = &data_[std::size_t(i) * cols_];
  const std::int64_t* rj = &data_[std::size_t(j) * cols_];
  for (int k = 0; k < cols_; ++k)
    if (rj[k] != 0) ri[k] = checked_add(ri[k], checked_mul(c, rj[k]));
}

void IntMatrix::add_col_multiple(int i, int j, std::int64_t c) {
  if (c == 0) return;
  for (int k = 0; k < rows_; ++k) {
    std::int64_t x = (*this)(k, j);
    if (x != 0) (*this)(k, i) = checked_add((*this)(k, i), checked_mul(c, x));
  }
}

void IntMatrix::negate_row(int i) {
  for (int k = 0; k < cols_; ++k) (*this)(i, k) = -(*this)(i, k);
}

void IntMatrix::negate_col(int j) {
  for (int k = 0; k < rows_; ++k) (*this)(k, j) = -(*this)(k, j);
}

namespace {

class SmithReducer {
 public:
  SmithReducer(IntMatrix a, SmithTracking t) : t_(t) {
    out_.reduced = std::move(a);
    const int m = out_.reduced.rows(), n = out_.reduced.cols();
    if (t.left) out_.left = IntMatrix::identity(m);
    if (t.left_inverse) out_.left_inverse = IntMatrix::identity(m);
    if (t.right) out_.right = IntMatrix::identity(n);
    if (t.right_inverse) out_.right_inverse = IntMatrix::identity(n);
    row_active_.assign(m, true);
    col_active_.assign(n, true);
  }

  SmithDecomposition run() {
    for (;;) {
      sweep();
      if (!fix_divisibility()) break;
    }
    return std::move(out_);
  }

 private:
  IntMatrix& A() { return out_.reduced; }

  // row_k += c row_i
  void row_op(int k, int i, std::int64_t c) {
    A().add_row_multiple(k, i, c);
    if (t_.left) out_.left.add_row_multiple(k, i, c);
    if (t_.left_inverse) out_.left_inverse.add_col_multiple(i, k, -c);
  }

  // col_l += c col_j
  void col_op(int l, int j, std::int64_t c) {
    A().add_col_multiple(l, j, c);
    if (t_.right) out_.right.add_col_multiple(l, j, c);
    if (t_.right_inverse) out_.right_inverse.add_row_multiple(j, l, -c);
  }

  void negate(int i) {
    A().negate_row(i);
    if (t_.left) out_.left.negate_row(i);
    if (t_.left_inverse) out_.left_inverse.negate_col(i);
  }

  int min_in_col(int j) {
    int best = -1;
    std::int64_t bv = 0;
    for (int i = 0; i < A().rows(); ++i) {
      if (!row_active_[i]) continue;
      std::int64_t v = std::llabs(A()(i, j));
      if (v != 0 && (best < 0 || v < bv)) {
        best = i;
        bv = v;
        if (v == 1) break;
      }
    }
    return best;
  }

  int min_in_row(int i) {
    int best = -1;
    std::int64_t bv = 0;
    for (int j = 0; j < A().cols(); ++j) {
      if (!col_active_[j]) continue;
      std::int64_t v = std::llabs(A()(i, j));
      if (v != 0 && (best < 0 || v < bv)) {
        best = j;
        bv = v;
        if (v == 1) break;
      }
    }
    return best;
  }

  void eliminate(int i, int j) {
    for (;;) {
      bool dirty = false;
      const std::int64_t p = A()(i, j);
      for (int k = 0; k < A().rows(); ++k) {
        if (k == i || !row_active_[k]) continue;
        std::int64_t v = A()(k, j);
        if (v == 0) continue;
        row_op(k, i, -(v / p));
        if (A()(k, j) != 0) dirty = true;
      }
      if (dirty) {
        i = min_in_col(j);
        continue;
      }
      for (int l = 0; l < A().cols(); ++l) {
        if (l == j || !col_active_[l]) continue;
        std::int64_t v = A()(i, l);
        if (v == 0) continue;
        col_op(l, j, -(v / p));
        if (A()(i, l) != 0) dirty = true;
      }
      if (dirty) {
        j = min_in_row(i);
        continue;
      }
      break;
    }
    if (A()(i, j) < 0) negate(i);
    row_active_[i] = false;
    col_active_[j] = false;
    out_.pivots.push_back({i, j, A()(i, j)});
  }

  void sweep() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (int j = 0; j < A().cols(); ++j) {
        if (!col_active_[j]) continue;
        int i = min_in_col(j);
        if (i < 0) continue;
        eliminate(i, j);
        progress = true;
      }
    }
  }

  // Returns true if a pair of pivots violating divisibility was reopened.
  bool fix_divisibility() {
    auto& pv = out_.pivots;
    std::sort(pv.begin(), pv.end(), [](const SmithPivot& a, const SmithPivot& b) { return a.value < b.value; });
    for (std::size_t a = 0; a < pv.size(); ++a) {
      if (pv[a].value == 1) continue;
      for (std::size_t b = a + 1; b < pv.size(); ++b) {
        if (pv[b].value % pv[a].value == 0) continue;
        SmithPivot pa = pv[a], pb = pv[b];
        col_op(pa.col, pb.col, 1);
        row_active_[pa.row] = row_active_[pb.row] = true;
        col_active_[pa.col] = col_active_[pb.col] = true;
        pv.erase(pv.begin() + b);
        pv.erase(pv.begin() + a);
        return true;
      }
    }
    return false;
  }

  SmithTracking t_;
  SmithDecomposition out_;
  std::vector<bool> row_active_, col_active_;
};

}  // namespace

SmithDecomposition smith_normal_form(IntMatrix a, SmithTracking tracking) {
  return SmithReducer(std::move(a), tracking).run();
}

bool IntegerCohomology::ClassCoordinates::is_zero() const {
  return (free.size() == 0 || free.isZero()) && (torsion.size() == 0 || torsion.isZero());
}

IntegerCohomology::IntegerCohomology(const IntSparse& incoming, const IntSparse& outgoing, int degree)
    : n_(int(incoming.rows())), outgoing_(outgoing) {
  if (outgoing.cols() != incoming.rows())
    throw std::invalid_argument("IntegerCohomology: incompatible map sizes");
  image_ = smith_normal_form(IntMatrix::from_sparse(incoming), {true, true, true, false});

  row_pivot_of_.assign(n_, -1);
  for (std::size_t p = 0; p < image_.pivots.size(); ++p) row_pivot_of_[image_.pivots[p].row] = int(p);
  for (int i = 0; i < n_; ++i)
    if (row_pivot_of_[i] < 0) complement_rows_.push_back(i);

  // Restrict outgoing to W = columns of U^-1 indexed by complement rows.
  const int w = int(complement_rows_.size());
  const IntMatrix& uinv = image_.left_inverse;
  IntMatrix bw(int(outgoing.rows()), w);
  for (int t = 0; t < outgoing.outerSize(); ++t)
    for (IntSparse::InnerIterator it(outgoing, t); it; ++it) {
      const int r = int(it.row()), c = int(it.col());
      for (int q = 0; q < w; ++q) {
        std::int64_t x = uinv(c, complement_rows_[q]);
        if (x != 0) bw(r, q) = checked_add(bw(r, q), checked_mul(it.value(), x));
      }
    }
  kernel_ = smith_normal_form(std::move(bw), {false, false, true, true});
  std::vector<bool> pivot_col(w, false);
  for (const auto& p : kernel_.pivots) pivot_col[p.col] = true;
  for (int q = 0; q < w; ++q)
    if (!pivot_col[q]) kernel_cols_.push_back(q);

  group_.degree = degree;
  group_.betti = int(kernel_cols_.size());
  for (int kc : kernel_cols_) {
    IntVector g = IntVector::Zero(n_);
    for (int q = 0; q < w; ++q) {
      std::int64_t c = kernel_.right(q, kc);
      if (c == 0) continue;
      for (int i = 0; i < n_; ++i) {
        std::int64_t x = uinv(i, complement_rows_[q]);
        if (x != 0) g(i) = checked_add(g(i), checked_mul(c, x));
      }
    }
    group_.free_generators.push_back(std::move(g));
  }
  std::vector<int> order(image_.pivots.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return image_.pivots[a].value < image_.pivots[b].value; });
  for (int p : order) {
    if (image_.pivots[p].value <= 1) continue;
    torsion_pivots_.push_back(p);
    group_.torsion.push_back(image_.pivots[p].value);
    group_.torsion_generators.push_back(uinv.column(image_.pivots[p].row));
  }
}

bool IntegerCohomology::is_cocycle(const IntVector& z) const {
  if (z.size() != n_) return false;
  IntVector img = outgoing_ * z;
  return img.isZero();
}

IntegerCohomology::ClassCoordinates IntegerCohomology::classify(const IntVector& z) const {
  if (!is_cocycle(z)) throw std::invalid_argument("classify: argument is not a cocycle");
  IntVector y = image_.left * z;
  const int w = int(complement_rows_.size());
  IntVector yc(w);
  for (int q = 0; q < w; ++q) yc(q) = y(complement_rows_[q]);
  IntVector c = kernel_.right_inverse * yc;
  for (const auto& p : kernel_.pivots)
    if (c(p.col) != 0) throw std::logic_error("classify: cocycle has a component outside the kernel");
  ClassCoordinates out;
  out.free.resize(kernel_cols_.size());
  for (std::size_t k = 0; k < kernel_cols_.size(); ++k) out.free(k) = c(kernel_cols_[k]);
  out.torsion.resize(torsion_pivots_.size());
  for (std::size_t k = 0; k < torsion_pivots_.size(); ++k) {
    const auto& p = image_.pivots[torsion_pivots_[k]];
    out.torsion(k) = floor_mod(y(p.row), p.value);
  }
  return out;
}

std::optional<IntVector> IntegerCohomology::preimage(const IntVector& z) const {
  if (z.size() != n_) throw std::invalid_argument("preimage: size mismatch");
  IntVector y = image_.left * z;
  for (int r : complement_rows_)
    if (y(r) != 0) return std::nullopt;
  const int m = image_.reduced.cols();
  IntVector coeff = IntVector::Zero(m);
  for (const auto& p : image_.pivots) {
    if (y(p.row) % p.value != 0) return std::nullopt;
    coeff(p.col) = y(p.row) / p.value;
  }
  return image_.right * coeff;
}

std::int64_t integer_determinant(const IntMatrix& m0) {
  if (m0.rows() != m0.cols()) throw std::invalid_argument("determinant of non-square matrix");
  const int n = m0.rows();
  if (n == 0) return 1;
  IntMatrix m = m0;
  std::int64_t sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m(k, k) == 0) {
      int s = k + 1;
      while (s < n && m(s, k) == 0) ++s;
      if (s == n) return 0;
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(s, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) {
        __int128 v = (__int128)m(i, j) * m(k, k) - (__int128)m(i, k) * m(k, j);
        v /= prev;
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("determinant overflow");
        m(i, j) = std::int64_t(v);
      }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

}  // namespace gerbelab
