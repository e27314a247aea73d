#pragma once

// Exact integer linear algebra: Smith normal form with unimodular
// certificates, and integral (co)homology of a finite cochain complex.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <vector>

namespace gerbelab {

using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IntSparse = Eigen::SparseMatrix<std::int64_t>;

/// Dense row-major integer matrix. All arithmetic is overflow-checked and
/// throws std::overflow_error rather than wrapping.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0) {}

  static IntMatrix identity(int n);
  static IntMatrix from_sparse(const IntSparse& s);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t& operator()(int i, int j) { return data_[std::size_t(i) * cols_ + j]; }
  std::int64_t operator()(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }

  IntVector column(int j) const;
  IntVector operator*(const IntVector& v) const;

  /// row_i += c * row_j
  void add_row_multiple(int i, int j, std::int64_t c);
  /// col_i += c * col_j
  void add_col_multiple(int i, int j, std::int64_t c);
  void negate_row(int i);
  void negate_col(int j);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::int64_t> data_;
};

struct SmithPivot {
  int row;
  int col;
  std::int64_t value;  // > 0
};

/// U * A * V = D with D "diagonal up to placement": the only nonzero entries
/// of D are the pivots, one per row and column. Invariant factors (sorted
/// pivot values) satisfy the divisibility chain.
struct SmithDecomposition {
  IntMatrix reduced;                    // D
  IntMatrix left, left_inverse;         // U, U^-1 (empty if not tracked)
  IntMatrix right, right_inverse;       // V, V^-1 (empty if not tracked)
  std::vector<SmithPivot> pivots;

  int rank() const { return int(pivots.size()); }
};

struct SmithTracking {
  bool left = false;
  bool left_inverse = false;
  bool right = false;
  bool right_inverse = false;
};

SmithDecomposition smith_normal_form(IntMatrix a, SmithTracking tracking);

/// Integer (co)homology group in one degree, with explicit generators.
struct CohomologyGroup {
  int degree = 0;
  int betti = 0;
  std::vector<std::int64_t> torsion;          // invariant factors > 1
  std::vector<IntVector> free_generators;     // betti cocycles
  std::vector<IntVector> torsion_generators;  // one per torsion factor
};

/// Cohomology at the middle term of  C_prev --incoming--> C --outgoing--> C_next.
/// Works equally for homology by passing boundary maps. Keeps the Smith
/// certificates so that classes can be reduced and coboundaries inverted.
class IntegerCohomology {
 public:
  struct ClassCoordinates {
    IntVector free;     // coefficients on free_generators
    IntVector torsion;  // residues mod each torsion factor
    bool is_zero() const;
  };

  /// incoming: n x n_prev (may have zero columns), outgoing: n_next x n.
  IntegerCohomology(const IntSparse& incoming, const IntSparse& outgoing, int degree);

  const CohomologyGroup& group() const { return group_; }

  /// Throws std::invalid_argument if z is not a cocycle.
  ClassCoordinates classify(const IntVector& z) const;

  /// x with incoming * x == z, or nullopt if z is not a coboundary.
  std::optional<IntVector> preimage(const IntVector& z) const;

  bool is_cocycle(const IntVector& z) const;

 private:
  int n_ = 0;
  IntSparse outgoing_;
  SmithDecomposition image_;   // of incoming
  SmithDecomposition kernel_;  // of outgoing restricted to complement basis
  std::vector<int> complement_rows_;   // non-pivot rows of image_
  std::vector<int> kernel_cols_;       // non-pivot columns of kernel_
  std::vector<int> row_pivot_of_;      // row -> index into image_.pivots or -1
  std::vector<int> torsion_pivots_;    // indices into image_.pivots with value > 1
  CohomologyGroup group_;
};

/// Exact determinant of a small integer matrix (Bareiss).
std::int64_t integer_determinant(const IntMatrix& m);

}  // namespace gerbelab
