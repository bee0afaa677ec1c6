#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace poroadapt {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix; column indices strictly increasing per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<double> values);

  /// Duplicates are summed in insertion order, so the result is independent
  /// of anything but the triplet sequence.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Entry (i,j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  Vector multiply(std::span<const double> x) const;
  void multiply_add(std::span<const double> x, std::span<double> y, double scale = 1.0) const;
  CsrMatrix transpose() const;
  double max_abs() const;
  std::vector<std::vector<double>> to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::size_t pivot, std::size_t original_row);
  std::size_t pivot() const { return pivot_; }
  std::size_t original_row() const { return original_row_; }

 private:
  std::size_t pivot_;
  std::size_t original_row_;
};

/// Reverse Cuthill-McKee ordering of the symmetrized pattern; perm[new] = old.
std::vector<std::size_t> reverse_cuthill_mckee(const CsrMatrix& a);

/// Banded LU with partial pivoting of the RCM-permuted matrix:
/// P * (Q A Q^T) = L U with Q the ordering and P the row interchanges.
class LuFactor {
 public:
  std::size_t size() const { return n_; }
  std::size_t lower_bandwidth() const { return kl_; }
  std::size_t upper_bandwidth() const { return ku_; }
  /// Number of pivots taken off the diagonal.
  std::size_t row_swaps() const;
  const std::vector<std::size_t>& ordering() const { return perm_; }

  Vector solve(std::span<const double> b) const;

  /// Dense factors of the permuted matrix for inspection on small systems.
  struct DenseFactors {
    std::vector<std::vector<double>> lower;
    std::vector<std::vector<double>> upper;
    std::vector<std::size_t> row_perm;  // (P Q A Q^T)[i] = (Q A Q^T)[row_perm[i]]
    std::vector<std::size_t> ordering;  // Q: new -> old
  };
  DenseFactors dense_factors() const;

 private:
  friend LuFactor factor(const CsrMatrix& a);

  double& at(std::size_t i, std::size_t j) { return band_[j * ldab_ + kl_ + ku_ + i - j]; }
  double at(std::size_t i, std::size_t j) const { return band_[j * ldab_ + kl_ + ku_ + i - j]; }

  std::size_t n_ = 0;
  std::size_t kl_ = 0;
  std::size_t ku_ = 0;
  std::size_t ldab_ = 0;
  std::vector<double> band_;
  std::vector<std::size_t> ipiv_;
  std::vector<std::size_t> perm_;
};

LuFactor factor(const CsrMatrix& a);
Vector solve(const LuFactor& f, std::span<const double> b);

void write_matrix_market(std::ostream& os, const CsrMatrix& a);

double norm2(std::span<const double> v);
double max_abs(std::span<const double> v);

}  // namespace poroadapt
