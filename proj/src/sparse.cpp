#include "poroadapt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

namespace poroadapt {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() || row_ptr_.back() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent arrays");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) throw std::invalid_argument("CsrMatrix: row offsets decrease");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= cols_) throw std::invalid_argument("CsrMatrix: column index out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw std::invalid_argument("CsrMatrix: column indices not strictly increasing");
      }
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw std::out_of_range("CsrMatrix::from_triplets: index out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<std::size_t> cols_out;
  std::vector<double> vals;
  cols_out.reserve(triplets.size());
  vals.reserve(triplets.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (k < triplets.size() && triplets[k].row == r) {
      const std::size_t c = triplets[k].col;
      double sum = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) sum += triplets[k++].value;
      cols_out.push_back(c);
      vals.push_back(sum);
    }
    ptr[r + 1] = vals.size();
  }
  return CsrMatrix(rows, cols, std::move(ptr), std::move(cols_out), std::move(vals));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::size_t> ptr(n + 1), idx(n);
  std::iota(ptr.begin(), ptr.end(), std::size_t{0});
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return CsrMatrix(n, n, std::move(ptr), std::move(idx), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector CsrMatrix::multiply(std::span<const double> x) const {
  Vector y(rows_, 0.0);
  multiply_add(x, y);
  return y;
}

void CsrMatrix::multiply_add(std::span<const double> x, std::span<double> y, double scale) const {
  if (x.size() != cols_ || y.size() != rows_) throw std::invalid_argument("CsrMatrix::multiply: size mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] += scale * s;
  }
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<std::size_t> ptr(cols_ + 1, 0);
  for (std::size_t c : col_idx_) ++ptr[c + 1];
  for (std::size_t c = 0; c < cols_; ++c) ptr[c + 1] += ptr[c];
  std::vector<std::size_t> idx(nnz());
  std::vector<double> vals(nnz());
  std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t pos = next[col_idx_[k]]++;
      idx[pos] = i;
      vals[pos] = values_[k];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(vals));
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<std::vector<double>> CsrMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i][col_idx_[k]] = values_[k];
  }
  return d;
}

SingularMatrixError::SingularMatrixError(std::size_t pivot, std::size_t original_row)
    : std::runtime_error("singular matrix: zero pivot at step " + std::to_string(pivot) + " (row " +
                         std::to_string(original_row) + ")"),
      pivot_(pivot),
      original_row_(original_row) {}

std::vector<std::size_t> reverse_cuthill_mckee(const CsrMatrix& a) {
  const std::size_t n = a.rows();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const std::size_t j = a.col_idx()[k];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  std::vector<std::size_t> degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
    degree[i] = adj[i].size();
  }
  auto by_degree = [&](std::size_t x, std::size_t y) {
    return degree[x] != degree[y] ? degree[x] < degree[y] : x < y;
  };
  std::vector<std::size_t> by_deg(n);
  std::iota(by_deg.begin(), by_deg.end(), std::size_t{0});
  std::sort(by_deg.begin(), by_deg.end(), by_degree);

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<std::size_t> nbrs;
  for (std::size_t start : by_deg) {
    if (seen[start]) continue;
    seen[start] = 1;
    std::size_t head = order.size();
    order.push_back(start);
    while (head < order.size()) {
      const std::size_t v = order[head++];
      nbrs.clear();
      for (std::size_t w : adj[v]) {
        if (!seen[w]) nbrs.push_back(w);
      }
      std::sort(nbrs.begin(), nbrs.end(), by_degree);
      for (std::size_t w : nbrs) {
        seen[w] = 1;
        order.push_back(w);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

LuFactor factor(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factor: matrix is not square");
  LuFactor f;
  const std::size_t n = a.rows();
  f.n_ = n;
  f.perm_ = reverse_cuthill_mckee(a);
  std::vector<std::size_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[f.perm_[i]] = i;

  std::size_t kl = 0, ku = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const std::size_t pi = inv[i], pj = inv[a.col_idx()[k]];
      if (pi > pj) kl = std::max(kl, pi - pj);
      else ku = std::max(ku, pj - pi);
    }
  }
  f.kl_ = kl;
  f.ku_ = ku;
  f.ldab_ = 2 * kl + ku + 1;
  f.band_.assign(f.ldab_ * n, 0.0);
  f.ipiv_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      f.at(inv[i], inv[a.col_idx()[k]]) = a.values()[k];
    }
  }
  if (n == 0) return f;

  // Column-oriented band elimination; fill from row swaps extends U to kl+ku.
  const std::size_t kv = kl + ku;
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t km = std::min(kl, n - 1 - j);
    std::size_t p = 0;
    double best = std::abs(f.at(j, j));
    for (std::size_t r = 1; r <= km; ++r) {
      const double v = std::abs(f.at(j + r, j));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    f.ipiv_[j] = j + p;
    if (best == 0.0) throw SingularMatrixError(j, f.perm_[j]);
    ju = std::max(ju, std::min(j + ku + p, n - 1));
    if (p != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(f.at(j, c), f.at(j + p, c));
    }
    if (km > 0) {
      const double inv_piv = 1.0 / f.at(j, j);
      double* col = &f.band_[j * f.ldab_ + kv + 1];
      for (std::size_t r = 0; r < km; ++r) col[r] *= inv_piv;
      for (std::size_t c = j + 1; c <= ju; ++c) {
        const double u = f.at(j, c);
        if (u == 0.0) continue;
        double* dst = &f.band_[c * f.ldab_ + kv + j + 1 - c];
        for (std::size_t r = 0; r < km; ++r) dst[r] -= col[r] * u;
      }
    }
  }
  return f;
}

std::size_t LuFactor::row_swaps() const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += ipiv_[j] != j ? 1 : 0;
  return s;
}

Vector LuFactor::solve(std::span<const double> b) const {
  if (b.size() != n_) throw std::invalid_argument("LuFactor::solve: dimension mismatch");
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  const std::size_t kv = kl_ + ku_;
  for (std::size_t j = 0; j < n_; ++j) {
    if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* col = &band_[j * ldab_ + kv + 1];
    for (std::size_t r = 0; r < km; ++r) x[j + 1 + r] -= col[r] * xj;
  }
  for (std::size_t jj = n_; jj-- > 0;) {
    x[jj] /= at(jj, jj);
    const double xj = x[jj];
    if (xj == 0.0) continue;
    const std::size_t top = jj > kv ? jj - kv : 0;
    for (std::size_t i = top; i < jj; ++i) x[i] -= at(i, jj) * xj;
  }
  Vector out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[perm_[i]] = x[i];
  return out;
}

LuFactor::DenseFactors LuFactor::dense_factors() const {
  DenseFactors d;
  d.lower.assign(n_, std::vector<double>(n_, 0.0));
  d.upper.assign(n_, std::vector<double>(n_, 0.0));
  d.ordering = perm_;
  const std::size_t kv = kl_ + ku_;
  // multipliers are stored as in unblocked LAPACK: column j holds the
  // multipliers before later swaps, so apply swaps to earlier columns.
  std::vector<std::vector<double>> l(n_, std::vector<double>(n_, 0.0));
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    for (std::size_t r = 1; r <= km; ++r) l[j + r][j] = at(j + r, j);
  }
  d.row_perm.resize(n_);
  std::iota(d.row_perm.begin(), d.row_perm.end(), std::size_t{0});
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t p = ipiv_[j];
    if (p != j) {
      std::swap(d.row_perm[j], d.row_perm[p]);
      for (std::size_t c = 0; c < j; ++c) std::swap(l[j][c], l[p][c]);
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < i; ++c) d.lower[i][c] = l[i][c];
    d.lower[i][i] = 1.0;
    const std::size_t last = std::min(n_ - 1, i + kv);
    for (std::size_t c = i; c <= last; ++c) d.upper[i][c] = at(i, c);
  }
  return d;
}

Vector solve(const LuFactor& f, std::span<const double> b) { return f.solve(b); }

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      os << i + 1 << ' ' << a.col_idx()[k] + 1 << ' ' << a.values()[k] << '\n';
    }
  }
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace poroadapt
