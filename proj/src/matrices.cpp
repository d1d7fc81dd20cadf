#include "mpkrylov/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace mpk {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Precision prec)
    : rows_(rows), cols_(cols), prec_(prec) {
  if (rows == 0 || cols == 0) throw ContractViolation("DenseMatrix: dimensions must be positive");
  entries_.reserve(rows * cols);
  for (std::size_t k = 0; k < rows * cols; ++k) entries_.emplace_back(prec);
}

DenseMatrix DenseMatrix::identity(std::size_t n, Precision prec) {
  DenseMatrix a(n, n, prec);
  for (std::size_t i = 0; i < n; ++i) mpfr_set_ui(a(i, i).get(), 1, kRound);
  return a;
}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, Precision prec,
                     std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
                     std::vector<MPScalar> values)
    : rows_(rows),
      cols_(cols),
      prec_(prec),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  validate();
}

void CsrMatrix::validate() const {
  if (rows_ == 0 || cols_ == 0) throw ContractViolation("CsrMatrix: dimensions must be positive");
  if (row_ptr_.size() != rows_ + 1) throw ContractViolation("CsrMatrix: row_ptr must have rows+1 entries");
  if (row_ptr_.front() != 0) throw ContractViolation("CsrMatrix: row_ptr[0] must be 0");
  if (row_ptr_.back() != values_.size() || col_idx_.size() != values_.size()) {
    throw ContractViolation("CsrMatrix: row_ptr[rows], col_idx and values disagree on nnz");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) {
      throw ContractViolation("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
    }
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= cols_) {
        throw ContractViolation("CsrMatrix: column index out of range in row " + std::to_string(i));
      }
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw ContractViolation("CsrMatrix: columns not strictly increasing in row " + std::to_string(i));
      }
    }
  }
  for (const auto& v : values_) {
    if (v.precision() != prec_) throw PrecisionMismatch("CsrMatrix", prec_.bits(), v.precision().bits());
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, Precision prec,
                                   std::vector<Triplet> entries, ZeroPolicy zeros) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) throw ContractViolation("from_triplets: index out of range");
    require_same_precision("from_triplets", prec, t.value.precision());
  }
  // Stable so duplicates are summed in input order.
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<MPScalar> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());

  std::size_t k = 0;
  while (k < entries.size()) {
    const std::size_t i = entries[k].row;
    const std::size_t j = entries[k].col;
    MPScalar sum = std::move(entries[k].value);
    for (++k; k < entries.size() && entries[k].row == i && entries[k].col == j; ++k) {
      sum += entries[k].value;
    }
    if (zeros == ZeroPolicy::Drop && sum.is_zero()) continue;
    col_idx.push_back(j);
    values.push_back(std::move(sum));
    ++row_ptr[i + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return CsrMatrix(rows, cols, prec, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::identity(std::size_t n, Precision prec) {
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::size_t> col_idx(n);
  std::vector<MPScalar> values;
  values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_ptr[i + 1] = i + 1;
    col_idx[i] = i;
    values.emplace_back(prec, 1);
  }
  return CsrMatrix(n, n, prec, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparsityPattern CsrMatrix::pattern() const { return {rows_, cols_, row_ptr_, col_idx_}; }

std::optional<std::size_t> CsrMatrix::find(std::size_t i, std::size_t j) const {
  if (i >= rows_) return std::nullopt;
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return std::nullopt;
  return static_cast<std::size_t>(it - col_idx_.begin());
}

bool CsrMatrix::bit_equal(const CsrMatrix& other) const noexcept {
  if (rows_ != other.rows_ || cols_ != other.cols_ || prec_ != other.prec_) return false;
  if (row_ptr_ != other.row_ptr_ || col_idx_ != other.col_idx_) return false;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!values_[k].bit_equal(other.values_[k])) return false;
  }
  return true;
}

DenseMatrix to_dense(const CsrMatrix& a) {
  DenseMatrix d(a.rows(), a.cols(), a.precision());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) d(i, ci[k]) = v[k];
  }
  return d;
}

CsrMatrix to_csr(const DenseMatrix& a, ZeroPolicy zeros) {
  std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<MPScalar> values;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (zeros == ZeroPolicy::Drop && a(i, j).is_zero()) continue;
      col_idx.push_back(j);
      values.push_back(a(i, j));
    }
    row_ptr[i + 1] = values.size();
  }
  return CsrMatrix(a.rows(), a.cols(), a.precision(), std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

CsrMatrix transpose(const CsrMatrix& a) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  std::vector<std::size_t> row_ptr(a.cols() + 1, 0);
  for (std::size_t k = 0; k < a.nnz(); ++k) ++row_ptr[ci[k] + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());

  std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<std::size_t> col_idx(a.nnz());
  std::vector<MPScalar> values(a.nnz(), MPScalar(a.precision()));
  // Rows are visited in ascending order, so each transposed row comes out sorted.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const std::size_t dst = next[ci[k]]++;
      col_idx[dst] = i;
      values[dst] = v[k];
    }
  }
  return CsrMatrix(a.cols(), a.rows(), a.precision(), std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

void dense_mv_into(const DenseMatrix& a, const MPVector& x, MPVector& y) {
  if (a.cols() != x.size()) throw DimensionMismatch("dense_mv", a.cols(), x.size());
  if (a.rows() != y.size()) throw DimensionMismatch("dense_mv", a.rows(), y.size());
  require_same_precision("dense_mv", a.precision(), x.precision());
  require_same_precision("dense_mv", a.precision(), y.precision());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    mpfr_ptr acc = y[i].get();
    mpfr_set_zero(acc, +1);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      mpfr_fma(acc, a(i, j).get(), x[j].get(), acc, kRound);
    }
  }
}

MPVector dense_mv(const DenseMatrix& a, const MPVector& x) {
  MPVector y(a.rows(), a.precision());
  dense_mv_into(a, x, y);
  return y;
}

void spmv_into(const CsrMatrix& a, const MPVector& x, MPVector& y) {
  if (a.cols() != x.size()) throw DimensionMismatch("spmv", a.cols(), x.size());
  if (a.rows() != y.size()) throw DimensionMismatch("spmv", a.rows(), y.size());
  require_same_precision("spmv", a.precision(), x.precision());
  require_same_precision("spmv", a.precision(), y.precision());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    mpfr_ptr acc = y[i].get();
    mpfr_set_zero(acc, +1);
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      mpfr_fma(acc, v[k].get(), x[ci[k]].get(), acc, kRound);
    }
  }
}

MPVector spmv(const CsrMatrix& a, const MPVector& x) {
  MPVector y(a.rows(), a.precision());
  spmv_into(a, x, y);
  return y;
}

void spmv_transpose_into(const CsrMatrix& a, const MPVector& x, MPVector& y) {
  if (a.rows() != x.size()) throw DimensionMismatch("spmv_transpose", a.rows(), x.size());
  if (a.cols() != y.size()) throw DimensionMismatch("spmv_transpose", a.cols(), y.size());
  require_same_precision("spmv_transpose", a.precision(), x.precision());
  require_same_precision("spmv_transpose", a.precision(), y.precision());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  y.set_zero();
  // Scatter by ascending row: each y_j accumulates its terms in ascending i,
  // the same order spmv(transpose(a), x) uses.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      mpfr_ptr acc = y[ci[k]].get();
      mpfr_fma(acc, v[k].get(), x[i].get(), acc, kRound);
    }
  }
}

MPVector spmv_transpose(const CsrMatrix& a, const MPVector& x) {
  MPVector y(a.cols(), a.precision());
  spmv_transpose_into(a, x, y);
  return y;
}

DenseMatrix gen_lotkin(std::size_t n, Precision prec) {
  DenseMatrix a(n, n, prec);
  for (std::size_t j = 0; j < n; ++j) mpfr_set_ui(a(0, j).get(), 1, kRound);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // 0-based (i, j) is 1-based (i+1, j+1): denominator i+j+1.
      mpfr_set_ui(a(i, j).get(), 1, kRound);
      mpfr_div_ui(a(i, j).get(), a(i, j).get(), static_cast<unsigned long>(i + j + 1), kRound);
    }
  }
  return a;
}

std::size_t zero_count(std::size_t total, double sparsity_percent) {
  const double k = std::round(sparsity_percent / 100.0 * static_cast<double>(total));
  if (k <= 0.0) return 0;
  return std::min(total, static_cast<std::size_t>(k));
}

CsrMatrix sparsify(const DenseMatrix& a, double sparsity_percent, std::uint64_t seed) {
  if (!(sparsity_percent >= 0.0 && sparsity_percent < 100.0)) {
    throw ContractViolation("sparsify: sparsity must be in [0, 100)");
  }
  const std::size_t total = a.rows() * a.cols();
  const std::size_t k = zero_count(total, sparsity_percent);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t pick = t + static_cast<std::size_t>(rng.next() % (total - t));
    std::swap(order[t], order[pick]);
  }

  std::vector<bool> zeroed(total, false);
  for (std::size_t t = 0; t < k; ++t) zeroed[order[t]] = true;

  std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<MPScalar> values;
  col_idx.reserve(total - k);
  values.reserve(total - k);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const std::size_t lin = i * a.cols() + j;
      if (zeroed[lin] || a(i, j).is_zero()) continue;
      col_idx.push_back(j);
      values.push_back(a(i, j));
    }
    row_ptr[i + 1] = values.size();
  }
  return CsrMatrix(a.rows(), a.cols(), a.precision(), std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

MemoryEstimate estimate_memory(std::uint64_t n, std::uint64_t nnz, Precision prec,
                               std::uint64_t header_bytes) {
  if (n == 0) return {};
  const std::uint64_t per_scalar = static_cast<std::uint64_t>(prec.bits()) / 8 + header_bytes;
  constexpr std::uint64_t word = sizeof(std::size_t);
  return {n * n * per_scalar, nnz * per_scalar + (nnz + n + 1) * word};
}

}  // namespace mpk
