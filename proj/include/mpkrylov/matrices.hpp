#pragma once

// Dense and compressed-sparse-row storage of MPScalar entries, the two
// matrix-vector products, and the sparsified Lotkin test family.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mpkrylov/mp_core.hpp"

namespace mpk {

class DenseMatrix {
 public:
  /// rows x cols zero matrix, row-major.
  DenseMatrix(std::size_t rows, std::size_t cols, Precision prec);
  static DenseMatrix identity(std::size_t n, Precision prec);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] Precision precision() const noexcept { return prec_; }

  [[nodiscard]] const MPScalar& operator()(std::size_t i, std::size_t j) const noexcept {
    return entries_[i * cols_ + j];
  }
  [[nodiscard]] MPScalar& operator()(std::size_t i, std::size_t j) noexcept {
    return entries_[i * cols_ + j];
  }

  [[nodiscard]] std::span<const MPScalar> entries() const noexcept { return entries_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  Precision prec_;
  std::vector<MPScalar> entries_;
};

struct SparsityPattern {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;

  friend bool operator==(const SparsityPattern&, const SparsityPattern&) = default;
};

/// Whether exact-zero values survive construction.
enum class ZeroPolicy { Drop, Keep };

struct Triplet {
  std::size_t row;
  std::size_t col;
  MPScalar value;
};

/// Canonical CSR: sorted strictly increasing columns per row, no duplicates.
class CsrMatrix {
 public:
  /// Takes ownership of already-assembled arrays; throws ContractViolation
  /// when they break the CSR invariants.
  CsrMatrix(std::size_t rows, std::size_t cols, Precision prec, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<MPScalar> values);

  /// Unsorted coordinate input. Duplicates are summed; exact zeros (after
  /// summing) are dropped unless `zeros == ZeroPolicy::Keep`.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, Precision prec,
                                 std::vector<Triplet> entries, ZeroPolicy zeros = ZeroPolicy::Drop);
  static CsrMatrix identity(std::size_t n, Precision prec);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] Precision precision() const noexcept { return prec_; }

  [[nodiscard]] std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  [[nodiscard]] std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  [[nodiscard]] std::span<const MPScalar> values() const noexcept { return values_; }
  /// Values may be rewritten in place; the pattern may not.
  [[nodiscard]] std::span<MPScalar> mutable_values() noexcept { return values_; }

  [[nodiscard]] SparsityPattern pattern() const;
  /// Position of (i, j) in values(), if stored.
  [[nodiscard]] std::optional<std::size_t> find(std::size_t i, std::size_t j) const;
  /// Re-checks every structural invariant; throws ContractViolation.
  void validate() const;

  [[nodiscard]] bool bit_equal(const CsrMatrix& other) const noexcept;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Precision prec_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<MPScalar> values_;
};

DenseMatrix to_dense(const CsrMatrix& a);
CsrMatrix to_csr(const DenseMatrix& a, ZeroPolicy zeros = ZeroPolicy::Drop);
CsrMatrix transpose(const CsrMatrix& a);

/// y_i = Σ_j A_ij x_j over every stored entry, ascending j, zeros included.
MPVector dense_mv(const DenseMatrix& a, const MPVector& x);
void dense_mv_into(const DenseMatrix& a, const MPVector& x, MPVector& y);
/// y_i = Σ_k values[k] x[col_idx[k]] over row i, ascending k.
MPVector spmv(const CsrMatrix& a, const MPVector& x);
void spmv_into(const CsrMatrix& a, const MPVector& x, MPVector& y);
/// y = Aᵀ x, bitwise equal to spmv(transpose(a), x).
MPVector spmv_transpose(const CsrMatrix& a, const MPVector& x);
void spmv_transpose_into(const CsrMatrix& a, const MPVector& x, MPVector& y);

/// First row all ones, then A_ij = 1/(i+j-1) (1-based), each quotient
/// rounded once at `prec`.
DenseMatrix gen_lotkin(std::size_t n, Precision prec);

/// SplitMix64 generator (Steele, Lea, Flood).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// round(s/100 * total), clamped to total.
std::size_t zero_count(std::size_t total, double sparsity_percent);

/// Zeroes exactly zero_count(rows*cols, s) distinct positions picked by a
/// partial Fisher-Yates shuffle of the linear indices, then converts to CSR.
CsrMatrix sparsify(const DenseMatrix& a, double sparsity_percent, std::uint64_t seed);

struct MemoryEstimate {
  std::uint64_t dense_bytes = 0;
  std::uint64_t sparse_bytes = 0;
};

/// Storage estimate for an n x n matrix: (p/8 + header) bytes per stored
/// scalar; sparse storage adds nnz + n + 1 index words.
MemoryEstimate estimate_memory(std::uint64_t n, std::uint64_t nnz, Precision prec,
                               std::uint64_t header_bytes);

}  // namespace mpk
