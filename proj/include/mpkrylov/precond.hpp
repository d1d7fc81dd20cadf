#pragma once

// ILU(0): incomplete LU restricted to the sparsity pattern of A, stored as a
// single CSR matrix (strict lower part holds L with implied unit diagonal,
// the rest holds U).

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mpkrylov/operator.hpp"

namespace mpk {

enum class Ilu0ErrorKind { NotSquare, MissingDiagonal, ZeroPivot };

class Ilu0Error : public std::runtime_error {
 public:
  Ilu0Error(Ilu0ErrorKind kind, std::size_t row);

  [[nodiscard]] Ilu0ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  Ilu0ErrorKind kind_;
  std::size_t row_;
};

class Ilu0Factor {
 public:
  Ilu0Factor(CsrMatrix lu, std::vector<std::size_t> diag_ptr);

  [[nodiscard]] const CsrMatrix& lu() const noexcept { return lu_; }
  [[nodiscard]] std::span<const std::size_t> diag_ptr() const noexcept { return diag_ptr_; }
  [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }
  [[nodiscard]] Precision precision() const noexcept { return lu_.precision(); }

  /// Unit lower factor, expanded.
  [[nodiscard]] DenseMatrix lower() const;
  /// Upper factor including the diagonal, expanded.
  [[nodiscard]] DenseMatrix upper() const;

 private:
  CsrMatrix lu_;
  std::vector<std::size_t> diag_ptr_;
};

/// IKJ elimination over A's pattern, no pivoting. Throws Ilu0Error.
Ilu0Factor ilu0_factorize(const CsrMatrix& a);

/// w = U^-1 L^-1 r (forward then backward substitution).
MPVector ilu0_solve(const Ilu0Factor& f, const MPVector& r);
void ilu0_solve_into(const Ilu0Factor& f, const MPVector& r, MPVector& w);
/// w = (LU)^-T r: U^T (lower) then L^T (unit upper).
MPVector ilu0_solve_transpose(const Ilu0Factor& f, const MPVector& r);
void ilu0_solve_transpose_into(const Ilu0Factor& f, const MPVector& r, MPVector& w);

class Ilu0Preconditioner final : public Preconditioner {
 public:
  explicit Ilu0Preconditioner(Ilu0Factor f) : f_(std::move(f)) {}
  void solve(const MPVector& r, MPVector& w) const override { ilu0_solve_into(f_, r, w); }
  void solve_transpose(const MPVector& r, MPVector& w) const override { ilu0_solve_transpose_into(f_, r, w); }
  [[nodiscard]] const Ilu0Factor& factor() const noexcept { return f_; }

 private:
  Ilu0Factor f_;
};

}  // namespace mpk
