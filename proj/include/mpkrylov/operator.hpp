#pragma once

#include <cstddef>

#include "mpkrylov/matrices.hpp"

namespace mpk {

/// Square operator y = A x together with its transpose product.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual Precision precision() const = 0;
  virtual void apply(const MPVector& x, MPVector& y) const = 0;
  virtual void apply_transpose(const MPVector& x, MPVector& y) const = 0;
};

/// SpMV-backed operator. The transpose product scatters over the rows of A.
class CsrOperator final : public LinearOperator {
 public:
  explicit CsrOperator(const CsrMatrix& a);
  [[nodiscard]] std::size_t size() const override { return a_.rows(); }
  [[nodiscard]] Precision precision() const override { return a_.precision(); }
  void apply(const MPVector& x, MPVector& y) const override { spmv_into(a_, x, y); }
  void apply_transpose(const MPVector& x, MPVector& y) const override { spmv_transpose_into(a_, x, y); }
  [[nodiscard]] const CsrMatrix& matrix() const noexcept { return a_; }

 private:
  const CsrMatrix& a_;
};

/// Dense MV operator; keeps an explicit transpose for the BiCG shadow product.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(DenseMatrix a);
  [[nodiscard]] std::size_t size() const override { return a_.rows(); }
  [[nodiscard]] Precision precision() const override { return a_.precision(); }
  void apply(const MPVector& x, MPVector& y) const override { dense_mv_into(a_, x, y); }
  void apply_transpose(const MPVector& x, MPVector& y) const override { dense_mv_into(at_, x, y); }

 private:
  DenseMatrix a_;
  DenseMatrix at_;
};

/// Left preconditioner K: solve K w = r and Kᵀ w = r.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void solve(const MPVector& r, MPVector& w) const = 0;
  virtual void solve_transpose(const MPVector& r, MPVector& w) const = 0;
  [[nodiscard]] virtual bool is_identity() const { return false; }
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void solve(const MPVector& r, MPVector& w) const override { w = r; }
  void solve_transpose(const MPVector& r, MPVector& w) const override { w = r; }
  [[nodiscard]] bool is_identity() const override { return true; }
};

}  // namespace mpk
