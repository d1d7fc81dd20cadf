#include "mpkrylov/precond.hpp"

#include <string>
#include <utility>

namespace mpk {

namespace {

std::string ilu0_message(Ilu0ErrorKind kind, std::size_t row) {
  switch (kind) {
    case Ilu0ErrorKind::NotSquare: return "ILU(0): matrix is not square";
    case Ilu0ErrorKind::MissingDiagonal: return "ILU(0): row " + std::to_string(row) + " has no diagonal entry";
    case Ilu0ErrorKind::ZeroPivot: return "ILU(0): zero pivot in row " + std::to_string(row);
  }
  return "ILU(0) error";
}

void check_solve_args(const char* where, const Ilu0Factor& f, const MPVector& r, const MPVector& w) {
  if (r.size() != f.size()) throw DimensionMismatch(where, f.size(), r.size());
  if (w.size() != f.size()) throw DimensionMismatch(where, f.size(), w.size());
  require_same_precision(where, f.precision(), r.precision());
  require_same_precision(where, f.precision(), w.precision());
}

// dst <- dst - a*b with a single rounding.
void sub_mul(mpfr_ptr dst, mpfr_srcptr a, mpfr_srcptr b) {
  mpfr_fms(dst, a, b, dst, kRound);
  mpfr_neg(dst, dst, kRound);
}

}  // namespace

Ilu0Error::Ilu0Error(Ilu0ErrorKind kind, std::size_t row)
    : std::runtime_error(ilu0_message(kind, row)), kind_(kind), row_(row) {}

Ilu0Factor::Ilu0Factor(CsrMatrix lu, std::vector<std::size_t> diag_ptr)
    : lu_(std::move(lu)), diag_ptr_(std::move(diag_ptr)) {
  if (diag_ptr_.size() != lu_.rows()) throw ContractViolation("Ilu0Factor: diag_ptr size mismatch");
}

DenseMatrix Ilu0Factor::lower() const {
  DenseMatrix l = DenseMatrix::identity(size(), precision());
  const auto rp = lu_.row_ptr();
  const auto ci = lu_.col_idx();
  const auto v = lu_.values();
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = rp[i]; k < diag_ptr_[i]; ++k) l(i, ci[k]) = v[k];
  }
  return l;
}

DenseMatrix Ilu0Factor::upper() const {
  DenseMatrix u(size(), size(), precision());
  const auto rp = lu_.row_ptr();
  const auto ci = lu_.col_idx();
  const auto v = lu_.values();
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = diag_ptr_[i]; k < rp[i + 1]; ++k) u(i, ci[k]) = v[k];
  }
  return u;
}

Ilu0Factor ilu0_factorize(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw Ilu0Error(Ilu0ErrorKind::NotSquare, 0);
  const std::size_t n = a.rows();
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();

  std::vector<std::size_t> diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pos = a.find(i, i);
    if (!pos) throw Ilu0Error(Ilu0ErrorKind::MissingDiagonal, i);
    diag[i] = *pos;
  }

  CsrMatrix lu = a;
  auto v = lu.mutable_values();
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> where(n, kAbsent);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) where[ci[k]] = k;

    for (std::size_t kk = rp[i]; kk < diag[i]; ++kk) {
      const std::size_t col = ci[kk];
      // l_ik = a_ik / u_kk
      mpfr_div(v[kk].get(), v[kk].get(), v[diag[col]].get(), kRound);
      for (std::size_t kj = diag[col] + 1; kj < rp[col + 1]; ++kj) {
        const std::size_t dst = where[ci[kj]];
        if (dst == kAbsent) continue;  // fill-in outside the pattern is discarded
        sub_mul(v[dst].get(), v[kk].get(), v[kj].get());
      }
    }
    if (v[diag[i]].is_zero()) throw Ilu0Error(Ilu0ErrorKind::ZeroPivot, i);

    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) where[ci[k]] = kAbsent;
  }
  return Ilu0Factor(std::move(lu), std::move(diag));
}

void ilu0_solve_into(const Ilu0Factor& f, const MPVector& r, MPVector& w) {
  check_solve_args("ilu0_solve", f, r, w);
  const std::size_t n = f.size();
  const auto rp = f.lu().row_ptr();
  const auto ci = f.lu().col_idx();
  const auto v = f.lu().values();
  const auto diag = f.diag_ptr();

  // L y = r, y stored in w.
  for (std::size_t i = 0; i < n; ++i) {
    mpfr_set(w[i].get(), r[i].get(), kRound);
    for (std::size_t k = rp[i]; k < diag[i]; ++k) {
      sub_mul(w[i].get(), v[k].get(), w[ci[k]].get());
    }
  }
  // U w = y.
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = diag[i] + 1; k < rp[i + 1]; ++k) {
      sub_mul(w[i].get(), v[k].get(), w[ci[k]].get());
    }
    mpfr_div(w[i].get(), w[i].get(), v[diag[i]].get(), kRound);
  }
}

MPVector ilu0_solve(const Ilu0Factor& f, const MPVector& r) {
  MPVector w(f.size(), f.precision());
  ilu0_solve_into(f, r, w);
  return w;
}

void ilu0_solve_transpose_into(const Ilu0Factor& f, const MPVector& r, MPVector& w) {
  check_solve_args("ilu0_solve_transpose", f, r, w);
  const std::size_t n = f.size();
  const auto rp = f.lu().row_ptr();
  const auto ci = f.lu().col_idx();
  const auto v = f.lu().values();
  const auto diag = f.diag_ptr();

  // U^T z = r: column sweep over the rows of U, ascending.
  w = r;
  for (std::size_t j = 0; j < n; ++j) {
    mpfr_div(w[j].get(), w[j].get(), v[diag[j]].get(), kRound);
    for (std::size_t k = diag[j] + 1; k < rp[j + 1]; ++k) {
      sub_mul(w[ci[k]].get(), v[k].get(), w[j].get());
    }
  }
  // L^T w = z: column sweep over the rows of L, descending.
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = rp[i]; k < diag[i]; ++k) {
      sub_mul(w[ci[k]].get(), v[k].get(), w[i].get());
    }
  }
}

MPVector ilu0_solve_transpose(const Ilu0Factor& f, const MPVector& r) {
  MPVector w(f.size(), f.precision());
  ilu0_solve_transpose_into(f, r, w);
  return w;
}

}  // namespace mpk
