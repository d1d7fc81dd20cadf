#pragma once

// Multiple-precision scalar and vector primitives on top of MPFR.
//
// Every value carries a fixed binary precision and every arithmetic result is
// rounded to nearest-even at that precision. Containers hold a single uniform
// precision; mixing precisions in one operation is a contract violation.

#include <mpfr.h>

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpkrylov/errors.hpp"

namespace mpk {

inline constexpr long kDefaultPrecisionBits = 512;

/// Binary mantissa length, in bits. Valid range is [24, 2^24].
class Precision {
 public:
  static constexpr long kMinBits = 24;
  static constexpr long kMaxBits = 1L << 24;

  explicit Precision(long bits);

  [[nodiscard]] long bits() const noexcept { return bits_; }
  [[nodiscard]] mpfr_prec_t mpfr() const noexcept { return static_cast<mpfr_prec_t>(bits_); }

  friend bool operator==(Precision, Precision) = default;
  friend auto operator<=>(Precision, Precision) = default;

 private:
  long bits_;
};

inline constexpr mpfr_rnd_t kRound = MPFR_RNDN;

class MPScalar {
 public:
  /// +0 at the given precision.
  explicit MPScalar(Precision prec);
  MPScalar(Precision prec, long value);
  ~MPScalar();

  MPScalar(const MPScalar& other);
  MPScalar(MPScalar&& other) noexcept;
  MPScalar& operator=(const MPScalar& other);
  MPScalar& operator=(MPScalar&& other) noexcept;

  /// Decimal (or any MPFR-readable) text, rounded once to `prec`.
  /// Throws std::invalid_argument when the whole string is not a number.
  static MPScalar from_string(std::string_view text, Precision prec);
  /// 2^exponent, exact.
  static MPScalar pow2(long exponent, Precision prec);

  [[nodiscard]] Precision precision() const noexcept {
    return Precision(static_cast<long>(mpfr_get_prec(value_)));
  }

  [[nodiscard]] mpfr_srcptr get() const noexcept { return value_; }
  [[nodiscard]] mpfr_ptr get() noexcept { return value_; }

  [[nodiscard]] bool is_zero() const noexcept { return mpfr_zero_p(value_) != 0; }
  [[nodiscard]] bool is_nan() const noexcept { return mpfr_nan_p(value_) != 0; }
  [[nodiscard]] bool is_inf() const noexcept { return mpfr_inf_p(value_) != 0; }
  [[nodiscard]] bool is_finite() const noexcept { return mpfr_number_p(value_) != 0; }
  /// -1, 0 or +1; 0 for zero and NaN.
  [[nodiscard]] int sign() const noexcept { return is_nan() ? 0 : mpfr_sgn(value_); }

  [[nodiscard]] double to_double() const noexcept { return mpfr_get_d(value_, kRound); }
  /// Scientific notation with `digits` significant decimal digits.
  [[nodiscard]] std::string to_string(int digits) const;

  /// Same precision and identical representation (sign of zero included;
  /// all NaNs compare identical).
  [[nodiscard]] bool bit_equal(const MPScalar& other) const noexcept;

  MPScalar& operator+=(const MPScalar& rhs);
  MPScalar& operator-=(const MPScalar& rhs);
  MPScalar& operator*=(const MPScalar& rhs);
  MPScalar& operator/=(const MPScalar& rhs);

  friend MPScalar operator+(MPScalar lhs, const MPScalar& rhs) { return lhs += rhs; }
  friend MPScalar operator-(MPScalar lhs, const MPScalar& rhs) { return lhs -= rhs; }
  friend MPScalar operator*(MPScalar lhs, const MPScalar& rhs) { return lhs *= rhs; }
  friend MPScalar operator/(MPScalar lhs, const MPScalar& rhs) { return lhs /= rhs; }
  friend MPScalar operator-(const MPScalar& x);

  /// IEEE-style ordering: any comparison against NaN is unordered.
  friend std::partial_ordering operator<=>(const MPScalar& a, const MPScalar& b) noexcept;
  friend bool operator==(const MPScalar& a, const MPScalar& b) noexcept;

 private:
  mpfr_t value_;
  bool live_ = true;
};

MPScalar sqrt(const MPScalar& x);
MPScalar abs(const MPScalar& x);

/// Exact embedding of a finite binary64 (rounded only when prec < 53).
/// Throws std::invalid_argument for NaN or infinity.
MPScalar promote(double value, Precision prec);
/// Nearest binary64.
double demote(const MPScalar& x) noexcept;

class MPVector {
 public:
  /// Zero vector. dim must be ≥ 1.
  MPVector(std::size_t dim, Precision prec);
  static MPVector from_doubles(std::span<const double> values, Precision prec);

  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] Precision precision() const noexcept { return prec_; }

  [[nodiscard]] const MPScalar& operator[](std::size_t i) const noexcept { return entries_[i]; }
  [[nodiscard]] MPScalar& operator[](std::size_t i) noexcept { return entries_[i]; }

  [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
  [[nodiscard]] auto end() const noexcept { return entries_.end(); }
  [[nodiscard]] auto begin() noexcept { return entries_.begin(); }
  [[nodiscard]] auto end() noexcept { return entries_.end(); }

  /// Every entry set to +0 (keeps precision and storage).
  void set_zero();
  [[nodiscard]] bool bit_equal(const MPVector& other) const noexcept;

 private:
  Precision prec_;
  std::vector<MPScalar> entries_;
};

/// Throws PrecisionMismatch when `a` and `b` differ.
void require_same_precision(const char* where, Precision a, Precision b);
/// Throws DimensionMismatch/PrecisionMismatch.
void require_compatible(const char* where, const MPVector& a, const MPVector& b);

/// Σ a_k b_k in ascending k, one rounding per accumulation step.
MPScalar dot(const MPVector& a, const MPVector& b);
MPScalar norm2(const MPVector& a);
/// Returns alpha*x + y, each component rounded once.
MPVector axpy(const MPScalar& alpha, const MPVector& x, const MPVector& y);

// In-place kernels used by the solvers. They follow the same precision and
// dimension contracts as the value-returning forms.

/// y <- alpha*x + y
void axpy_inplace(const MPScalar& alpha, const MPVector& x, MPVector& y);
/// y <- x + beta*y
void xpby_inplace(const MPVector& x, const MPScalar& beta, MPVector& y);
/// out <- a - b
void sub_into(const MPVector& a, const MPVector& b, MPVector& out);
/// out <- a + b
void add_into(const MPVector& a, const MPVector& b, MPVector& out);
/// x <- alpha*x
void scale_inplace(const MPScalar& alpha, MPVector& x);
/// true when every component is finite
bool all_finite(const MPVector& x) noexcept;

}  // namespace mpk
