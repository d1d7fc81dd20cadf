#include "mpkrylov/mp_core.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mpk {

Precision::Precision(long bits) : bits_(bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw std::invalid_argument("precision must be in [" + std::to_string(kMinBits) + ", " +
                                std::to_string(kMaxBits) + "] bits, got " + std::to_string(bits));
  }
}

MPScalar::MPScalar(Precision prec) {
  mpfr_init2(value_, prec.mpfr());
  mpfr_set_zero(value_, +1);
}

MPScalar::MPScalar(Precision prec, long value) {
  mpfr_init2(value_, prec.mpfr());
  mpfr_set_si(value_, value, kRound);
}

MPScalar::~MPScalar() {
  if (live_) mpfr_clear(value_);
}

MPScalar::MPScalar(const MPScalar& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, kRound);
}

// A moved-from scalar owns no limbs; only destruction or assignment is valid.
MPScalar::MPScalar(MPScalar&& other) noexcept {
  *value_ = *other.value_;
  other.live_ = false;
}

MPScalar& MPScalar::operator=(const MPScalar& other) {
  if (this == &other) return *this;
  if (!live_) {
    mpfr_init2(value_, mpfr_get_prec(other.value_));
    live_ = true;
  } else if (mpfr_get_prec(value_) != mpfr_get_prec(other.value_)) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
  }
  mpfr_set(value_, other.value_, kRound);
  return *this;
}

MPScalar& MPScalar::operator=(MPScalar&& other) noexcept {
  if (this == &other) return *this;
  if (live_ && other.live_) {
    mpfr_swap(value_, other.value_);
  } else if (other.live_) {
    *value_ = *other.value_;
    live_ = true;
    other.live_ = false;
  }
  return *this;
}

MPScalar MPScalar::from_string(std::string_view text, Precision prec) {
  std::string buf(text);
  MPScalar x(prec);
  char* end = nullptr;
  if (!buf.empty()) mpfr_strtofr(x.value_, buf.c_str(), &end, 10, kRound);
  if (buf.empty() || end == buf.c_str() || end != buf.c_str() + buf.size()) {
    throw std::invalid_argument("not a number: '" + buf + "'");
  }
  return x;
}

MPScalar MPScalar::pow2(long exponent, Precision prec) {
  MPScalar x(prec, 1);
  mpfr_mul_2si(x.value_, x.value_, exponent, kRound);
  return x;
}

std::string MPScalar::to_string(int digits) const {
  if (digits < 1) digits = 1;
  char* raw = nullptr;
  if (mpfr_asprintf(&raw, "%.*Re", digits - 1, value_) < 0 || raw == nullptr) {
    throw std::runtime_error("mpfr_asprintf failed");
  }
  std::string out(raw);
  mpfr_free_str(raw);
  return out;
}

bool MPScalar::bit_equal(const MPScalar& other) const noexcept {
  if (mpfr_get_prec(value_) != mpfr_get_prec(other.value_)) return false;
  if (is_nan() || other.is_nan()) return is_nan() && other.is_nan();
  return mpfr_equal_p(value_, other.value_) != 0 &&
         mpfr_signbit(value_) == mpfr_signbit(other.value_);
}

MPScalar& MPScalar::operator+=(const MPScalar& rhs) {
  require_same_precision("MPScalar +", precision(), rhs.precision());
  mpfr_add(value_, value_, rhs.value_, kRound);
  return *this;
}

MPScalar& MPScalar::operator-=(const MPScalar& rhs) {
  require_same_precision("MPScalar -", precision(), rhs.precision());
  mpfr_sub(value_, value_, rhs.value_, kRound);
  return *this;
}

MPScalar& MPScalar::operator*=(const MPScalar& rhs) {
  require_same_precision("MPScalar *", precision(), rhs.precision());
  mpfr_mul(value_, value_, rhs.value_, kRound);
  return *this;
}

MPScalar& MPScalar::operator/=(const MPScalar& rhs) {
  require_same_precision("MPScalar /", precision(), rhs.precision());
  mpfr_div(value_, value_, rhs.value_, kRound);
  return *this;
}

MPScalar operator-(const MPScalar& x) {
  MPScalar out(x.precision());
  mpfr_neg(out.get(), x.get(), kRound);
  return out;
}

std::partial_ordering operator<=>(const MPScalar& a, const MPScalar& b) noexcept {
  if (a.is_nan() || b.is_nan()) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.get(), b.get());
  if (c < 0) return std::partial_ordering::less;
  if (c > 0) return std::partial_ordering::greater;
  return std::partial_ordering::equivalent;
}

bool operator==(const MPScalar& a, const MPScalar& b) noexcept {
  return mpfr_equal_p(a.get(), b.get()) != 0;
}

MPScalar sqrt(const MPScalar& x) {
  MPScalar out(x.precision());
  mpfr_sqrt(out.get(), x.get(), kRound);
  return out;
}

MPScalar abs(const MPScalar& x) {
  MPScalar out(x.precision());
  mpfr_abs(out.get(), x.get(), kRound);
  return out;
}

MPScalar promote(double value, Precision prec) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("promote: NaN or infinite binary64 input");
  }
  MPScalar x(prec);
  mpfr_set_d(x.get(), value, kRound);
  return x;
}

double demote(const MPScalar& x) noexcept { return x.to_double(); }

MPVector::MPVector(std::size_t dim, Precision prec) : prec_(prec) {
  if (dim == 0) throw ContractViolation("MPVector: dimension must be positive");
  entries_.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) entries_.emplace_back(prec);
}

MPVector MPVector::from_doubles(std::span<const double> values, Precision prec) {
  MPVector v(values.size(), prec);
  for (std::size_t i = 0; i < values.size(); ++i) v.entries_[i] = promote(values[i], prec);
  return v;
}

void MPVector::set_zero() {
  for (auto& e : entries_) mpfr_set_zero(e.get(), +1);
}

bool MPVector::bit_equal(const MPVector& other) const noexcept {
  if (size() != other.size() || prec_ != other.prec_) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!entries_[i].bit_equal(other.entries_[i])) return false;
  }
  return true;
}

void require_same_precision(const char* where, Precision a, Precision b) {
  if (a != b) throw PrecisionMismatch(where, a.bits(), b.bits());
}

void require_compatible(const char* where, const MPVector& a, const MPVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch(where, a.size(), b.size());
  require_same_precision(where, a.precision(), b.precision());
}

MPScalar dot(const MPVector& a, const MPVector& b) {
  require_compatible("dot", a, b);
  MPScalar acc(a.precision());
  for (std::size_t k = 0; k < a.size(); ++k) {
    mpfr_fma(acc.get(), a[k].get(), b[k].get(), acc.get(), kRound);
  }
  return acc;
}

MPScalar norm2(const MPVector& a) { return sqrt(dot(a, a)); }

MPVector axpy(const MPScalar& alpha, const MPVector& x, const MPVector& y) {
  MPVector out = y;
  axpy_inplace(alpha, x, out);
  return out;
}

void axpy_inplace(const MPScalar& alpha, const MPVector& x, MPVector& y) {
  require_compatible("axpy", x, y);
  require_same_precision("axpy", alpha.precision(), x.precision());
  for (std::size_t k = 0; k < x.size(); ++k) {
    mpfr_fma(y[k].get(), alpha.get(), x[k].get(), y[k].get(), kRound);
  }
}

void xpby_inplace(const MPVector& x, const MPScalar& beta, MPVector& y) {
  require_compatible("xpby", x, y);
  require_same_precision("xpby", beta.precision(), x.precision());
  for (std::size_t k = 0; k < x.size(); ++k) {
    mpfr_fma(y[k].get(), beta.get(), y[k].get(), x[k].get(), kRound);
  }
}

void sub_into(const MPVector& a, const MPVector& b, MPVector& out) {
  require_compatible("sub", a, b);
  require_compatible("sub", a, out);
  for (std::size_t k = 0; k < a.size(); ++k) mpfr_sub(out[k].get(), a[k].get(), b[k].get(), kRound);
}

void add_into(const MPVector& a, const MPVector& b, MPVector& out) {
  require_compatible("add", a, b);
  require_compatible("add", a, out);
  for (std::size_t k = 0; k < a.size(); ++k) mpfr_add(out[k].get(), a[k].get(), b[k].get(), kRound);
}

void scale_inplace(const MPScalar& alpha, MPVector& x) {
  require_same_precision("scale", alpha.precision(), x.precision());
  for (auto& e : x) mpfr_mul(e.get(), e.get(), alpha.get(), kRound);
}

bool all_finite(const MPVector& x) noexcept {
  for (const auto& e : x) {
    if (!e.is_finite()) return false;
  }
  return true;
}

}  // namespace mpk
