#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "mpkrylov/mp_core.hpp"
#include "oracle.hpp"

using namespace mpk;

namespace {

MPVector vec(std::initializer_list<double> v, Precision p) {
  std::vector<double> d(v);
  return MPVector::from_doubles(d, p);
}

std::uint64_t bits_of(double d) { return std::bit_cast<std::uint64_t>(d); }

}  // namespace

TEST_CASE("precision range") {
  CHECK_THROWS_AS(Precision(23), std::invalid_argument);
  CHECK_THROWS_AS(Precision(0), std::invalid_argument);
  CHECK_THROWS_AS(Precision(-512), std::invalid_argument);
  CHECK_THROWS_AS(Precision((1L << 24) + 1), std::invalid_argument);
  CHECK(Precision(24).bits() == 24);
  CHECK(Precision(1L << 24).bits() == (1L << 24));
  CHECK(Precision(512) == Precision(kDefaultPrecisionBits));
  CHECK(Precision(128) < Precision(256));
}

TEST_CASE("scalar construction, copy and move") {
  const Precision p(128);
  MPScalar z(p);
  CHECK(z.is_zero());
  CHECK(z.sign() == 0);
  CHECK(!std::signbit(z.to_double()));

  MPScalar seven(p, -7);
  CHECK(seven.to_double() == -7.0);
  CHECK(seven.precision() == p);

  MPScalar copy(seven);
  CHECK(copy.bit_equal(seven));
  MPScalar moved(std::move(copy));
  CHECK(moved.bit_equal(seven));
  copy = MPScalar(Precision(64), 3);  // moved-from object is assignable
  CHECK(copy.to_double() == 3.0);
  CHECK(copy.precision() == Precision(64));

  MPScalar other(Precision(256), 1);
  other = seven;  // assignment adopts the source precision
  CHECK(other.precision() == p);
  CHECK(other.bit_equal(seven));
}

TEST_CASE("dot of small integers") {
  const Precision p(256);
  CHECK(dot(vec({1, 2, 3}, p), vec({4, 5, 6}, p)).to_double() == 32.0);
  const MPScalar zero = dot(vec({1.5, -2.25, 1e300}, p), MPVector(3, p));
  CHECK(zero.is_zero());
}

TEST_CASE("dot contract violations") {
  const Precision p(128);
  CHECK_THROWS_AS((void)dot(MPVector(3, p), MPVector(4, p)), DimensionMismatch);
  CHECK_THROWS_AS((void)dot(MPVector(3, p), MPVector(3, Precision(256))), PrecisionMismatch);
  CHECK_THROWS_AS((void)axpy(MPScalar(p, 1), MPVector(2, p), MPVector(3, p)), DimensionMismatch);
  CHECK_THROWS_AS((void)axpy(MPScalar(Precision(64), 1), MPVector(2, p), MPVector(2, p)), PrecisionMismatch);
  MPScalar a(p, 1);
  CHECK_THROWS_AS(a += MPScalar(Precision(64), 1), PrecisionMismatch);
  CHECK_THROWS_AS(MPVector(0, p), ContractViolation);
}

TEST_CASE("dot matches the exact rational sum to 2 ulp") {
  std::mt19937_64 rng(11);
  const Precision p(256);
  for (int rep = 0; rep < 20; ++rep) {
    MPVector a(50, p), b(50, p);
    mpq_class exact(0);
    for (std::size_t k = 0; k < 50; ++k) {
      const double x = oracle::random_dyadic(rng, -10, 10);
      const double y = oracle::random_dyadic(rng, -10, 10);
      a[k] = promote(x, p);
      b[k] = promote(y, p);
      exact += oracle::exact_double(x) * oracle::exact_double(y);
    }
    CHECK(oracle::ulp_error(dot(a, b), exact) <= 2.0);
  }
}

TEST_CASE("dot relative error bound n 2^(1-p) on dyadic data") {
  std::mt19937_64 rng(12);
  for (long bits : {53L, 96L, 128L}) {
    const Precision p(bits);
    const std::size_t n = 64;
    MPVector a(n, p), b(n, p);
    mpq_class exact(0);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = std::fabs(oracle::random_dyadic(rng, -9, 10));
      const double y = std::fabs(oracle::random_dyadic(rng, -9, 10));
      a[k] = promote(x, p);
      b[k] = promote(y, p);
      exact += oracle::exact_double(x) * oracle::exact_double(y);
    }
    const mpq_class err = abs(oracle::to_q(dot(a, b)) - exact);
    mpq_class bound = exact * static_cast<long>(n);
    mpz_class two_pow;
    mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, static_cast<unsigned long>(bits - 1));
    bound /= two_pow;
    CHECK(err <= bound);
  }
}

TEST_CASE("dot is deterministic") {
  std::mt19937_64 rng(13);
  const Precision p(512);
  MPVector a(40, p), b(40, p);
  for (std::size_t k = 0; k < 40; ++k) {
    a[k] = MPScalar(p, 1) / MPScalar(p, static_cast<long>(k + 3));
    b[k] = promote(oracle::random_dyadic(rng, -5, 5), p);
  }
  const MPScalar first = dot(a, b);
  for (int i = 0; i < 5; ++i) CHECK(dot(a, b).bit_equal(first));
}

TEST_CASE("norm2") {
  const Precision p(512);
  CHECK(norm2(vec({3, 4}, p)).to_double() == 5.0);
  const MPScalar z = norm2(MPVector(7, p));
  CHECK(z.is_zero());
  MPVector ones(100, p);
  for (auto& e : ones) e = MPScalar(p, 1);
  CHECK(oracle::ulp_error(norm2(ones), mpq_class(10)) <= 2.0);
  CHECK(norm2(vec({-3, 0, 4}, p)).sign() == 1);
  // Tiny but nonzero stays nonzero.
  MPVector tiny(1, p);
  tiny[0] = MPScalar::pow2(-4000, p);
  CHECK(norm2(tiny).bit_equal(MPScalar::pow2(-4000, p)));
}

TEST_CASE("axpy") {
  const Precision p(128);
  const MPVector x = vec({1, 1}, p);
  const MPVector y = vec({0.1, -7.5}, p);
  CHECK(axpy(MPScalar(p), x, y).bit_equal(y));
  CHECK(axpy(MPScalar(p, 1), y, MPVector(2, p)).bit_equal(y));

  const MPScalar third = MPScalar(p, 1) / MPScalar(p, 3);
  const MPVector r = axpy(third, vec({1, 1}, p), vec({1, 2}, p));
  const mpq_class t = oracle::to_q(third);
  CHECK(oracle::ulp_error(r[0], t + 1) <= 1.0);
  CHECK(oracle::ulp_error(r[1], t + 2) <= 1.0);
  // Against the true 4/3 and 7/3 the single rounding stays within an ulp too.
  CHECK(oracle::ulp_error(r[0], mpq_class(4, 3)) <= 1.0);
  CHECK(oracle::ulp_error(r[1], mpq_class(7, 3)) <= 1.0);
}

TEST_CASE("in-place vector kernels") {
  const Precision p(96);
  MPVector y = vec({1, 2, 3}, p);
  axpy_inplace(MPScalar(p, 2), vec({1, 1, 1}, p), y);
  CHECK(y.bit_equal(vec({3, 4, 5}, p)));
  xpby_inplace(vec({1, 0, -1}, p), MPScalar(p, -1), y);
  CHECK(y.bit_equal(vec({-2, -4, -6}, p)));
  MPVector out(3, p);
  sub_into(vec({5, 5, 5}, p), vec({1, 2, 3}, p), out);
  CHECK(out.bit_equal(vec({4, 3, 2}, p)));
  add_into(vec({5, 5, 5}, p), vec({1, 2, 3}, p), out);
  CHECK(out.bit_equal(vec({6, 7, 8}, p)));
  scale_inplace(MPScalar(p, -2), out);
  CHECK(out.bit_equal(vec({-12, -14, -16}, p)));
  CHECK(all_finite(out));
  out[1] = MPScalar(p, 1) / MPScalar(p);
  CHECK(!all_finite(out));
  out.set_zero();
  CHECK(out.bit_equal(MPVector(3, p)));
  CHECK_THROWS_AS(sub_into(vec({1}, p), vec({1, 2}, p), out), DimensionMismatch);
}

TEST_CASE("promote embeds binary64 exactly") {
  const Precision p(512);
  CHECK(oracle::to_q(promote(0.5, p)) == mpq_class(1, 2));
  // 0.1 is the nearest binary64, not decimal one tenth.
  const MPScalar tenth = promote(0.1, p);
  CHECK(oracle::to_q(tenth) == oracle::exact_double(0.1));
  CHECK(oracle::to_q(tenth) != mpq_class(1, 10));
  CHECK(!tenth.bit_equal(MPScalar::from_string("0.1", p)));

  // binary64 1/3 at 128 bits: same 53 leading mantissa bits, then zeros.
  const double third = 1.0 / 3.0;
  const MPScalar t = promote(third, Precision(128));
  mpz_class mant;
  const mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), t.get());
  int de = 0;
  const double frac = std::frexp(third, &de);
  const auto m53 = static_cast<long>(std::ldexp(frac, 53));
  mpz_class expect(m53);
  expect <<= 128 - 53;
  CHECK(mant == expect);
  CHECK(e == de - 128);
}

TEST_CASE("promote below 53 bits rounds to nearest even") {
  const Precision p(24);
  const double d = 1.0 + std::ldexp(1.0, -24);  // exactly halfway
  CHECK(promote(d, p).to_double() == 1.0);
  const double d2 = 1.0 + 3 * std::ldexp(1.0, -24);
  CHECK(promote(d2, p).to_double() == 1.0 + std::ldexp(1.0, -22));
}

TEST_CASE("promote rejects non-finite input") {
  const Precision p(64);
  CHECK_THROWS_AS((void)promote(std::numeric_limits<double>::quiet_NaN(), p), std::invalid_argument);
  CHECK_THROWS_AS((void)promote(std::numeric_limits<double>::infinity(), p), std::invalid_argument);
  CHECK_THROWS_AS((void)promote(-std::numeric_limits<double>::infinity(), p), std::invalid_argument);
}

TEST_CASE("demote(promote(d)) is the identity on binary64") {
  std::mt19937_64 rng(99);
  std::vector<double> samples = {0.0, -0.0, 1.0, -1.0, 0.1, 1e308, -1e-308,
                                 std::numeric_limits<double>::denorm_min(),
                                 std::numeric_limits<double>::max(), std::numeric_limits<double>::min()};
  for (int i = 0; i < 2000; ++i) {
    double d;
    do {
      d = std::bit_cast<double>(rng());
    } while (!std::isfinite(d));
    samples.push_back(d);
  }
  for (long bits : {53L, 64L, 512L}) {
    for (double d : samples) {
      const double back = demote(promote(d, Precision(bits)));
      REQUIRE(bits_of(back) == bits_of(d));
    }
  }
}

TEST_CASE("zero algebra") {
  for (long bits : {24L, 113L, 1024L}) {
    const Precision p(bits);
    const MPScalar x = MPScalar(p, 22) / MPScalar(p, 7);
    const MPScalar z(p);
    CHECK((x + z).bit_equal(x));
    CHECK((z + x).bit_equal(x));
    CHECK((x * z).is_zero());
    CHECK((x - x).is_zero());
  }
}

TEST_CASE("special values") {
  const Precision p(128);
  const MPScalar one(p, 1), zero(p);
  const MPScalar inf = one / zero;
  const MPScalar nan = zero / zero;
  CHECK(inf.is_inf());
  CHECK(!inf.is_finite());
  CHECK(inf.sign() == 1);
  CHECK((-inf).sign() == -1);
  CHECK(nan.is_nan());
  CHECK(nan.sign() == 0);
  CHECK(!(nan == nan));
  CHECK((nan <=> one) == std::partial_ordering::unordered);
  CHECK(nan.bit_equal(nan));
  CHECK(one < inf);
  CHECK(sqrt(-one).is_nan());
  // Signed zeros compare equal but are not bit-identical.
  CHECK(zero == -zero);
  CHECK(!zero.bit_equal(-zero));
}

TEST_CASE("scalar arithmetic is correctly rounded") {
  const Precision p(200);
  const MPScalar two(p, 2);
  const MPScalar r = sqrt(two);
  mpfr_t ref;
  mpfr_init2(ref, 200);
  mpfr_set_ui(ref, 2, MPFR_RNDN);
  mpfr_sqrt(ref, ref, MPFR_RNDN);
  CHECK(mpfr_equal_p(ref, r.get()));
  mpfr_clear(ref);
  // (1/3) measured against the exact rational.
  CHECK(oracle::ulp_error(MPScalar(p, 1) / MPScalar(p, 3), mpq_class(1, 3)) <= 0.5);
  CHECK(abs(MPScalar(p, -4)).bit_equal(MPScalar(p, 4)));
  CHECK((MPScalar(p, 6) * MPScalar(p, 7)).to_double() == 42.0);
  CHECK((MPScalar(p, 6) - MPScalar(p, 7)).to_double() == -1.0);
}

TEST_CASE("decimal parsing rounds once") {
  // 1 + 2^-24 + 2^-60: rounding straight to 24 bits gives 1 + 2^-23, whereas
  // going through binary64 first lands on the tie 1 + 2^-24 and then on 1.
  const char* trap = "1.000000059604644776257986737988403547205962240695953369140625";
  const Precision p(24);
  const MPScalar direct = MPScalar::from_string(trap, p);
  CHECK(direct.to_double() == 1.0 + std::ldexp(1.0, -23));
  const MPScalar via_double = promote(std::strtod(trap, nullptr), p);
  CHECK(via_double.to_double() == 1.0);

  CHECK(MPScalar::from_string("-2.5e-3", Precision(53)).to_double() == -2.5e-3);
  CHECK(MPScalar::from_string("  42", Precision(53)).to_double() == 42.0);
  CHECK_THROWS_AS((void)MPScalar::from_string("", p), std::invalid_argument);
  CHECK_THROWS_AS((void)MPScalar::from_string("1.5x", p), std::invalid_argument);
  CHECK_THROWS_AS((void)MPScalar::from_string("abc", p), std::invalid_argument);
}

TEST_CASE("pow2 and to_string") {
  const Precision p(64);
  CHECK(MPScalar::pow2(-3, p).to_double() == 0.125);
  CHECK(MPScalar::pow2(10, p).to_double() == 1024.0);
  CHECK(MPScalar(p, 1234).to_string(4) == "1.234e+03");
  CHECK((MPScalar(p, 1) / MPScalar(p, 3)).to_string(5) == "3.3333e-01");
}
