#include "mpkrylov/bench.hpp"

#include <gmp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "mpkrylov/matrices.hpp"

namespace mpk {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kMinSampleSeconds = 2e-3;

template <class F>
double time_once(F&& f, std::size_t reps) {
  const auto t0 = Clock::now();
  for (std::size_t r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Repetitions needed for one sample of `f` to last at least kMinSampleSeconds.
template <class F>
std::size_t calibrate(F&& f) {
  std::size_t reps = 1;
  while (reps < (std::size_t{1} << 24)) {
    const double t = time_once(f, reps);
    if (t >= kMinSampleSeconds) break;
    const double grow = t > 0.0 ? std::ceil(kMinSampleSeconds / t * 1.2) : 16.0;
    reps = static_cast<std::size_t>(static_cast<double>(reps) * std::clamp(grow, 2.0, 64.0));
  }
  return reps;
}

template <class F>
std::vector<double> sample(F&& f, std::size_t reps, int trials) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) out.push_back(time_once(f, reps) / static_cast<double>(reps));
  return out;
}

void require_trials(int trials) {
  if (trials < 3) throw ContractViolation("benchmark trials must be at least 3");
}

}  // namespace

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[m] : 0.5 * (samples[m - 1] + samples[m]);
}

BenchRecord bench_spmv_cell(std::size_t n, double sparsity_percent, long precision_bits, int trials,
                            std::uint64_t seed) {
  require_trials(trials);
  const Precision prec(precision_bits);
  // Only one dense n x n matrix is alive at a time.
  const CsrMatrix sparse = sparsify(gen_lotkin(n, prec), sparsity_percent, seed);
  const DenseMatrix dense = to_dense(sparse);

  MPVector ramp(n, prec);
  for (std::size_t i = 0; i < n; ++i) mpfr_set_ui(ramp[i].get(), static_cast<unsigned long>(i + 1), kRound);
  const MPVector b = spmv(sparse, ramp);

  MPVector y_dense(n, prec);
  MPVector y_sparse(n, prec);
  dense_mv_into(dense, b, y_dense);
  spmv_into(sparse, b, y_sparse);
  if (!y_dense.bit_equal(y_sparse)) {
    throw BenchVerificationError("dense and sparse products differ for n=" + std::to_string(n) +
                                 " s=" + std::to_string(sparsity_percent) + " p=" + std::to_string(precision_bits));
  }

  auto dense_op = [&] { dense_mv_into(dense, b, y_dense); };
  auto sparse_op = [&] { spmv_into(sparse, b, y_sparse); };
  // Warm-up doubles as calibration; both kernels use the same repetition count.
  const std::size_t reps = calibrate(sparse_op);
  dense_op();

  BenchRecord rec;
  rec.n = n;
  rec.sparsity_percent = sparsity_percent;
  rec.precision_bits = precision_bits;
  rec.trials = trials;
  rec.nnz = sparse.nnz();
  rec.dense_samples = sample(dense_op, reps, trials);
  rec.sparse_samples = sample(sparse_op, reps, trials);
  rec.dense_seconds = median(rec.dense_samples);
  rec.sparse_seconds = median(rec.sparse_samples);
  rec.speedup_ratio = rec.dense_seconds / rec.sparse_seconds;
  return rec;
}

std::vector<BenchRecord> spmv_bench(const SpmvBenchGrid& grid, int trials, std::uint64_t seed) {
  require_trials(trials);
  std::vector<BenchRecord> out;
  for (std::size_t n : grid.sizes) {
    for (double s : grid.sparsities) {
      for (long p : grid.precisions) out.push_back(bench_spmv_cell(n, s, p, trials, seed));
    }
  }
  return out;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "n,sparsity,prec_bits,dense_s,sparse_s,speedup,trials\n";
  const auto flags = out.flags();
  const auto precision = out.precision();
  for (const auto& r : records) {
    out << r.n << ',' << std::defaultfloat << std::setprecision(6) << r.sparsity_percent << ','
        << r.precision_bits << ',' << std::scientific << std::setprecision(6) << r.dense_seconds << ','
        << r.sparse_seconds << ',' << std::fixed << std::setprecision(4) << r.speedup_ratio << ','
        << r.trials << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void write_bench_samples(std::ostream& out, std::span<const BenchRecord> records) {
  const auto flags = out.flags();
  for (const auto& r : records) {
    out.flags(flags);
    out << "n=" << r.n << " s=" << r.sparsity_percent << " p=" << r.precision_bits << " nnz=" << r.nnz
        << std::scientific << std::setprecision(6) << " dense:";
    for (double t : r.dense_samples) out << ' ' << t;
    out << " sparse:";
    for (double t : r.sparse_samples) out << ' ' << t;
    out << '\n';
  }
  out.flags(flags);
}

long digits_to_bits(long digits10) {
  return static_cast<long>(std::ceil(static_cast<double>(digits10) * 3.3322));
}

ScalarBenchResult scalar_microbench(long digits10, int trials) {
  if (digits10 < 100) throw ContractViolation("scalar_microbench: digits10 must be at least 100");
  require_trials(trials);

  ScalarBenchResult res;
  res.digits10 = digits10;
  res.full_bits = digits_to_bits(digits10);
  res.half_bits = digits_to_bits(digits10 / 2);
  res.trials = trials;
  const Precision full(res.full_bits);
  const Precision half(res.half_bits);

  gmp_randstate_t state;
  gmp_randinit_default(state);
  gmp_randseed_ui(state, 20110601UL);
  MPScalar x(full), y(full), hx(half), hy(half), zero(full), out_full(full), out_half(half);
  mpfr_urandomb(x.get(), state);
  mpfr_urandomb(y.get(), state);
  mpfr_urandomb(hx.get(), state);
  mpfr_urandomb(hy.get(), state);
  gmp_randclear(state);

  auto mul_full = [&] { mpfr_mul(out_full.get(), x.get(), y.get(), kRound); };
  auto mul_half = [&] { mpfr_mul(out_half.get(), hx.get(), hy.get(), kRound); };
  auto mul_zero = [&] { mpfr_mul(out_full.get(), zero.get(), x.get(), kRound); };

  res.full_mul_s = median(sample(mul_full, calibrate(mul_full), trials));
  res.half_mul_s = median(sample(mul_half, calibrate(mul_half), trials));
  res.zero_mul_s = median(sample(mul_zero, calibrate(mul_zero), trials));
  return res;
}

void write_scalar_csv(std::ostream& out, const ScalarBenchResult& r) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "digits10,full_bits,half_bits,full_mul_s,half_mul_s,zero_mul_s,trials\n";
  out << r.digits10 << ',' << r.full_bits << ',' << r.half_bits << ',' << std::scientific
      << std::setprecision(6) << r.full_mul_s << ',' << r.half_mul_s << ',' << r.zero_mul_s << ','
      << r.trials << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mpk
