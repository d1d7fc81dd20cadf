#pragma once

// Timing harness: dense MV vs SpMV on sparsified Lotkin matrices, and the
// scalar multiplication micro-benchmark.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace mpk {

struct BenchRecord {
  std::size_t n = 0;
  double sparsity_percent = 0.0;
  long precision_bits = 0;
  double dense_seconds = 0.0;   // median over trials
  double sparse_seconds = 0.0;  // median over trials
  double speedup_ratio = 0.0;   // dense_seconds / sparse_seconds
  int trials = 0;
  std::size_t nnz = 0;
  std::vector<double> dense_samples;
  std::vector<double> sparse_samples;
};

/// Dense and sparse products disagreed before timing.
class BenchVerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpmvBenchGrid {
  std::vector<std::size_t> sizes;
  std::vector<double> sparsities;
  std::vector<long> precisions;
};

/// One (n, s, p) cell. b = A [1..n]^T by SpMV, then A b is timed both ways
/// after a bitwise agreement check and one warm-up pass.
BenchRecord bench_spmv_cell(std::size_t n, double sparsity_percent, long precision_bits, int trials,
                            std::uint64_t seed);
/// Cross product of the grid, in n-major, then s, then p order.
std::vector<BenchRecord> spmv_bench(const SpmvBenchGrid& grid, int trials, std::uint64_t seed);

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);
/// Raw per-trial samples, one line per record.
void write_bench_samples(std::ostream& out, std::span<const BenchRecord> records);

/// ceil(digits10 * 3.3322)
long digits_to_bits(long digits10);

struct ScalarBenchResult {
  long digits10 = 0;
  long full_bits = 0;
  long half_bits = 0;
  double full_mul_s = 0.0;  // x*y, median seconds per multiplication
  double half_mul_s = 0.0;  // half_x*half_y
  double zero_mul_s = 0.0;  // 0*x at full precision
  int trials = 0;
};

ScalarBenchResult scalar_microbench(long digits10, int trials);
void write_scalar_csv(std::ostream& out, const ScalarBenchResult& r);

/// Median of the samples (mean of the two middle values for even counts).
double median(std::vector<double> samples);

}  // namespace mpk
