#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "mpkrylov/bench.hpp"
#include "mpkrylov/errors.hpp"

using namespace mpk;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("median") {
  CHECK(median({}) == 0.0);
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}

TEST_CASE("digits to bits") {
  CHECK(digits_to_bits(10000) == 33322);
  CHECK(digits_to_bits(5000) == 16661);
  CHECK(digits_to_bits(100) == 334);
  CHECK(digits_to_bits(1) == 4);
}

TEST_CASE("single SpMV cell") {
  const BenchRecord r = bench_spmv_cell(100, 0.0, 256, 3, 1);
  CHECK(r.n == 100);
  CHECK(r.sparsity_percent == 0.0);
  CHECK(r.precision_bits == 256);
  CHECK(r.trials == 3);
  CHECK(r.nnz == 10000);
  CHECK(r.dense_samples.size() == 3);
  CHECK(r.sparse_samples.size() == 3);
  CHECK(r.dense_seconds > 0.0);
  CHECK(r.sparse_seconds > 0.0);
  CHECK(r.speedup_ratio == doctest::Approx(r.dense_seconds / r.sparse_seconds));
  CHECK(r.dense_seconds == median(r.dense_samples));
  // No zeros removed: both kernels do identical work.
  CHECK(r.speedup_ratio > 0.5);
  CHECK(r.speedup_ratio < 2.0);
}

TEST_CASE("sparse cell is faster and deterministic in its inputs") {
  const BenchRecord a = bench_spmv_cell(300, 90.0, 512, 3, 9);
  const BenchRecord b = bench_spmv_cell(300, 90.0, 512, 3, 9);
  CHECK(a.nnz == 9000);
  CHECK(a.nnz == b.nnz);
  CHECK(a.speedup_ratio > 1.0);
}

TEST_CASE("grid order and CSV") {
  SpmvBenchGrid grid{{20, 30}, {0.0, 50.0}, {64, 128}};
  const std::vector<BenchRecord> recs = spmv_bench(grid, 3, 4);
  REQUIRE(recs.size() == 8);
  CHECK(recs[0].n == 20);
  CHECK(recs[0].sparsity_percent == 0.0);
  CHECK(recs[0].precision_bits == 64);
  CHECK(recs[1].precision_bits == 128);
  CHECK(recs[2].sparsity_percent == 50.0);
  CHECK(recs[4].n == 30);
  CHECK(recs[7].n == 30);
  CHECK(recs[7].sparsity_percent == 50.0);
  CHECK(recs[7].precision_bits == 128);
  CHECK(recs[6].nnz == 450);

  std::ostringstream csv;
  write_bench_csv(csv, recs);
  const auto lines = lines_of(csv.str());
  REQUIRE(lines.size() == 9);
  CHECK(lines[0] == "n,sparsity,prec_bits,dense_s,sparse_s,speedup,trials");
  CHECK(lines[1].rfind("20,0,64,", 0) == 0);
  CHECK(lines[8].rfind("30,50,128,", 0) == 0);
  CHECK(lines[8].substr(lines[8].rfind(',') + 1) == "3");

  std::ostringstream samples;
  write_bench_samples(samples, recs);
  CHECK(lines_of(samples.str()).size() == 8);
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS((void)bench_spmv_cell(10, 0.0, 64, 2, 1), ContractViolation);
  CHECK_THROWS_AS((void)spmv_bench({{10}, {0.0}, {64}}, 1, 1), ContractViolation);
  CHECK_THROWS_AS((void)bench_spmv_cell(10, 100.0, 64, 3, 1), ContractViolation);
  CHECK_THROWS_AS((void)scalar_microbench(99, 3), ContractViolation);
  CHECK_THROWS_AS((void)scalar_microbench(100, 2), ContractViolation);
}

TEST_CASE("scalar micro-benchmark") {
  const ScalarBenchResult r = scalar_microbench(10000, 3);
  CHECK(r.full_bits == 33322);
  CHECK(r.half_bits == 16661);
  CHECK(r.trials == 3);
  CHECK(r.full_mul_s > 0.0);
  CHECK(r.half_mul_s > 0.0);
  CHECK(r.zero_mul_s > 0.0);
  CHECK(r.zero_mul_s < r.full_mul_s);
  WARN(r.half_mul_s < r.full_mul_s);

  std::ostringstream csv;
  write_scalar_csv(csv, r);
  const auto lines = lines_of(csv.str());
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "digits10,full_bits,half_bits,full_mul_s,half_mul_s,zero_mul_s,trials");
  CHECK(lines[1].rfind("10000,33322,16661,", 0) == 0);
}
