#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "mpkrylov/bench.hpp"
#include "mpkrylov/matrices.hpp"
#include "mpkrylov/mtx_io.hpp"
#include "mpkrylov/precond.hpp"
#include "mpkrylov/solvers.hpp"

namespace mpk::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  // getline swallows a trailing separator, so "128," would otherwise pass.
  if (!text.empty() && text.back() == ',') throw UsageError("empty element in list '" + text + "'");
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw UsageError("empty element in list '" + text + "'");
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

long to_long(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + " '" + s + "'");
  }
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + what + " '" + s + "'");
  }
}

Precision to_precision(long bits) {
  try {
    return Precision(bits);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<Precision> precision_list(const std::string& text) {
  std::vector<Precision> out;
  for (const auto& item : split_list(text)) out.push_back(to_precision(to_long(item, "precision")));
  return out;
}

std::filesystem::path history_path(const std::string& base, long bits, bool multiple) {
  if (!multiple) return base;
  std::filesystem::path p(base);
  std::filesystem::path name = p.stem();
  name += "_p" + std::to_string(bits);
  name += p.extension();
  return p.parent_path() / name;
}

MPVector read_rhs(const std::string& path, std::size_t n, Precision prec) {
  std::ifstream in(path);
  if (!in) throw MtxParseError(MtxErrorKind::Io, 0, "cannot open right-hand side '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  MPVector b(n, prec);
  if (text.rfind("%%MatrixMarket", 0) == 0) {
    std::istringstream ss(text);
    const CsrMatrix m = read_mtx(ss, prec);
    if (m.rows() != n || m.cols() != 1) throw UsageError("right-hand side must be an " + std::to_string(n) + " x 1 matrix");
    const auto rp = m.row_ptr();
    for (std::size_t i = 0; i < n; ++i) {
      if (rp[i + 1] > rp[i]) b[i] = m.values()[rp[i]];
    }
    return b;
  }
  std::istringstream ss(text);
  std::string tok;
  std::size_t i = 0;
  while (ss >> tok) {
    if (i >= n) throw UsageError("right-hand side has more than " + std::to_string(n) + " values");
    try {
      b[i++] = MPScalar::from_string(tok, prec);
    } catch (const std::invalid_argument&) {
      throw UsageError("right-hand side value '" + tok + "' is not a number");
    }
  }
  if (i != n) throw UsageError("right-hand side has " + std::to_string(i) + " values, expected " + std::to_string(n));
  return b;
}

struct SolveOptions {
  std::string matrix;
  std::string method;
  std::string prec;
  std::string precond = "none";
  std::optional<std::string> rtol;
  std::optional<std::string> atol;
  std::size_t max_iter = 0;
  std::string rhs = "synthetic";
  std::string history;
  std::string x0 = "zero";
};

int cmd_solve(const SolveOptions& opt, std::ostream& out) {
  const auto method = parse_method(opt.method);
  if (!method) throw UsageError("unknown method '" + opt.method + "' (bicg, cgs, bicgstab, gpbicg)");
  PreconditionerKind pk = PreconditionerKind::None;
  if (opt.precond == "ilu0") {
    pk = PreconditionerKind::Ilu0;
  } else if (opt.precond != "none") {
    throw UsageError("unknown preconditioner '" + opt.precond + "' (none, ilu0)");
  }
  if (opt.x0 != "zero") throw UsageError("only --x0 zero is supported");
  const auto precs = precision_list(opt.prec);
  const bool synthetic = opt.rhs == "synthetic";

  bool all_converged = true;
  for (const Precision prec : precs) {
    const CsrMatrix a = read_mtx_file(opt.matrix, prec);
    if (a.rows() != a.cols()) throw UsageError("matrix must be square");
    const std::size_t n = a.rows();

    MPVector truth(n, prec);
    for (std::size_t i = 0; i < n; ++i) mpfr_set_ui(truth[i].get(), static_cast<unsigned long>(i + 1), kRound);
    const MPVector b = synthetic ? spmv(a, truth) : read_rhs(opt.rhs, n, prec);

    SolverConfig cfg = SolverConfig::defaults(*method, prec);
    cfg.preconditioner = pk;
    cfg.max_iter = opt.max_iter;
    try {
      if (opt.rtol) cfg.rel_tol = MPScalar::from_string(*opt.rtol, prec);
      if (opt.atol) cfg.abs_tol = MPScalar::from_string(*opt.atol, prec);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("tolerance: ") + e.what());
    }

    const SolveReport rep = solve(a, b, cfg);

    MPScalar relres(prec);
    if (!rep.initial_residual.is_zero()) {
      mpfr_div(relres.get(), rep.final_true_residual.get(), rep.initial_residual.get(), kRound);
    }
    out << "matrix: " << opt.matrix << " (n=" << n << ", nnz=" << a.nnz() << ")\n";
    out << "method: " << to_string(*method) << "  precond: " << opt.precond << "  prec_bits: " << prec.bits() << '\n';
    out << "  status: " << to_string(rep.status) << '\n';
    out << "  iterations: " << rep.iterations << '\n';
    out << "  wall_seconds: " << std::fixed << std::setprecision(3) << rep.wall_time_seconds << std::defaultfloat << '\n';
    out << "  true_relative_residual: " << relres.to_string(6) << '\n';
    if (pk == PreconditionerKind::Ilu0) {
      out << "  preconditioned_residual: " << rep.final_preconditioned_residual.to_string(6) << '\n';
    }
    if (synthetic) {
      MPScalar worst(prec);
      for (std::size_t i = 0; i < n; ++i) {
        const MPScalar e = abs(rep.solution[i] - truth[i]);
        if (e > worst || e.is_nan()) worst = e;
      }
      out << "  max_abs_error: " << worst.to_string(6) << '\n';
    }
    if (!rep.detail.empty()) out << "  detail: " << rep.detail << '\n';

    if (!opt.history.empty()) {
      const auto path = history_path(opt.history, prec.bits(), precs.size() > 1);
      std::ofstream h(path);
      if (!h) throw MtxParseError(MtxErrorKind::Io, 0, "cannot write history '" + path.string() + "'");
      write_history_csv(h, rep);
      out << "  history: " << path.string() << '\n';
    }
    all_converged = all_converged && rep.converged();
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

struct BenchSpmvOptions {
  std::string n = "100";
  std::string sparsity = "90";
  std::string prec;
  int trials = 5;
  std::uint64_t seed = 1;
  std::string out;
  bool verbose = false;
};

int cmd_bench_spmv(const BenchSpmvOptions& opt, std::ostream& out, std::ostream& err) {
  SpmvBenchGrid grid;
  for (const auto& s : split_list(opt.n)) {
    const long n = to_long(s, "size");
    if (n < 1) throw UsageError("matrix size must be positive");
    grid.sizes.push_back(static_cast<std::size_t>(n));
  }
  for (const auto& s : split_list(opt.sparsity)) {
    const double v = to_double(s, "sparsity");
    if (!(v >= 0.0 && v < 100.0)) throw UsageError("sparsity must be in [0, 100)");
    grid.sparsities.push_back(v);
  }
  for (const Precision p : precision_list(opt.prec)) grid.precisions.push_back(p.bits());
  if (opt.trials < 3) throw UsageError("--trials must be at least 3");

  const auto records = spmv_bench(grid, opt.trials, opt.seed);
  if (opt.out.empty()) {
    write_bench_csv(out, records);
  } else {
    std::ofstream f(opt.out);
    if (!f) throw MtxParseError(MtxErrorKind::Io, 0, "cannot write '" + opt.out + "'");
    write_bench_csv(f, records);
  }
  if (opt.verbose) write_bench_samples(err, records);
  return kExitOk;
}

int cmd_bench_scalar(long digits, int trials, const std::string& path, std::ostream& out) {
  if (digits < 100) throw UsageError("--digits must be at least 100");
  if (trials < 3) throw UsageError("--trials must be at least 3");
  const auto res = scalar_microbench(digits, trials);
  if (path.empty()) {
    write_scalar_csv(out, res);
  } else {
    std::ofstream f(path);
    if (!f) throw MtxParseError(MtxErrorKind::Io, 0, "cannot write '" + path + "'");
    write_scalar_csv(f, res);
  }
  return kExitOk;
}

int cmd_gen_lotkin(long n, double sparsity, std::uint64_t seed, int digits, long prec_bits, const std::string& path,
                   std::ostream& out, std::ostream& err) {
  if (n < 1) throw UsageError("--n must be positive");
  if (!(sparsity >= 0.0 && sparsity < 100.0)) throw UsageError("--sparsity must be in [0, 100)");
  if (digits < 17) throw UsageError("--digits must be at least 17");
  const Precision prec = to_precision(prec_bits);
  const CsrMatrix a = sparsify(gen_lotkin(static_cast<std::size_t>(n), prec), sparsity, seed);
  write_mtx_file(path, a, digits);
  // Decimal text carries about 3.32 bits per digit.
  if (static_cast<double>(digits) * 3.3219 < static_cast<double>(prec.bits())) {
    err << "warning: " << digits << " significant digits do not represent " << prec.bits()
        << "-bit values exactly; regenerate in-process for precision-sensitive use\n";
  }
  out << "wrote " << path << " (n=" << n << ", nnz=" << a.nnz() << ")\n";
  return kExitOk;
}

int cmd_info(const std::string& path, const std::string& prec_list, long header_bytes, std::ostream& out) {
  if (header_bytes < 0) throw UsageError("--header-bytes must be nonnegative");
  const auto precs = precision_list(prec_list);
  const CsrMatrix a = read_mtx_file(path, Precision(64));
  const double cells = static_cast<double>(a.rows()) * static_cast<double>(a.cols());
  const double sparsity = 100.0 * (1.0 - static_cast<double>(a.nnz()) / cells);
  out << "matrix: " << path << '\n';
  out << "rows: " << a.rows() << "  cols: " << a.cols() << '\n';
  out << "n: " << a.rows() << '\n';
  out << "nnz: " << a.nnz() << '\n';
  out << "sparsity_percent: " << std::fixed << std::setprecision(2) << sparsity << std::defaultfloat << '\n';
  for (const Precision p : precs) {
    const auto est = estimate_memory(a.rows(), a.nnz(), p, static_cast<std::uint64_t>(header_bytes));
    out << "prec_bits=" << p.bits() << " header_bytes=" << header_bytes << " dense_bytes=" << est.dense_bytes
        << " sparse_bytes=" << est.sparse_bytes << '\n';
  }
  return kExitOk;
}

}  // namespace

long default_precision_bits() {
  if (const char* env = std::getenv("MPKRYLOV_DEFAULT_PREC")) {
    try {
      std::size_t pos = 0;
      const long bits = std::stol(env, &pos);
      if (pos == std::string(env).size() && bits >= Precision::kMinBits && bits <= Precision::kMaxBits) return bits;
    } catch (const std::exception&) {
    }
  }
  return kDefaultPrecisionBits;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string default_prec = std::to_string(default_precision_bits());

  CLI::App app{"Multiple-precision sparse matrix tools and Krylov solvers", "mpkrylov"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  solve_opt.prec = default_prec;
  auto* solve = app.add_subcommand("solve", "Solve A x = b read from a Matrix Market file");
  solve->add_option("--matrix", solve_opt.matrix, "Matrix Market file")->required();
  solve->add_option("--method", solve_opt.method, "bicg | cgs | bicgstab | gpbicg")->required();
  solve->add_option("--prec", solve_opt.prec, "Precision in bits; comma-separated list sweeps");
  solve->add_option("--precond", solve_opt.precond, "none | ilu0");
  solve->add_option("--rtol", solve_opt.rtol, "Relative tolerance (default 1e-20)");
  solve->add_option("--atol", solve_opt.atol, "Absolute tolerance (default 1e-50)");
  solve->add_option("--max-iter", solve_opt.max_iter, "Iteration cap (default min(10n, 100000))");
  solve->add_option("--rhs", solve_opt.rhs, "'synthetic' (b = A [1..n]^T) or a file");
  solve->add_option("--history", solve_opt.history, "Residual history CSV output");
  solve->add_option("--x0", solve_opt.x0, "Initial guess (zero)");

  BenchSpmvOptions bench_opt;
  bench_opt.prec = default_prec;
  auto* bench = app.add_subcommand("bench-spmv", "Dense MV vs SpMV on sparsified Lotkin matrices");
  bench->add_option("--n", bench_opt.n, "Matrix sizes, comma-separated");
  bench->add_option("--sparsity", bench_opt.sparsity, "Zero percentages, comma-separated");
  bench->add_option("--prec", bench_opt.prec, "Precisions in bits, comma-separated");
  bench->add_option("--trials", bench_opt.trials, "Timed trials per cell (>= 3)");
  bench->add_option("--seed", bench_opt.seed, "Sparsification seed");
  bench->add_option("--out", bench_opt.out, "CSV output file (default stdout)");
  bench->add_flag("--verbose", bench_opt.verbose, "Print raw samples to stderr");

  long scalar_digits = 10000;
  int scalar_trials = 5;
  std::string scalar_out;
  auto* scalar = app.add_subcommand("bench-scalar", "x*y vs half-digit vs 0*x multiplication timing");
  scalar->add_option("--digits", scalar_digits, "Decimal digits of x and y (>= 100)");
  scalar->add_option("--trials", scalar_trials, "Timed trials (>= 3)");
  scalar->add_option("--out", scalar_out, "CSV output file (default stdout)");

  long gen_n = 0;
  double gen_s = 0.0;
  std::uint64_t gen_seed = 1;
  int gen_digits = 17;
  long gen_prec = default_precision_bits();
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-lotkin", "Write a sparsified Lotkin matrix as Matrix Market");
  gen->add_option("--n", gen_n, "Dimension")->required();
  gen->add_option("--sparsity", gen_s, "Percentage of zeroed entries");
  gen->add_option("--seed", gen_seed, "Sparsification seed");
  gen->add_option("--digits", gen_digits, "Significant digits per value (>= 17)");
  gen->add_option("--prec", gen_prec, "Generation precision in bits");
  gen->add_option("--out", gen_out, "Output .mtx path")->required();

  std::string info_matrix;
  std::string info_prec = default_prec;
  long info_header = 32;
  auto* info = app.add_subcommand("info", "Dimensions, sparsity and storage estimates");
  info->add_option("--matrix", info_matrix, "Matrix Market file")->required();
  info->add_option("--prec", info_prec, "Precisions in bits, comma-separated");
  info->add_option("--header-bytes", info_header, "Per-scalar header bytes in the estimate");

  std::vector<const char*> argv;
  argv.push_back("mpkrylov");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return cmd_solve(solve_opt, out);
    if (*bench) return cmd_bench_spmv(bench_opt, out, err);
    if (*scalar) return cmd_bench_scalar(scalar_digits, scalar_trials, scalar_out, out);
    if (*gen) return cmd_gen_lotkin(gen_n, gen_s, gen_seed, gen_digits, gen_prec, gen_out, out, err);
    if (*info) return cmd_info(info_matrix, info_prec, info_header, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
  } catch (const MtxParseError& e) {
    err << (e.kind() == MtxErrorKind::Io ? "I/O error: " : "parse error: ") << e.what() << '\n';
  } catch (const Ilu0Error& e) {
    err << "preconditioner error: " << e.what() << '\n';
  } catch (const BenchVerificationError& e) {
    err << "verification failed: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace mpk::cli
