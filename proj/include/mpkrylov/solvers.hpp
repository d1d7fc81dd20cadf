#pragma once

// Product-type Krylov subspace solvers: BiCG, CGS, BiCGSTAB and GPBiCG.
//
// All four track the unpreconditioned residual r = b - A x by recurrence and
// stop when ||r_k||_2 <= rel_tol * ||r_0||_2 + abs_tol.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpkrylov/operator.hpp"

namespace mpk {

enum class Method { BiCG, CGS, BiCGSTAB, GPBiCG };
enum class PreconditionerKind { None, Ilu0 };

enum class SolveStatus {
  Converged,
  NotConvergent,  // a scalar or the residual became NaN/Inf
  Breakdown,      // exact zero of rho, omega, tau or zeta
  MaxIterExceeded,
};

std::string_view to_string(Method m) noexcept;
std::string_view to_string(SolveStatus s) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

/// Called after every completed iteration with the current iterate and the
/// recursively updated residual.
using IterationObserver = std::function<void(std::size_t iteration, const MPVector& x, const MPVector& r)>;

struct SolverConfig {
  Method method = Method::BiCG;
  Precision precision{kDefaultPrecisionBits};
  MPScalar rel_tol{Precision{kDefaultPrecisionBits}};
  MPScalar abs_tol{Precision{kDefaultPrecisionBits}};
  /// 0 selects min(10 n, 100000).
  std::size_t max_iter = 0;
  PreconditionerKind preconditioner = PreconditionerKind::None;
  IterationObserver observer;

  /// rel_tol = 1e-20, abs_tol = 1e-50, both rounded at `prec`.
  static SolverConfig defaults(Method method, Precision prec);
  [[nodiscard]] std::size_t iteration_limit(std::size_t n) const noexcept;
  /// Throws ContractViolation on non-positive tolerances or precision mismatch.
  void validate() const;
};

struct HistoryPoint {
  std::size_t iteration;
  MPScalar relres;  // ||r_k|| / ||r_0||, 0 when r_0 = 0
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterExceeded;
  std::size_t iterations = 0;
  std::vector<HistoryPoint> residual_history;
  double wall_time_seconds = 0.0;
  MPScalar initial_residual{Precision{kDefaultPrecisionBits}};
  /// ||b - A x||_2 recomputed from the returned solution.
  MPScalar final_true_residual{Precision{kDefaultPrecisionBits}};
  /// ||K^-1 (b - A x)||_2; equals final_true_residual when K = I.
  MPScalar final_preconditioned_residual{Precision{kDefaultPrecisionBits}};
  MPVector solution{1, Precision{kDefaultPrecisionBits}};
  std::string detail;

  [[nodiscard]] bool converged() const noexcept { return status == SolveStatus::Converged; }
};

bool check_convergence(const MPScalar& rk_norm, const MPScalar& r0_norm, const SolverConfig& cfg);
bool check_convergence(const MPVector& rk, const MPScalar& r0_norm, const SolverConfig& cfg);

SolveReport solve_bicg(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                       const Preconditioner& k, const SolverConfig& cfg);
SolveReport solve_cgs(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                      const Preconditioner& k, const SolverConfig& cfg);
SolveReport solve_bicgstab(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                           const Preconditioner& k, const SolverConfig& cfg);
SolveReport solve_gpbicg(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                         const Preconditioner& k, const SolverConfig& cfg);

/// Dispatches on cfg.method.
SolveReport solve(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                  const Preconditioner& k, const SolverConfig& cfg);

/// Sparse-matrix convenience: x0 = 0, and an ILU(0) factor is built when
/// cfg.preconditioner asks for one (may throw Ilu0Error).
SolveReport solve(const CsrMatrix& a, const MPVector& b, const SolverConfig& cfg);

/// CSV with header `iter,relres`, relres printed with 30 significant digits.
void write_history_csv(std::ostream& out, const SolveReport& report);

}  // namespace mpk
