#include "mpkrylov/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <utility>

#include "mpkrylov/precond.hpp"

namespace mpk {

namespace {

using Clock = std::chrono::steady_clock;

// Residual bookkeeping shared by every method: the initial residual, the
// history, and the final true-residual recomputation.
class SolveTracker {
 public:
  SolveTracker(const LinearOperator& a, const MPVector& b, const MPVector& x0, const Preconditioner& k,
               const SolverConfig& cfg, const char* where)
      : a_(a), b_(b), k_(k), cfg_(cfg), start_(Clock::now()), r0_norm_(cfg.precision), ratio_(cfg.precision) {
    cfg.validate();
    const std::size_t n = a.size();
    if (b.size() != n) throw DimensionMismatch(where, n, b.size());
    if (x0.size() != n) throw DimensionMismatch(where, n, x0.size());
    require_same_precision(where, cfg.precision, a.precision());
    require_same_precision(where, cfg.precision, b.precision());
    require_same_precision(where, cfg.precision, x0.precision());
    report_.initial_residual = MPScalar(cfg.precision);
    report_.final_true_residual = MPScalar(cfg.precision);
    limit_ = cfg.iteration_limit(n);
  }

  [[nodiscard]] std::size_t limit() const noexcept { return limit_; }
  [[nodiscard]] const MPScalar& r0_norm() const noexcept { return r0_norm_; }

  /// r <- b - A x0 and records iteration 0. Returns true when already converged.
  bool start(const MPVector& x0, MPVector& r) {
    a_.apply(x0, r);
    sub_into(b_, r, r);
    r0_norm_ = norm2(r);
    report_.initial_residual = r0_norm_;
    return record(0, r0_norm_);
  }

  /// Appends ||r|| to the history; true when the stopping test passes.
  bool record(std::size_t iteration, const MPVector& r) { return record(iteration, norm2(r)); }

  bool record(std::size_t iteration, const MPScalar& rk_norm) {
    if (r0_norm_.is_zero()) {
      ratio_ = MPScalar(cfg_.precision);
    } else {
      mpfr_div(ratio_.get(), rk_norm.get(), r0_norm_.get(), kRound);
    }
    report_.residual_history.push_back({iteration, ratio_});
    last_finite_ = rk_norm.is_finite();
    return check_convergence(rk_norm, r0_norm_, cfg_);
  }

  [[nodiscard]] bool last_residual_finite() const noexcept { return last_finite_; }

  void observe(std::size_t iteration, const MPVector& x, const MPVector& r) const {
    if (cfg_.observer) cfg_.observer(iteration, x, r);
  }

  SolveReport finish(SolveStatus status, std::size_t iterations, MPVector x, std::string detail = {}) {
    report_.status = status;
    report_.iterations = iterations;
    report_.detail = std::move(detail);
    MPVector r(x.size(), x.precision());
    a_.apply(x, r);
    sub_into(b_, r, r);
    report_.final_true_residual = norm2(r);
    if (k_.is_identity()) {
      report_.final_preconditioned_residual = report_.final_true_residual;
    } else {
      MPVector w(x.size(), x.precision());
      k_.solve(r, w);
      report_.final_preconditioned_residual = norm2(w);
    }
    report_.solution = std::move(x);
    report_.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    return std::move(report_);
  }

 private:
  const LinearOperator& a_;
  const MPVector& b_;
  const Preconditioner& k_;
  const SolverConfig& cfg_;
  Clock::time_point start_;
  MPScalar r0_norm_;
  MPScalar ratio_;
  SolveReport report_;
  std::size_t limit_ = 0;
  bool last_finite_ = true;
};

MPScalar divide(const MPScalar& num, const MPScalar& den) {
  MPScalar q(num.precision());
  mpfr_div(q.get(), num.get(), den.get(), kRound);
  return q;
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::BiCG: return "bicg";
    case Method::CGS: return "cgs";
    case Method::BiCGSTAB: return "bicgstab";
    case Method::GPBiCG: return "gpbicg";
  }
  return "unknown";
}

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::NotConvergent: return "NotConvergent";
    case SolveStatus::Breakdown: return "Breakdown";
    case SolveStatus::MaxIterExceeded: return "MaxIterExceeded";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::BiCG, Method::CGS, Method::BiCGSTAB, Method::GPBiCG}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

SolverConfig SolverConfig::defaults(Method method, Precision prec) {
  SolverConfig cfg;
  cfg.method = method;
  cfg.precision = prec;
  cfg.rel_tol = MPScalar::from_string("1e-20", prec);
  cfg.abs_tol = MPScalar::from_string("1e-50", prec);
  return cfg;
}

std::size_t SolverConfig::iteration_limit(std::size_t n) const noexcept {
  if (max_iter != 0) return max_iter;
  return std::min<std::size_t>(10 * n, 100000);
}

void SolverConfig::validate() const {
  require_same_precision("SolverConfig rel_tol", precision, rel_tol.precision());
  require_same_precision("SolverConfig abs_tol", precision, abs_tol.precision());
  if (!(rel_tol.sign() > 0) || !rel_tol.is_finite()) throw ContractViolation("SolverConfig: rel_tol must be positive");
  if (!(abs_tol.sign() > 0) || !abs_tol.is_finite()) throw ContractViolation("SolverConfig: abs_tol must be positive");
}

bool check_convergence(const MPScalar& rk_norm, const MPScalar& r0_norm, const SolverConfig& cfg) {
  if (!rk_norm.is_finite()) return false;
  MPScalar threshold(cfg.precision);
  mpfr_fma(threshold.get(), cfg.rel_tol.get(), r0_norm.get(), cfg.abs_tol.get(), kRound);
  return mpfr_lessequal_p(rk_norm.get(), threshold.get()) != 0;
}

bool check_convergence(const MPVector& rk, const MPScalar& r0_norm, const SolverConfig& cfg) {
  return check_convergence(norm2(rk), r0_norm, cfg);
}

SolveReport solve_bicg(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                       const Preconditioner& k, const SolverConfig& cfg) {
  SolveTracker track(a, b, x0, k, cfg, "solve_bicg");
  const std::size_t n = a.size();
  const Precision prec = cfg.precision;

  MPVector x = x0;
  MPVector r(n, prec);
  if (track.start(x, r)) return track.finish(SolveStatus::Converged, 0, std::move(x));
  MPVector rt = r;
  MPVector w(n, prec), wt(n, prec), p(n, prec), pt(n, prec), z(n, prec), zt(n, prec);
  MPScalar rho_prev(prec), beta(prec), alpha(prec), neg_alpha(prec);

  for (std::size_t i = 1; i <= track.limit(); ++i) {
    k.solve(r, w);
    k.solve_transpose(rt, wt);
    // (r~, w) rather than (w~, w): the two agree for K = I, and only the
    // former keeps alpha consistent with (p~, A p) when K != I.
    const MPScalar rho = dot(rt, w);
    if (!rho.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "rho not finite");
    if (rho.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "rho = 0");

    if (i == 1) {
      p = w;
      pt = wt;
    } else {
      beta = divide(rho, rho_prev);
      xpby_inplace(w, beta, p);
      xpby_inplace(wt, beta, pt);
    }
    a.apply(p, z);
    a.apply_transpose(pt, zt);

    const MPScalar sigma = dot(pt, z);
    if (sigma.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "(p~, Ap) = 0");
    alpha = divide(rho, sigma);
    if (!alpha.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "alpha not finite");
    neg_alpha = -alpha;

    axpy_inplace(alpha, p, x);
    axpy_inplace(neg_alpha, z, r);
    axpy_inplace(neg_alpha, zt, rt);

    const bool done = track.record(i, r);
    track.observe(i, x, r);
    if (done) return track.finish(SolveStatus::Converged, i, std::move(x));
    if (!track.last_residual_finite()) return track.finish(SolveStatus::NotConvergent, i, std::move(x), "residual not finite");
    rho_prev = rho;
  }
  return track.finish(SolveStatus::MaxIterExceeded, track.limit(), std::move(x));
}

SolveReport solve_cgs(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                      const Preconditioner& k, const SolverConfig& cfg) {
  SolveTracker track(a, b, x0, k, cfg, "solve_cgs");
  const std::size_t n = a.size();
  const Precision prec = cfg.precision;

  MPVector x = x0;
  MPVector r(n, prec);
  if (track.start(x, r)) return track.finish(SolveStatus::Converged, 0, std::move(x));
  const MPVector rt = r;
  MPVector u(n, prec), p(n, prec), q(n, prec), phat(n, prec), vhat(n, prec), uhat(n, prec), qhat(n, prec),
      tmp(n, prec);
  MPScalar rho_prev(prec), beta(prec), alpha(prec), neg_alpha(prec);

  for (std::size_t i = 1; i <= track.limit(); ++i) {
    const MPScalar rho = dot(rt, r);
    if (!rho.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "rho not finite");
    if (rho.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "rho = 0");

    if (i == 1) {
      u = r;
      p = u;
    } else {
      beta = divide(rho, rho_prev);
      u = r;
      axpy_inplace(beta, q, u);   // u = r + beta q
      xpby_inplace(q, beta, p);   // p = q + beta p
      xpby_inplace(u, beta, p);   // p = u + beta (q + beta p)
    }
    k.solve(p, phat);
    a.apply(phat, vhat);

    const MPScalar sigma = dot(rt, vhat);
    if (sigma.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "(r~, Ap) = 0");
    alpha = divide(rho, sigma);
    if (!alpha.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "alpha not finite");
    neg_alpha = -alpha;

    q = u;
    axpy_inplace(neg_alpha, vhat, q);
    add_into(u, q, tmp);
    k.solve(tmp, uhat);
    axpy_inplace(alpha, uhat, x);
    a.apply(uhat, qhat);
    axpy_inplace(neg_alpha, qhat, r);

    const bool done = track.record(i, r);
    track.observe(i, x, r);
    if (done) return track.finish(SolveStatus::Converged, i, std::move(x));
    if (!track.last_residual_finite()) return track.finish(SolveStatus::NotConvergent, i, std::move(x), "residual not finite");
    rho_prev = rho;
  }
  return track.finish(SolveStatus::MaxIterExceeded, track.limit(), std::move(x));
}

SolveReport solve_bicgstab(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                           const Preconditioner& k, const SolverConfig& cfg) {
  SolveTracker track(a, b, x0, k, cfg, "solve_bicgstab");
  const std::size_t n = a.size();
  const Precision prec = cfg.precision;

  MPVector x = x0;
  MPVector r(n, prec);
  if (track.start(x, r)) return track.finish(SolveStatus::Converged, 0, std::move(x));
  const MPVector rt = r;
  MPVector p(n, prec), phat(n, prec), v(n, prec), s(n, prec), shat(n, prec), t(n, prec);
  MPScalar rho_prev(prec), alpha(prec), omega(prec), beta(prec), neg(prec);

  for (std::size_t i = 1; i <= track.limit(); ++i) {
    const MPScalar rho = dot(rt, r);
    if (!rho.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "rho not finite");
    if (rho.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "rho = 0");

    if (i == 1) {
      p = r;
    } else {
      beta = divide(rho, rho_prev) * divide(alpha, omega);
      neg = -omega;
      axpy_inplace(neg, v, p);   // p - omega v
      xpby_inplace(r, beta, p);  // r + beta (p - omega v)
    }
    k.solve(p, phat);
    a.apply(phat, v);

    const MPScalar sigma = dot(rt, v);
    if (sigma.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "(r~, Ap) = 0");
    alpha = divide(rho, sigma);
    if (!alpha.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "alpha not finite");

    neg = -alpha;
    s = r;
    axpy_inplace(neg, v, s);

    // Half-step exit: s already meets the stopping test.
    const MPScalar s_norm = norm2(s);
    if (check_convergence(s_norm, track.r0_norm(), cfg)) {
      axpy_inplace(alpha, phat, x);
      r = s;
      track.record(i, s_norm);
      track.observe(i, x, r);
      return track.finish(SolveStatus::Converged, i, std::move(x));
    }

    k.solve(s, shat);
    a.apply(shat, t);
    const MPScalar tt = dot(t, t);
    if (tt.is_zero()) return track.finish(SolveStatus::Breakdown, i - 1, std::move(x), "(t, t) = 0");
    omega = divide(dot(t, s), tt);
    if (!omega.is_finite()) return track.finish(SolveStatus::NotConvergent, i - 1, std::move(x), "omega not finite");

    axpy_inplace(alpha, phat, x);
    axpy_inplace(omega, shat, x);
    neg = -omega;
    r = s;
    axpy_inplace(neg, t, r);

    const bool done = track.record(i, r);
    track.observe(i, x, r);
    if (done) return track.finish(SolveStatus::Converged, i, std::move(x));
    if (!track.last_residual_finite()) return track.finish(SolveStatus::NotConvergent, i, std::move(x), "residual not finite");
    // The next beta divides by omega.
    if (omega.is_zero()) return track.finish(SolveStatus::Breakdown, i, std::move(x), "omega = 0");
    if (omega.is_zero()) return track.finish(SolveStatus::Breakdown, i, std::move(x), "omega = 0");
    rho_prev = rho;
  }
  return track.finish(SolveStatus::MaxIterExceeded, track.limit(), std::move(x));
}

SolveReport solve_gpbicg(const LinearOperator& a, const MPVector& b, const MPVector& x0,
                         const Preconditioner& k, const SolverConfig& cfg) {
  SolveTracker track(a, b, x0, k, cfg, "solve_gpbicg");
  const std::size_t n = a.size();
  const Precision prec = cfg.precision;
  const bool plain = k.is_identity();

  MPVector x = x0;
  MPVector r(n, prec);
  if (track.start(x, r)) return track.finish(SolveStatus::Converged, 0, std::move(x));
  const MPVector rt = r;

  // With K != I the recurrence runs on A K^-1; `acc` collects the
  // correction e and the iterate is x0 + K^-1 e.
  MPVector acc(n, prec);
  MPVector& update = plain ? x : acc;
  MPVector kinv(n, prec);
  auto op = [&](const MPVector& in, MPVector& out) {
    if (plain) {
      a.apply(in, out);
    } else {
      k.solve(in, kinv);
      a.apply(kinv, out);
    }
  };
  auto materialize = [&]() {
    if (plain) return x;
    MPVector xi = x0;
    k.solve(acc, kinv);
    add_into(xi, kinv, xi);
    return xi;
  };
  auto finish = [&](SolveStatus status, std::size_t iters, std::string detail = {}) {
    return track.finish(status, iters, materialize(), std::move(detail));
  };

  MPVector p(n, prec), q(n, prec), t(n, prec), v(n, prec), y(n, prec), s(n, prec), u(n, prec), z(n, prec),
      w(n, prec), tmp(n, prec);
  MPScalar rho_prev(prec), alpha(prec), alpha_prev(prec), beta(prec), zeta(prec), zeta_prev(prec), eta(prec),
      neg(prec);

  for (std::size_t i = 1; i <= track.limit(); ++i) {
    const MPScalar rho = dot(rt, r);
    if (!rho.is_finite()) return finish(SolveStatus::NotConvergent, i - 1, "rho not finite");
    if (rho.is_zero()) return finish(SolveStatus::Breakdown, i - 1, "rho = 0");

    if (i == 1) {
      p = r;
      op(p, q);
      const MPScalar sigma = dot(rt, q);
      if (sigma.is_zero()) return finish(SolveStatus::Breakdown, i - 1, "(r~, Ap) = 0");
      alpha = divide(rho, sigma);
      neg = -alpha;
      t = r;
      axpy_inplace(neg, q, t);
      op(t, v);
      y = r;
      scale_inplace(MPScalar(prec, -1), y);
      axpy_inplace(alpha, q, y);  // alpha q - r
      const MPScalar mu2 = dot(v, t);
      const MPScalar mu5 = dot(v, v);
      // v = 0 means t = 0 for a nonsingular A: the half step already solved.
      zeta = mu5.is_zero() ? MPScalar(prec) : divide(mu2, mu5);
      eta = MPScalar(prec);
      beta = MPScalar(prec);
      s.set_zero();
    } else {
      beta = divide(rho, rho_prev) * divide(alpha_prev, zeta_prev);
      w = v;
      axpy_inplace(beta, q, w);   // w = v + beta q
      sub_into(p, u, p);
      xpby_inplace(r, beta, p);   // p = r + beta (p - u)
      op(p, q);
      const MPScalar sigma = dot(rt, q);
      if (sigma.is_zero()) return finish(SolveStatus::Breakdown, i - 1, "(r~, Ap) = 0");
      alpha = divide(rho, sigma);
      sub_into(t, r, s);          // s = t_prev - r
      neg = -alpha;
      t = r;
      axpy_inplace(neg, q, t);
      op(t, v);
      sub_into(w, q, tmp);
      y = s;
      axpy_inplace(neg, tmp, y);  // y = s - alpha (w - q)

      const MPScalar mu1 = dot(y, y);
      const MPScalar mu2 = dot(v, t);
      const MPScalar mu3 = dot(y, t);
      const MPScalar mu4 = dot(v, y);
      const MPScalar mu5 = dot(v, v);
      if (mu5.is_zero()) {
        zeta = MPScalar(prec);
        eta = MPScalar(prec);
      } else {
        const MPScalar tau = mu5 * mu1 - mu4 * mu4;
        if (tau.is_zero()) return finish(SolveStatus::Breakdown, i - 1, "tau = 0");
        zeta = divide(mu1 * mu2 - mu3 * mu4, tau);
        eta = divide(mu5 * mu3 - mu4 * mu2, tau);
      }
    }
    if (!alpha.is_finite() || !zeta.is_finite() || !eta.is_finite()) {
      return finish(SolveStatus::NotConvergent, i - 1, "alpha/zeta/eta not finite");
    }

    xpby_inplace(s, beta, u);     // s + beta u
    scale_inplace(eta, u);
    axpy_inplace(zeta, q, u);     // u = zeta q + eta (s + beta u)

    scale_inplace(eta, z);
    axpy_inplace(zeta, r, z);
    neg = -alpha;
    axpy_inplace(neg, u, z);      // z = zeta r + eta z - alpha u

    axpy_inplace(alpha, p, update);
    add_into(update, z, update);  // x += alpha p + z

    r = t;
    neg = -eta;
    axpy_inplace(neg, y, r);
    neg = -zeta;
    axpy_inplace(neg, v, r);      // r = t - eta y - zeta v

    const bool done = track.record(i, r);
    if (cfg.observer) track.observe(i, materialize(), r);
    if (done) return finish(SolveStatus::Converged, i);
    if (!track.last_residual_finite()) return finish(SolveStatus::NotConvergent, i, "residual not finite");
    if (zeta.is_zero()) return finish(SolveStatus::Breakdown, i, "zeta = 0");

    rho_prev = rho;
    alpha_prev = alpha;
    zeta_prev = zeta;
  }
  return finish(SolveStatus::MaxIterExceeded, track.limit());
}

SolveReport solve(const LinearOperator& a, const MPVector& b, const MPVector& x0, const Preconditioner& k,
                  const SolverConfig& cfg) {
  switch (cfg.method) {
    case Method::BiCG: return solve_bicg(a, b, x0, k, cfg);
    case Method::CGS: return solve_cgs(a, b, x0, k, cfg);
    case Method::BiCGSTAB: return solve_bicgstab(a, b, x0, k, cfg);
    case Method::GPBiCG: return solve_gpbicg(a, b, x0, k, cfg);
  }
  throw ContractViolation("solve: unknown method");
}

SolveReport solve(const CsrMatrix& a, const MPVector& b, const SolverConfig& cfg) {
  if (a.rows() != a.cols()) throw ContractViolation("solve: matrix must be square");
  const CsrOperator op(a);
  const MPVector x0(a.rows(), a.precision());
  if (cfg.preconditioner == PreconditionerKind::Ilu0) {
    const Ilu0Preconditioner k(ilu0_factorize(a));
    return solve(op, b, x0, k, cfg);
  }
  return solve(op, b, x0, IdentityPreconditioner{}, cfg);
}

void write_history_csv(std::ostream& out, const SolveReport& report) {
  out << "iter,relres\n";
  for (const auto& h : report.residual_history) {
    out << h.iteration << ',' << h.relres.to_string(30) << '\n';
  }
}

}  // namespace mpk
