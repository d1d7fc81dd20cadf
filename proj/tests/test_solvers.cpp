#include <doctest.h>

#include <random>
#include <sstream>
#include <vector>

#include "mpkrylov/precond.hpp"
#include "mpkrylov/solvers.hpp"
#include "oracle.hpp"

using namespace mpk;

namespace {

constexpr Method kMethods[] = {Method::BiCG, Method::CGS, Method::BiCGSTAB, Method::GPBiCG};

CsrMatrix two_by_two(Precision p) {
  std::vector<Triplet> t;
  t.push_back({0, 0, MPScalar(p, 4)});
  t.push_back({0, 1, MPScalar(p, 1)});
  t.push_back({1, 0, MPScalar(p, 1)});
  t.push_back({1, 1, MPScalar(p, 3)});
  return CsrMatrix::from_triplets(2, 2, p, std::move(t));
}

MPVector values(std::initializer_list<double> v, Precision p) { return MPVector::from_doubles(std::vector<double>(v), p); }

bool history_consistent(const SolveReport& rep) {
  if (rep.residual_history.size() != rep.iterations + 1) return false;
  for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
    if (rep.residual_history[k].iteration != k) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("method and status names") {
  for (Method m : kMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK(!parse_method("gmres").has_value());
  CHECK(!parse_method("BiCG").has_value());
  CHECK(to_string(SolveStatus::Converged) == "Converged");
  CHECK(to_string(SolveStatus::MaxIterExceeded) == "MaxIterExceeded");
}

TEST_CASE("configuration defaults and validation") {
  const Precision p(256);
  SolverConfig cfg = SolverConfig::defaults(Method::CGS, p);
  CHECK(cfg.method == Method::CGS);
  CHECK(cfg.rel_tol.bit_equal(MPScalar::from_string("1e-20", p)));
  CHECK(cfg.abs_tol.bit_equal(MPScalar::from_string("1e-50", p)));
  CHECK(cfg.preconditioner == PreconditionerKind::None);
  CHECK(cfg.iteration_limit(5) == 50);
  CHECK(cfg.iteration_limit(10000) == 100000);
  CHECK(cfg.iteration_limit(20000) == 100000);
  cfg.max_iter = 7;
  CHECK(cfg.iteration_limit(5) == 7);
  CHECK_NOTHROW(cfg.validate());

  SolverConfig bad = cfg;
  bad.rel_tol = MPScalar(p);
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = cfg;
  bad.abs_tol = MPScalar(p, -1);
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = cfg;
  bad.rel_tol = MPScalar(Precision(128), 1);
  CHECK_THROWS_AS(bad.validate(), PrecisionMismatch);

  // Solve-time precision checks.
  const CsrMatrix a = two_by_two(Precision(128));
  CHECK_THROWS_AS((void)solve(a, values({1, 2}, Precision(128)), cfg), PrecisionMismatch);
  const SolverConfig ok = SolverConfig::defaults(Method::BiCG, Precision(128));
  CHECK_THROWS_AS((void)solve(a, values({1, 2, 3}, Precision(128)), ok), DimensionMismatch);
}

TEST_CASE("convergence test boundaries") {
  const Precision p(128);
  SolverConfig cfg = SolverConfig::defaults(Method::BiCG, p);
  CHECK(check_convergence(MPVector(3, p), MPScalar(p, 5), cfg));
  CHECK(check_convergence(MPVector(3, p), MPScalar(p), cfg));

  // Dyadic tolerances make the threshold exact.
  cfg.rel_tol = MPScalar::pow2(-10, p);
  cfg.abs_tol = MPScalar::pow2(-20, p);
  const MPScalar r0(p, 1);
  const MPScalar edge = MPScalar::pow2(-10, p) + MPScalar::pow2(-20, p);
  CHECK(check_convergence(edge, r0, cfg));
  MPScalar above = edge;
  mpfr_nextabove(above.get());
  CHECK(!check_convergence(above, r0, cfg));
  MPVector vec_edge(1, p);
  vec_edge[0] = -edge;
  CHECK(check_convergence(vec_edge, r0, cfg));

  // Relative term alone at the boundary: abs_tol below half an ulp of it.
  cfg.abs_tol = MPScalar::pow2(-400, p);
  CHECK(check_convergence(MPScalar::pow2(-10, p), r0, cfg));

  // r0 = 0: only the absolute term counts.
  cfg.abs_tol = MPScalar::pow2(-20, p);
  CHECK(check_convergence(MPScalar::pow2(-20, p), MPScalar(p), cfg));
  CHECK(!check_convergence(MPScalar::pow2(-19, p), MPScalar(p), cfg));

  const MPScalar nan = MPScalar(p) / MPScalar(p);
  CHECK(!check_convergence(nan, r0, cfg));
  CHECK(!check_convergence(MPScalar(p, 1) / MPScalar(p), r0, cfg));
}

TEST_CASE("identity systems converge in one iteration") {
  const Precision p(512);
  const CsrMatrix id = CsrMatrix::identity(6, p);
  MPVector b = oracle::ramp(6, p);
  b[3] = MPScalar(p, 1) / MPScalar(p, 3);
  for (Method m : kMethods) {
    CAPTURE(to_string(m));
    for (PreconditionerKind pk : {PreconditionerKind::None, PreconditionerKind::Ilu0}) {
      SolverConfig cfg = SolverConfig::defaults(m, p);
      cfg.preconditioner = pk;
      const SolveReport rep = solve(id, b, cfg);
      CHECK(rep.status == SolveStatus::Converged);
      CHECK(rep.iterations == 1);
      CHECK(rep.solution.bit_equal(b));
      CHECK(rep.final_true_residual.is_zero());
      CHECK(history_consistent(rep));
    }
  }
}

TEST_CASE("two by two system against the direct solution") {
  const Precision p(128);
  const CsrMatrix a = two_by_two(p);
  const MPVector b = values({1, 2}, p);
  const mpq_class x_exact[2] = {mpq_class(1, 11), mpq_class(7, 11)};
  for (Method m : kMethods) {
    for (PreconditionerKind pk : {PreconditionerKind::None, PreconditionerKind::Ilu0}) {
      CAPTURE(to_string(m));
      CAPTURE(static_cast<int>(pk));
      SolverConfig cfg = SolverConfig::defaults(m, p);
      cfg.preconditioner = pk;
      const SolveReport rep = solve(a, b, cfg);
      REQUIRE(rep.status == SolveStatus::Converged);
      CHECK(rep.iterations <= 2);
      for (int i = 0; i < 2; ++i) {
        const mpq_class rel = abs(oracle::to_q(rep.solution[static_cast<std::size_t>(i)]) - x_exact[i]) / x_exact[i];
        CHECK(rel.get_d() <= 1e-20);
      }
      CHECK(history_consistent(rep));
      CHECK(rep.residual_history.front().relres.bit_equal(MPScalar(p, 1)));
    }
  }
}

TEST_CASE("true and preconditioned final residuals") {
  std::mt19937_64 rng(64);
  const Precision p(256);
  const CsrMatrix a = oracle::random_diag_dominant(20, 0.3, p, rng);
  const MPVector b = spmv(a, oracle::ramp(20, p));
  for (Method m : kMethods) {
    CAPTURE(to_string(m));
    SolverConfig cfg = SolverConfig::defaults(m, p);
    cfg.max_iter = 3;
    const SolveReport plain = solve(a, b, cfg);
    CHECK(plain.final_preconditioned_residual.bit_equal(plain.final_true_residual));

    cfg.preconditioner = PreconditionerKind::Ilu0;
    const SolveReport pre = solve(a, b, cfg);
    MPVector r = spmv(a, pre.solution);
    sub_into(b, r, r);
    CHECK(pre.final_true_residual.bit_equal(norm2(r)));
    CHECK(pre.final_preconditioned_residual.bit_equal(norm2(ilu0_solve(ilu0_factorize(a), r))));
  }
}

TEST_CASE("dense operator path") {
  const Precision p(192);
  const CsrMatrix a = two_by_two(p);
  const DenseOperator dense(to_dense(a));
  const CsrOperator sparse(a);
  const MPVector b = values({1, 2}, p);
  const MPVector x0(2, p);
  for (Method m : kMethods) {
    const SolverConfig cfg = SolverConfig::defaults(m, p);
    const SolveReport d = solve(dense, b, x0, IdentityPreconditioner{}, cfg);
    const SolveReport s = solve(sparse, b, x0, IdentityPreconditioner{}, cfg);
    // Same reduction order, so the two operators give identical runs.
    CHECK(d.solution.bit_equal(s.solution));
    CHECK(d.iterations == s.iterations);
  }
}

TEST_CASE("zero initial residual") {
  const Precision p(128);
  const CsrMatrix a = two_by_two(p);
  for (Method m : kMethods) {
    const SolveReport zero_rhs = solve(a, MPVector(2, p), SolverConfig::defaults(m, p));
    CHECK(zero_rhs.status == SolveStatus::Converged);
    CHECK(zero_rhs.iterations == 0);
    CHECK(zero_rhs.residual_history.size() == 1);
    CHECK(zero_rhs.residual_history[0].relres.is_zero());

    // x0 already exact.
    const CsrOperator op(a);
    const MPVector x0 = values({1, -1}, p);
    const MPVector b = spmv(a, x0);
    const SolveReport exact = solve(op, b, x0, IdentityPreconditioner{}, SolverConfig::defaults(m, p));
    CHECK(exact.iterations == 0);
    CHECK(exact.solution.bit_equal(x0));
  }
}

TEST_CASE("breakdown, non-finite and iteration cap") {
  const Precision p(128);
  SUBCASE("(r~, A p) = 0") {
    std::vector<Triplet> t;
    t.push_back({0, 1, MPScalar(p, 1)});
    t.push_back({1, 0, MPScalar(p, 1)});
    const CsrMatrix swap = CsrMatrix::from_triplets(2, 2, p, std::move(t));
    for (Method m : kMethods) {
      CAPTURE(to_string(m));
      const SolveReport rep = solve(swap, values({1, 0}, p), SolverConfig::defaults(m, p));
      CHECK(rep.status == SolveStatus::Breakdown);
      CHECK(rep.iterations == 0);
      CHECK(!rep.detail.empty());
      CHECK(history_consistent(rep));
    }
  }
  SUBCASE("BiCGSTAB omega = 0") {
    // A = [[1,1],[1,0]], b = e1: s = (0, -1) and A s = (-1, 0) is orthogonal to s.
    std::vector<Triplet> t;
    t.push_back({0, 0, MPScalar(p, 1)});
    t.push_back({0, 1, MPScalar(p, 1)});
    t.push_back({1, 0, MPScalar(p, 1)});
    const SolveReport rep =
        solve(CsrMatrix::from_triplets(2, 2, p, std::move(t)), values({1, 0}, p), SolverConfig::defaults(Method::BiCGSTAB, p));
    CHECK(rep.status == SolveStatus::Breakdown);
    CHECK(rep.iterations == 1);
    CHECK(rep.detail == "omega = 0");
    CHECK(history_consistent(rep));
  }
  SUBCASE("NaN right-hand side") {
    MPVector b = values({1, 2}, p);
    b[1] = MPScalar(p) / MPScalar(p);
    for (Method m : kMethods) {
      CAPTURE(to_string(m));
      const SolveReport rep = solve(two_by_two(p), b, SolverConfig::defaults(m, p));
      CHECK(rep.status == SolveStatus::NotConvergent);
    }
  }
  SUBCASE("max_iter reached") {
    std::mt19937_64 rng(61);
    const CsrMatrix a = oracle::random_diag_dominant(30, 0.5, p, rng);
    const MPVector b = spmv(a, oracle::ramp(30, p));
    for (Method m : kMethods) {
      CAPTURE(to_string(m));
      SolverConfig cfg = SolverConfig::defaults(m, p);
      cfg.max_iter = 2;
      const SolveReport rep = solve(a, b, cfg);
      CHECK(rep.status == SolveStatus::MaxIterExceeded);
      CHECK(rep.iterations == 2);
      CHECK(history_consistent(rep));
    }
  }
  SUBCASE("ILU(0) structural failure propagates") {
    std::vector<Triplet> t;
    t.push_back({0, 1, MPScalar(p, 1)});
    t.push_back({1, 0, MPScalar(p, 1)});
    t.push_back({1, 1, MPScalar(p, 1)});
    SolverConfig cfg = SolverConfig::defaults(Method::BiCGSTAB, p);
    cfg.preconditioner = PreconditionerKind::Ilu0;
    CHECK_THROWS_AS((void)solve(CsrMatrix::from_triplets(2, 2, p, std::move(t)), values({1, 1}, p), cfg),
                    Ilu0Error);
  }
}

TEST_CASE("random systems: history, determinism and accuracy") {
  std::mt19937_64 rng(62);
  const Precision p(512);
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 5 + rng() % 25;
    const CsrMatrix a = oracle::random_diag_dominant(n, 0.3, p, rng);
    const MPVector truth = oracle::ramp(n, p);
    const MPVector b = spmv(a, truth);
    for (Method m : kMethods) {
      for (PreconditionerKind pk : {PreconditionerKind::None, PreconditionerKind::Ilu0}) {
        CAPTURE(to_string(m));
        SolverConfig cfg = SolverConfig::defaults(m, p);
        cfg.preconditioner = pk;
        const SolveReport first = solve(a, b, cfg);
        const SolveReport second = solve(a, b, cfg);
        REQUIRE(first.status == SolveStatus::Converged);
        CHECK(history_consistent(first));
        CHECK(check_convergence(first.residual_history.back().relres * first.initial_residual,
                                first.initial_residual, cfg));
        CHECK(first.solution.bit_equal(second.solution));
        CHECK(first.iterations == second.iterations);
        for (std::size_t k = 0; k < first.residual_history.size(); ++k) {
          CHECK(first.residual_history[k].relres.bit_equal(second.residual_history[k].relres));
        }
        MPScalar worst(p);
        for (std::size_t i = 0; i < n; ++i) {
          const MPScalar e = abs(first.solution[i] - truth[i]);
          if (e > worst) worst = e;
        }
        CHECK(worst.to_double() < 1e-15);
      }
    }
  }
}

TEST_CASE("recursive residual tracks the true residual") {
  std::mt19937_64 rng(63);
  const Precision p(512);
  const MPScalar bound_scale = MPScalar::pow2(10 - 512, p);
  for (int rep = 0; rep < 4; ++rep) {
    const std::size_t n = 10 + rng() % 30;
    const CsrMatrix a = oracle::random_diag_dominant(n, 0.25, p, rng);
    const MPVector b = spmv(a, oracle::ramp(n, p));
    const MPScalar bound = bound_scale * norm2(b);
    for (Method m : kMethods) {
      for (PreconditionerKind pk : {PreconditionerKind::None, PreconditionerKind::Ilu0}) {
        CAPTURE(to_string(m));
        SolverConfig cfg = SolverConfig::defaults(m, p);
        cfg.preconditioner = pk;
        MPScalar worst(p);
        std::size_t calls = 0;
        cfg.observer = [&](std::size_t iteration, const MPVector& x, const MPVector& r) {
          ++calls;
          CHECK(iteration == calls);
          MPVector true_r = spmv(a, x);
          sub_into(b, true_r, true_r);
          sub_into(true_r, r, true_r);
          const MPScalar drift = norm2(true_r);
          if (drift > worst) worst = drift;
        };
        const SolveReport res = solve(a, b, cfg);
        REQUIRE(res.converged());
        CHECK(calls == res.iterations);
        CHECK(worst <= bound);
      }
    }
  }
}

TEST_CASE("history CSV") {
  const Precision p(128);
  const SolveReport rep = solve(two_by_two(p), values({1, 2}, p), SolverConfig::defaults(Method::BiCG, p));
  std::ostringstream out;
  write_history_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,relres");
  std::getline(in, line);
  CHECK(line == "0,1.00000000000000000000000000000e+00");
  std::size_t rows = 1;
  while (std::getline(in, line)) {
    ++rows;
    const std::string value = line.substr(line.find(',') + 1);
    const std::string mantissa = value.substr(0, value.find('e'));
    CHECK(mantissa.size() == 31 + (mantissa[0] == '-' ? 1u : 0u));  // d.ddd... with 30 significant digits
  }
  CHECK(rows == rep.residual_history.size());
}
