#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "splitsqp/splitting.hpp"

using namespace splitsqp;

namespace {

// min x^2 + y^2 s.t. x + y = b0, unbounded boxes, no band rows.
TwoBlockProblem coupled_scalar_problem(double b0) {
  TwoBlockProblem p;
  Mat one(1, 1);
  one(0, 0) = 1.0;
  Mat q2(1, 1);
  q2(0, 0) = 2.0;
  p.A = one;
  p.B = one;
  p.b = {b0};
  p.C = Mat(0, 1);
  p.D = Mat(0, 1);
  p.r = {};
  p.s = {};
  p.l = {-kInf};
  p.u = {kInf};
  p.p = {-kInf};
  p.q = {kInf};
  p.f = make_quadratic_objective(q2, {0.0});
  p.theta = make_quadratic_objective(q2, {0.0});
  return p;
}

SolverConfig small_config() {
  SolverConfig c;
  c.beta = 4.0;
  c.xi = 1.0;
  c.rho = 0.5;
  c.sigma = 0.5;
  c.tol_direction = 1e-9;
  c.tol_feasibility = 1e-9;
  c.max_iterations = 400;
  c.qp_tolerance = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("x subproblem: hand-solved one-dimensional case") {
  // f = x^2, theta = y^2, x + y = 1 so that res = 0 at (1, 0).
  const auto rp = reformulate(coupled_scalar_problem(1.0));
  Iterate w{{1.0}, {0.0}, {}, {0.0}, 0};
  Mat hx(1, 1);
  hx(0, 0) = 2.0;
  const BoxQP qp = build_x_subproblem(rp, w, hx, 2.0);
  CHECK(qp.h()(0, 0) == doctest::Approx(4.0));
  CHECK(qp.g()[0] == doctest::Approx(2.0));
  CHECK(qp.lower()[0] == -kInf);
  CHECK(qp.upper()[0] == kInf);
  const auto sol = solve_box_qp(qp, 1e-12);
  CHECK(sol.v_star[0] == doctest::Approx(-0.5));  // x~ = 0.5
}

TEST_CASE("subproblem gradient at d = 0 equals the merit gradient block") {
  for (unsigned seed : {11u, 12u, 13u}) {
    oracle::RandomProblemSpec spec;
    spec.seed = seed;
    spec.convex = true;  // keep H_x + beta E'E positive definite without shifts
    const auto rp = reformulate(oracle::random_two_block(spec).problem);
    std::mt19937 rng(seed);
    Iterate w;
    w.x = clamp(oracle::rand_vec(rng, rp.n1(), -2.0, 2.0), rp.l, rp.u);
    w.y = clamp(oracle::rand_vec(rng, rp.n2(), -2.0, 2.0), rp.p, rp.q);
    w.z = clamp(oracle::rand_vec(rng, rp.m2, -2.0, 2.0), rp.r, rp.s);
    w.lambda = oracle::rand_vec(rng, rp.m1 + rp.m2, -2.0, 2.0);
    const double beta = 3.0;

    const auto g = aug_lagrangian_grad(rp, w, beta);
    const BoxQP qx = build_x_subproblem(rp, w, rp.f.hess(w.x), beta);
    const BoxQP qy = build_y_subproblem(rp, w, rp.theta.hess(w.y), beta);
    CHECK(norm_inf(sub(qx.g(), g.x)) <= 1e-12 * (1.0 + norm_inf(g.x)));
    CHECK(norm_inf(sub(qy.g(), g.y)) <= 1e-12 * (1.0 + norm_inf(g.y)));
  }
}

TEST_CASE("x and y subproblems coincide on a swap-symmetric problem") {
  const auto rp = reformulate(coupled_scalar_problem(1.0));
  Iterate w{{0.3}, {0.3}, {}, {0.7}, 0};
  Mat h(1, 1);
  h(0, 0) = 2.0;
  const BoxQP qx = build_x_subproblem(rp, w, h, 2.5);
  const BoxQP qy = build_y_subproblem(rp, w, h, 2.5);
  CHECK(qx.h()(0, 0) == qy.h()(0, 0));
  CHECK(qx.g()[0] == qy.g()[0]);
  CHECK(qx.lower()[0] == qy.lower()[0]);
}

TEST_CASE("explicit z step: interior, clamped, and box-QP equivalence") {
  SUBCASE("interior hand value") {
    // C = D = [1], x = y = 1, lambda_ie = 2, beta = 2 -> z_hat = 2 - 1 = 1
    TwoBlockProblem p;
    Mat one(1, 1);
    one(0, 0) = 1.0;
    Mat q2(1, 1);
    q2(0, 0) = 2.0;
    p.A = Mat(0, 1);
    p.B = Mat(0, 1);
    p.b = {};
    p.C = one;
    p.D = one;
    p.r = {0.0};
    p.s = {3.0};
    p.l = {-kInf};
    p.u = {kInf};
    p.p = {-kInf};
    p.q = {kInf};
    p.f = make_quadratic_objective(q2, {0.0});
    p.theta = make_quadratic_objective(q2, {0.0});
    const auto rp = reformulate(p);
    Iterate w{{1.0}, {1.0}, {0.5}, {2.0}, 0};
    const ZStep zs = solve_z_explicit(rp, w, 2.0);
    CHECK(zs.z_hat[0] == doctest::Approx(1.0));
    CHECK(zs.z_tilde[0] == doctest::Approx(1.0));
    CHECK(zs.alpha[0] == 0.0);
    CHECK(zs.gamma[0] == 0.0);

    // clamped variant: lambda_ie = 5 -> z_hat = 2 - 2.5 = -0.5, r = 0
    Iterate wc{{1.0}, {1.0}, {0.5}, {5.0}, 0};
    const ZStep zc = solve_z_explicit(rp, wc, 2.0);
    CHECK(zc.z_hat[0] == doctest::Approx(-0.5));
    CHECK(zc.z_tilde[0] == 0.0);
    CHECK(zc.alpha[0] == doctest::Approx(1.0));  // beta * 0.5
  }

  SUBCASE("matches solve_box_qp on the z quadratic, 100 random instances") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      oracle::RandomProblemSpec spec;
      spec.seed = 300 + static_cast<unsigned>(trial);
      spec.m2 = 1 + trial % 5;
      const auto rp = reformulate(oracle::random_two_block(spec).problem);
      Iterate w;
      w.x = clamp(oracle::rand_vec(rng, rp.n1(), -2.0, 2.0), rp.l, rp.u);
      w.y = clamp(oracle::rand_vec(rng, rp.n2(), -2.0, 2.0), rp.p, rp.q);
      w.z = clamp(oracle::rand_vec(rng, rp.m2, -2.0, 2.0), rp.r, rp.s);
      w.lambda = oracle::rand_vec(rng, rp.m1 + rp.m2, -2.0, 2.0);
      const double beta = 0.5 + trial % 3;

      const ZStep zs = solve_z_explicit(rp, w, beta);

      // the z quadratic: H = beta I, g = -beta z_hat over [r, s]
      Mat h(rp.m2, rp.m2);
      for (std::size_t i = 0; i < rp.m2; ++i) h(i, i) = beta;
      const BoxQP qp(h, scaled(zs.z_hat, -beta), rp.r, rp.s);
      const auto sol = solve_box_qp(qp, 1e-12);
      for (std::size_t i = 0; i < rp.m2; ++i)
        CHECK(std::fabs(zs.z_tilde[i] - sol.v_star[i]) <= 1e-10);
    }
  }
}

TEST_CASE("direction: fixed point, hand value and descent inequality") {
  SUBCASE("no move means zero direction") {
    Iterate w{{1.0}, {2.0}, {3.0}, {0.0}, 0};
    Mat h(1, 1);
    h(0, 0) = 4.0;
    const Direction d = compute_direction(w, {1.0}, {2.0}, {3.0}, h, h, 2.0);
    CHECK(d.is_zero());
    CHECK(d.quad_norm == 0.0);
  }
  SUBCASE("one-dimensional quadratic norm") {
    Iterate w{{1.0}, {0.0}, {}, {0.0}, 0};
    Mat h(1, 1);
    h(0, 0) = 4.0;
    Mat hy(1, 1);
    hy(0, 0) = 4.0;
    const Direction d = compute_direction(w, {0.5}, {0.0}, {}, h, hy, 2.0);
    CHECK(d.x[0] == doctest::Approx(-0.5));
    CHECK(d.quad_norm == doctest::Approx(1.0));  // 4 * 0.25
  }
  SUBCASE("directional derivative bounded by minus the quadratic norm") {
    for (unsigned seed : {41u, 42u, 43u, 44u}) {
      oracle::RandomProblemSpec spec;
      spec.seed = seed;
      spec.convex = seed % 2 == 0;
      const auto rp = reformulate(oracle::random_two_block(spec).problem);
      std::mt19937 rng(seed);
      Iterate w;
      w.x = clamp(oracle::rand_vec(rng, rp.n1(), -2.5, 2.5), rp.l, rp.u);
      w.y = clamp(oracle::rand_vec(rng, rp.n2(), -2.5, 2.5), rp.p, rp.q);
      w.z = clamp(oracle::rand_vec(rng, rp.m2, -2.5, 2.5), rp.r, rp.s);
      w.lambda = oracle::rand_vec(rng, rp.m1 + rp.m2, -1.0, 1.0);
      SolverConfig cfg = small_config();
      cfg.beta = 6.0;

      const auto metric = detail::make_metric(rp, w, cfg);
      const auto s = step(rp, w, metric.hx, metric.hy, cfg);
      const auto g = aug_lagrangian_grad(rp, w, cfg.beta);
      const double dd =
          dot(g.x, s.direction.x) + dot(g.y, s.direction.y) + dot(g.z, s.direction.z);
      CHECK(dd <= -s.direction.quad_norm + 1e-9 * (1.0 + s.direction.quad_norm));
    }
  }
}

TEST_CASE("armijo searches the merit function") {
  const auto rp = reformulate(coupled_scalar_problem(0.0));
  SolverConfig cfg = small_config();

  SUBCASE("zero direction returns t = 1 without searching") {
    Iterate w{{1.0}, {1.0}, {}, {0.5}, 0};
    Direction d;
    d.x = {0.0};
    d.y = {0.0};
    d.z = {};
    d.norm_inf = 0.0;
    d.quad_norm = 0.0;
    const auto r = armijo_search(rp, w, d, cfg);
    CHECK(r.step == 1.0);
    CHECK(r.backtracks == 0);
  }

  SUBCASE("full step accepted when the decrease condition holds at t = 1") {
    // decoupled strongly convex blocks: the subproblem step is an exact
    // Newton step, so the decrease at t = 1 is half the quadratic norm.
    TwoBlockProblem dec;
    Mat q2(1, 1);
    q2(0, 0) = 2.0;
    dec.A = Mat(0, 1);
    dec.B = Mat(0, 1);
    dec.b = {};
    dec.C = Mat(0, 1);
    dec.D = Mat(0, 1);
    dec.l = {-kInf};
    dec.u = {kInf};
    dec.p = {-kInf};
    dec.q = {kInf};
    dec.f = make_quadratic_objective(q2, {0.0});
    dec.theta = make_quadratic_objective(q2, {0.0});
    const auto drp = reformulate(dec);
    Iterate w{{1.0}, {1.0}, {}, {}, 0};
    SolverConfig c2 = cfg;
    c2.rho = 0.4;
    const auto metric = detail::make_metric(drp, w, c2);
    const auto s = step(drp, w, metric.hx, metric.hy, c2);
    // verify the premise directly at t = 1 before trusting the result
    Iterate trial = w;
    axpy_inplace(1.0, s.direction.x, trial.x);
    axpy_inplace(1.0, s.direction.y, trial.y);
    const double lhs = aug_lagrangian(drp, trial, c2.beta);
    const double rhs =
        aug_lagrangian(drp, w, c2.beta) - c2.rho * s.direction.quad_norm;
    REQUIRE(lhs <= rhs);
    CHECK(s.trace.step_size == 1.0);
    CHECK(s.trace.backtracks == 0);
  }

  SUBCASE("a contrived steep direction needs exactly one backtrack at sigma=0.8") {
    // unconstrained two-block objective so the merit is just f + theta
    TwoBlockProblem dec;
    Mat q2(1, 1);
    q2(0, 0) = 2.0;
    dec.A = Mat(0, 1);
    dec.B = Mat(0, 1);
    dec.b = {};
    dec.C = Mat(0, 1);
    dec.D = Mat(0, 1);
    dec.l = {-kInf};
    dec.u = {kInf};
    dec.p = {-kInf};
    dec.q = {kInf};
    dec.f = make_quadratic_objective(q2, {0.0});
    dec.theta = make_quadratic_objective(q2, {0.0});
    const auto drp = reformulate(dec);
    SolverConfig c3 = cfg;
    c3.rho = 0.8;
    c3.sigma = 0.8;
    Iterate w{{1.0}, {1.0}, {}, {}, 0};
    Direction d;
    d.x = {-2.0};
    d.y = {-2.0};
    d.z = {};
    d.norm_inf = 2.0;
    d.quad_norm = 1.0;
    // L(t) = 2 (1 - 2t)^2; L(0) = 2
    const double merit0 = aug_lagrangian(drp, w, c3.beta);
    REQUIRE(merit0 == doctest::Approx(2.0));
    const auto at = [&](double t) {
      Iterate trial = w;
      axpy_inplace(t, d.x, trial.x);
      axpy_inplace(t, d.y, trial.y);
      return aug_lagrangian(drp, trial, c3.beta);
    };
    REQUIRE(at(1.0) > merit0 - 1.0 * c3.rho * d.quad_norm);   // t=1 rejected
    REQUIRE(at(0.8) <= merit0 - 0.8 * c3.rho * d.quad_norm);  // t=0.8 accepted
    const auto r = armijo_search(drp, w, d, c3);
    CHECK(r.step == doctest::Approx(0.8));
    CHECK(r.backtracks == 1);
  }

  SUBCASE("an ascent direction exhausts the budget with a diagnostic") {
    Iterate w{{1.0}, {1.0}, {}, {0.0}, 0};
    Direction d;
    d.x = {1.0};  // uphill
    d.y = {1.0};
    d.z = {};
    d.norm_inf = 1.0;
    d.quad_norm = 1.0;
    SolverConfig c4 = cfg;
    c4.sigma = 0.8;
    c4.max_backtracks = 20;  // keep trial steps above the rounding floor
    CHECK_THROWS_AS((void)armijo_search(rp, w, d, c4), IterationBudgetError);
  }
}

TEST_CASE("dual update: zero residual, unit residual and partitioned forms") {
  SUBCASE("feasible point leaves lambda unchanged") {
    const auto rp = reformulate(coupled_scalar_problem(1.0));
    Iterate w{{0.5}, {0.5}, {}, {0.7}, 0};
    CHECK(update_dual(w, 0.001, rp) == Vec{0.7});
  }
  SUBCASE("unit residual moves lambda by xi") {
    const auto rp = reformulate(coupled_scalar_problem(0.0));
    Iterate w{{0.5}, {0.5}, {}, {0.0}, 0};  // res = 1
    CHECK(update_dual(w, 0.001, rp)[0] == doctest::Approx(0.001));
  }
  SUBCASE("partitioned and stacked accumulations agree") {
    oracle::RandomProblemSpec spec;
    spec.seed = 77;
    const auto rnd = oracle::random_two_block(spec);
    const auto& p = rnd.problem;
    const auto rp = reformulate(p);
    std::mt19937 rng(8);
    Iterate w;
    w.x = oracle::rand_vec(rng, rp.n1(), -1.0, 1.0);
    w.y = oracle::rand_vec(rng, rp.n2(), -1.0, 1.0);
    w.z = oracle::rand_vec(rng, rp.m2, -1.0, 1.0);
    w.lambda = oracle::rand_vec(rng, rp.m1 + rp.m2, -1.0, 1.0);
    const double xi = 0.37;
    const Vec stacked = update_dual(w, xi, rp);

    // lambda_e via A x + B y - b, lambda_ie via C x + D y - z
    Vec top = matvec(p.A, w.x);
    axpy_inplace(1.0, matvec(p.B, w.y), top);
    axpy_inplace(-1.0, p.b, top);
    Vec bottom = matvec(p.C, w.x);
    axpy_inplace(1.0, matvec(p.D, w.y), bottom);
    axpy_inplace(-1.0, w.z, bottom);
    for (std::size_t i = 0; i < rp.m1; ++i)
      CHECK(std::fabs(stacked[i] - (w.lambda[i] + xi * top[i])) <= 1e-14);
    for (std::size_t i = 0; i < rp.m2; ++i)
      CHECK(std::fabs(stacked[rp.m1 + i] - (w.lambda[rp.m1 + i] + xi * bottom[i])) <=
            1e-14);
  }
}

TEST_CASE("step: exact KKT stop leaves the iterate untouched") {
  const auto rp = reformulate(coupled_scalar_problem(0.0));
  Iterate w{{0.0}, {0.0}, {}, {0.0}, 0};
  SolverConfig cfg = small_config();
  const auto metric = detail::make_metric(rp, w, cfg);
  const auto s = step(rp, w, metric.hx, metric.hy, cfg);
  CHECK(s.stop == StepStop::ExactKkt);
  CHECK(s.next.x == w.x);
  CHECK(s.next.lambda == w.lambda);
}

TEST_CASE("step: merit decreases with the line-search certificate") {
  const auto rp = reformulate(coupled_scalar_problem(2.0));
  Iterate w{{2.0}, {-1.0}, {}, {1.0}, 0};
  SolverConfig cfg = small_config();
  cfg.xi = 0.05;
  Iterate cur = w;
  for (int k = 0; k < 5; ++k) {
    const auto metric = detail::make_metric(rp, cur, cfg);
    const auto s = step(rp, cur, metric.hx, metric.hy, cfg);
    REQUIRE(s.stop == StepStop::None);
    CHECK(s.trace.merit_after <=
          s.trace.merit_before - s.trace.step_size * cfg.rho * s.trace.quad_norm + 1e-10);
    CHECK(s.trace.merit_after_dual <= s.trace.merit_after + 1e-12);
    cur = s.next;
  }
}

TEST_CASE("per-iteration theory checks on random instances") {
  // descent (2.26)-style, merit decrease, box feasibility, gradient identities,
  // and the metric floor, over a handful of convex and nonconvex instances.
  for (int inst = 0; inst < 10; ++inst) {
    oracle::RandomProblemSpec spec;
    spec.seed = 900 + static_cast<unsigned>(inst);
    spec.convex = inst % 2 == 0;
    spec.n1 = 3 + inst % 3;
    spec.n2 = 2 + inst % 4;
    spec.m1 = 1 + inst % 2;
    spec.m2 = 2 + inst % 3;
    const auto rnd = oracle::random_two_block(spec);
    const auto rp = reformulate(rnd.problem);

    SolverConfig cfg;
    cfg.beta = 5.0 + inst;
    cfg.xi = 0.05;
    cfg.rho = 0.8;
    cfg.sigma = 0.8;
    cfg.qp_tolerance = 1e-12;
    cfg.max_iterations = 40;

    Iterate w = make_initial_iterate(rp, rnd.x_feas, rnd.y_feas);
    std::mt19937 rng(inst);
    axpy_inplace(0.5, oracle::rand_vec(rng, rp.n1(), -1.0, 1.0), w.x);
    w.x = clamp(w.x, rp.l, rp.u);

    for (int k = 0; k < 12; ++k) {
      const auto metric = detail::make_metric(rp, w, cfg);
      const auto s = step(rp, w, metric.hx, metric.hy, cfg);
      if (s.stop != StepStop::None) break;

      // descent inequality
      const auto g = aug_lagrangian_grad(rp, w, cfg.beta);
      const double dd =
          dot(g.x, s.direction.x) + dot(g.y, s.direction.y) + dot(g.z, s.direction.z);
      CHECK(dd <= -s.direction.quad_norm + 1e-9 * (1.0 + s.direction.quad_norm));

      // merit monotonicity including the dual update
      CHECK(s.trace.merit_after_dual <=
            s.trace.merit_before - cfg.xi * s.trace.feasibility_sqnorm -
                s.trace.step_size * cfg.rho * s.trace.quad_norm + 1e-8);

      // box feasibility of the accepted iterate
      CHECK(box_feasible(rp, s.next.x, s.next.y, s.next.z));

      // gradient identities: grad_x L + (H_x + beta E'E) d_x - alpha + gamma = 0
      {
        Vec lhs = g.x;
        axpy_inplace(1.0, matvec(metric.metric_x, s.direction.x), lhs);
        axpy_inplace(-1.0, s.multipliers.alpha_x, lhs);
        axpy_inplace(1.0, s.multipliers.gamma_x, lhs);
        CHECK(norm_inf(lhs) <= 1e-8 * (1.0 + norm_inf(g.x)));
        Vec lhy = g.y;
        axpy_inplace(1.0, matvec(metric.metric_y, s.direction.y), lhy);
        axpy_inplace(-1.0, s.multipliers.alpha_y, lhy);
        axpy_inplace(1.0, s.multipliers.gamma_y, lhy);
        CHECK(norm_inf(lhy) <= 1e-8 * (1.0 + norm_inf(g.y)));
        Vec lhz = g.z;
        axpy_inplace(cfg.beta, s.direction.z, lhz);
        axpy_inplace(-1.0, s.multipliers.alpha_z, lhz);
        axpy_inplace(1.0, s.multipliers.gamma_z, lhz);
        CHECK(norm_inf(lhz) <= 1e-8 * (1.0 + norm_inf(g.z)));
      }

      // metric floor |d|^2_H >= eta |d|^2
      const double eta = std::min({smallest_eigenvalue_spd(metric.metric_x),
                                   smallest_eigenvalue_spd(metric.metric_y), cfg.beta});
      const double dsq = sqnorm(s.direction.x) + sqnorm(s.direction.y) + sqnorm(s.direction.z);
      CHECK(s.direction.quad_norm >= eta * dsq * (1.0 - 1e-6) - 1e-12);

      w = s.next;
    }
  }
}

TEST_CASE("solve: KKT start converges in zero iterations") {
  const auto rp = reformulate(coupled_scalar_problem(0.0));
  Iterate w{{0.0}, {0.0}, {}, {0.0}, 0};
  const auto rep = solve_splitting(rp, w, small_config());
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.trace.empty());
}

TEST_CASE("solve: converges on a convex coupled problem and certifies KKT") {
  const auto rp = reformulate(coupled_scalar_problem(2.0));
  // The dual correction is a small merit-decreasing drift, not a convergent
  // multiplier iteration, so feed the known multiplier (lambda* = 2 for
  // min x^2+y^2 s.t. x+y=2) and let the primal loop do the work.
  Iterate w{{2.0}, {-1.0}, {}, {2.0}, 0};
  SolverConfig cfg = small_config();
  cfg.xi = 1e-9;
  const auto rep = solve_splitting(rp, w, cfg);
  CHECK(rep.status == SolveStatus::Converged);
  // optimum of min x^2+y^2 s.t. x+y=2 is (1,1)
  CHECK(rep.final_iterate.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.final_iterate.y[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(rep.kkt_reformulated.total <= 1e-6);
  CHECK(rep.kkt_original.total <= 1e-6);
}

TEST_CASE("solve: infeasible equality ends in a dual stall, not silence") {
  // x + y = 10 with x, y <= 2 cannot be satisfied.
  auto p = coupled_scalar_problem(10.0);
  p.u = {2.0};
  p.q = {2.0};
  SolverConfig cfg = small_config();
  cfg.max_iterations = 2000;
  cfg.max_dual_stalls = 30;
  cfg.xi = 1e-6;  // keep lambda nearly frozen so the stall is reached
  const auto rep = solve_splitting(reformulate(p), Iterate{{0.0}, {0.0}, {}, {0.0}, 0}, cfg);
  CHECK(rep.status == SolveStatus::DualStalled);
  CHECK(!rep.message.empty());
}

TEST_CASE("solve: non-finite objective aborts with a message") {
  auto p = coupled_scalar_problem(1.0);
  SmoothFunction fn;
  fn.value = [](const Vec& v) {
    return v[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : v[0] * v[0];
  };
  fn.grad = [](const Vec& v) { return Vec{2.0 * v[0]}; };
  fn.hess = [](const Vec&) {
    Mat h(1, 1);
    h(0, 0) = 2.0;
    return h;
  };
  p.f = make_custom_objective(fn);
  const auto rep =
      solve_splitting(reformulate(p), Iterate{{2.0}, {0.0}, {}, {0.0}, 0}, small_config());
  CHECK(rep.status == SolveStatus::Aborted);
  CHECK(rep.message.find("non-finite") != std::string::npos);
}

TEST_CASE("user and identity-shift metric modes reach the same solution") {
  oracle::RandomProblemSpec spec;
  spec.seed = 4321;
  spec.convex = true;
  const auto rnd = oracle::random_two_block(spec);
  const auto rp = reformulate(rnd.problem);
  SolverConfig cfg = small_config();
  cfg.beta = 8.0;
  cfg.xi = 1e-9;
  cfg.tol_direction = 1e-7;
  cfg.tol_feasibility = 1.0;  // compare merit minimizers at the same multiplier
  cfg.max_iterations = 4000;
  const Iterate w0 = make_initial_iterate(rp, rnd.x_feas, rnd.y_feas);

  const auto exact = solve_splitting(rp, w0, cfg);
  REQUIRE(exact.status == SolveStatus::Converged);

  SolverConfig user = cfg;
  user.hessian_mode = HessianMode::User;
  user.user_hx = Mat(rp.n1(), rp.n1());
  user.user_hy = Mat(rp.n2(), rp.n2());
  for (std::size_t i = 0; i < rp.n1(); ++i) user.user_hx(i, i) = 2.0;
  for (std::size_t i = 0; i < rp.n2(); ++i) user.user_hy(i, i) = 2.0;
  const auto fixed = solve_splitting(rp, w0, user);
  REQUIRE(fixed.status == SolveStatus::Converged);
  CHECK(std::fabs(fixed.objective - exact.objective) <=
        1e-5 * (1.0 + std::fabs(exact.objective)));

  SolverConfig shift = cfg;
  shift.hessian_mode = HessianMode::IdentityShift;
  shift.identity_shift = 1.5;
  const auto shifted = solve_splitting(rp, w0, shift);
  REQUIRE(shifted.status == SolveStatus::Converged);
  CHECK(std::fabs(shifted.objective - exact.objective) <=
        1e-5 * (1.0 + std::fabs(exact.objective)));
}

TEST_CASE("solve: parallel subproblem flag reproduces the serial run") {
  oracle::RandomProblemSpec spec;
  spec.seed = 1234;
  const auto rnd = oracle::random_two_block(spec);
  const auto rp = reformulate(rnd.problem);
  SolverConfig cfg = small_config();
  cfg.beta = 8.0;
  cfg.xi = 0.1;
  cfg.tol_direction = 1e-8;
  cfg.tol_feasibility = 1e-8;
  Iterate w0 = make_initial_iterate(rp, rnd.x_feas, rnd.y_feas);
  const auto serial = solve_splitting(rp, w0, cfg);
  cfg.parallel_subproblems = true;
  const auto parallel = solve_splitting(rp, w0, cfg);
  CHECK(serial.iterations == parallel.iterations);
  CHECK(serial.objective == doctest::Approx(parallel.objective).epsilon(1e-12));
}
