#include "splitsqp/splitting.hpp"

#include <chrono>
#include <cmath>
#include <future>

namespace splitsqp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Vec residual_at(const ReformulatedProblem& rp, const Vec& x, const Vec& y, const Vec& z) {
  Vec res = rp.apply_constraints(x, y, z);
  axpy_inplace(-1.0, rp.c, res);
  return res;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::DualStalled: return "dual_stalled";
    case SolveStatus::Aborted: return "aborted";
  }
  return "unknown";
}

namespace detail {

Mat metric_matrix(const Mat& h, const Mat& gram, double beta) {
  Mat out = gram;
  kernels::ops().scal(beta, out.data(), out.rows() * out.cols());
  const double* hd = h.data();
  double* od = out.data();
  const std::size_t total = h.rows() * h.cols();
  for (std::size_t i = 0; i < total; ++i) od[i] += hd[i];
  return out;
}

MetricBlocks make_metric(const ReformulatedProblem& rp, const Iterate& w,
                         const SolverConfig& config) {
  MetricBlocks out;
  switch (config.hessian_mode) {
    case HessianMode::Exact:
      out.hx = rp.f.hess(w.x);
      out.hy = rp.theta.hess(w.y);
      break;
    case HessianMode::User:
      out.hx = config.user_hx;
      out.hy = config.user_hy;
      break;
    case HessianMode::IdentityShift:
      out.hx = Mat(rp.n1(), rp.n1());
      out.hy = Mat(rp.n2(), rp.n2());
      for (std::size_t i = 0; i < rp.n1(); ++i) out.hx(i, i) = config.identity_shift;
      for (std::size_t i = 0; i < rp.n2(); ++i) out.hy(i, i) = config.identity_shift;
      break;
  }
  if (out.hx.rows() != rp.n1() || out.hx.cols() != rp.n1())
    throw std::invalid_argument("metric: H_x has wrong dimensions");
  if (out.hy.rows() != rp.n2() || out.hy.cols() != rp.n2())
    throw std::invalid_argument("metric: H_y has wrong dimensions");

  auto ensure_pd = [&](Mat& h, const Mat& gram, Mat& metric, Cholesky& factor,
                       double& applied) {
    double tau = 0.0;
    for (;;) {
      metric = metric_matrix(h, gram, config.beta);
      if (auto c = Cholesky::try_factor(metric)) {
        factor = *std::move(c);
        return;
      }
      const double next = tau == 0.0 ? 1e-6 : 2.0 * tau;
      for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += next - tau;
      tau = next;
      applied = tau;
      if (tau > 1e12)
        throw NotPositiveDefiniteError(
            "metric: Levenberg regularization failed to reach positive definiteness",
            0.0);
    }
  };
  ensure_pd(out.hx, rp.EtE, out.metric_x, out.factor_x, out.shift_x);
  ensure_pd(out.hy, rp.FtF, out.metric_y, out.factor_y, out.shift_y);
  return out;
}

BoxQP make_block_qp(const ReformulatedProblem& rp, const Iterate& w, Mat metric,
                    std::optional<Cholesky> factor, double beta, bool x_block) {
  const Vec res = residual_at(rp, w.x, w.y, w.z);
  Vec t = w.lambda;  // lambda - beta * res
  axpy_inplace(-beta, res, t);

  Vec g;
  Vec lo, hi;
  if (x_block) {
    g = rp.f.grad(w.x);
    axpy_inplace(-1.0, rp.apply_Et(t), g);
    const std::size_t n = rp.n1();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = rp.l[i] - w.x[i];
      hi[i] = rp.u[i] - w.x[i];
    }
  } else {
    g = rp.theta.grad(w.y);
    axpy_inplace(-1.0, rp.apply_Ft(t), g);
    const std::size_t n = rp.n2();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = rp.p[i] - w.y[i];
      hi[i] = rp.q[i] - w.y[i];
    }
  }
  if (factor)
    return BoxQP(std::move(metric), std::move(g), std::move(lo), std::move(hi),
                 *std::move(factor));
  return BoxQP(std::move(metric), std::move(g), std::move(lo), std::move(hi));
}

void finalize_report(SolveReport& rep, const ReformulatedProblem& rp, const Iterate& w,
                     const kkt::MultiplierSet& multipliers, double direction_inf) {
  rep.final_iterate = w;
  rep.multipliers = multipliers;
  rep.objective = rp.objective(w.x, w.y);
  rep.feasibility_inf = norm_inf(residual_at(rp, w.x, w.y, w.z));
  rep.direction_inf = direction_inf;
  rep.iterations = w.k;
  rep.kkt_reformulated = kkt::kkt_residual_reformulated(rp, w.x, w.y, w.z, multipliers);
  rep.kkt_original = kkt::kkt_residual_original(
      rp, w.x, w.y, kkt::map_multipliers_to_original(multipliers, rp.m1));
}

kkt::MultiplierSet zero_multipliers(const ReformulatedProblem& rp, const Vec& lambda) {
  kkt::MultiplierSet m;
  m.lambda = lambda;
  m.alpha_x = Vec(rp.n1(), 0.0);
  m.gamma_x = Vec(rp.n1(), 0.0);
  m.alpha_y = Vec(rp.n2(), 0.0);
  m.gamma_y = Vec(rp.n2(), 0.0);
  m.alpha_z = Vec(rp.m2, 0.0);
  m.gamma_z = Vec(rp.m2, 0.0);
  return m;
}

}  // namespace detail

BoxQP build_x_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                         double beta) {
  if (hx.rows() != rp.n1() || hx.cols() != rp.n1())
    throw std::invalid_argument("x subproblem: H_x has wrong dimensions");
  try {
    return detail::make_block_qp(rp, w, detail::metric_matrix(hx, rp.EtE, beta),
                                 std::nullopt, beta, /*x_block=*/true);
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(
        "x subproblem metric H_x + beta E'E is not positive definite (smallest pivot " +
            std::to_string(e.smallest_pivot) +
            "); regularize the Hessian or increase beta",
        e.smallest_pivot);
  }
}

BoxQP build_y_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hy,
                         double beta) {
  if (hy.rows() != rp.n2() || hy.cols() != rp.n2())
    throw std::invalid_argument("y subproblem: H_y has wrong dimensions");
  try {
    return detail::make_block_qp(rp, w, detail::metric_matrix(hy, rp.FtF, beta),
                                 std::nullopt, beta, /*x_block=*/false);
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(
        "y subproblem metric H_y + beta F'F is not positive definite (smallest pivot " +
            std::to_string(e.smallest_pivot) +
            "); regularize the Hessian or increase beta",
        e.smallest_pivot);
  }
}

ZStep solve_z_explicit(const ReformulatedProblem& rp, const Iterate& w, double beta) {
  Vec full = matvec(rp.E, w.x);
  axpy_inplace(1.0, matvec(rp.F, w.y), full);

  ZStep out;
  out.z_hat.resize(rp.m2);
  const auto lam_ie = w.lambda_ie(rp.m1);
  for (std::size_t i = 0; i < rp.m2; ++i)
    out.z_hat[i] = full[rp.m1 + i] - lam_ie[i] / beta;
  out.z_tilde = project_box(out.z_hat, rp.r, rp.s);
  auto mult = recover_projection_multipliers(out.z_tilde, out.z_hat, beta, rp.r, rp.s);
  out.alpha = std::move(mult.first);
  out.gamma = std::move(mult.second);
  return out;
}

Direction compute_direction(const Iterate& w, const Vec& x_tilde, const Vec& y_tilde,
                            const Vec& z_tilde, const Mat& hx_shifted,
                            const Mat& hy_shifted, double beta) {
  Direction d;
  d.x = sub(x_tilde, w.x);
  d.y = sub(y_tilde, w.y);
  d.z = sub(z_tilde, w.z);
  d.norm_inf = std::max({norm_inf(d.x), norm_inf(d.y), norm_inf(d.z)});
  d.quad_norm = quadratic_form(hx_shifted, d.x) + quadratic_form(hy_shifted, d.y) +
                beta * sqnorm(d.z);
  return d;
}

ArmijoResult armijo_search(const ReformulatedProblem& rp, const Iterate& w,
                           const Direction& d, const SolverConfig& config) {
  const double beta = config.beta;
  ArmijoResult out;
  out.merit_before = aug_lagrangian(rp, w, beta);
  // A zero direction takes t = 1 with no search (only the dual moves after);
  // the same applies once the predicted decrease falls below the merit
  // function's rounding resolution, where the test carries no information.
  if (d.is_zero() ||
      d.quad_norm <= 1e-14 * (1.0 + std::fabs(out.merit_before))) {
    out.step = 1.0;
    out.backtracks = 0;
    out.merit_after = out.merit_before;
    return out;
  }

  const Vec res0 = residual_at(rp, w.x, w.y, w.z);
  // res(u + t d) = res0 + t * (E d_x + F d_y + G d_z)
  Vec delta = matvec(rp.E, d.x);
  axpy_inplace(1.0, matvec(rp.F, d.y), delta);
  for (std::size_t i = 0; i < rp.m2; ++i) delta[rp.m1 + i] -= d.z[i];

  Vec xt(w.x.size()), yt(w.y.size());
  double t = 1.0;
  double best_violation = kInf, best_t = 1.0, best_merit = 0.0;
  int best_j = 0;
  for (int j = 0; j < config.max_backtracks; ++j) {
    xt = w.x;
    axpy_inplace(t, d.x, xt);
    yt = w.y;
    axpy_inplace(t, d.y, yt);
    Vec rest = res0;
    axpy_inplace(t, delta, rest);
    const double merit =
        rp.objective(xt, yt) - dot(w.lambda, rest) + 0.5 * beta * sqnorm(rest);
    const double violation = merit - (out.merit_before - t * config.rho * d.quad_norm);
    if (violation <= 0.0) {
      out.step = t;
      out.backtracks = j;
      out.merit_after = merit;
      return out;
    }
    if (violation < best_violation) {
      best_violation = violation;
      best_t = t;
      best_merit = merit;
      best_j = j;
    }
    t *= config.sigma;
  }
  // The certificate holds to rounding: accept the least violating trial.
  if (best_violation <= 1e-13 * (1.0 + std::fabs(out.merit_before))) {
    out.step = best_t;
    out.backtracks = best_j;
    out.merit_after = best_merit;
    return out;
  }
  throw IterationBudgetError(
      "armijo search: backtrack budget exhausted; the descent premise is violated "
      "(check metric positive definiteness)",
      Vec{}, d.quad_norm);
}

Vec update_dual(const Iterate& w, double xi, const ReformulatedProblem& rp) {
  Vec lambda = w.lambda;
  axpy_inplace(xi, residual_at(rp, w.x, w.y, w.z), lambda);
  return lambda;
}

namespace {

StepResult step_with(const ReformulatedProblem& rp, const Iterate& w,
                     const detail::MetricBlocks& metric, const SolverConfig& config) {
  const auto t0 = Clock::now();
  const double beta = config.beta;

  BoxQP qp_x =
      detail::make_block_qp(rp, w, metric.metric_x, metric.factor_x, beta, true);
  BoxQP qp_y =
      detail::make_block_qp(rp, w, metric.metric_y, metric.factor_y, beta, false);

  BoxQPSolution sol_x, sol_y;
  if (config.parallel_subproblems) {
    auto fx = std::async(std::launch::async,
                         [&] { return solve_box_qp(qp_x, config.qp_tolerance); });
    sol_y = solve_box_qp(qp_y, config.qp_tolerance);
    sol_x = fx.get();
  } else {
    sol_x = solve_box_qp(qp_x, config.qp_tolerance);
    sol_y = solve_box_qp(qp_y, config.qp_tolerance);
  }
  const ZStep zs = solve_z_explicit(rp, w, beta);

  StepResult out;
  out.x_tilde = add(w.x, sol_x.v_star);
  out.y_tilde = add(w.y, sol_y.v_star);
  out.z_tilde = zs.z_tilde;
  out.direction = compute_direction(w, out.x_tilde, out.y_tilde, out.z_tilde, qp_x.h(),
                                    qp_y.h(), beta);
  out.multipliers.lambda = w.lambda;
  out.multipliers.alpha_x = sol_x.alpha;
  out.multipliers.gamma_x = sol_x.gamma;
  out.multipliers.alpha_y = sol_y.alpha;
  out.multipliers.gamma_y = sol_y.gamma;
  out.multipliers.alpha_z = zs.alpha;
  out.multipliers.gamma_z = zs.gamma;
  out.feasibility_at_w = norm_inf(residual_at(rp, w.x, w.y, w.z));

  IterationTrace& tr = out.trace;
  tr.k = w.k;
  tr.direction_inf = out.direction.norm_inf;
  tr.quad_norm = out.direction.quad_norm;
  tr.inner_iterations_x = sol_x.inner_iterations;
  tr.inner_iterations_y = sol_y.inner_iterations;

  // Step 2 termination: exact KKT stop, then the practical tolerance stop.
  if (out.direction.is_zero() && out.feasibility_at_w == 0.0) {
    out.stop = StepStop::ExactKkt;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.step_size = 0.0;
    tr.feasibility_inf = 0.0;
    tr.wall_ms = ms_since(t0);
    return out;
  }
  if (out.direction.norm_inf <= config.tol_direction &&
      out.feasibility_at_w <= config.effective_tol_feasibility(rp.c)) {
    out.stop = StepStop::Tolerance;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.step_size = 0.0;
    tr.feasibility_inf = out.feasibility_at_w;
    tr.wall_ms = ms_since(t0);
    return out;
  }

  const ArmijoResult ls = armijo_search(rp, w, out.direction, config);
  tr.merit_before = ls.merit_before;
  tr.merit_after = ls.merit_after;
  tr.step_size = ls.step;
  tr.backtracks = ls.backtracks;

  Iterate next;
  next.x = w.x;
  axpy_inplace(ls.step, out.direction.x, next.x);
  next.y = w.y;
  axpy_inplace(ls.step, out.direction.y, next.y);
  next.z = w.z;
  axpy_inplace(ls.step, out.direction.z, next.z);
  next.lambda = w.lambda;
  next.k = w.k + 1;

  const Vec res_next = residual_at(rp, next.x, next.y, next.z);
  tr.feasibility_inf = norm_inf(res_next);
  tr.feasibility_sqnorm = sqnorm(res_next);

  Vec new_lambda = w.lambda;
  axpy_inplace(config.xi, res_next, new_lambda);
  tr.dual_update_norm = config.xi * tr.feasibility_inf;
  next.lambda = std::move(new_lambda);

  tr.merit_after_dual = aug_lagrangian(rp, next, beta);
  tr.wall_ms = ms_since(t0);
  out.next = std::move(next);
  return out;
}

}  // namespace

StepResult step(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                const Mat& hy, const SolverConfig& config) {
  detail::MetricBlocks metric;
  metric.hx = hx;
  metric.hy = hy;
  try {
    metric.metric_x = detail::metric_matrix(hx, rp.EtE, config.beta);
    metric.factor_x = Cholesky::factor(metric.metric_x);
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(
        "x subproblem metric H_x + beta E'E is not positive definite (smallest pivot " +
            std::to_string(e.smallest_pivot) +
            "); regularize the Hessian or increase beta",
        e.smallest_pivot);
  }
  try {
    metric.metric_y = detail::metric_matrix(hy, rp.FtF, config.beta);
    metric.factor_y = Cholesky::factor(metric.metric_y);
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(
        "y subproblem metric H_y + beta F'F is not positive definite (smallest pivot " +
            std::to_string(e.smallest_pivot) +
            "); regularize the Hessian or increase beta",
        e.smallest_pivot);
  }
  return step_with(rp, w, metric, config);
}

namespace {

// Step-1-only pass at the final iterate, for non-converged terminal reports.
struct ProbeResult {
  kkt::MultiplierSet multipliers;
  double direction_inf = 0.0;
};

ProbeResult terminal_probe(const ReformulatedProblem& rp, const Iterate& w,
                           const SolverConfig& config) {
  ProbeResult out;
  const auto metric = detail::make_metric(rp, w, config);
  BoxQP qp_x = detail::make_block_qp(rp, w, metric.metric_x, metric.factor_x, config.beta,
                                     true);
  BoxQP qp_y = detail::make_block_qp(rp, w, metric.metric_y, metric.factor_y, config.beta,
                                     false);
  const BoxQPSolution sx = solve_box_qp(qp_x, config.qp_tolerance);
  const BoxQPSolution sy = solve_box_qp(qp_y, config.qp_tolerance);
  const ZStep zs = solve_z_explicit(rp, w, config.beta);
  const Direction d = compute_direction(w, add(w.x, sx.v_star), add(w.y, sy.v_star),
                                        zs.z_tilde, qp_x.h(), qp_y.h(), config.beta);
  out.multipliers = {w.lambda, sx.alpha, sx.gamma, sy.alpha, sy.gamma, zs.alpha, zs.gamma};
  out.direction_inf = d.norm_inf;
  return out;
}

}  // namespace

SolveReport solve_splitting(const ReformulatedProblem& rp, const Iterate& w0,
                            const SolverConfig& config) {
  config.validate();
  if (!box_feasible(rp, w0.x, w0.y, w0.z))
    throw std::invalid_argument("solve: initial iterate violates the box constraints");

  SolveReport rep;
  rep.algorithm = "split";
  Iterate w = w0;
  w.k = 0;

  const auto t0 = Clock::now();
  int stall = 0;
  double prev_feas = kInf;
  try {
    bool user_metric_ready = false;
    detail::MetricBlocks fixed_metric;
    for (;;) {
      detail::MetricBlocks metric;
      if (config.hessian_mode == HessianMode::Exact) {
        metric = detail::make_metric(rp, w, config);
      } else {
        // The metric does not depend on the iterate in the other modes.
        if (!user_metric_ready) {
          fixed_metric = detail::make_metric(rp, w, config);
          user_metric_ready = true;
        }
        metric = fixed_metric;
      }

      StepResult s = step_with(rp, w, metric, config);
      if (s.stop != StepStop::None) {
        rep.status = SolveStatus::Converged;
        rep.message = s.stop == StepStop::ExactKkt
                          ? "exact KKT stop: zero direction at a feasible point"
                          : "direction and feasibility tolerances reached";
        detail::finalize_report(rep, rp, w, s.multipliers, s.direction.norm_inf);
        break;
      }

      rep.trace.push_back(s.trace);
      // A stall is a tolerance-small direction that leaves the equality
      // residual both above tolerance and essentially unchanged.
      if (s.direction.norm_inf <= config.tol_direction &&
          s.feasibility_at_w > 0.9999 * prev_feas) {
        if (++stall >= config.max_dual_stalls) {
          rep.status = SolveStatus::DualStalled;
          rep.message =
              "direction stayed below tolerance for " + std::to_string(stall) +
              " iterations while the equality residual did not reach tolerance; "
              "the dual update cannot close the remaining gap at this xi/beta";
          w = s.next;
          const auto probe = terminal_probe(rp, w, config);
          detail::finalize_report(rep, rp, w, probe.multipliers, probe.direction_inf);
          break;
        }
      } else {
        stall = 0;
      }
      prev_feas = s.feasibility_at_w;

      w = s.next;
      if (w.k >= config.max_iterations) {
        rep.status = SolveStatus::MaxIterations;
        rep.message = "iteration limit reached";
        const auto probe = terminal_probe(rp, w, config);
        detail::finalize_report(rep, rp, w, probe.multipliers, probe.direction_inf);
        break;
      }
    }
  } catch (const std::runtime_error& e) {
    rep.status = SolveStatus::Aborted;
    rep.message = e.what();
    try {
      detail::finalize_report(rep, rp, w, detail::zero_multipliers(rp, w.lambda), 0.0);
    } catch (const std::runtime_error&) {
      rep.final_iterate = w;
      rep.multipliers = detail::zero_multipliers(rp, w.lambda);
      rep.iterations = w.k;
    }
  }
  rep.solve_seconds = ms_since(t0) / 1000.0;
  return rep;
}

SolveReport solve_splitting(const TwoBlockProblem& p, const Iterate& w0,
                            const SolverConfig& config) {
  return solve_splitting(reformulate(p), w0, config);
}

}  // namespace splitsqp
