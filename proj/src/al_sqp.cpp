#include "splitsqp/al_sqp.hpp"

#include <chrono>
#include <cmath>

namespace splitsqp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec residual_at(const ReformulatedProblem& rp, const Vec& x, const Vec& y, const Vec& z) {
  Vec res = rp.apply_constraints(x, y, z);
  axpy_inplace(-1.0, rp.c, res);
  return res;
}

struct Stacked {
  std::size_t n1, n2, m2, n;
};

Stacked sizes(const ReformulatedProblem& rp) {
  return {rp.n1(), rp.n2(), rp.m2, rp.n1() + rp.n2() + rp.m2};
}

Vec stack_boxes_lower(const ReformulatedProblem& rp, const Iterate& w) {
  const auto s = sizes(rp);
  Vec lo(s.n);
  for (std::size_t i = 0; i < s.n1; ++i) lo[i] = rp.l[i] - w.x[i];
  for (std::size_t i = 0; i < s.n2; ++i) lo[s.n1 + i] = rp.p[i] - w.y[i];
  for (std::size_t i = 0; i < s.m2; ++i) lo[s.n1 + s.n2 + i] = rp.r[i] - w.z[i];
  return lo;
}

Vec stack_boxes_upper(const ReformulatedProblem& rp, const Iterate& w) {
  const auto s = sizes(rp);
  Vec hi(s.n);
  for (std::size_t i = 0; i < s.n1; ++i) hi[i] = rp.u[i] - w.x[i];
  for (std::size_t i = 0; i < s.n2; ++i) hi[s.n1 + i] = rp.q[i] - w.y[i];
  for (std::size_t i = 0; i < s.m2; ++i) hi[s.n1 + s.n2 + i] = rp.s[i] - w.z[i];
  return hi;
}

Vec stacked_gradient(const ReformulatedProblem& rp, const Iterate& w, double beta) {
  const Vec res = residual_at(rp, w.x, w.y, w.z);
  Vec t = w.lambda;
  axpy_inplace(-beta, res, t);

  Vec gx = rp.f.grad(w.x);
  axpy_inplace(-1.0, rp.apply_Et(t), gx);
  Vec gy = rp.theta.grad(w.y);
  axpy_inplace(-1.0, rp.apply_Ft(t), gy);
  Vec gz = rp.apply_Gt(t);
  scale_inplace(-1.0, gz);
  return concat(gx, gy, gz);
}

void add_block(Mat& h, const Mat& block, std::size_t row0, std::size_t col0) {
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j) h(row0 + i, col0 + j) += block(i, j);
}

}  // namespace

namespace detail {

Mat coupling_matrix(const ReformulatedProblem& rp, double beta) {
  const auto s = sizes(rp);
  Mat h(s.n, s.n);

  Mat ete = rp.EtE;
  kernels::ops().scal(beta, ete.data(), ete.rows() * ete.cols());
  add_block(h, ete, 0, 0);
  Mat ftf = rp.FtF;
  kernels::ops().scal(beta, ftf.data(), ftf.rows() * ftf.cols());
  add_block(h, ftf, s.n1, s.n1);

  Mat etf = mul_tn(rp.E, rp.F);
  for (std::size_t i = 0; i < s.n1; ++i)
    for (std::size_t j = 0; j < s.n2; ++j) {
      const double v = beta * etf(i, j);
      h(i, s.n1 + j) += v;
      h(s.n1 + j, i) += v;
    }

  // E'G = -C' and F'G = -D' read directly off the stacked rows.
  for (std::size_t i = 0; i < s.n1; ++i)
    for (std::size_t j = 0; j < s.m2; ++j) {
      const double v = -beta * rp.E(rp.m1 + j, i);
      h(i, s.n1 + s.n2 + j) += v;
      h(s.n1 + s.n2 + j, i) += v;
    }
  for (std::size_t i = 0; i < s.n2; ++i)
    for (std::size_t j = 0; j < s.m2; ++j) {
      const double v = -beta * rp.F(rp.m1 + j, i);
      h(s.n1 + i, s.n1 + s.n2 + j) += v;
      h(s.n1 + s.n2 + j, s.n1 + i) += v;
    }

  // G'G = I
  for (std::size_t j = 0; j < s.m2; ++j) h(s.n1 + s.n2 + j, s.n1 + s.n2 + j) += beta;
  return h;
}

}  // namespace detail

BoxQP build_full_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                            const Mat& hy, double beta) {
  const auto s = sizes(rp);
  if (hx.rows() != s.n1 || hx.cols() != s.n1 || hy.rows() != s.n2 || hy.cols() != s.n2)
    throw std::invalid_argument("full subproblem: metric block dimensions mismatch");

  Mat h = detail::coupling_matrix(rp, beta);
  add_block(h, hx, 0, 0);
  add_block(h, hy, s.n1, s.n1);

  try {
    return BoxQP(std::move(h), stacked_gradient(rp, w, beta), stack_boxes_lower(rp, w),
                 stack_boxes_upper(rp, w));
  } catch (const NotPositiveDefiniteError& e) {
    throw NotPositiveDefiniteError(
        "full subproblem metric diag(H_x,H_y,0) + beta M'M is not positive definite "
        "(smallest pivot " +
            std::to_string(e.smallest_pivot) +
            "); regularize the Hessians or increase beta",
        e.smallest_pivot);
  }
}

namespace {

struct BaselineStep {
  Iterate next;
  IterationTrace trace;
  Direction direction;
  StepStop stop = StepStop::None;
  double feasibility_at_w = 0.0;
  kkt::MultiplierSet multipliers;
  Vec tilde;  // stacked subproblem solution in d-space
};

// Metric blocks for the baseline, shifted until the coupled matrix factors.
struct BaselineMetric {
  Mat h;  // full coupled metric
  Cholesky factor;
  Mat hx, hy;
};

BaselineMetric baseline_metric(const ReformulatedProblem& rp, const Iterate& w,
                               const SolverConfig& config, const Mat& coupling) {
  const auto s = sizes(rp);
  BaselineMetric out;
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
      out.hx = Mat(s.n1, s.n1);
      out.hy = Mat(s.n2, s.n2);
      for (std::size_t i = 0; i < s.n1; ++i) out.hx(i, i) = config.identity_shift;
      for (std::size_t i = 0; i < s.n2; ++i) out.hy(i, i) = config.identity_shift;
      break;
  }

  double tau = 0.0;
  for (;;) {
    out.h = coupling;
    add_block(out.h, out.hx, 0, 0);
    add_block(out.h, out.hy, s.n1, s.n1);
    if (auto c = Cholesky::try_factor(out.h)) {
      out.factor = *std::move(c);
      return out;
    }
    const double next = tau == 0.0 ? 1e-6 : 2.0 * tau;
    for (std::size_t i = 0; i < s.n1; ++i) out.hx(i, i) += next - tau;
    for (std::size_t i = 0; i < s.n2; ++i) out.hy(i, i) += next - tau;
    tau = next;
    if (tau > 1e12)
      throw NotPositiveDefiniteError(
          "baseline metric: Levenberg regularization failed to reach positive "
          "definiteness",
          0.0);
  }
}

BaselineStep baseline_step(const ReformulatedProblem& rp, const Iterate& w,
                           const BaselineMetric& metric, const SolverConfig& config,
                           const Vec* warm) {
  const auto t0 = Clock::now();
  const auto s = sizes(rp);
  const double beta = config.beta;

  BoxQP qp(metric.h, stacked_gradient(rp, w, beta), stack_boxes_lower(rp, w),
           stack_boxes_upper(rp, w), metric.factor);

  BoxQPSolution sol = warm ? solve_box_qp(qp, config.qp_tolerance,
                                          project_box(*warm, qp.lower(), qp.upper()))
                           : solve_box_qp(qp, config.qp_tolerance);

  BaselineStep out;
  out.tilde = sol.v_star;

  Direction d;
  d.x = Vec(sol.v_star.begin(), sol.v_star.begin() + static_cast<long>(s.n1));
  d.y = Vec(sol.v_star.begin() + static_cast<long>(s.n1),
            sol.v_star.begin() + static_cast<long>(s.n1 + s.n2));
  d.z = Vec(sol.v_star.begin() + static_cast<long>(s.n1 + s.n2), sol.v_star.end());
  d.norm_inf = norm_inf(sol.v_star);
  d.quad_norm = quadratic_form(metric.h, sol.v_star);
  out.direction = d;

  out.multipliers.lambda = w.lambda;
  out.multipliers.alpha_x = Vec(sol.alpha.begin(), sol.alpha.begin() + static_cast<long>(s.n1));
  out.multipliers.gamma_x = Vec(sol.gamma.begin(), sol.gamma.begin() + static_cast<long>(s.n1));
  out.multipliers.alpha_y = Vec(sol.alpha.begin() + static_cast<long>(s.n1),
                                sol.alpha.begin() + static_cast<long>(s.n1 + s.n2));
  out.multipliers.gamma_y = Vec(sol.gamma.begin() + static_cast<long>(s.n1),
                                sol.gamma.begin() + static_cast<long>(s.n1 + s.n2));
  out.multipliers.alpha_z = Vec(sol.alpha.begin() + static_cast<long>(s.n1 + s.n2), sol.alpha.end());
  out.multipliers.gamma_z = Vec(sol.gamma.begin() + static_cast<long>(s.n1 + s.n2), sol.gamma.end());
  out.feasibility_at_w = norm_inf(residual_at(rp, w.x, w.y, w.z));

  IterationTrace& tr = out.trace;
  tr.k = w.k;
  tr.direction_inf = d.norm_inf;
  tr.quad_norm = d.quad_norm;
  tr.inner_iterations_x = sol.inner_iterations;

  if (d.is_zero() && out.feasibility_at_w == 0.0) {
    out.stop = StepStop::ExactKkt;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
  }
  if (d.norm_inf <= config.tol_direction &&
      out.feasibility_at_w <= config.effective_tol_feasibility(rp.c)) {
    out.stop = StepStop::Tolerance;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.feasibility_inf = out.feasibility_at_w;
    tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
  }

  const ArmijoResult ls = armijo_search(rp, w, d, config);
  tr.merit_before = ls.merit_before;
  tr.merit_after = ls.merit_after;
  tr.step_size = ls.step;
  tr.backtracks = ls.backtracks;

  Iterate next;
  next.x = w.x;
  axpy_inplace(ls.step, d.x, next.x);
  next.y = w.y;
  axpy_inplace(ls.step, d.y, next.y);
  next.z = w.z;
  axpy_inplace(ls.step, d.z, next.z);
  next.k = w.k + 1;

  const Vec res_next = residual_at(rp, next.x, next.y, next.z);
  tr.feasibility_inf = norm_inf(res_next);
  tr.feasibility_sqnorm = sqnorm(res_next);
  next.lambda = w.lambda;
  axpy_inplace(config.xi, res_next, next.lambda);
  tr.dual_update_norm = config.xi * tr.feasibility_inf;

  tr.merit_after_dual = aug_lagrangian(rp, next, beta);
  tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  out.next = std::move(next);
  return out;
}

// Subproblem-only pass for terminal reporting on non-converged runs.
struct BaselineProbe {
  kkt::MultiplierSet multipliers;
  double direction_inf = 0.0;
};

BaselineProbe baseline_probe(const ReformulatedProblem& rp, const Iterate& w,
                             const SolverConfig& config, const Mat& coupling) {
  const auto s = sizes(rp);
  const BaselineMetric metric = baseline_metric(rp, w, config, coupling);
  BoxQP qp(metric.h, stacked_gradient(rp, w, config.beta), stack_boxes_lower(rp, w),
           stack_boxes_upper(rp, w), metric.factor);
  const BoxQPSolution sol = solve_box_qp(qp, config.qp_tolerance);
  BaselineProbe out;
  out.direction_inf = norm_inf(sol.v_star);
  out.multipliers.lambda = w.lambda;
  out.multipliers.alpha_x = Vec(sol.alpha.begin(), sol.alpha.begin() + static_cast<long>(s.n1));
  out.multipliers.gamma_x = Vec(sol.gamma.begin(), sol.gamma.begin() + static_cast<long>(s.n1));
  out.multipliers.alpha_y = Vec(sol.alpha.begin() + static_cast<long>(s.n1),
                                sol.alpha.begin() + static_cast<long>(s.n1 + s.n2));
  out.multipliers.gamma_y = Vec(sol.gamma.begin() + static_cast<long>(s.n1),
                                sol.gamma.begin() + static_cast<long>(s.n1 + s.n2));
  out.multipliers.alpha_z = Vec(sol.alpha.begin() + static_cast<long>(s.n1 + s.n2), sol.alpha.end());
  out.multipliers.gamma_z = Vec(sol.gamma.begin() + static_cast<long>(s.n1 + s.n2), sol.gamma.end());
  return out;
}

}  // namespace

SolveReport solve_baseline(const ReformulatedProblem& rp, const Iterate& w0,
                           const SolverConfig& config) {
  config.validate();
  if (!box_feasible(rp, w0.x, w0.y, w0.z))
    throw std::invalid_argument("solve: initial iterate violates the box constraints");

  SolveReport rep;
  rep.algorithm = "al";
  Iterate w = w0;
  w.k = 0;

  const auto t0 = Clock::now();
  int stall = 0;
  double prev_feas = kInf;
  try {
    const Mat coupling = detail::coupling_matrix(rp, config.beta);
    Vec warm;
    bool have_warm = false;
    for (;;) {
      const BaselineMetric metric = baseline_metric(rp, w, config, coupling);
      BaselineStep s =
          baseline_step(rp, w, metric, config, have_warm ? &warm : nullptr);
      if (s.stop != StepStop::None) {
        rep.status = SolveStatus::Converged;
        rep.message = s.stop == StepStop::ExactKkt
                          ? "exact KKT stop: zero direction at a feasible point"
                          : "direction and feasibility tolerances reached";
        detail::finalize_report(rep, rp, w, s.multipliers, s.direction.norm_inf);
        break;
      }
      rep.trace.push_back(s.trace);

      // Warm start the next coupled QP from the step just taken: the optimal
      // d shrinks by the accepted step along itself.
      warm = s.tilde;
      axpy_inplace(-s.trace.step_size, s.tilde, warm);
      have_warm = true;

      if (s.direction.norm_inf <= config.tol_direction &&
          s.feasibility_at_w > 0.9999 * prev_feas) {
        if (++stall >= config.max_dual_stalls) {
          rep.status = SolveStatus::DualStalled;
          rep.message = "direction stayed below tolerance while the equality residual "
                        "did not reach tolerance";
          w = s.next;
          const BaselineProbe probe = baseline_probe(rp, w, config, coupling);
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
        const BaselineProbe probe = baseline_probe(rp, w, config, coupling);
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
  rep.solve_seconds = seconds_since(t0);
  return rep;
}

SolveReport solve_baseline(const TwoBlockProblem& p, const Iterate& w0,
                           const SolverConfig& config) {
  return solve_baseline(reformulate(p), w0, config);
}

}  // namespace splitsqp
