#pragma once

#include <string>
#include <vector>

#include "splitsqp/box_qp.hpp"
#include "splitsqp/kkt.hpp"
#include "splitsqp/problem.hpp"

namespace splitsqp {

/// Search direction d = (x~ - x, y~ - y, z~ - z) with its norm in the block
/// metric diag(H_x + beta E'E, H_y + beta F'F, beta I).
struct Direction {
  Vec x, y, z;
  double norm_inf = 0.0;
  double quad_norm = 0.0;  // |d|^2_{H_u}

  bool is_zero() const { return norm_inf == 0.0; }
};

struct IterationTrace {
  int k = 0;
  double merit_before = 0.0;      // L_beta(u_k, lambda_k)
  double merit_after = 0.0;       // L_beta(u_{k+1}, lambda_k) from the accepted trial
  double merit_after_dual = 0.0;  // L_beta(u_{k+1}, lambda_{k+1})
  double step_size = 0.0;
  int backtracks = 0;
  double direction_inf = 0.0;
  double quad_norm = 0.0;
  double feasibility_inf = 0.0;     // |res(u_{k+1})|_inf
  double feasibility_sqnorm = 0.0;  // |res(u_{k+1})|_2^2
  double dual_update_norm = 0.0;
  int inner_iterations_x = 0;
  int inner_iterations_y = 0;
  double wall_ms = 0.0;
};

enum class SolveStatus { Converged, MaxIterations, DualStalled, Aborted };
const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::Aborted;
  std::string message;
  std::string algorithm;  // "split", "al" or "set-ext"
  int iterations = 0;
  double objective = 0.0;
  double feasibility_inf = 0.0;
  double direction_inf = 0.0;
  double solve_seconds = 0.0;
  Iterate final_iterate;
  kkt::MultiplierSet multipliers;
  kkt::ResidualBreakdown kkt_reformulated;
  kkt::ResidualBreakdown kkt_original;
  double stationarity_inf = 0.0;  // set-extension projected stationarity
  std::vector<IterationTrace> trace;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// x-subproblem in the shifted variable d = x - x_k:
///   H = H_x + beta E'E,  g = grad f(x_k) - E'(lambda - beta res_k),
///   box [l - x_k, u - x_k].
BoxQP build_x_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                         double beta);
BoxQP build_y_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hy,
                         double beta);

/// Explicit z-step: z~ = P_[r,s](C x_k + D y_k - lambda_ie / beta) with the
/// projection multipliers of its KKT system.
struct ZStep {
  Vec z_tilde;
  Vec z_hat;
  Vec alpha, gamma;
};
ZStep solve_z_explicit(const ReformulatedProblem& rp, const Iterate& w, double beta);

Direction compute_direction(const Iterate& w, const Vec& x_tilde, const Vec& y_tilde,
                            const Vec& z_tilde, const Mat& hx_shifted,
                            const Mat& hy_shifted, double beta);

struct ArmijoResult {
  double step = 1.0;
  int backtracks = 0;
  double merit_before = 0.0;
  double merit_after = 0.0;
};

/// Backtracking search: largest t in {1, sigma, sigma^2, ...} with
/// L_beta(u + t d, lambda) <= L_beta(u, lambda) - t rho |d|^2_{H_u}.
/// d == 0 returns t = 1 without searching. Throws IterationBudgetError when
/// the backtrack budget is exhausted (descent premise violated).
ArmijoResult armijo_search(const ReformulatedProblem& rp, const Iterate& w,
                           const Direction& d, const SolverConfig& config);

/// lambda + xi * (E x + F y + G z - c) evaluated at w's primal point.
Vec update_dual(const Iterate& w, double xi, const ReformulatedProblem& rp);

enum class StepStop { None, ExactKkt, Tolerance };

struct StepResult {
  Iterate next;
  IterationTrace trace;
  Direction direction;
  StepStop stop = StepStop::None;
  double feasibility_at_w = 0.0;
  kkt::MultiplierSet multipliers;  // subproblem multipliers at w, lambda = w.lambda
  Vec x_tilde, y_tilde, z_tilde;
};

/// One full iteration: subproblems -> direction -> termination test ->
/// Armijo -> primal and dual update. When a stop triggers, next == w.
StepResult step(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                const Mat& hy, const SolverConfig& config);

SolveReport solve_splitting(const TwoBlockProblem& p, const Iterate& w0,
                            const SolverConfig& config);
SolveReport solve_splitting(const ReformulatedProblem& rp, const Iterate& w0,
                            const SolverConfig& config);

namespace detail {

/// Metric blocks for the current iteration per the configured Hessian mode,
/// Levenberg-shifted (tau I, tau doubled from 1e-6) until H + beta Gram is
/// positive definite. Carries the shifted metrics and their factors so the
/// subproblem build does not refactor.
struct MetricBlocks {
  Mat hx, hy;              // (possibly shifted) Hessian blocks
  Mat metric_x, metric_y;  // hx + beta E'E, hy + beta F'F
  Cholesky factor_x, factor_y;
  double shift_x = 0.0, shift_y = 0.0;
};
MetricBlocks make_metric(const ReformulatedProblem& rp, const Iterate& w,
                         const SolverConfig& config);

Mat metric_matrix(const Mat& h, const Mat& gram, double beta);  // h + beta*gram

/// x/y subproblem built from a precomputed metric + factor.
BoxQP make_block_qp(const ReformulatedProblem& rp, const Iterate& w, Mat metric,
                    std::optional<Cholesky> factor, double beta, bool x_block);

/// Fill the terminal fields of a report (objective, residuals, KKT breakdowns).
void finalize_report(SolveReport& rep, const ReformulatedProblem& rp, const Iterate& w,
                     const kkt::MultiplierSet& multipliers, double direction_inf);

kkt::MultiplierSet zero_multipliers(const ReformulatedProblem& rp, const Vec& lambda);

}  // namespace detail

}  // namespace splitsqp
