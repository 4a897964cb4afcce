#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>

#include "splitsqp/linalg.hpp"

namespace splitsqp {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smooth block objective: value, gradient and symmetric Hessian callbacks.
/// Callbacks must be re-entrant; problems are shared across solver runs.
struct SmoothFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

struct QuadraticParams {
  Mat q_mat;       // symmetric
  Vec lin;
  double constant = 0.0;
};

/// sum_i a_i v^3 + b_i v^2 + c_i v, plus a constant term.
struct CubicSeparableParams {
  Vec a, b, c;
  double constant = 0.0;
};

using ObjectiveParams = std::variant<std::monostate, QuadraticParams, CubicSeparableParams>;

struct BlockObjective {
  SmoothFunction fn;
  ObjectiveParams params;  // monostate: custom, not serializable

  double value(const Vec& v) const;  // wraps fn.value with a finite-value check
  Vec grad(const Vec& v) const;
  Mat hess(const Vec& v) const;
};

BlockObjective make_quadratic_objective(Mat q, Vec lin, double constant = 0.0);
BlockObjective make_cubic_separable_objective(Vec a, Vec b, Vec c, double constant = 0.0);
BlockObjective make_custom_objective(SmoothFunction fn);

/// min f(x) + theta(y)
/// s.t. A x + B y = b,  r <= C x + D y <= s,  l <= x <= u,  p <= y <= q.
/// Box entries may be +-inf. Immutable after construction.
struct TwoBlockProblem {
  BlockObjective f, theta;
  Mat A, B, C, D;
  Vec b;
  Vec r, s;  // inequality band (m2)
  Vec l, u;  // x box (n1)
  Vec p, q;  // y box (n2)

  std::size_t n1() const { return l.size(); }
  std::size_t n2() const { return p.size(); }
  std::size_t m1() const { return b.size(); }
  std::size_t m2() const { return r.size(); }

  /// Throws std::invalid_argument naming the offending block on dimension
  /// mismatch or non-ordered bounds (requires r<s, l<u, p<q componentwise).
  void validate() const;
};

/// Slack-reformulated problem: min f(x)+theta(y) s.t. E x + F y + G z = c
/// over the three boxes, with E=[A;C], F=[B;D], G=[0;-I], c=[b;0].
/// This is the object all solver loops consume.
struct ReformulatedProblem {
  BlockObjective f, theta;
  Mat E, F, G;
  Vec c;
  Vec l, u, p, q, r, s;
  std::size_t m1 = 0, m2 = 0;

  // Cached Gram matrices used by every subproblem build.
  Mat EtE, FtF;

  std::size_t n1() const { return l.size(); }
  std::size_t n2() const { return p.size(); }

  /// E x + F y + G z; the bottom m2 rows equal C x + D y - z.
  Vec apply_constraints(const Vec& x, const Vec& y, const Vec& z) const;
  Vec apply_Et(const Vec& v) const { return matvec_t(E, v); }
  Vec apply_Ft(const Vec& v) const { return matvec_t(F, v); }
  /// G^T v, i.e. the negated bottom m2 entries of v.
  Vec apply_Gt(const Vec& v) const;

  double objective(const Vec& x, const Vec& y) const;
};

ReformulatedProblem reformulate(const TwoBlockProblem& p);

/// Primal-dual iterate w_k = (x, y, z, lambda) with lambda stacked as
/// (lambda_e: m1, lambda_ie: m2).
struct Iterate {
  Vec x, y, z;
  Vec lambda;
  int k = 0;

  std::span<const double> lambda_e(std::size_t m1) const {
    return {lambda.data(), m1};
  }
  std::span<const double> lambda_ie(std::size_t m1) const {
    return {lambda.data() + m1, lambda.size() - m1};
  }
};

/// Box-feasible default start: z0 = P_[r,s](C x0 + D y0), lambda0 = ones.
Iterate make_initial_iterate(const ReformulatedProblem& rp, Vec x0, Vec y0);

enum class HessianMode { Exact, User, IdentityShift };

struct SolverConfig {
  double rho = 0.8;             // Armijo decrease fraction, in (0,1)
  double sigma = 0.8;           // backtracking ratio, in (0,1)
  double beta = 2000.0;         // penalty parameter, > 0
  double xi = 0.001;            // dual step length, > 0
  double tol_direction = 0.005; // inf-norm of the search direction
  double tol_feasibility = -1.0; // <= 0 means 1e-4 * (1 + |c|_inf)
  int max_iterations = 500;
  int max_backtracks = 60;
  HessianMode hessian_mode = HessianMode::Exact;
  Mat user_hx, user_hy;         // metric blocks for HessianMode::User
  double identity_shift = 1.0;  // tau for HessianMode::IdentityShift
  double qp_tolerance = 1e-10;  // inner box-QP stationarity tolerance
  int max_dual_stalls = 50;
  bool parallel_subproblems = false;

  // Convex-set extension subproblem solver controls.
  double set_tolerance = 1e-12;
  int set_budget = 200000;

  void validate() const;  // throws std::invalid_argument on bad ranges
  double effective_tol_feasibility(const Vec& c) const {
    return tol_feasibility > 0.0 ? tol_feasibility : 1e-4 * (1.0 + norm_inf(c));
  }
};

/// Augmented Lagrangian merit function
///   L_beta(u, lambda) = f(x)+theta(y) - lambda^T res + (beta/2)|res|^2,
/// res = E x + F y + G z - c.
double aug_lagrangian(const ReformulatedProblem& rp, const Iterate& w, double beta);

/// The completed-square form f+theta + (beta/2)|res - lambda/beta|^2
/// - |lambda|^2/(2 beta); agrees with aug_lagrangian to rounding.
double aug_lagrangian_shifted(const ReformulatedProblem& rp, const Iterate& w, double beta);

struct AugLagrangianGrad {
  Vec x, y, z;
};

/// Block gradients: g_x = grad f - E^T(lambda - beta res), g_y analogous,
/// g_z = -G^T(lambda - beta res).
AugLagrangianGrad aug_lagrangian_grad(const ReformulatedProblem& rp, const Iterate& w,
                                      double beta);

struct FeasibilityResidual {
  Vec residual;    // E x + F y + G z - c
  double inf_norm; // phi_eq
};

FeasibilityResidual feasibility_residual(const ReformulatedProblem& rp, const Iterate& w);

/// True when (x, y, z) satisfies all three boxes (tolerance 0).
bool box_feasible(const ReformulatedProblem& rp, const Vec& x, const Vec& y, const Vec& z);

// ---- serialization (versioned JSON; see problem_json.cpp) ----

std::string problem_to_json(const TwoBlockProblem& p, int indent = -1);
TwoBlockProblem problem_from_json(const std::string& text);
void save_problem(const TwoBlockProblem& p, const std::string& path);
TwoBlockProblem load_problem(const std::string& path);

}  // namespace splitsqp
