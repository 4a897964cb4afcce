#pragma once

#include <functional>
#include <variant>

#include "splitsqp/splitting.hpp"

namespace splitsqp {

struct BoxSetDesc {
  Vec lo, hi;
};
struct AffineSetDesc {
  Mat m;
  Vec h;
};
struct BallSetDesc {
  Vec center;
  double radius = 1.0;
};
struct SimplexSetDesc {
  std::size_t dim = 0;
  double scale = 1.0;
};

/// Built-in families serialize; custom projections are API-only.
using SetDescriptor =
    std::variant<std::monostate, BoxSetDesc, AffineSetDesc, BallSetDesc, SimplexSetDesc>;

/// Nonempty closed convex set accessed through its Euclidean projection.
/// The projection callback must be re-entrant.
struct ProjectableSet {
  std::size_t dim = 0;
  std::function<Vec(const Vec&)> project;
  SetDescriptor descriptor;
};

/// Descriptor serialization for the built-in families; custom projections
/// (monostate descriptors) are API-only and refuse to serialize.
std::string set_descriptor_to_json(const ProjectableSet& s, int indent = -1);
ProjectableSet set_from_descriptor_json(const std::string& text);

ProjectableSet make_box_set(Vec lo, Vec hi);
/// Affine manifold {v : M v = h}; requires M with full row rank (closed-form
/// projection through a Cholesky factor of M M').
ProjectableSet make_affine_set(Mat m, Vec h);
ProjectableSet make_ball_set(Vec center, double radius);
/// {v >= 0, sum v = scale}.
ProjectableSet make_simplex_set(std::size_t dim, double scale = 1.0);
/// The translated set S - shift (projection via P(w + shift) - shift).
ProjectableSet translate_set(ProjectableSet s, Vec shift);

struct SetSubproblemResult {
  Vec v_star;
  int iterations = 0;
  double fixed_point_residual = 0.0;  // |v - P(v - grad/L)|_inf at v_star
};

/// Minimizes g'v + (1/2) v'Hv over the set by accelerated projected gradient
/// with step 1/L (L from power iteration on H) and a monotone restart.
/// Throws IterationBudgetError with the best iterate when the budget runs out.
SetSubproblemResult solve_set_subproblem(const Mat& h, const Vec& g,
                                         const ProjectableSet& set, double tol,
                                         int budget = 200000);
/// Convenience overload on a built x/y subproblem; the quadratic is taken from
/// the BoxQP and its box is replaced by the set.
SetSubproblemResult solve_set_subproblem(const BoxQP& qp, const ProjectableSet& set,
                                         double tol, int budget = 200000);

/// Projected stationarity of the set-constrained system at w: the largest of
/// |x - P_X(x - (grad f - E'lambda))|_inf, the y analogue, the z residual
/// |z - P_[r,s](z - lambda_ie)|_inf and the equality residual.
double stationarity_residual_B(const ReformulatedProblem& rp, const Iterate& w,
                               const ProjectableSet& set_x, const ProjectableSet& set_y);

/// Algorithm A's loop with the x/y subproblems solved over general convex sets
/// through projections. Box constraints l,u,p,q of the problem are ignored in
/// favor of the sets; z keeps its box and explicit update.
SolveReport solve_with_sets(const TwoBlockProblem& p, const ProjectableSet& set_x,
                            const ProjectableSet& set_y, const Iterate& w0,
                            const SolverConfig& config);
SolveReport solve_with_sets(const ReformulatedProblem& rp, const ProjectableSet& set_x,
                            const ProjectableSet& set_y, const Iterate& w0,
                            const SolverConfig& config);

}  // namespace splitsqp
