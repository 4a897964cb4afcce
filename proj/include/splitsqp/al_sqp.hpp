#pragma once

#include "splitsqp/splitting.hpp"

namespace splitsqp {

/// Coupled Step-1 subproblem of the full-QP baseline, in the shifted variable
/// d = (x, y, z) - (x_k, y_k, z_k):
///   H = diag(H_x, H_y, 0) + beta M'M with M = [E F G],
///   g = stacked merit-function gradient at w,
///   box = the three boxes shifted by the current point.
BoxQP build_full_subproblem(const ReformulatedProblem& rp, const Iterate& w, const Mat& hx,
                            const Mat& hy, double beta);

/// Baseline solver: Algorithm A's outer loop with the coupled subproblem in
/// Step 1. The direction norm uses the coupled metric, i.e. the H above.
SolveReport solve_baseline(const TwoBlockProblem& p, const Iterate& w0,
                           const SolverConfig& config);
SolveReport solve_baseline(const ReformulatedProblem& rp, const Iterate& w0,
                           const SolverConfig& config);

namespace detail {
/// beta * M'M assembled blockwise from E, F and the implicit G.
Mat coupling_matrix(const ReformulatedProblem& rp, double beta);
}

}  // namespace splitsqp
