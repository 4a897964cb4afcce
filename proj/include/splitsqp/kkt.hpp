#pragma once

#include "splitsqp/problem.hpp"

namespace splitsqp::kkt {

/// Full multiplier tuple for the reformulated problem:
/// (lambda=(lambda_e,lambda_ie), alpha_x, gamma_x, alpha_y, gamma_y, alpha_z, gamma_z).
struct MultiplierSet {
  Vec lambda;
  Vec alpha_x, gamma_x;
  Vec alpha_y, gamma_y;
  Vec alpha_z, gamma_z;
};

/// Inf-norms of each line of the KKT system; total = max of all parts.
/// Complementarity is measured unscaled as max_i |mult_i * slack_i|; a nonzero
/// multiplier on an infinite bound scores infinity.
struct ResidualBreakdown {
  double stationarity_x = 0.0;
  double stationarity_y = 0.0;
  double stationarity_z = 0.0;
  double sign_violation = 0.0;
  double complementarity = 0.0;
  double box_violation = 0.0;
  double feasibility = 0.0;
  double total = 0.0;
};

/// Residuals of the reformulated-problem KKT system at (x, y, z, multipliers).
/// scaled_complementarity divides each product by 1 + |mult| + |slack|.
ResidualBreakdown kkt_residual_reformulated(const ReformulatedProblem& rp, const Vec& x,
                                            const Vec& y, const Vec& z,
                                            const MultiplierSet& m,
                                            bool scaled_complementarity = false);

/// Multipliers for the original problem: lambda_ie is dropped (it equals
/// alpha_z - gamma_z at an exact KKT point), the rest carry over.
struct OriginalMultipliers {
  Vec lambda_e;
  Vec alpha_x, gamma_x;
  Vec alpha_y, gamma_y;
  Vec alpha_z, gamma_z;
};

OriginalMultipliers map_multipliers_to_original(const MultiplierSet& m, std::size_t m1);

/// Residuals of the original-problem KKT system at (x, y); the slack block is
/// re-expressed through C x + D y.
ResidualBreakdown kkt_residual_original(const ReformulatedProblem& rp, const Vec& x,
                                        const Vec& y, const OriginalMultipliers& m,
                                        bool scaled_complementarity = false);

struct GradientCheckReport {
  double max_rel_error_f = 0.0;
  double max_rel_error_theta = 0.0;
  bool ok = false;  // both errors <= 1e-4
};

/// Central finite-difference check of the user gradient callbacks at a point
/// strictly inside the boxes.
GradientCheckReport check_gradients(const TwoBlockProblem& p, const Vec& x, const Vec& y,
                                    double h);

}  // namespace splitsqp::kkt
