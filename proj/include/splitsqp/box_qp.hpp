#pragma once

#include <string>
#include <utility>

#include "splitsqp/linalg.hpp"

namespace splitsqp {

/// Strictly convex quadratic q(v) = g^T v + (1/2) v^T H v over [lower, upper].
/// H must be symmetric positive definite; verified at construction via a full
/// Cholesky factorization (the factor is kept and reused by the solver).
class BoxQP {
 public:
  BoxQP(Mat h, Vec g, Vec lower, Vec upper);
  /// Variant taking an existing factor of h; the caller guarantees they match.
  BoxQP(Mat h, Vec g, Vec lower, Vec upper, Cholesky presolved);

  std::size_t dim() const { return g_.size(); }
  const Mat& h() const { return h_; }
  const Vec& g() const { return g_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Cholesky& full_factor() const { return full_; }
  double smallest_pivot() const { return full_.smallest_pivot(); }

  double objective(const Vec& v) const;
  Vec gradient(const Vec& v) const;  // H v + g

 private:
  Mat h_;
  Vec g_, lower_, upper_;
  Cholesky full_;
};

struct BoxQPSolution {
  Vec v_star;
  Vec alpha, gamma;  // lower/upper bound multipliers, >= 0
  int inner_iterations = 0;
  double stationarity_residual = 0.0;  // |v - P(v - (Hv+g))|_inf
  std::string method;                  // "active-set" or "projected-newton"
};

/// Componentwise median(lower_i, v_i, upper_i).
Vec project_box(const Vec& v, const Vec& lower, const Vec& upper);
double project_scalar(double v, double lo, double hi);

/// Primal active-set method with Cholesky append/remove updates; falls back
/// to projected Newton with an Armijo arc search if the active set cycles.
/// Ties in blocking/releasing are broken by lowest index. The stationarity
/// target is tol * (1 + |g|_inf).
BoxQPSolution solve_box_qp(const BoxQP& qp, double tol);
BoxQPSolution solve_box_qp(const BoxQP& qp, double tol, const Vec& warm_start);

/// Multipliers of the projection QP min (beta/2)|v - hat_v|^2 over the box:
/// alpha_i = beta (v*_i - hat_v_i) on active lower bounds, gamma_i =
/// beta (hat_v_i - v*_i) on active upper bounds, zero elsewhere.
/// Requires v_star == project_box(hat_v).
std::pair<Vec, Vec> recover_projection_multipliers(const Vec& v_star, const Vec& hat_v,
                                                   double beta, const Vec& lower,
                                                   const Vec& upper);

}  // namespace splitsqp
