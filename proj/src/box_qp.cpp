#include "splitsqp/box_qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace splitsqp {

namespace {

constexpr double kBig = std::numeric_limits<double>::infinity();

enum class Bound : unsigned char { Free, Lower, Upper };

double sym_violation(const Mat& h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = i + 1; j < h.cols(); ++j)
      worst = std::max(worst, std::fabs(h(i, j) - h(j, i)));
  return worst;
}

}  // namespace

BoxQP::BoxQP(Mat h, Vec g, Vec lower, Vec upper)
    : h_(std::move(h)), g_(std::move(g)), lower_(std::move(lower)), upper_(std::move(upper)) {
  const std::size_t n = g_.size();
  if (h_.rows() != n || h_.cols() != n || lower_.size() != n || upper_.size() != n)
    throw std::invalid_argument("box qp: dimension mismatch");
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(h_(i, i)));
  if (sym_violation(h_) > 1e-8 * scale)
    throw std::invalid_argument("box qp: H is not symmetric");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower_[i] < upper_[i]))
      throw std::invalid_argument("box qp: lower >= upper at index " + std::to_string(i));
  full_ = Cholesky::factor(h_);  // throws NotPositiveDefiniteError with the pivot
}

BoxQP::BoxQP(Mat h, Vec g, Vec lower, Vec upper, Cholesky presolved)
    : h_(std::move(h)), g_(std::move(g)), lower_(std::move(lower)), upper_(std::move(upper)),
      full_(std::move(presolved)) {
  const std::size_t n = g_.size();
  if (h_.rows() != n || h_.cols() != n || lower_.size() != n || upper_.size() != n ||
      full_.dim() != n)
    throw std::invalid_argument("box qp: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower_[i] < upper_[i]))
      throw std::invalid_argument("box qp: lower >= upper at index " + std::to_string(i));
}

double BoxQP::objective(const Vec& v) const {
  return dot(g_, v) + 0.5 * quadratic_form(h_, v);
}

Vec BoxQP::gradient(const Vec& v) const {
  Vec g = matvec(h_, v);
  axpy_inplace(1.0, g_, g);
  return g;
}

double project_scalar(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

Vec project_box(const Vec& v, const Vec& lower, const Vec& upper) {
  return clamp(v, lower, upper);
}

std::pair<Vec, Vec> recover_projection_multipliers(const Vec& v_star, const Vec& hat_v,
                                                   double beta, const Vec& lower,
                                                   const Vec& upper) {
  const std::size_t n = v_star.size();
  if (hat_v.size() != n || lower.size() != n || upper.size() != n)
    throw std::invalid_argument("projection multipliers: size mismatch");
  const Vec projected = project_box(hat_v, lower, upper);
  for (std::size_t i = 0; i < n; ++i)
    if (v_star[i] != projected[i])
      throw std::invalid_argument(
          "projection multipliers: v_star is not the projection of hat_v (index " +
          std::to_string(i) + ")");
  Vec alpha(n, 0.0), gamma(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (v_star[i] == lower[i] && hat_v[i] <= lower[i])
      alpha[i] = beta * (v_star[i] - hat_v[i]);
    else if (v_star[i] == upper[i] && hat_v[i] >= upper[i])
      gamma[i] = beta * (hat_v[i] - v_star[i]);
  }
  return {std::move(alpha), std::move(gamma)};
}

namespace {

struct Workspace {
  const BoxQP& qp;
  double tol_eff;
  std::vector<Bound> status;
  Vec v;
  int iterations = 0;

  Workspace(const BoxQP& q, double tol)
      : qp(q), tol_eff(tol * (1.0 + norm_inf(q.g()))), status(q.dim(), Bound::Free),
        v(q.dim(), 0.0) {}

  // Snap to bounds and record which side each component sits on.
  void classify() {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= qp.lower()[i]) {
        v[i] = qp.lower()[i];
        status[i] = Bound::Lower;
      } else if (v[i] >= qp.upper()[i]) {
        v[i] = qp.upper()[i];
        status[i] = Bound::Upper;
      } else {
        status[i] = Bound::Free;
      }
    }
  }

  Vec gradient() const { return qp.gradient(v); }

  double projected_residual(const Vec& mu) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double target = project_scalar(v[i] - mu[i], qp.lower()[i], qp.upper()[i]);
      worst = std::max(worst, std::fabs(v[i] - target));
    }
    return worst;
  }

  BoxQPSolution finalize(const char* method) const {
    BoxQPSolution sol;
    sol.v_star = v;
    sol.alpha = Vec(v.size(), 0.0);
    sol.gamma = Vec(v.size(), 0.0);
    const Vec mu = gradient();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (status[i] == Bound::Lower)
        sol.alpha[i] = std::max(mu[i], 0.0);
      else if (status[i] == Bound::Upper)
        sol.gamma[i] = std::max(-mu[i], 0.0);
    }
    sol.inner_iterations = iterations;
    sol.stationarity_residual = projected_residual(mu);
    sol.method = method;
    return sol;
  }
};

// Primal feasible active-set loop. One gemv per iteration: with mu = Hv + g,
// the free-subspace Newton step solves H_FF p_F = -mu_F.
bool run_active_set(Workspace& ws, int budget) {
  const BoxQP& qp = ws.qp;
  const std::size_t n = qp.dim();
  const double tol_mult = 0.5 * ws.tol_eff;

  SubsetCholesky factor(qp.h());
  {
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (ws.status[i] != Bound::Free) ++active;
    if (active <= n / 8) {
      // Few actives: peel them off the cached full factor.
      factor.reset_full(qp.full_factor());
      for (std::size_t i = 0; i < n; ++i)
        if (ws.status[i] != Bound::Free) factor.remove(i);
    } else {
      std::vector<std::size_t> free;
      free.reserve(n - active);
      for (std::size_t i = 0; i < n; ++i)
        if (ws.status[i] == Bound::Free) free.push_back(i);
      factor.reset(free);
    }
  }

  for (; ws.iterations < budget; ++ws.iterations) {
    const Vec mu = ws.gradient();
    const auto& order = factor.order();

    double free_grad = 0.0;
    for (std::size_t idx : order) free_grad = std::max(free_grad, std::fabs(mu[idx]));

    if (free_grad <= tol_mult) {
      // Subspace optimal: release the most negative bound multiplier, ties
      // broken by lowest index (first hit wins under strict <).
      double worst = -tol_mult;
      std::size_t release = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (ws.status[i] == Bound::Free) continue;
        const double mult = ws.status[i] == Bound::Lower ? mu[i] : -mu[i];
        if (mult < worst) {
          worst = mult;
          release = i;
        }
      }
      if (release == n) return true;  // KKT within tolerance
      ws.status[release] = Bound::Free;
      factor.append(release);
      continue;
    }

    // Newton step on the free subspace.
    Vec rhs(order.size());
    for (std::size_t a = 0; a < order.size(); ++a) rhs[a] = -mu[order[a]];
    const Vec p = factor.solve(rhs);

    double step = 1.0;
    std::size_t blocker = n;
    bool blocker_upper = false;
    for (std::size_t a = 0; a < order.size(); ++a) {
      const std::size_t i = order[a];
      double limit = kBig;
      bool hits_upper = false;
      if (p[a] > 0.0 && std::isfinite(qp.upper()[i])) {
        limit = (qp.upper()[i] - ws.v[i]) / p[a];
        hits_upper = true;
      } else if (p[a] < 0.0 && std::isfinite(qp.lower()[i])) {
        limit = (qp.lower()[i] - ws.v[i]) / p[a];
      }
      if (limit >= kBig) continue;
      limit = std::max(limit, 0.0);
      if (limit < step || (limit == step && (blocker == n || i < blocker))) {
        step = limit;
        blocker = i;
        blocker_upper = hits_upper;
      }
    }

    for (std::size_t a = 0; a < order.size(); ++a) ws.v[order[a]] += step * p[a];
    if (blocker != n) {
      ws.v[blocker] = blocker_upper ? qp.upper()[blocker] : qp.lower()[blocker];
      ws.status[blocker] = blocker_upper ? Bound::Upper : Bound::Lower;
      factor.remove(blocker);
    }
  }
  return false;  // budget exhausted (possible cycling)
}

// Projected Newton (two-metric) fallback with an Armijo arc search.
bool run_projected_newton(Workspace& ws, int budget) {
  const BoxQP& qp = ws.qp;
  const std::size_t n = qp.dim();
  SubsetCholesky factor(qp.h());

  for (int it = 0; it < budget; ++it, ++ws.iterations) {
    const Vec mu = ws.gradient();
    if (ws.projected_residual(mu) <= ws.tol_eff) {
      ws.classify();
      return true;
    }
    const double eps = std::min(1e-3 * (1.0 + norm_inf(ws.v)), ws.projected_residual(mu));

    std::vector<std::size_t> free;
    free.reserve(n);
    Vec p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const bool near_lo =
          std::isfinite(qp.lower()[i]) && ws.v[i] - qp.lower()[i] <= eps && mu[i] > 0.0;
      const bool near_hi =
          std::isfinite(qp.upper()[i]) && qp.upper()[i] - ws.v[i] <= eps && mu[i] < 0.0;
      if (near_lo || near_hi)
        p[i] = -mu[i];
      else
        free.push_back(i);
    }
    factor.reset(free);
    Vec rhs(free.size());
    for (std::size_t a = 0; a < free.size(); ++a) rhs[a] = -mu[free[a]];
    const Vec pf = factor.solve(rhs);
    for (std::size_t a = 0; a < free.size(); ++a) p[free[a]] = pf[a];

    const double q0 = qp.objective(ws.v);
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec trial(n);
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = project_scalar(ws.v[i] + t * p[i], qp.lower()[i], qp.upper()[i]);
      double predicted = 0.0;
      for (std::size_t i = 0; i < n; ++i) predicted += mu[i] * (trial[i] - ws.v[i]);
      if (qp.objective(trial) <= q0 + 0.1 * predicted) {
        ws.v = std::move(trial);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return false;
    ws.classify();
  }
  return false;
}

}  // namespace

BoxQPSolution solve_box_qp(const BoxQP& qp, double tol, const Vec& warm_start) {
  if (warm_start.size() != qp.dim())
    throw std::invalid_argument("box qp: warm start size mismatch");
  Workspace ws(qp, tol);
  ws.v = warm_start;
  ws.classify();

  const int as_budget = static_cast<int>(30 * qp.dim() + 100);
  if (run_active_set(ws, as_budget)) return ws.finalize("active-set");

  // Active set cycled or stalled; polish with projected Newton.
  if (run_projected_newton(ws, 200)) return ws.finalize("projected-newton");

  const Vec mu = ws.gradient();
  const double res = ws.projected_residual(mu);
  throw IterationBudgetError(
      "box qp: iteration budget exhausted (stationarity residual " + std::to_string(res) +
          ")",
      ws.v, res);
}

BoxQPSolution solve_box_qp(const BoxQP& qp, double tol) {
  // Default start: projection of the unconstrained minimizer -H^{-1} g.
  Vec start = qp.full_factor().solve(scaled(qp.g(), -1.0));
  return solve_box_qp(qp, tol, project_box(start, qp.lower(), qp.upper()));
}

}  // namespace splitsqp
