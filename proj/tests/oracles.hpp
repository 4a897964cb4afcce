#pragma once

// Test-only oracles and generators. Everything here is independent of the
// solver paths it is used to check.

#include <cmath>
#include <functional>
#include <random>

#include "splitsqp/box_qp.hpp"
#include "splitsqp/ed.hpp"
#include "splitsqp/problem.hpp"

namespace oracle {

using splitsqp::Mat;
using splitsqp::Vec;

inline Vec rand_vec(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec v(n);
  for (double& t : v) t = dist(rng);
  return v;
}

inline Mat rand_mat(std::mt19937& rng, std::size_t rows, std::size_t cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Mat rand_spd(std::mt19937& rng, std::size_t n, double shift) {
  Mat a = rand_mat(rng, n, n, 1.0);
  Mat h = splitsqp::gram(a);
  for (std::size_t i = 0; i < n; ++i) h(i, i) += shift;
  return h;
}

/// Random symmetric matrix with entries ~ N(0, scale); generally indefinite.
inline Mat rand_symmetric(std::mt19937& rng, std::size_t n, double scale) {
  Mat a = rand_mat(rng, n, n, scale);
  Mat s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

// ---------------------------------------------------------------------------
// Exhaustive active-set enumeration for strictly convex box QPs (n <= ~8).
// Tries all 3^n bound assignments, solves the free subsystem, keeps
// KKT-consistent candidates and returns the one with the lowest objective.
// ---------------------------------------------------------------------------

struct EnumResult {
  Vec v;
  double objective = 0.0;
  bool found = false;
};

inline EnumResult enumerate_box_qp(const Mat& h, const Vec& g, const Vec& lo,
                                   const Vec& hi) {
  const std::size_t n = g.size();
  EnumResult best;
  std::vector<int> state(n, 0);  // 0 free, 1 lower, 2 upper

  const auto objective = [&](const Vec& v) {
    return splitsqp::dot(g, v) + 0.5 * splitsqp::quadratic_form(h, v);
  };

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;

  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rem = code;
    bool valid = true;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rem % 3);
      rem /= 3;
      if (state[i] == 1 && !std::isfinite(lo[i])) valid = false;
      if (state[i] == 2 && !std::isfinite(hi[i])) valid = false;
    }
    if (!valid) continue;

    std::vector<std::size_t> free;
    Vec v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == 0)
        free.push_back(i);
      else
        v[i] = state[i] == 1 ? lo[i] : hi[i];
    }

    if (!free.empty()) {
      Mat hff(free.size(), free.size());
      Vec rhs(free.size());
      for (std::size_t a = 0; a < free.size(); ++a) {
        rhs[a] = -g[free[a]];
        for (std::size_t b = 0; b < free.size(); ++b) hff(a, b) = h(free[a], free[b]);
        for (std::size_t i = 0; i < n; ++i)
          if (state[i] != 0) rhs[a] -= h(free[a], i) * v[i];
      }
      auto chol = splitsqp::Cholesky::try_factor(hff);
      if (!chol) continue;
      const Vec vf = chol->solve(rhs);
      for (std::size_t a = 0; a < free.size(); ++a) v[free[a]] = vf[a];
    }

    bool ok = true;
    const double tol = 1e-9;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (v[i] < lo[i] - tol || v[i] > hi[i] + tol) ok = false;
    }
    if (!ok) continue;
    // multiplier sign check at active bounds
    Vec mu = splitsqp::matvec(h, v);
    splitsqp::axpy_inplace(1.0, g, mu);
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (state[i] == 1 && mu[i] < -tol) ok = false;
      if (state[i] == 2 && mu[i] > tol) ok = false;
      if (state[i] == 0 && std::fabs(mu[i]) > 1e-7 * (1.0 + splitsqp::norm_inf(g)))
        ok = false;
    }
    if (!ok) continue;

    const double obj = objective(v);
    if (!best.found || obj < best.objective) {
      best.v = v;
      best.objective = obj;
      best.found = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Central finite differences of a scalar function.
// ---------------------------------------------------------------------------

template <class F>
Vec fd_gradient(F&& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Random two-block problems with a certified interior feasible point.
// ---------------------------------------------------------------------------

struct RandomProblemSpec {
  std::size_t n1 = 4, n2 = 3, m1 = 2, m2 = 3;
  bool convex = true;
  double box_halfwidth = 2.0;
  double band_halfwidth = 1.0;
  unsigned seed = 1;
};

struct RandomProblem {
  splitsqp::TwoBlockProblem problem;
  Vec x_feas, y_feas;  // interior feasible point used to center the data
};

inline RandomProblem random_two_block(const RandomProblemSpec& spec) {
  std::mt19937 rng(spec.seed);
  RandomProblem out;
  splitsqp::TwoBlockProblem& p = out.problem;

  p.A = rand_mat(rng, spec.m1, spec.n1, 1.0);
  p.B = rand_mat(rng, spec.m1, spec.n2, 1.0);
  p.C = rand_mat(rng, spec.m2, spec.n1, 1.0);
  p.D = rand_mat(rng, spec.m2, spec.n2, 1.0);

  out.x_feas = rand_vec(rng, spec.n1, -1.0, 1.0);
  out.y_feas = rand_vec(rng, spec.n2, -1.0, 1.0);

  Vec ax = splitsqp::matvec(p.A, out.x_feas);
  splitsqp::axpy_inplace(1.0, splitsqp::matvec(p.B, out.y_feas), ax);
  p.b = ax;

  Vec band = splitsqp::matvec(p.C, out.x_feas);
  splitsqp::axpy_inplace(1.0, splitsqp::matvec(p.D, out.y_feas), band);
  p.r = band;
  p.s = band;
  for (std::size_t i = 0; i < spec.m2; ++i) {
    p.r[i] -= spec.band_halfwidth * (0.5 + 0.5 * std::fabs(band[i] * 0.1));
    p.s[i] += spec.band_halfwidth;
  }

  p.l = out.x_feas;
  p.u = out.x_feas;
  p.p = out.y_feas;
  p.q = out.y_feas;
  for (std::size_t i = 0; i < spec.n1; ++i) {
    p.l[i] -= spec.box_halfwidth;
    p.u[i] += spec.box_halfwidth;
  }
  for (std::size_t i = 0; i < spec.n2; ++i) {
    p.p[i] -= spec.box_halfwidth;
    p.q[i] += spec.box_halfwidth;
  }

  const double shift = spec.convex ? 0.5 : -0.6;
  Mat qx = spec.convex ? rand_spd(rng, spec.n1, 0.5) : rand_symmetric(rng, spec.n1, 1.0);
  Mat qy = spec.convex ? rand_spd(rng, spec.n2, 0.5) : rand_symmetric(rng, spec.n2, 1.0);
  if (!spec.convex) {
    for (std::size_t i = 0; i < spec.n1; ++i) qx(i, i) += shift;
    for (std::size_t i = 0; i < spec.n2; ++i) qy(i, i) += shift;
  }
  p.f = splitsqp::make_quadratic_objective(qx, rand_vec(rng, spec.n1, -1.0, 1.0), 10.0);
  p.theta = splitsqp::make_quadratic_objective(qy, rand_vec(rng, spec.n2, -1.0, 1.0), 10.0);
  return out;
}

// ---------------------------------------------------------------------------
// Long-run projected-gradient reference for convex instances: classical
// augmented-Lagrangian outer loop with a FISTA inner solve over the stacked
// box. Independent of the SQP machinery (no metric, no subproblem split).
// ---------------------------------------------------------------------------

struct AlmReference {
  double objective = 0.0;
  Vec lambda;
  Vec point;  // stacked (x, y, z)
};

inline AlmReference alm_reference(const splitsqp::ReformulatedProblem& rp,
                                  double beta_hat, int outer_iters, int inner_iters,
                                  double feas_tol) {
  const std::size_t n1 = rp.n1(), n2 = rp.n2(), m2 = rp.m2, n = n1 + n2 + m2;
  const Vec lo = splitsqp::concat(rp.l, rp.p, rp.r);
  const Vec hi = splitsqp::concat(rp.u, rp.q, rp.s);

  const auto split = [&](const Vec& v, Vec& x, Vec& y, Vec& z) {
    x.assign(v.begin(), v.begin() + static_cast<long>(n1));
    y.assign(v.begin() + static_cast<long>(n1), v.begin() + static_cast<long>(n1 + n2));
    z.assign(v.begin() + static_cast<long>(n1 + n2), v.end());
  };
  const auto apply_m = [&](const Vec& v) {
    Vec x, y, z;
    split(v, x, y, z);
    Vec res = rp.apply_constraints(x, y, z);
    splitsqp::axpy_inplace(-1.0, rp.c, res);
    return res;  // M v - c
  };
  const auto grad = [&](const Vec& v, const Vec& lambda) {
    Vec x, y, z;
    split(v, x, y, z);
    Vec res = apply_m(v);
    Vec t = res;
    splitsqp::scale_inplace(beta_hat, t);
    splitsqp::axpy_inplace(-1.0, lambda, t);  // beta res - lambda
    Vec gx = rp.f.grad(x);
    splitsqp::axpy_inplace(1.0, rp.apply_Et(t), gx);
    Vec gy = rp.theta.grad(y);
    splitsqp::axpy_inplace(1.0, rp.apply_Ft(t), gy);
    Vec gz = rp.apply_Gt(t);
    return splitsqp::concat(gx, gy, gz);
  };
  const auto value = [&](const Vec& v, const Vec& lambda) {
    Vec x, y, z;
    split(v, x, y, z);
    const Vec res = apply_m(v);
    return rp.objective(x, y) - splitsqp::dot(lambda, res) +
           0.5 * beta_hat * splitsqp::sqnorm(res);
  };

  // Lipschitz estimate by power iteration on v -> grad difference.
  double lip = 1.0;
  {
    std::mt19937 rng(7);
    Vec dir = rand_vec(rng, n, -1.0, 1.0);
    splitsqp::scale_inplace(1.0 / std::max(splitsqp::norm2(dir), 1e-12), dir);
    const Vec base(n, 0.0);
    const Vec lambda0(rp.c.size(), 0.0);
    const Vec g0 = grad(base, lambda0);
    for (int it = 0; it < 60; ++it) {
      Vec probe = base;
      splitsqp::axpy_inplace(1.0, dir, probe);
      Vec gd = grad(probe, lambda0);
      splitsqp::axpy_inplace(-1.0, g0, gd);
      const double nrm = splitsqp::norm2(gd);
      if (nrm < 1e-14) break;
      lip = nrm;
      dir = gd;
      splitsqp::scale_inplace(1.0 / nrm, dir);
    }
    lip *= 1.2;
  }

  Vec v = splitsqp::clamp(Vec(n, 0.0), lo, hi);
  Vec lambda(rp.c.size(), 0.0);
  for (int outer = 0; outer < outer_iters; ++outer) {
    // FISTA on the smooth ALF over the box.
    Vec vy = v;
    double theta = 1.0;
    double best = value(v, lambda);
    for (int it = 0; it < inner_iters; ++it) {
      Vec step = vy;
      splitsqp::axpy_inplace(-1.0 / lip, grad(vy, lambda), step);
      Vec vn = splitsqp::clamp(step, lo, hi);
      double q = value(vn, lambda);
      if (q > best) {
        step = v;
        splitsqp::axpy_inplace(-1.0 / lip, grad(v, lambda), step);
        vn = splitsqp::clamp(step, lo, hi);
        q = value(vn, lambda);
        theta = 1.0;
      }
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      vy = vn;
      Vec mom = vn;
      splitsqp::axpy_inplace(-1.0, v, mom);
      splitsqp::axpy_inplace((theta - 1.0) / theta_next, mom, vy);
      theta = theta_next;
      // fixed-point residual stop
      Vec probe = vn;
      splitsqp::axpy_inplace(-1.0 / lip, grad(vn, lambda), probe);
      const Vec pf = splitsqp::clamp(probe, lo, hi);
      double fp = 0.0;
      for (std::size_t i = 0; i < n; ++i) fp = std::max(fp, std::fabs(pf[i] - vn[i]));
      v = vn;
      best = q;
      if (fp <= 1e-12 * (1.0 + std::fabs(best))) break;
    }
    const Vec res = apply_m(v);
    // with L = f - lambda'res + (beta/2)|res|^2 the converged inner point is
    // stationary for the plain Lagrangian at lambda - beta res
    splitsqp::axpy_inplace(-beta_hat, res, lambda);
    if (splitsqp::norm_inf(res) <= feas_tol) break;
  }
  Vec x, y, z;
  split(v, x, y, z);
  AlmReference out;
  out.objective = rp.objective(x, y);
  out.lambda = lambda;
  out.point = v;
  return out;
}

inline double alm_reference_objective(const splitsqp::ReformulatedProblem& rp,
                                      double beta_hat, int outer_iters, int inner_iters,
                                      double feas_tol) {
  return alm_reference(rp, beta_hat, outer_iters, inner_iters, feas_tol).objective;
}

// ---------------------------------------------------------------------------
// Manual assembly of the dispatch equality system in the paper-shaped layout
// (per-unit difference blocks with the initial output on the right-hand side):
//   balance rows:  sum_i p_{i,t} = demand_t
//   ramp rows:     -p_{i,t} + p_{i,t-1} + q_{i,t} = 0  (p_{i,0} folded in rhs)
//   -D_i <= q_{i,t} <= U_i
// Used to check the builder's feasible set coincides with this formulation.
// ---------------------------------------------------------------------------

struct ManualEdSystem {
  Mat p_coeff;  // (T + NT) x NT, acting on the stacked outputs p
  Mat q_coeff;  // (T + NT) x NT, acting on the slack q
  Vec rhs;
  Vec q_lo, q_hi;
};

inline ManualEdSystem manual_ed_system(const splitsqp::ed::EDInstance& inst) {
  const std::size_t N = inst.n_units(), T = inst.T;
  ManualEdSystem sys;
  sys.p_coeff = Mat(T + N * T, N * T);
  sys.q_coeff = Mat(T + N * T, N * T);
  sys.rhs = Vec(T + N * T, 0.0);
  sys.q_lo = Vec(N * T);
  sys.q_hi = Vec(N * T);

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < N; ++i) sys.p_coeff(t, i * T + t) = 1.0;
    sys.rhs[t] = inst.demand[t];
  }
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t row = T + i * T + t;
      sys.p_coeff(row, i * T + t) = -1.0;
      if (t > 0) sys.p_coeff(row, i * T + t - 1) = 1.0;
      sys.q_coeff(row, i * T + t) = 1.0;
      sys.rhs[row] = t == 0 ? -inst.units[i].p_initial : 0.0;
      sys.q_lo[i * T + t] = -inst.units[i].ramp_down;
      sys.q_hi[i * T + t] = inst.units[i].ramp_up;
    }
  }
  return sys;
}

}  // namespace oracle
