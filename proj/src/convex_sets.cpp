#include "splitsqp/convex_sets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "json.hpp"

namespace splitsqp {

namespace {

using Clock = std::chrono::steady_clock;

Vec residual_at(const ReformulatedProblem& rp, const Vec& x, const Vec& y, const Vec& z) {
  Vec res = rp.apply_constraints(x, y, z);
  axpy_inplace(-1.0, rp.c, res);
  return res;
}

}  // namespace

namespace {

using nlohmann::json;

json set_bound_entry(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double set_bound_value(const json& e) {
  if (e.is_number()) return e.get<double>();
  const std::string s = e.get<std::string>();
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  throw std::invalid_argument("set descriptor: bad bound entry \"" + s + "\"");
}

}  // namespace

std::string set_descriptor_to_json(const ProjectableSet& s, int indent) {
  json j;
  if (const auto* box = std::get_if<BoxSetDesc>(&s.descriptor)) {
    j["family"] = "box";
    j["lo"] = json::array();
    j["hi"] = json::array();
    for (double t : box->lo) j["lo"].push_back(set_bound_entry(t));
    for (double t : box->hi) j["hi"].push_back(set_bound_entry(t));
  } else if (const auto* aff = std::get_if<AffineSetDesc>(&s.descriptor)) {
    j["family"] = "affine";
    j["rows"] = aff->m.rows();
    j["cols"] = aff->m.cols();
    j["M"] = std::vector<double>(aff->m.data(), aff->m.data() + aff->m.rows() * aff->m.cols());
    j["h"] = aff->h;
  } else if (const auto* ball = std::get_if<BallSetDesc>(&s.descriptor)) {
    j["family"] = "ball";
    j["center"] = ball->center;
    j["radius"] = ball->radius;
  } else if (const auto* simplex = std::get_if<SimplexSetDesc>(&s.descriptor)) {
    j["family"] = "simplex";
    j["dim"] = simplex->dim;
    j["scale"] = simplex->scale;
  } else {
    throw std::invalid_argument(
        "set descriptor: custom projection callbacks are API-only and do not serialize");
  }
  return j.dump(indent);
}

ProjectableSet set_from_descriptor_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("set descriptor: parse error: ") + e.what());
  }
  const std::string family = j.value("family", std::string());
  if (family == "box") {
    Vec lo, hi;
    for (const auto& e : j.at("lo")) lo.push_back(set_bound_value(e));
    for (const auto& e : j.at("hi")) hi.push_back(set_bound_value(e));
    return make_box_set(std::move(lo), std::move(hi));
  }
  if (family == "affine") {
    Mat m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("M").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols())
      throw std::invalid_argument("set descriptor: affine data length mismatch");
    std::copy(data.begin(), data.end(), m.data());
    return make_affine_set(std::move(m), j.at("h").get<Vec>());
  }
  if (family == "ball")
    return make_ball_set(j.at("center").get<Vec>(), j.at("radius").get<double>());
  if (family == "simplex")
    return make_simplex_set(j.at("dim").get<std::size_t>(), j.at("scale").get<double>());
  throw std::invalid_argument("set descriptor: unknown family \"" + family + "\"");
}

ProjectableSet make_box_set(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box set: bound size mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i]))
      throw std::invalid_argument("box set: lo > hi at index " + std::to_string(i));
  ProjectableSet s;
  s.dim = lo.size();
  s.descriptor = BoxSetDesc{lo, hi};
  s.project = [lo = std::move(lo), hi = std::move(hi)](const Vec& v) {
    return clamp(v, lo, hi);
  };
  return s;
}

ProjectableSet make_affine_set(Mat m, Vec h) {
  if (m.rows() != h.size()) throw std::invalid_argument("affine set: M/h size mismatch");
  auto gram_chol = std::make_shared<Cholesky>();
  {
    // M M' through the gram of M' (rows of M are contiguous).
    Mat mt = m.transposed();
    try {
      *gram_chol = Cholesky::factor(gram(mt));
    } catch (const NotPositiveDefiniteError& e) {
      throw std::invalid_argument(
          "affine set: M does not have full row rank (Cholesky of MM' failed)");
    }
  }
  ProjectableSet s;
  s.dim = m.cols();
  s.descriptor = AffineSetDesc{m, h};
  auto mm = std::make_shared<Mat>(std::move(m));
  auto hh = std::make_shared<Vec>(std::move(h));
  s.project = [mm, hh, gram_chol](const Vec& v) {
    Vec rhs = matvec(*mm, v);
    axpy_inplace(-1.0, *hh, rhs);
    gram_chol->solve_in_place(rhs);
    Vec out = v;
    axpy_inplace(-1.0, matvec_t(*mm, rhs), out);
    return out;
  };
  return s;
}

ProjectableSet make_ball_set(Vec center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball set: radius must be positive");
  ProjectableSet s;
  s.dim = center.size();
  s.descriptor = BallSetDesc{center, radius};
  s.project = [center = std::move(center), radius](const Vec& v) {
    Vec d = sub(v, center);
    const double nrm = norm2(d);
    if (nrm <= radius) return v;
    Vec out = center;
    axpy_inplace(radius / nrm, d, out);
    return out;
  };
  return s;
}

ProjectableSet make_simplex_set(std::size_t dim, double scale) {
  if (dim == 0 || !(scale > 0.0))
    throw std::invalid_argument("simplex set: need dim > 0 and scale > 0");
  ProjectableSet s;
  s.dim = dim;
  s.descriptor = SimplexSetDesc{dim, scale};
  s.project = [scale](const Vec& v) {
    // Sort-based projection onto {w >= 0, sum w = scale}.
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      running += u[j];
      const double t = (running - scale) / static_cast<double>(j + 1);
      if (u[j] - t > 0.0) {
        rho = j + 1;
        tau = t;
      }
    }
    (void)rho;
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
  };
  return s;
}

ProjectableSet translate_set(ProjectableSet s, Vec shift) {
  if (s.dim != shift.size())
    throw std::invalid_argument("translate set: shift size mismatch");
  ProjectableSet out;
  out.dim = s.dim;
  out.descriptor = std::monostate{};
  out.project = [inner = std::move(s.project), shift = std::move(shift)](const Vec& v) {
    Vec w = add(v, shift);
    Vec projected = inner(w);
    axpy_inplace(-1.0, shift, projected);
    return projected;
  };
  return out;
}

SetSubproblemResult solve_set_subproblem(const Mat& h, const Vec& g,
                                         const ProjectableSet& set, double tol,
                                         int budget) {
  if (h.rows() != g.size() || set.dim != g.size())
    throw std::invalid_argument("set subproblem: dimension mismatch");
  const double lip = std::max(largest_eigenvalue(h) * 1.02, 1e-12);

  auto value = [&](const Vec& v) { return dot(g, v) + 0.5 * quadratic_form(h, v); };
  auto grad = [&](const Vec& v) {
    Vec out = matvec(h, v);
    axpy_inplace(1.0, g, out);
    return out;
  };
  auto fixed_point_residual = [&](const Vec& v, const Vec& gv) {
    Vec probe = v;
    axpy_inplace(-1.0 / lip, gv, probe);
    return norm_inf(sub(v, set.project(probe)));
  };

  Vec v = set.project(Vec(g.size(), 0.0));
  Vec vy = v;
  double qv = value(v);
  double theta = 1.0;

  SetSubproblemResult out;
  for (int it = 0; it < budget; ++it) {
    Vec step = vy;
    axpy_inplace(-1.0 / lip, grad(vy), step);
    Vec vnext = set.project(step);
    double qnext = value(vnext);
    if (qnext > qv) {
      // Momentum overshot: restart from the last monotone point.
      step = v;
      axpy_inplace(-1.0 / lip, grad(v), step);
      vnext = set.project(step);
      qnext = value(vnext);
      theta = 1.0;
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    vy = vnext;
    Vec momentum = sub(vnext, v);
    axpy_inplace((theta - 1.0) / theta_next, momentum, vy);
    theta = theta_next;

    v = std::move(vnext);
    qv = qnext;

    const double res = fixed_point_residual(v, grad(v));
    if (res <= tol) {
      out.v_star = v;
      out.iterations = it + 1;
      out.fixed_point_residual = res;
      return out;
    }
  }
  throw IterationBudgetError(
      "set subproblem: projected-gradient budget exhausted (residual " +
          std::to_string(fixed_point_residual(v, grad(v))) + ")",
      v, fixed_point_residual(v, grad(v)));
}

SetSubproblemResult solve_set_subproblem(const BoxQP& qp, const ProjectableSet& set,
                                         double tol, int budget) {
  return solve_set_subproblem(qp.h(), qp.g(), set, tol, budget);
}

double stationarity_residual_B(const ReformulatedProblem& rp, const Iterate& w,
                               const ProjectableSet& set_x, const ProjectableSet& set_y) {
  // Plain-Lagrangian block gradients.
  Vec gx = rp.f.grad(w.x);
  axpy_inplace(-1.0, rp.apply_Et(w.lambda), gx);
  Vec gy = rp.theta.grad(w.y);
  axpy_inplace(-1.0, rp.apply_Ft(w.lambda), gy);

  Vec probe_x = sub(w.x, gx);
  const double rx = norm_inf(sub(w.x, set_x.project(probe_x)));
  Vec probe_y = sub(w.y, gy);
  const double ry = norm_inf(sub(w.y, set_y.project(probe_y)));

  Vec probe_z = w.z;
  const auto lam_ie = w.lambda_ie(rp.m1);
  for (std::size_t i = 0; i < rp.m2; ++i) probe_z[i] -= lam_ie[i];
  const double rz = norm_inf(sub(w.z, clamp(probe_z, rp.r, rp.s)));

  const double feas = norm_inf(residual_at(rp, w.x, w.y, w.z));
  return std::max({rx, ry, rz, feas});
}

namespace {

struct SetStep {
  Iterate next;
  IterationTrace trace;
  Direction direction;
  StepStop stop = StepStop::None;
  double feasibility_at_w = 0.0;
  kkt::MultiplierSet multipliers;
};

SetStep set_step(const ReformulatedProblem& rp, const Iterate& w,
                 const detail::MetricBlocks& metric, const ProjectableSet& set_x,
                 const ProjectableSet& set_y, const SolverConfig& config) {
  const auto t0 = Clock::now();
  const double beta = config.beta;

  // The built quadratic lives in d-space; so must the sets.
  BoxQP qp_x = detail::make_block_qp(rp, w, metric.metric_x, metric.factor_x, beta, true);
  BoxQP qp_y = detail::make_block_qp(rp, w, metric.metric_y, metric.factor_y, beta, false);
  const SetSubproblemResult sx = solve_set_subproblem(
      qp_x.h(), qp_x.g(), translate_set(set_x, w.x), config.set_tolerance, config.set_budget);
  const SetSubproblemResult sy = solve_set_subproblem(
      qp_y.h(), qp_y.g(), translate_set(set_y, w.y), config.set_tolerance, config.set_budget);
  const ZStep zs = solve_z_explicit(rp, w, beta);

  SetStep out;
  out.direction = compute_direction(w, add(w.x, sx.v_star), add(w.y, sy.v_star),
                                    zs.z_tilde, qp_x.h(), qp_y.h(), beta);
  out.multipliers = detail::zero_multipliers(rp, w.lambda);
  out.multipliers.alpha_z = zs.alpha;
  out.multipliers.gamma_z = zs.gamma;

  const double feas_w = norm_inf(residual_at(rp, w.x, w.y, w.z));
  out.feasibility_at_w = feas_w;
  IterationTrace& tr = out.trace;
  tr.k = w.k;
  tr.direction_inf = out.direction.norm_inf;
  tr.quad_norm = out.direction.quad_norm;
  tr.inner_iterations_x = sx.iterations;
  tr.inner_iterations_y = sy.iterations;

  if (out.direction.is_zero() && feas_w == 0.0) {
    out.stop = StepStop::ExactKkt;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
  }
  if (out.direction.norm_inf <= config.tol_direction &&
      feas_w <= config.effective_tol_feasibility(rp.c)) {
    out.stop = StepStop::Tolerance;
    out.next = w;
    tr.merit_before = tr.merit_after = tr.merit_after_dual = aug_lagrangian(rp, w, beta);
    tr.feasibility_inf = feas_w;
    tr.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
  }

  // Per-iteration descent certificate grad_u L' d <= -|d|^2_H (up to rounding).
  {
    const AugLagrangianGrad g = aug_lagrangian_grad(rp, w, beta);
    const double dderiv =
        dot(g.x, out.direction.x) + dot(g.y, out.direction.y) + dot(g.z, out.direction.z);
    const double slack =
        1e-7 * (1.0 + out.direction.quad_norm + std::fabs(dderiv)) +
        10.0 * config.set_tolerance * (1.0 + norm_inf(g.x) + norm_inf(g.y));
    if (dderiv > -out.direction.quad_norm + slack)
      throw std::runtime_error(
          "set step: descent inequality violated (inexact subproblem solutions?)");
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

}  // namespace

SolveReport solve_with_sets(const ReformulatedProblem& rp, const ProjectableSet& set_x,
                            const ProjectableSet& set_y, const Iterate& w0,
                            const SolverConfig& config) {
  config.validate();
  if (set_x.dim != rp.n1() || set_y.dim != rp.n2())
    throw std::invalid_argument("solve with sets: set dimensions mismatch");

  SolveReport rep;
  rep.algorithm = "set-ext";
  Iterate w = w0;
  w.k = 0;
  // Step 0 requires x0 in X, y0 in Y, z0 in the box.
  w.x = set_x.project(w.x);
  w.y = set_y.project(w.y);
  w.z = clamp(w.z, rp.r, rp.s);

  const auto t0 = Clock::now();
  int stall = 0;
  double prev_feas = kInf;
  try {
    for (;;) {
      const auto metric = detail::make_metric(rp, w, config);
      SetStep s = set_step(rp, w, metric, set_x, set_y, config);
      if (s.stop != StepStop::None) {
        rep.status = SolveStatus::Converged;
        rep.message = s.stop == StepStop::ExactKkt
                          ? "exact stationary stop: zero direction at a feasible point"
                          : "direction and feasibility tolerances reached";
        detail::finalize_report(rep, rp, w, s.multipliers, s.direction.norm_inf);
        break;
      }
      rep.trace.push_back(s.trace);
      if (s.direction.norm_inf <= config.tol_direction &&
          s.feasibility_at_w > 0.9999 * prev_feas) {
        if (++stall >= config.max_dual_stalls) {
          rep.status = SolveStatus::DualStalled;
          rep.message = "direction stayed below tolerance while the equality residual "
                        "did not reach tolerance";
          w = s.next;
          detail::finalize_report(rep, rp, w, detail::zero_multipliers(rp, w.lambda), 0.0);
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
        detail::finalize_report(rep, rp, w, detail::zero_multipliers(rp, w.lambda), 0.0);
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
  try {
    rep.stationarity_inf = stationarity_residual_B(rp, rep.final_iterate, set_x, set_y);
  } catch (const std::runtime_error&) {
    rep.stationarity_inf = kInf;
  }
  rep.solve_seconds =
      std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

SolveReport solve_with_sets(const TwoBlockProblem& p, const ProjectableSet& set_x,
                            const ProjectableSet& set_y, const Iterate& w0,
                            const SolverConfig& config) {
  return solve_with_sets(reformulate(p), set_x, set_y, w0, config);
}

}  // namespace splitsqp
