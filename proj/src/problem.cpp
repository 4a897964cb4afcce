#include "splitsqp/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace splitsqp {

namespace {

void check_dim(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double checked_value(double v, const char* which) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string(which) + " evaluated to a non-finite value");
  return v;
}

}  // namespace

double BlockObjective::value(const Vec& v) const {
  return checked_value(fn.value(v), "objective");
}

Vec BlockObjective::grad(const Vec& v) const { return fn.grad(v); }
Mat BlockObjective::hess(const Vec& v) const { return fn.hess(v); }

BlockObjective make_quadratic_objective(Mat q, Vec lin, double constant) {
  check_dim(q.rows() == q.cols() && q.rows() == lin.size(),
            "quadratic objective: Q/linear size mismatch");
  QuadraticParams params{q, lin, constant};
  SmoothFunction fn;
  fn.value = [params](const Vec& v) {
    return 0.5 * quadratic_form(params.q_mat, v) + dot(params.lin, v) + params.constant;
  };
  fn.grad = [params](const Vec& v) {
    Vec g = matvec(params.q_mat, v);
    axpy_inplace(1.0, params.lin, g);
    return g;
  };
  fn.hess = [params](const Vec&) { return params.q_mat; };
  BlockObjective out;
  out.fn = std::move(fn);
  out.params = std::move(params);
  return out;
}

BlockObjective make_cubic_separable_objective(Vec a, Vec b, Vec c, double constant) {
  check_dim(a.size() == b.size() && a.size() == c.size(),
            "cubic objective: coefficient size mismatch");
  CubicSeparableParams params{a, b, c, constant};
  SmoothFunction fn;
  fn.value = [params](const Vec& v) {
    double acc = params.constant;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = v[i];
      acc += ((params.a[i] * t + params.b[i]) * t + params.c[i]) * t;
    }
    return acc;
  };
  fn.grad = [params](const Vec& v) {
    Vec g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      g[i] = (3.0 * params.a[i] * v[i] + 2.0 * params.b[i]) * v[i] + params.c[i];
    return g;
  };
  fn.hess = [params](const Vec& v) {
    Mat h(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      h(i, i) = 6.0 * params.a[i] * v[i] + 2.0 * params.b[i];
    return h;
  };
  BlockObjective out;
  out.fn = std::move(fn);
  out.params = std::move(params);
  return out;
}

BlockObjective make_custom_objective(SmoothFunction fn) {
  BlockObjective out;
  out.fn = std::move(fn);
  out.params = std::monostate{};
  return out;
}

void TwoBlockProblem::validate() const {
  const std::size_t n1 = l.size(), n2 = p.size(), m1 = b.size(), m2 = r.size();
  check_dim(u.size() == n1, "bound u has size " + std::to_string(u.size()) +
                                " but l has size " + std::to_string(n1));
  check_dim(q.size() == n2, "bound q has size " + std::to_string(q.size()) +
                                " but p has size " + std::to_string(n2));
  check_dim(s.size() == m2, "band s has size " + std::to_string(s.size()) +
                                " but r has size " + std::to_string(m2));
  check_dim(A.rows() == m1 && A.cols() == n1,
            "matrix A is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                ", expected " + std::to_string(m1) + "x" + std::to_string(n1));
  check_dim(B.rows() == m1 && B.cols() == n2,
            "matrix B is " + std::to_string(B.rows()) + "x" + std::to_string(B.cols()) +
                ", expected " + std::to_string(m1) + "x" + std::to_string(n2));
  check_dim(C.rows() == m2 && C.cols() == n1,
            "matrix C is " + std::to_string(C.rows()) + "x" + std::to_string(C.cols()) +
                ", expected " + std::to_string(m2) + "x" + std::to_string(n1));
  check_dim(D.rows() == m2 && D.cols() == n2,
            "matrix D is " + std::to_string(D.rows()) + "x" + std::to_string(D.cols()) +
                ", expected " + std::to_string(m2) + "x" + std::to_string(n2));
  check_dim(static_cast<bool>(f.fn.value) && static_cast<bool>(f.fn.grad),
            "objective f is missing value or gradient callback");
  check_dim(static_cast<bool>(theta.fn.value) && static_cast<bool>(theta.fn.grad),
            "objective theta is missing value or gradient callback");
  for (std::size_t i = 0; i < m2; ++i)
    check_dim(r[i] < s[i], "band bounds must satisfy r<s at index " + std::to_string(i));
  for (std::size_t i = 0; i < n1; ++i)
    check_dim(l[i] < u[i], "x bounds must satisfy l<u at index " + std::to_string(i));
  for (std::size_t i = 0; i < n2; ++i)
    check_dim(p[i] < q[i], "y bounds must satisfy p<q at index " + std::to_string(i));
}

Vec ReformulatedProblem::apply_constraints(const Vec& x, const Vec& y, const Vec& z) const {
  Vec res = matvec(E, x);
  axpy_inplace(1.0, matvec(F, y), res);
  // G z = (0; -z)
  for (std::size_t i = 0; i < m2; ++i) res[m1 + i] -= z[i];
  return res;
}

Vec ReformulatedProblem::apply_Gt(const Vec& v) const {
  Vec out(m2);
  for (std::size_t i = 0; i < m2; ++i) out[i] = -v[m1 + i];
  return out;
}

double ReformulatedProblem::objective(const Vec& x, const Vec& y) const {
  return f.value(x) + theta.value(y);
}

ReformulatedProblem reformulate(const TwoBlockProblem& p) {
  p.validate();
  const std::size_t n1 = p.n1(), n2 = p.n2(), m1 = p.m1(), m2 = p.m2();

  ReformulatedProblem rp;
  rp.f = p.f;
  rp.theta = p.theta;
  rp.m1 = m1;
  rp.m2 = m2;

  rp.E = Mat(m1 + m2, n1);
  rp.F = Mat(m1 + m2, n2);
  rp.G = Mat(m1 + m2, m2);
  for (std::size_t i = 0; i < m1; ++i)
    for (std::size_t j = 0; j < n1; ++j) rp.E(i, j) = p.A(i, j);
  for (std::size_t i = 0; i < m2; ++i)
    for (std::size_t j = 0; j < n1; ++j) rp.E(m1 + i, j) = p.C(i, j);
  for (std::size_t i = 0; i < m1; ++i)
    for (std::size_t j = 0; j < n2; ++j) rp.F(i, j) = p.B(i, j);
  for (std::size_t i = 0; i < m2; ++i)
    for (std::size_t j = 0; j < n2; ++j) rp.F(m1 + i, j) = p.D(i, j);
  for (std::size_t i = 0; i < m2; ++i) rp.G(m1 + i, i) = -1.0;

  rp.c = Vec(m1 + m2, 0.0);
  for (std::size_t i = 0; i < m1; ++i) rp.c[i] = p.b[i];

  rp.l = p.l;
  rp.u = p.u;
  rp.p = p.p;
  rp.q = p.q;
  rp.r = p.r;
  rp.s = p.s;

  rp.EtE = gram(rp.E);
  rp.FtF = gram(rp.F);
  return rp;
}

Iterate make_initial_iterate(const ReformulatedProblem& rp, Vec x0, Vec y0) {
  if (x0.size() != rp.n1() || y0.size() != rp.n2())
    throw std::invalid_argument("initial iterate: block size mismatch");
  Iterate w;
  w.x = clamp(x0, rp.l, rp.u);
  w.y = clamp(y0, rp.p, rp.q);
  Vec cxdy(rp.m2);
  {
    Vec full = matvec(rp.E, w.x);
    axpy_inplace(1.0, matvec(rp.F, w.y), full);
    for (std::size_t i = 0; i < rp.m2; ++i) cxdy[i] = full[rp.m1 + i];
  }
  w.z = clamp(cxdy, rp.r, rp.s);
  w.lambda = Vec(rp.m1 + rp.m2, 1.0);
  w.k = 0;
  return w;
}

void SolverConfig::validate() const {
  auto bad = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(rho > 0.0 && rho < 1.0)) bad("config: rho must lie in (0,1)");
  if (!(sigma > 0.0 && sigma < 1.0)) bad("config: sigma must lie in (0,1)");
  if (!(beta > 0.0)) bad("config: beta must be positive");
  if (!(xi > 0.0)) bad("config: xi must be positive");
  if (!(tol_direction > 0.0)) bad("config: tol_direction must be positive");
  if (max_iterations <= 0) bad("config: max_iterations must be positive");
  if (max_backtracks <= 0) bad("config: max_backtracks must be positive");
  if (!(qp_tolerance > 0.0)) bad("config: qp_tolerance must be positive");
  if (hessian_mode == HessianMode::IdentityShift && !(identity_shift > 0.0))
    bad("config: identity_shift must be positive");
}

double aug_lagrangian(const ReformulatedProblem& rp, const Iterate& w, double beta) {
  Vec res = rp.apply_constraints(w.x, w.y, w.z);
  axpy_inplace(-1.0, rp.c, res);
  return rp.objective(w.x, w.y) - dot(w.lambda, res) + 0.5 * beta * sqnorm(res);
}

double aug_lagrangian_shifted(const ReformulatedProblem& rp, const Iterate& w, double beta) {
  Vec res = rp.apply_constraints(w.x, w.y, w.z);
  axpy_inplace(-1.0, rp.c, res);
  axpy_inplace(-1.0 / beta, w.lambda, res);
  return rp.objective(w.x, w.y) + 0.5 * beta * sqnorm(res) -
         sqnorm(w.lambda) / (2.0 * beta);
}

AugLagrangianGrad aug_lagrangian_grad(const ReformulatedProblem& rp, const Iterate& w,
                                      double beta) {
  Vec res = rp.apply_constraints(w.x, w.y, w.z);
  axpy_inplace(-1.0, rp.c, res);
  // t = lambda - beta * res
  Vec t = w.lambda;
  axpy_inplace(-beta, res, t);

  AugLagrangianGrad g;
  g.x = rp.f.grad(w.x);
  axpy_inplace(-1.0, rp.apply_Et(t), g.x);
  g.y = rp.theta.grad(w.y);
  axpy_inplace(-1.0, rp.apply_Ft(t), g.y);
  g.z = rp.apply_Gt(t);
  scale_inplace(-1.0, g.z);
  return g;
}

FeasibilityResidual feasibility_residual(const ReformulatedProblem& rp, const Iterate& w) {
  FeasibilityResidual out;
  out.residual = rp.apply_constraints(w.x, w.y, w.z);
  axpy_inplace(-1.0, rp.c, out.residual);
  out.inf_norm = norm_inf(out.residual);
  return out;
}

bool box_feasible(const ReformulatedProblem& rp, const Vec& x, const Vec& y, const Vec& z) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < rp.l[i] || x[i] > rp.u[i]) return false;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] < rp.p[i] || y[i] > rp.q[i]) return false;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] < rp.r[i] || z[i] > rp.s[i]) return false;
  return true;
}

}  // namespace splitsqp
