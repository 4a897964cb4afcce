#include "splitsqp/kkt.hpp"

#include <algorithm>
#include <cmath>

namespace splitsqp::kkt {

namespace {

// |mult * slack| under the convention inf * 0 = 0; optionally scaled by
// 1 + |mult| + |slack|.
double comp_term(double mult, double slack, bool scaled) {
  if (!std::isfinite(slack)) return mult == 0.0 ? 0.0 : kInf;
  const double raw = std::fabs(mult * slack);
  return scaled ? raw / (1.0 + std::fabs(mult) + std::fabs(slack)) : raw;
}

double negative_part_inf(const Vec& v) {
  double worst = 0.0;
  for (double t : v) worst = std::max(worst, std::max(0.0, -t));
  return worst;
}

struct BoxTerms {
  double complementarity = 0.0;
  double violation = 0.0;
};

BoxTerms box_terms(const Vec& v, const Vec& lo, const Vec& hi, const Vec& alpha,
                   const Vec& gamma, bool scaled) {
  BoxTerms out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.complementarity =
        std::max(out.complementarity, comp_term(alpha[i], v[i] - lo[i], scaled));
    out.complementarity =
        std::max(out.complementarity, comp_term(gamma[i], hi[i] - v[i], scaled));
    if (std::isfinite(lo[i])) out.violation = std::max(out.violation, lo[i] - v[i]);
    if (std::isfinite(hi[i])) out.violation = std::max(out.violation, v[i] - hi[i]);
  }
  out.violation = std::max(out.violation, 0.0);
  return out;
}

double max_of(std::initializer_list<double> xs) {
  double m = 0.0;
  for (double t : xs) m = std::max(m, t);
  return m;
}

}  // namespace

ResidualBreakdown kkt_residual_reformulated(const ReformulatedProblem& rp, const Vec& x,
                                            const Vec& y, const Vec& z,
                                            const MultiplierSet& m,
                                            bool scaled_complementarity) {
  ResidualBreakdown out;

  // Stationarity lines of the reformulated system.
  Vec st_x = rp.f.grad(x);
  axpy_inplace(-1.0, rp.apply_Et(m.lambda), st_x);
  axpy_inplace(-1.0, m.alpha_x, st_x);
  axpy_inplace(1.0, m.gamma_x, st_x);
  out.stationarity_x = norm_inf(st_x);

  Vec st_y = rp.theta.grad(y);
  axpy_inplace(-1.0, rp.apply_Ft(m.lambda), st_y);
  axpy_inplace(-1.0, m.alpha_y, st_y);
  axpy_inplace(1.0, m.gamma_y, st_y);
  out.stationarity_y = norm_inf(st_y);

  // -G^T lambda = lambda_ie
  Vec st_z = rp.apply_Gt(m.lambda);
  scale_inplace(-1.0, st_z);
  axpy_inplace(-1.0, m.alpha_z, st_z);
  axpy_inplace(1.0, m.gamma_z, st_z);
  out.stationarity_z = norm_inf(st_z);

  out.sign_violation =
      max_of({negative_part_inf(m.alpha_x), negative_part_inf(m.gamma_x),
              negative_part_inf(m.alpha_y), negative_part_inf(m.gamma_y),
              negative_part_inf(m.alpha_z), negative_part_inf(m.gamma_z)});

  const BoxTerms bx = box_terms(x, rp.l, rp.u, m.alpha_x, m.gamma_x, scaled_complementarity);
  const BoxTerms by = box_terms(y, rp.p, rp.q, m.alpha_y, m.gamma_y, scaled_complementarity);
  const BoxTerms bz = box_terms(z, rp.r, rp.s, m.alpha_z, m.gamma_z, scaled_complementarity);
  out.complementarity = max_of({bx.complementarity, by.complementarity, bz.complementarity});
  out.box_violation = max_of({bx.violation, by.violation, bz.violation});

  Vec res = rp.apply_constraints(x, y, z);
  axpy_inplace(-1.0, rp.c, res);
  out.feasibility = norm_inf(res);

  out.total = max_of({out.stationarity_x, out.stationarity_y, out.stationarity_z,
                      out.sign_violation, out.complementarity, out.box_violation,
                      out.feasibility});
  return out;
}

OriginalMultipliers map_multipliers_to_original(const MultiplierSet& m, std::size_t m1) {
  OriginalMultipliers out;
  out.lambda_e = Vec(m.lambda.begin(), m.lambda.begin() + static_cast<long>(m1));
  out.alpha_x = m.alpha_x;
  out.gamma_x = m.gamma_x;
  out.alpha_y = m.alpha_y;
  out.gamma_y = m.gamma_y;
  out.alpha_z = m.alpha_z;
  out.gamma_z = m.gamma_z;
  return out;
}

ResidualBreakdown kkt_residual_original(const ReformulatedProblem& rp, const Vec& x,
                                        const Vec& y, const OriginalMultipliers& m,
                                        bool scaled_complementarity) {
  ResidualBreakdown out;
  const std::size_t m1 = rp.m1, m2 = rp.m2;

  // -A^T lambda_e + C^T (gamma_z - alpha_z) = -E^T [lambda_e; alpha_z - gamma_z]
  Vec packed(m1 + m2);
  for (std::size_t i = 0; i < m1; ++i) packed[i] = m.lambda_e[i];
  for (std::size_t i = 0; i < m2; ++i) packed[m1 + i] = m.alpha_z[i] - m.gamma_z[i];

  Vec st_x = rp.f.grad(x);
  axpy_inplace(-1.0, rp.apply_Et(packed), st_x);
  axpy_inplace(1.0, m.gamma_x, st_x);
  axpy_inplace(-1.0, m.alpha_x, st_x);
  out.stationarity_x = norm_inf(st_x);

  Vec st_y = rp.theta.grad(y);
  axpy_inplace(-1.0, rp.apply_Ft(packed), st_y);
  axpy_inplace(1.0, m.gamma_y, st_y);
  axpy_inplace(-1.0, m.alpha_y, st_y);
  out.stationarity_y = norm_inf(st_y);
  out.stationarity_z = 0.0;  // no z line in the original system

  out.sign_violation =
      max_of({negative_part_inf(m.alpha_x), negative_part_inf(m.gamma_x),
              negative_part_inf(m.alpha_y), negative_part_inf(m.gamma_y),
              negative_part_inf(m.alpha_z), negative_part_inf(m.gamma_z)});

  // The band block, evaluated against w = C x + D y.
  Vec full = matvec(rp.E, x);
  axpy_inplace(1.0, matvec(rp.F, y), full);
  Vec w(m2);
  for (std::size_t i = 0; i < m2; ++i) w[i] = full[m1 + i];

  const BoxTerms bx = box_terms(x, rp.l, rp.u, m.alpha_x, m.gamma_x, scaled_complementarity);
  const BoxTerms by = box_terms(y, rp.p, rp.q, m.alpha_y, m.gamma_y, scaled_complementarity);
  const BoxTerms bw = box_terms(w, rp.r, rp.s, m.alpha_z, m.gamma_z, scaled_complementarity);
  out.complementarity = max_of({bx.complementarity, by.complementarity, bw.complementarity});
  out.box_violation = max_of({bx.violation, by.violation, bw.violation});

  double feas = 0.0;
  for (std::size_t i = 0; i < m1; ++i)
    feas = std::max(feas, std::fabs(full[i] - rp.c[i]));
  out.feasibility = feas;

  out.total = max_of({out.stationarity_x, out.stationarity_y, out.sign_violation,
                      out.complementarity, out.box_violation, out.feasibility});
  return out;
}

namespace {

double fd_rel_error(const BlockObjective& obj, const Vec& at, double h) {
  const Vec grad = obj.grad(at);
  Vec fd(at.size());
  Vec probe = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = obj.value(probe);
    probe[i] = saved - h;
    const double down = obj.value(probe);
    probe[i] = saved;
    fd[i] = (up - down) / (2.0 * h);
  }
  axpy_inplace(-1.0, grad, fd);
  return norm_inf(fd) / (1.0 + norm_inf(grad));
}

}  // namespace

GradientCheckReport check_gradients(const TwoBlockProblem& p, const Vec& x, const Vec& y,
                                    double h) {
  GradientCheckReport out;
  out.max_rel_error_f = fd_rel_error(p.f, x, h);
  out.max_rel_error_theta = fd_rel_error(p.theta, y, h);
  out.ok = out.max_rel_error_f <= 1e-4 && out.max_rel_error_theta <= 1e-4;
  return out;
}

}  // namespace splitsqp::kkt
