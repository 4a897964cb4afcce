#include "splitsqp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace splitsqp::kernels {
namespace {

double s_dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sqnorm(const double* x, std::size_t n) { return s_dot(x, x, n); }

double s_norm_inf(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scal(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_clamp(const double* v, const double* lo, const double* hi, double* out,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
}

void s_gemv(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = s_dot(a + i * cols, x, cols);
}

void s_gemv_t(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  std::memset(y, 0, cols * sizeof(double));
  for (std::size_t i = 0; i < rows; ++i) s_axpy(x[i], a + i * cols, y, cols);
}

void s_gemm_tn(const double* a, const double* b, std::size_t k, std::size_t m,
               std::size_t n, double* c) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t t = 0; t < k; ++t) {
    const double* arow = a + t * m;
    const double* brow = b + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      if (arow[i] != 0.0) s_axpy(arow[i], brow, c + i * n, n);
    }
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {"scalar", s_dot,   s_sqnorm, s_norm_inf, s_axpy,
                            s_scal,   s_clamp, s_gemv,   s_gemv_t,   s_gemm_tn};
  return table;
}

}  // namespace splitsqp::kernels
