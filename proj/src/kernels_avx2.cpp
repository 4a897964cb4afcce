#include "splitsqp/kernels.hpp"

#if defined(SPLITSQP_AVX2_TU) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace splitsqp::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d h = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, h));
}

double v_dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
    a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), a2);
    a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double v_sqnorm(const double* x, std::size_t n) { return v_dot(x, x, n); }

double v_norm_inf(const double* x, std::size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_and_pd(absmask, _mm256_loadu_pd(x + i)));
  __m128d lo = _mm256_castpd256_pd128(m);
  __m128d hi = _mm256_extractf128_pd(m, 1);
  lo = _mm_max_pd(lo, hi);
  double out = std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) out = std::max(out, std::fabs(x[i]));
  return out;
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_scal(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void v_clamp(const double* v, const double* lo, const double* hi, double* out,
             std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_max_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_min_pd(t, _mm256_loadu_pd(hi + i)));
  }
  for (; i < n; ++i) out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
}

void v_gemv(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = v_dot(a + i * cols, x, cols);
}

void v_gemv_t(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  std::memset(y, 0, cols * sizeof(double));
  for (std::size_t i = 0; i < rows; ++i) v_axpy(x[i], a + i * cols, y, cols);
}

void v_gemm_tn(const double* a, const double* b, std::size_t k, std::size_t m,
               std::size_t n, double* c) {
  std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t t = 0; t < k; ++t) {
    const double* arow = a + t * m;
    const double* brow = b + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      if (arow[i] != 0.0) v_axpy(arow[i], brow, c + i * n, n);
    }
  }
}

}  // namespace

namespace detail {
const Ops* avx2_table() {
  static const Ops table = {"avx2",  v_dot,   v_sqnorm, v_norm_inf, v_axpy,
                            v_scal,  v_clamp, v_gemv,   v_gemv_t,   v_gemm_tn};
  return &table;
}
}  // namespace detail

}  // namespace splitsqp::kernels

#else

namespace splitsqp::kernels::detail {
const Ops* avx2_table() { return nullptr; }
}  // namespace splitsqp::kernels::detail

#endif
