#pragma once

#include <cstddef>

namespace splitsqp::kernels {

/// Dispatch table for the dense inner loops. Matrices are dense row-major.
/// Every entry has a scalar reference implementation and, on x86-64 with
/// AVX2+FMA, a vectorized variant selected once at startup.
struct Ops {
  const char* name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sqnorm)(const double* x, std::size_t n);
  double (*norm_inf)(const double* x, std::size_t n);

  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scal)(double a, double* x, std::size_t n);

  // out_i = median(lo_i, v_i, hi_i); lo_i = -inf / hi_i = +inf act as no bound
  void (*clamp)(const double* v, const double* lo, const double* hi,
                double* out, std::size_t n);

  // y = A x          (A rows x cols)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
  // y = A^T x
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
  // C(m x n) = A^T B  with A k x m, B k x n
  void (*gemm_tn)(const double* a, const double* b, std::size_t k,
                  std::size_t m, std::size_t n, double* c);
};

const Ops& scalar_ops();

/// AVX2+FMA table, or nullptr when the binary or the CPU lacks support.
const Ops* avx2_ops();

/// Runtime-selected table. Honors SPLITSQP_KERNELS=scalar|avx2 (default auto).
const Ops& ops();

namespace detail {
const Ops* avx2_table();
}

}  // namespace splitsqp::kernels
