#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "splitsqp/kernels.hpp"
#include "splitsqp/linalg.hpp"

using namespace splitsqp;

namespace {

Vec random_vec(std::mt19937& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vec v(n);
  for (double& t : v) t = dist(rng);
  return v;
}

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace

TEST_CASE("selected kernel table is usable") {
  const auto& k = kernels::ops();
  CHECK(k.dot != nullptr);
  MESSAGE("selected kernels: ", k.name);
}

TEST_CASE("scalar and vector variants agree on every op") {
  const kernels::Ops& scalar = kernels::scalar_ops();
  const kernels::Ops* simd = kernels::avx2_ops();
  if (!simd) {
    MESSAGE("avx2 kernels unavailable at runtime; scalar-only build");
    return;
  }
  std::mt19937 rng(42);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 100u, 257u}) {
    Vec x = random_vec(rng, n), y = random_vec(rng, n);

    CHECK(close_rel(scalar.dot(x.data(), y.data(), n), simd->dot(x.data(), y.data(), n),
                    1e-12));
    CHECK(close_rel(scalar.sqnorm(x.data(), n), simd->sqnorm(x.data(), n), 1e-12));
    // norm_inf and clamp are order-independent: exact equality
    CHECK(scalar.norm_inf(x.data(), n) == simd->norm_inf(x.data(), n));

    Vec lo = random_vec(rng, n), hi = lo;
    for (std::size_t i = 0; i < n; ++i) hi[i] += std::fabs(random_vec(rng, 1)[0]) + 0.1;
    Vec out_s(n), out_v(n);
    scalar.clamp(x.data(), lo.data(), hi.data(), out_s.data(), n);
    simd->clamp(x.data(), lo.data(), hi.data(), out_v.data(), n);
    CHECK(out_s == out_v);

    Vec ys = y, yv = y;
    scalar.axpy(0.7, x.data(), ys.data(), n);
    simd->axpy(0.7, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-13));

    Vec xs = x, xv = x;
    scalar.scal(-1.3, xs.data(), n);
    simd->scal(-1.3, xv.data(), n);
    CHECK(xs == xv);
  }
}

TEST_CASE("matrix kernels agree between variants") {
  const kernels::Ops& scalar = kernels::scalar_ops();
  const kernels::Ops* simd = kernels::avx2_ops();
  if (!simd) return;
  std::mt19937 rng(7);
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{1, 1},
                            {3, 5},
                            {8, 8},
                            {13, 7},
                            {32, 17},
                            {50, 50}}) {
    Vec a = random_vec(rng, rows * cols);
    Vec x = random_vec(rng, cols), xt = random_vec(rng, rows);
    Vec ys(rows), yv(rows);
    scalar.gemv(a.data(), rows, cols, x.data(), ys.data());
    simd->gemv(a.data(), rows, cols, x.data(), yv.data());
    for (std::size_t i = 0; i < rows; ++i)
      CHECK(close_rel(ys[i], yv[i], 1e-12));

    Vec ts(cols), tv(cols);
    scalar.gemv_t(a.data(), rows, cols, xt.data(), ts.data());
    simd->gemv_t(a.data(), rows, cols, xt.data(), tv.data());
    for (std::size_t i = 0; i < cols; ++i)
      CHECK(close_rel(ts[i], tv[i], 1e-12));

    Vec b = random_vec(rng, rows * 6);
    Vec cs(cols * 6), cv(cols * 6);
    scalar.gemm_tn(a.data(), b.data(), rows, cols, 6, cs.data());
    simd->gemm_tn(a.data(), b.data(), rows, cols, 6, cv.data());
    for (std::size_t i = 0; i < cs.size(); ++i)
      CHECK(close_rel(cs[i], cv[i], 1e-12));
  }
}

TEST_CASE("clamp honors infinite bounds") {
  const double inf = std::numeric_limits<double>::infinity();
  Vec v = {-5.0, 0.0, 5.0};
  Vec lo = {-inf, -1.0, -inf};
  Vec hi = {inf, 1.0, 2.0};
  for (const kernels::Ops* k : {&kernels::scalar_ops(), kernels::avx2_ops()}) {
    if (!k) continue;
    Vec out(3);
    k->clamp(v.data(), lo.data(), hi.data(), out.data(), 3);
    CHECK(out == Vec{-5.0, 0.0, 2.0});
  }
}

TEST_CASE("gemv against a hand computation") {
  // 2x3 row-major
  Vec a = {1, 2, 3, 4, 5, 6};
  Vec x = {1, 0, -1};
  Vec y(2);
  kernels::ops().gemv(a.data(), 2, 3, x.data(), y.data());
  CHECK(y == Vec{-2.0, -2.0});
  Vec t(3);
  Vec w = {1, -1};
  kernels::ops().gemv_t(a.data(), 2, 3, w.data(), t.data());
  CHECK(t == Vec{-3.0, -3.0, -3.0});
}
