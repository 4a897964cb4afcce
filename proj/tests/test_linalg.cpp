#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "splitsqp/linalg.hpp"

using namespace splitsqp;

TEST_CASE("cholesky factors and solves an SPD system") {
  Mat h(2, 2);
  h(0, 0) = 4.0;
  h(0, 1) = h(1, 0) = 2.0;
  h(1, 1) = 3.0;
  const Cholesky c = Cholesky::factor(h);
  CHECK(c.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(c.lower()(1, 0) == doctest::Approx(1.0));
  CHECK(c.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)));

  const Vec x = c.solve({2.0, 1.0});
  // 4a + 2b = 2, 2a + 3b = 1
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.0));
}

TEST_CASE("cholesky rejects indefinite matrices with the pivot value") {
  Mat h(2, 2);
  h(0, 0) = 1.0;
  h(0, 1) = h(1, 0) = 2.0;
  h(1, 1) = 1.0;
  double pivot = 0.0;
  CHECK(!Cholesky::try_factor(h, &pivot));
  CHECK(pivot < 0.0);
  CHECK_THROWS_AS((void)Cholesky::factor(h), NotPositiveDefiniteError);
  try {
    (void)Cholesky::factor(h);
  } catch (const NotPositiveDefiniteError& e) {
    CHECK(e.smallest_pivot == doctest::Approx(-3.0));
  }
}

TEST_CASE("random cholesky solves match residual check") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 12);
    const Mat h = oracle::rand_spd(rng, n, 0.5);
    const Vec rhs = oracle::rand_vec(rng, n, -2.0, 2.0);
    const Vec x = Cholesky::factor(h).solve(rhs);
    Vec res = matvec(h, x);
    axpy_inplace(-1.0, rhs, res);
    CHECK(norm_inf(res) <= 1e-9 * (1.0 + norm_inf(rhs)));
  }
}

TEST_CASE("subset cholesky append/remove tracks fresh factorization") {
  std::mt19937 rng(11);
  const std::size_t n = 12;
  const Mat h = oracle::rand_spd(rng, n, 1.0);
  SubsetCholesky sc(h);
  sc.reset_full(Cholesky::factor(h));

  std::vector<std::size_t> present(n);
  for (std::size_t i = 0; i < n; ++i) present[i] = 1;

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int op = 0; op < 120; ++op) {
    const std::size_t i = pick(rng);
    if (present[i] && sc.size() > 1) {
      sc.remove(i);
      present[i] = 0;
    } else if (!present[i]) {
      sc.append(i);
      present[i] = 1;
    }

    // Compare a random solve against a fresh factorization of the submatrix.
    const auto& order = sc.order();
    Mat sub(order.size(), order.size());
    for (std::size_t a = 0; a < order.size(); ++a)
      for (std::size_t b = 0; b < order.size(); ++b) sub(a, b) = h(order[a], order[b]);
    const Vec rhs = oracle::rand_vec(rng, order.size(), -1.0, 1.0);
    const Vec got = sc.solve(rhs);
    const Vec want = Cholesky::factor(sub).solve(rhs);
    for (std::size_t a = 0; a < order.size(); ++a)
      CHECK(got[a] == doctest::Approx(want[a]).epsilon(1e-8));
  }
}

TEST_CASE("eigenvalue estimates bracket a known spectrum") {
  Mat h(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 4.0;
  h(2, 2) = 9.0;
  CHECK(largest_eigenvalue(h) == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(smallest_eigenvalue_spd(h) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gram and mul_tn agree with direct products") {
  std::mt19937 rng(5);
  const Mat a = oracle::rand_mat(rng, 7, 4, 1.0);
  const Mat b = oracle::rand_mat(rng, 7, 3, 1.0);
  const Mat ata = gram(a);
  const Mat atb = mul_tn(a, b);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 7; ++k) want += a(k, i) * a(k, j);
      CHECK(ata(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 7; ++k) want += a(k, i) * b(k, j);
      CHECK(atb(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
}
