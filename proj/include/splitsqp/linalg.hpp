#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitsqp/kernels.hpp"

namespace splitsqp {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  double* row(std::size_t i) { return a_.data() + i * cols_; }
  const double* row(std::size_t i) const { return a_.data() + i * cols_; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  Mat transposed() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec a_;
};

// ---- Vec helpers (thin wrappers over the kernel table) ----

double dot(const Vec& x, const Vec& y);
double sqnorm(const Vec& x);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
void axpy_inplace(double a, const Vec& x, Vec& y);  // y += a*x
void scale_inplace(double a, Vec& x);
Vec add(const Vec& x, const Vec& y);
Vec sub(const Vec& x, const Vec& y);
Vec scaled(const Vec& x, double a);
Vec concat(const Vec& x, const Vec& y);
Vec concat(const Vec& x, const Vec& y, const Vec& z);
Vec clamp(const Vec& v, const Vec& lo, const Vec& hi);

Vec matvec(const Mat& a, const Vec& x);    // A x
Vec matvec_t(const Mat& a, const Vec& x);  // A^T x
Mat gram(const Mat& a);                    // A^T A
Mat mul_tn(const Mat& a, const Mat& b);    // A^T B

/// w^T M w for symmetric M.
double quadratic_form(const Mat& m, const Vec& w);

// ---- errors ----

struct NotPositiveDefiniteError : std::runtime_error {
  NotPositiveDefiniteError(const std::string& what, double pivot)
      : std::runtime_error(what), smallest_pivot(pivot) {}
  double smallest_pivot;
};

struct IterationBudgetError : std::runtime_error {
  IterationBudgetError(const std::string& what, Vec best, double res)
      : std::runtime_error(what), best_iterate(std::move(best)), residual(res) {}
  Vec best_iterate;
  double residual;
};

// ---- Cholesky ----

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  static Cholesky factor(const Mat& h);  // throws NotPositiveDefiniteError
  static std::optional<Cholesky> try_factor(const Mat& h, double* smallest_pivot = nullptr);

  Vec solve(const Vec& rhs) const;  // solves L L^T x = rhs
  void solve_in_place(Vec& x) const;
  const Mat& lower() const { return l_; }
  double smallest_pivot() const { return smallest_pivot_; }
  std::size_t dim() const { return l_.rows(); }

 private:
  Mat l_;
  double smallest_pivot_ = 0.0;
};

/// Cholesky factor of H restricted to an ordered index subset, supporting
/// O(n^2) append of a new index and removal of an existing one. Used by the
/// active-set QP solver: removing a variable that hits a bound deletes its
/// row/column; releasing a bound appends it back.
class SubsetCholesky {
 public:
  explicit SubsetCholesky(const Mat& h);

  /// Rebuild the factor for the given ordered subset from scratch.
  void reset(const std::vector<std::size_t>& indices);

  /// Start from a full-set factor (all indices 0..n-1, precomputed elsewhere).
  void reset_full(const Cholesky& full);

  void append(std::size_t index);          // throws NotPositiveDefiniteError
  void remove(std::size_t index);          // index must be present
  bool contains(std::size_t index) const { return pos_[index] >= 0; }

  std::size_t size() const { return order_.size(); }
  const std::vector<std::size_t>& order() const { return order_; }

  /// Solves H[S,S] x = rhs where rhs/x are in subset order.
  Vec solve(const Vec& rhs) const;

 private:
  const Mat* h_;
  std::size_t n_;
  Mat l_;                          // n x n buffer; leading size() x size() valid
  std::vector<std::size_t> order_; // subset in factor order
  std::vector<int> pos_;           // variable -> position in order_, or -1
};

// ---- spectral estimates (power iteration) ----

double largest_eigenvalue(const Mat& h, int iters = 120);
/// Smallest eigenvalue of an SPD matrix via inverse iteration.
double smallest_eigenvalue_spd(const Mat& h, int iters = 120);

}  // namespace splitsqp
