#include "splitsqp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace splitsqp {

namespace {
const kernels::Ops& K() { return kernels::ops(); }

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double dot(const Vec& x, const Vec& y) {
  require(x.size() == y.size(), "dot: size mismatch");
  return K().dot(x.data(), y.data(), x.size());
}

double sqnorm(const Vec& x) { return K().sqnorm(x.data(), x.size()); }
double norm2(const Vec& x) { return std::sqrt(sqnorm(x)); }
double norm_inf(const Vec& x) { return K().norm_inf(x.data(), x.size()); }

void axpy_inplace(double a, const Vec& x, Vec& y) {
  require(x.size() == y.size(), "axpy: size mismatch");
  K().axpy(a, x.data(), y.data(), x.size());
}

void scale_inplace(double a, Vec& x) { K().scal(a, x.data(), x.size()); }

Vec add(const Vec& x, const Vec& y) {
  Vec out = x;
  axpy_inplace(1.0, y, out);
  return out;
}

Vec sub(const Vec& x, const Vec& y) {
  Vec out = x;
  axpy_inplace(-1.0, y, out);
  return out;
}

Vec scaled(const Vec& x, double a) {
  Vec out = x;
  scale_inplace(a, out);
  return out;
}

Vec concat(const Vec& x, const Vec& y) {
  Vec out;
  out.reserve(x.size() + y.size());
  out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

Vec concat(const Vec& x, const Vec& y, const Vec& z) {
  Vec out;
  out.reserve(x.size() + y.size() + z.size());
  out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

Vec clamp(const Vec& v, const Vec& lo, const Vec& hi) {
  require(v.size() == lo.size() && v.size() == hi.size(), "clamp: size mismatch");
  Vec out(v.size());
  K().clamp(v.data(), lo.data(), hi.data(), out.data(), v.size());
  return out;
}

Vec matvec(const Mat& a, const Vec& x) {
  require(a.cols() == x.size(), "matvec: size mismatch");
  Vec y(a.rows());
  K().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  require(a.rows() == x.size(), "matvec_t: size mismatch");
  Vec y(a.cols());
  K().gemv_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Mat gram(const Mat& a) {
  Mat c(a.cols(), a.cols());
  K().gemm_tn(a.data(), a.data(), a.rows(), a.cols(), a.cols(), c.data());
  return c;
}

Mat mul_tn(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "mul_tn: row mismatch");
  Mat c(a.cols(), b.cols());
  K().gemm_tn(a.data(), b.data(), a.rows(), a.cols(), b.cols(), c.data());
  return c;
}

double quadratic_form(const Mat& m, const Vec& w) {
  return dot(w, matvec(m, w));
}

// ---- Cholesky ----

namespace {

// Column-by-column lower Cholesky on row-major storage; inner products run
// over contiguous row prefixes. Returns false on a non-positive pivot.
bool chol_in_place(const Mat& h, Mat& l, double& smallest_pivot) {
  const std::size_t n = h.rows();
  const auto& k = K();
  double max_diag = 0.0;
  for (std::size_t j = 0; j < n; ++j) max_diag = std::max(max_diag, std::fabs(h(j, j)));
  const double floor = 1e-13 * std::max(1.0, max_diag);
  smallest_pivot = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = h(j, j) - k.dot(l.row(j), l.row(j), j);
    smallest_pivot = std::min(smallest_pivot, d);
    if (!(d > floor)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (h(i, j) - k.dot(l.row(i), l.row(j), j)) / ljj;
  }
  if (n == 0) smallest_pivot = 0.0;
  return true;
}

void forward_solve(const Mat& l, std::size_t n, Vec& x) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (x[i] - K().dot(l.row(i), x.data(), i)) / l(i, i);
  }
}

void backward_solve(const Mat& l, std::size_t n, Vec& x) {
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
    x[ii] = s / l(ii, ii);
  }
}

}  // namespace

Cholesky Cholesky::factor(const Mat& h) {
  double pivot = 0.0;
  auto c = try_factor(h, &pivot);
  if (!c)
    throw NotPositiveDefiniteError(
        "matrix is not positive definite (smallest Cholesky pivot " +
            std::to_string(pivot) + ")",
        pivot);
  return *std::move(c);
}

std::optional<Cholesky> Cholesky::try_factor(const Mat& h, double* smallest_pivot) {
  require(h.rows() == h.cols(), "cholesky: matrix not square");
  Cholesky out;
  out.l_ = Mat(h.rows(), h.cols());
  double pivot = 0.0;
  const bool ok = chol_in_place(h, out.l_, pivot);
  if (smallest_pivot) *smallest_pivot = pivot;
  out.smallest_pivot_ = pivot;
  if (!ok) return std::nullopt;
  return out;
}

Vec Cholesky::solve(const Vec& rhs) const {
  Vec x = rhs;
  solve_in_place(x);
  return x;
}

void Cholesky::solve_in_place(Vec& x) const {
  require(x.size() == l_.rows(), "cholesky solve: size mismatch");
  forward_solve(l_, x.size(), x);
  backward_solve(l_, x.size(), x);
}

// ---- SubsetCholesky ----

SubsetCholesky::SubsetCholesky(const Mat& h)
    : h_(&h), n_(h.rows()), l_(h.rows(), h.cols()), pos_(h.rows(), -1) {
  require(h.rows() == h.cols(), "subset cholesky: matrix not square");
}

void SubsetCholesky::reset(const std::vector<std::size_t>& indices) {
  order_ = indices;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (std::size_t a = 0; a < order_.size(); ++a) pos_[order_[a]] = static_cast<int>(a);
  const auto& k = K();
  const std::size_t m = order_.size();
  double max_diag = 1.0;
  for (std::size_t a = 0; a < m; ++a)
    max_diag = std::max(max_diag, std::fabs((*h_)(order_[a], order_[a])));
  const double floor = 1e-13 * max_diag;
  for (std::size_t a = 0; a < m; ++a) {
    const double d = (*h_)(order_[a], order_[a]) - k.dot(l_.row(a), l_.row(a), a);
    if (!(d > floor))
      throw NotPositiveDefiniteError("subset factor: non-positive pivot", d);
    l_(a, a) = std::sqrt(d);
    for (std::size_t i = a + 1; i < m; ++i)
      l_(i, a) = ((*h_)(order_[i], order_[a]) - k.dot(l_.row(i), l_.row(a), a)) / l_(a, a);
  }
}

void SubsetCholesky::reset_full(const Cholesky& full) {
  require(full.dim() == n_, "subset cholesky: full factor size mismatch");
  order_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    order_[i] = i;
    pos_[i] = static_cast<int>(i);
  }
  std::memcpy(l_.data(), full.lower().data(), n_ * n_ * sizeof(double));
}

void SubsetCholesky::append(std::size_t index) {
  require(pos_[index] < 0, "subset cholesky: index already present");
  const std::size_t m = order_.size();
  // New column w solves L w = H[S, index]; new pivot = H(index,index) - |w|^2.
  Vec w(m);
  for (std::size_t a = 0; a < m; ++a) w[a] = (*h_)(order_[a], index);
  forward_solve(l_, m, w);
  const double d = (*h_)(index, index) - K().sqnorm(w.data(), m);
  const double floor = 1e-13 * std::max(1.0, std::fabs((*h_)(index, index)));
  if (!(d > floor))
    throw NotPositiveDefiniteError("subset factor append: non-positive pivot", d);
  double* row = l_.row(m);
  std::memcpy(row, w.data(), m * sizeof(double));
  row[m] = std::sqrt(d);
  pos_[index] = static_cast<int>(m);
  order_.push_back(index);
}

void SubsetCholesky::remove(std::size_t index) {
  require(pos_[index] >= 0, "subset cholesky: index not present");
  const std::size_t m = order_.size();
  const std::size_t k = static_cast<std::size_t>(pos_[index]);

  // Drop row k of L, then restore triangularity of the trailing block with
  // Givens rotations acting on column pairs (j, j+1).
  for (std::size_t i = k + 1; i < m; ++i)
    std::memcpy(l_.row(i - 1), l_.row(i), (i + 1) * sizeof(double));
  const std::size_t mm = m - 1;
  for (std::size_t j = k; j < mm; ++j) {
    const double a = l_(j, j);
    const double b = l_(j, j + 1);
    const double r = std::hypot(a, b);
    if (r == 0.0) continue;
    const double c = a / r, s = b / r;
    for (std::size_t i = j; i < mm; ++i) {
      const double vj = l_(i, j), vj1 = l_(i, j + 1);
      l_(i, j) = c * vj + s * vj1;
      l_(i, j + 1) = -s * vj + c * vj1;
    }
    if (l_(j, j) < 0.0) {
      for (std::size_t i = j; i < mm; ++i) l_(i, j) = -l_(i, j);
    }
    l_(j, j + 1) = 0.0;
  }

  pos_[index] = -1;
  order_.erase(order_.begin() + static_cast<long>(k));
  for (std::size_t a = k; a < order_.size(); ++a) pos_[order_[a]] = static_cast<int>(a);
}

Vec SubsetCholesky::solve(const Vec& rhs) const {
  require(rhs.size() == order_.size(), "subset cholesky solve: size mismatch");
  Vec x = rhs;
  forward_solve(l_, x.size(), x);
  backward_solve(l_, x.size(), x);
  return x;
}

// ---- spectral estimates ----

double largest_eigenvalue(const Mat& h, int iters) {
  const std::size_t n = h.rows();
  if (n == 0) return 0.0;
  Vec v(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
  scale_inplace(1.0 / norm2(v), v);
  for (int it = 0; it < iters; ++it) {
    Vec w = matvec(h, v);
    const double nrm = norm2(w);
    if (nrm == 0.0) return 0.0;
    scale_inplace(1.0 / nrm, w);
    v = std::move(w);
  }
  return dot(v, matvec(h, v));
}

double smallest_eigenvalue_spd(const Mat& h, int iters) {
  const std::size_t n = h.rows();
  if (n == 0) return 0.0;
  Cholesky c = Cholesky::factor(h);
  Vec v(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i % 5);
  scale_inplace(1.0 / norm2(v), v);
  for (int it = 0; it < iters; ++it) {
    Vec w = c.solve(v);
    const double nrm = norm2(w);
    if (nrm == 0.0) break;
    scale_inplace(1.0 / nrm, w);
    v = std::move(w);
  }
  return dot(v, matvec(h, v));
}

}  // namespace splitsqp
