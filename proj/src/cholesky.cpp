#include "dkucb/cholesky.hpp"

#include <cassert>
#include <cmath>
#include <numeric>

#include "dkucb/kernel.hpp"

namespace dkucb {

void IncrementalCholesky::append(std::span<const double> column, double diagonal) {
  const std::size_t n = size();
  assert(column.size() == n);
  std::vector<double> l(n);
  forward_solve(column, l);
  double schur = diagonal - std::inner_product(l.begin(), l.end(), l.begin(), 0.0);
  double added = jitter_ > 0.0 ? jitter_ : 1e-10;
  for (int attempt = 0; !(schur > 0.0) && attempt <= 3; ++attempt, added *= 10.0) {
    schur += added;
  }
  if (!(schur > 0.0)) {
    throw NotPositiveDefinite("incremental Cholesky: non-positive Schur complement");
  }
  const double pivot = std::sqrt(schur);
  packed_.insert(packed_.end(), l.begin(), l.end());
  packed_.push_back(pivot);
  const double ld = 2.0 * std::log(pivot);
  log_diag_.push_back(ld);
  log_diag_sum_.push_back((log_diag_sum_.empty() ? 0.0 : log_diag_sum_.back()) + ld);
}

void IncrementalCholesky::forward_solve(std::span<const double> b, std::span<double> y) const {
  const std::size_t n = size();
  assert(b.size() >= n && y.size() >= n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = row(i);
    double acc = b[i];
    for (std::size_t j = 0; j < i; ++j) acc -= r[j] * y[j];
    y[i] = acc / r[i];
  }
}

void IncrementalCholesky::backward_solve(std::span<double> y) const {
  const std::size_t n = size();
  assert(y.size() >= n);
  for (std::size_t j = n; j-- > 0;) {
    const double* r = row(j);
    const double xj = y[j] / r[j];
    y[j] = xj;
    for (std::size_t i = 0; i < j; ++i) y[i] -= r[i] * xj;
  }
}

double IncrementalCholesky::logdet_prefix(std::size_t m) const {
  assert(m <= size());
  return m == 0 ? 0.0 : log_diag_sum_[m - 1];
}

void IncrementalCholesky::clear() {
  packed_.clear();
  log_diag_.clear();
  log_diag_sum_.clear();
}

}  // namespace dkucb
