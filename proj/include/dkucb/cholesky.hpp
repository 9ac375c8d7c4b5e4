#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dkucb {

/// Lower Cholesky factor of a growing symmetric positive-definite matrix.
///
/// Rows are stored packed (row i holds i + 1 entries) so that appending a
/// bordered row costs one forward substitution, O(n^2), and the leading
/// principal blocks stay factored: the log-determinant of any leading m x m
/// block is a prefix sum of the diagonal.
class IncrementalCholesky {
 public:
  explicit IncrementalCholesky(double jitter = 1e-10) : jitter_(jitter) {}

  std::size_t size() const { return log_diag_.size(); }
  bool empty() const { return log_diag_.empty(); }

  /// Borders the factored matrix with a new row/column. `column` holds
  /// A(new, 0..n-1) and `diagonal` A(new, new). Throws NotPositiveDefinite if
  /// the Schur complement stays non-positive after jitter escalation.
  void append(std::span<const double> column, double diagonal);

  /// Solves L y = b.
  void forward_solve(std::span<const double> b, std::span<double> y) const;

  /// Solves L^T x = y in place.
  void backward_solve(std::span<double> y) const;

  /// log det of the whole factored matrix.
  double logdet() const { return logdet_prefix(size()); }

  /// log det of the leading m x m block.
  double logdet_prefix(std::size_t m) const;

  void clear();

 private:
  const double* row(std::size_t i) const { return packed_.data() + i * (i + 1) / 2; }

  std::vector<double> packed_;
  std::vector<double> log_diag_;      // 2 log L_ii
  std::vector<double> log_diag_sum_;  // prefix sums of log_diag_
  double jitter_;
};

}  // namespace dkucb
