#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "dkucb/bandit.hpp"
#include "dkucb/kernel.hpp"

namespace testing {

inline dkucb::Context random_context(std::mt19937_64& rng, int arms = 3, int max_n = 12) {
  std::uniform_int_distribution<int> arm(0, arms - 1);
  std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> dist(1.0, 600.0);
  std::uniform_real_distribution<double> doppler(0.0, 2100.0);
  std::uniform_int_distribution<int> n(0, max_n);
  return dkucb::make_context(arm(rng), theta(rng), dist(rng), doppler(rng), n(rng));
}

inline std::vector<dkucb::Context> random_contexts(std::mt19937_64& rng, std::size_t count,
                                                   int arms = 3) {
  std::vector<dkucb::Context> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_context(rng, arms));
  return out;
}

/// Log-uniform draw over [lo, hi].
inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

using Matrix = std::vector<std::vector<double>>;

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Determinant by cofactor expansion along the first row. Only for small n.
inline double cofactor_det(const Matrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return 1.0;
  if (n == 1) return a[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Matrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != c) row.push_back(a[r][k]);
      }
      minor.push_back(row);
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * a[0][c] * cofactor_det(minor);
  }
  return det;
}

/// Component kernels written out from their definitions.
inline double ref_kernel(const dkucb::Context& x, const dkucb::Context& y,
                         const dkucb::KernelParams& p) {
  if (x.arm != y.arm) return 0.0;
  double dt = std::fabs(x.theta - y.theta);
  if (dt > std::numbers::pi) dt = 2.0 * std::numbers::pi - dt;
  const double kt = dt < std::numbers::pi / 2.0 ? std::cos(dt) : 0.0;
  const double dl = x.dist - y.dist;
  const double kl = std::exp(-dl * dl / (2.0 * p.sigma_L * p.sigma_L));
  const double kf = std::exp(-std::fabs(x.doppler - y.doppler) / p.sigma_f);
  const double kn = std::max(1.0 - std::fabs(double(x.n_tx - y.n_tx)) / p.sigma_N, 0.0);
  return kt * kl * kf * kn;
}

/// Kernel-ridge mean and width from a dense solve of the defining formulas.
inline dkucb::Estimate ref_estimate(const dkucb::Context& x,
                                    const std::vector<dkucb::Sample>& samples,
                                    const dkucb::KernelFunction& k, double lambda) {
  const std::size_t n = samples.size();
  if (n == 0) return {0.0, 1.0 / std::sqrt(lambda)};
  Matrix a(n, std::vector<double>(n));
  std::vector<double> kv(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = k(samples[i].context, samples[j].context);
    a[i][i] += lambda;
    kv[i] = k(x, samples[i].context);
    r[i] = samples[i].reward;
  }
  const auto w = gauss_solve(a, r);
  const auto v = gauss_solve(a, kv);
  double mu = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += kv[i] * w[i];
    quad += kv[i] * v[i];
  }
  return {mu, std::sqrt(std::max(k(x, x) - quad, 0.0) / lambda)};
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-12) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b)}) + abs_floor;
}

}  // namespace testing
