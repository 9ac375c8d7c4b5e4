#include "dkucb/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dkucb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double normalize_angle(double theta) {
  double wrapped = std::fmod(theta, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  // fmod of a tiny negative can round back up to exactly 2pi
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

double angular_difference(double a, double b) {
  const double d = std::fabs(normalize_angle(a) - normalize_angle(b));
  return d > std::numbers::pi ? kTwoPi - d : d;
}

Context make_context(ArmId arm, double theta, double dist, double doppler, int n_tx) {
  if (!std::isfinite(theta) || !std::isfinite(dist) || !std::isfinite(doppler)) {
    throw std::invalid_argument("context fields must be finite");
  }
  if (dist < 0.0) throw std::invalid_argument("context dist must be >= 0");
  if (doppler < 0.0) throw std::invalid_argument("context doppler must be >= 0");
  if (n_tx < 0) throw std::invalid_argument("context n_tx must be >= 0");
  return Context{arm, normalize_angle(theta), dist, doppler, n_tx};
}

void KernelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("kernel.") + name + " must be > 0");
    }
  };
  positive(sigma_L, "sigma_L");
  positive(sigma_f, "sigma_f");
  positive(sigma_N, "sigma_N");
  positive(lambda_k, "lambda_k");
  if (!(jitter >= 0.0)) throw std::invalid_argument("kernel.jitter must be >= 0");
}

double k_theta(double theta_a, double theta_b) {
  const double delta = angular_difference(theta_a, theta_b);
  return delta < std::numbers::pi / 2.0 ? std::cos(delta) : 0.0;
}

double k_theta_cos4_half(double theta_a, double theta_b) {
  const double c = std::cos(angular_difference(theta_a, theta_b) / 2.0);
  const double c2 = c * c;
  return c2 * c2;
}

std::string_view angle_kernel_name(AngleKernel a) {
  switch (a) {
    case AngleKernel::truncated: return "truncated";
    case AngleKernel::cosine: return "cosine";
    case AngleKernel::cos4_half: return "cos4_half";
  }
  return "?";
}

AngleKernel parse_angle_kernel(std::string_view name) {
  for (const auto a : {AngleKernel::truncated, AngleKernel::cosine, AngleKernel::cos4_half}) {
    if (angle_kernel_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown angle kernel '" + std::string(name) + "'");
}

double k_L(double dist_a, double dist_b, double sigma_L) {
  const double delta = dist_a - dist_b;
  return std::exp(-delta * delta / (2.0 * sigma_L * sigma_L));
}

double k_f(double doppler_a, double doppler_b, double sigma_f) {
  return std::exp(-std::fabs(doppler_a - doppler_b) / sigma_f);
}

double k_N(double n_a, double n_b, double sigma_N) {
  return std::max(1.0 - std::fabs(n_a - n_b) / sigma_N, 0.0);
}

double kernel(const Context& x, const Context& y, const KernelParams& p) {
  if (x.arm != y.arm) return 0.0;
  double kt = 0.0;
  switch (p.angle) {
    case AngleKernel::truncated: kt = k_theta(x.theta, y.theta); break;
    case AngleKernel::cosine: kt = std::cos(angular_difference(x.theta, y.theta)); break;
    case AngleKernel::cos4_half: kt = k_theta_cos4_half(x.theta, y.theta); break;
  }
  if (kt == 0.0) return 0.0;
  const double kn = k_N(x.n_tx, y.n_tx, p.sigma_N);
  if (kn == 0.0) return 0.0;
  return kt * kn * k_L(x.dist, y.dist, p.sigma_L) * k_f(x.doppler, y.doppler, p.sigma_f);
}

KernelFunction composite_kernel(const KernelParams& p) {
  return [p](const Context& x, const Context& y) { return kernel(x, y, p); };
}

KernelMatrix build_kernel_matrix(std::span<const Context> contexts, const KernelFunction& k) {
  const auto n = static_cast<Eigen::Index>(contexts.size());
  KernelMatrix m{Eigen::MatrixXd(n, n), {contexts.begin(), contexts.end()}};
  for (Eigen::Index i = 0; i < n; ++i) {
    m.entries(i, i) = k(contexts[i], contexts[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = k(contexts[i], contexts[j]);
      m.entries(i, j) = v;
      m.entries(j, i) = v;
    }
  }
  return m;
}

KernelMatrix build_kernel_matrix(std::span<const Context> contexts, const KernelParams& p) {
  return build_kernel_matrix(contexts, composite_kernel(p));
}

Eigen::VectorXd kernel_vector(const Context& x, std::span<const Context> contexts,
                              const KernelFunction& k) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(contexts.size()));
  for (std::size_t i = 0; i < contexts.size(); ++i) v(static_cast<Eigen::Index>(i)) = k(x, contexts[i]);
  return v;
}

Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& a, double jitter) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  double added = jitter > 0.0 ? jitter : 1e-10;
  for (int attempt = 0; attempt <= 3; ++attempt, added *= 10.0) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += added;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NotPositiveDefinite("matrix is not positive definite after jitter escalation");
}

double logdet_ridge(const Eigen::MatrixXd& k, double lambda_k, double jitter) {
  if (k.rows() == 0) return 0.0;
  Eigen::MatrixXd a = k / lambda_k;
  a.diagonal().array() += 1.0;
  const auto llt = factorize_spd(a, jitter);
  const double value = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::max(value, 0.0);
}

double logdet_ridge(const KernelMatrix& k, double lambda_k, double jitter) {
  return logdet_ridge(k.entries, lambda_k, jitter);
}

}  // namespace dkucb
