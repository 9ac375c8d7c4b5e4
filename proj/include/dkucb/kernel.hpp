#pragma once

#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dkucb/types.hpp"

namespace dkucb {

/// Bandit context observed by a vehicle for one candidate base station.
///
/// The context couples the base station identity with the features that drive
/// the mmWave rate: orientation and distance of the BS->vehicle vector (path
/// loss and blockage), maximum Doppler spread (fading decorrelation) and the
/// number of concurrent transmissions the BS carried the last time this
/// vehicle used it (interference).
struct Context {
  static constexpr int kDimension = 5;

  ArmId arm = 0;
  double theta = 0.0;    // rad, [0, 2pi)
  double dist = 0.0;     // m
  double doppler = 0.0;  // Hz
  int n_tx = 0;

  bool operator==(const Context&) const = default;
};

/// Builds a context, wrapping theta into [0, 2pi). Throws std::invalid_argument
/// on negative distance, Doppler or transmission count, or non-finite inputs.
Context make_context(ArmId arm, double theta, double dist, double doppler, int n_tx);

/// Wraps an angle into [0, 2pi).
double normalize_angle(double theta);

/// Circular difference of two angles, in [0, pi].
double angular_difference(double a, double b);

/// Angular component used by the composite kernel.
///  - truncated: cos(dtheta) below pi/2, else 0. Not positive semi-definite on
///    the circle once enough distinct angles are involved.
///  - cosine: cos(dtheta) without the cut, the inner product of unit vectors.
///  - cos4_half: cos^4(dtheta / 2), non-negative and positive semi-definite.
enum class AngleKernel { truncated, cosine, cos4_half };

std::string_view angle_kernel_name(AngleKernel a);
/// Throws std::invalid_argument for unknown names.
AngleKernel parse_angle_kernel(std::string_view name);

struct KernelParams {
  AngleKernel angle = AngleKernel::truncated;
  double sigma_L = 40.0;    // m
  double sigma_f = 300.0;   // Hz
  double sigma_N = 6.0;     // transmissions
  double lambda_k = 1.0;
  double jitter = 1e-10;

  void validate() const;
};

// Component kernels. Each is 1 at identical inputs and never exceeds 1.
double k_theta(double theta_a, double theta_b);
double k_theta_cos4_half(double theta_a, double theta_b);
double k_L(double dist_a, double dist_b, double sigma_L);
double k_f(double doppler_a, double doppler_b, double sigma_f);
double k_N(double n_a, double n_b, double sigma_N);

/// Composite mmWave kernel: product of the four component kernels when both
/// contexts refer to the same arm, zero otherwise.
double kernel(const Context& x, const Context& y, const KernelParams& p);

using KernelFunction = std::function<double(const Context&, const Context&)>;

/// The composite kernel bound to a parameter set.
KernelFunction composite_kernel(const KernelParams& p);

struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::vector<Context> order;

  Eigen::Index size() const { return entries.rows(); }
};

KernelMatrix build_kernel_matrix(std::span<const Context> contexts, const KernelParams& p);
KernelMatrix build_kernel_matrix(std::span<const Context> contexts, const KernelFunction& k);

/// Cross-kernel vector [k(x, s)] for s in contexts.
Eigen::VectorXd kernel_vector(const Context& x, std::span<const Context> contexts,
                              const KernelFunction& k);

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factor of a symmetric matrix. If the plain factorization fails,
/// `jitter` is added to the diagonal and escalated x10 up to three times.
Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& a, double jitter);

/// log det(I + K / lambda_k) through a Cholesky factorization; 0 for the empty
/// matrix.
double logdet_ridge(const Eigen::MatrixXd& k, double lambda_k, double jitter = 1e-10);
double logdet_ridge(const KernelMatrix& k, double lambda_k, double jitter = 1e-10);

}  // namespace dkucb
