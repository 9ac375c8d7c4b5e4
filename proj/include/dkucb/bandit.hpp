#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "dkucb/cholesky.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/kinematics.hpp"
#include "dkucb/types.hpp"

namespace dkucb {

/// Identifies where a sample was observed; used as the de-duplication key
/// when samples travel between vehicles and base stations.
struct SampleOrigin {
  VehicleId vehicle = 0;
  Period period = 0;
  ArmId arm = 0;

  auto operator<=>(const SampleOrigin&) const = default;
};

struct Sample {
  Context context;
  double reward = 0.0;  // bits/s
  SampleOrigin origin;
};

/// Per-arm (context, reward) history of one agent.
///
/// Each arm list also carries a snapshot index: the prefix of the list that
/// was already known at the last synchronization for that arm.
class SampleStore {
 public:
  /// Appends a locally observed sample. Throws std::invalid_argument on a
  /// negative or non-finite reward, or on a repeated origin key.
  void record(const Context& x, double reward, VehicleId vehicle, Period period);

  /// Inserts a sample received from elsewhere. Returns false if the origin
  /// key is already held. Throws std::invalid_argument on an invalid reward.
  bool merge(const Sample& s);

  std::span<const Sample> samples(ArmId arm) const;
  std::vector<Context> contexts(ArmId arm, std::size_t from = 0) const;
  std::size_t size(ArmId arm) const;
  std::size_t total_size() const { return keys_.size(); }
  bool contains(const SampleOrigin& key) const { return keys_.contains(key); }
  std::vector<ArmId> arms() const;

  std::size_t snapshot(ArmId arm) const;
  /// Moves the snapshot boundary; throws std::out_of_range past the end.
  void set_snapshot(ArmId arm, std::size_t index);

 private:
  struct ArmSamples {
    std::vector<Sample> samples;
    std::size_t snapshot = 0;
  };

  std::map<ArmId, ArmSamples> arms_;
  std::set<SampleOrigin> keys_;
};

struct Estimate {
  double mu = 0.0;     // bits/s
  double sigma = 0.0;  // dimensionless confidence width
};

/// Kernel-ridge mean and confidence width at x from scratch:
///   mu    = k^T (K + lambda I)^-1 r
///   sigma = lambda^-1/2 sqrt(k(x,x) - k^T (K + lambda I)^-1 k)
/// Throws std::invalid_argument if a sample belongs to another arm.
Estimate estimate(const Context& x, std::span<const Sample> samples, const KernelParams& p);
Estimate estimate(const Context& x, std::span<const Sample> samples, const KernelFunction& k,
                  double lambda_k, double jitter = 1e-10);

enum class AlphaMode { fixed, theoretical };

/// Inputs of the confidence-driven exploration weight
///   alpha = sqrt(lambda) * theta_norm + noise_scale * sqrt(4 log(T / delta) + 2 logdet)
/// None of these have canonical values; they must be set explicitly.
struct TheoreticalAlpha {
  double theta_norm = 1.0;
  double noise_scale = 1.0;
  double delta = 0.05;
  double horizon = 1000.0;
};

struct AgentConfig {
  double alpha = 1.0;   // exploration weight, reward units
  double r_max = 600.0; // m
  AlphaMode alpha_mode = AlphaMode::fixed;
  TheoreticalAlpha theory;

  void validate() const;
  /// Exploration weight for an arm whose store has the given log det(I + K/lambda).
  double exploration_weight(double arm_logdet, double lambda_k) const;
};

struct ArmScore {
  Context context;
  Estimate estimate;
  double ucb = 0.0;
};

/// Index of the highest UCB score; ties go to the lowest arm id.
/// Throws std::invalid_argument on an empty span.
std::size_t argmax_ucb(std::span<const ArmScore> scores);

/// From-scratch UCB arm selection over a sample store.
/// Throws std::invalid_argument when there are no candidates.
Context select_arm(std::span<const Context> candidates, const SampleStore& store,
                   const AgentConfig& cfg, const KernelParams& p);

/// Contexts for every base station strictly closer than r_max. Transmission
/// counts come from `n_tx_of` (0 for a never-contacted station).
std::vector<Context> candidate_set(Vec2 position, Vec2 velocity,
                                   std::span<const BaseStation> stations, double r_max,
                                   const std::function<int(ArmId)>& n_tx_of, double wavelength);

/// Kernel-ridge model of one arm that is grown sample by sample.
///
/// Keeps the Cholesky factor of K + lambda I up to date so a query costs one
/// triangular solve instead of a fresh factorization. Agrees with estimate()
/// on the same samples.
class ArmModel {
 public:
  ArmModel(KernelFunction kernel, double lambda_k, double jitter = 1e-10);

  /// Adds a sample. Returns false, leaving the model unchanged, when the
  /// sample would make K + lambda I indefinite (possible only with a kernel
  /// that is not positive semi-definite).
  bool add(const Context& x, double reward);
  std::size_t rejected() const { return rejected_; }
  Estimate query(const Context& x) const;

  std::size_t size() const { return contexts_.size(); }
  /// log det(I + K / lambda) over all samples.
  double logdet_ridge() const { return logdet_ridge_prefix(size()); }
  /// Same over the first m samples.
  double logdet_ridge_prefix(std::size_t m) const;

 private:
  void refresh_weights() const;

  KernelFunction kernel_;
  double lambda_;
  IncrementalCholesky factor_;
  std::vector<Context> contexts_;
  std::vector<double> rewards_;
  mutable std::vector<double> weights_;
  mutable bool stale_ = false;
  std::size_t rejected_ = 0;
};

/// log det(I + K/lambda) of a context set grown incrementally; used for the
/// samples gathered since the last synchronization.
class InformationTracker {
 public:
  InformationTracker(KernelFunction kernel, double lambda_k, double jitter = 1e-10);

  /// False if the context was skipped, as in ArmModel::add.
  bool add(const Context& x);
  void clear();
  std::size_t size() const { return contexts_.size(); }
  double logdet_ridge() const;

 private:
  KernelFunction kernel_;
  double lambda_;
  IncrementalCholesky factor_;
  std::vector<Context> contexts_;
};

/// One vehicle's learner: sample store plus per-arm incremental models.
class Agent {
 public:
  Agent(VehicleId id, KernelFunction kernel, double lambda_k, double jitter, AgentConfig cfg);

  VehicleId id() const { return id_; }
  const AgentConfig& config() const { return cfg_; }

  std::vector<ArmScore> score(std::span<const Context> candidates) const;
  /// UCB choice among candidates; throws std::invalid_argument if empty.
  Context select(std::span<const Context> candidates) const;

  void record(const Context& x, double reward, Period t);
  /// Adds a sample received from a base station; false if already held.
  bool absorb(const Sample& s);

  const SampleStore& store() const { return store_; }
  const ArmModel* model(ArmId arm) const;
  const InformationTracker* fresh(ArmId arm) const;

  /// Marks everything currently held for the arm as synchronized.
  void mark_synchronized(ArmId arm);
  /// Model size of the arm at its last synchronization.
  std::size_t synchronized_model_size(ArmId arm) const;
  /// Samples kept in the store but left out of a model, over all arms.
  std::size_t model_rejections() const;

 private:
  ArmModel& model_for(ArmId arm);
  InformationTracker& fresh_for(ArmId arm);

  VehicleId id_;
  KernelFunction kernel_;
  double lambda_;
  double jitter_;
  AgentConfig cfg_;
  SampleStore store_;
  std::map<ArmId, ArmModel> models_;
  std::map<ArmId, InformationTracker> fresh_;
  std::map<ArmId, std::size_t> synced_model_size_;
};

}  // namespace dkucb
