#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dkucb/channel.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/policy.hpp"

namespace dkucb {

/// Single Gaussian kernel exp(-|x - y|^2 / (2 sigma^2)) over the raw numeric
/// context fields (theta, dist, doppler, n_tx); 0 across arms.
KernelFunction gaussian_context_kernel(double sigma);

// ---------------------------------------------------------------------------
// Hypercube partition UCB

/// Bounded context domain split into equal cells along theta, dist, doppler
/// and n_tx. Values outside the range fall into the boundary cells.
struct HypercubeGrid {
  std::array<double, 4> lower{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> upper{6.283185307179586, 600.0, 2100.0, 16.0};
  int bins = 8;  // per dimension, edge = range / bins

  void validate() const;
  std::size_t cells() const;
  std::size_t cell_of(const Context& x) const;
};

/// Visit count and running mean reward of every cell of every arm.
class HypercubeTable {
 public:
  HypercubeTable(HypercubeGrid grid, int arms);

  const HypercubeGrid& grid() const { return grid_; }
  void update(const Context& x, double reward);
  std::uint64_t count(const Context& x) const;
  double mean(const Context& x) const;
  std::uint64_t total() const { return total_; }

 private:
  std::size_t index(const Context& x) const;

  HypercubeGrid grid_;
  int arms_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> means_;
  std::uint64_t total_ = 0;
};

/// Per-cell mean plus c sqrt(2 ln t / n); unvisited cells score +infinity.
/// One table per run shared by all vehicles, as kept by the base stations.
class HypercubePolicy final : public Policy {
 public:
  HypercubePolicy(HypercubeGrid grid, int arms, double bonus_scale);

  std::string name() const override { return "hypercube"; }
  AssociationVector decide(const DecisionContext& ctx) override;
  std::vector<SyncRecord> feedback(const DecisionContext& ctx, const Feedback& fb) override;

  const HypercubeTable& table() const { return table_; }

 private:
  HypercubeTable table_;
  double bonus_scale_;
};

// ---------------------------------------------------------------------------
// Random association

/// Uniform choice among each row's candidates.
AssociationVector random_association(const Snapshot& snap, std::mt19937_64& rng);

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::mt19937_64 rng) : rng_(std::move(rng)) {}

  std::string name() const override { return "random"; }
  AssociationVector decide(const DecisionContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Centralized baselines with full CSI

/// Each vehicle on the candidate with the largest interference-free SNR.
AssociationVector greedy_association(const Snapshot& snap);

struct WcsResult {
  AssociationVector assoc;
  double total_rate = 0.0;
  int iterations = 0;          // accepted moves
  std::vector<double> history; // total rate after init and after each move
};

/// Worst connection swapping. Starts from greedy_association, then visits
/// vehicles from the lowest to the highest current rate and moves the first
/// one that has a strictly improving reassignment to the station giving
/// the largest total rate. Stops when no vehicle can improve or after
/// max_iters accepted moves.
WcsResult wcs(const Snapshot& snap, int max_iters);

struct BruteForceLimits {
  std::size_t max_vehicles = 6;
  int max_stations = 4;
};

struct OptimumResult {
  AssociationVector assoc;
  double total_rate = 0.0;
};

/// Exhaustive maximum of the total rate over all candidate assignments;
/// the first maximum in lexicographic order wins ties. Throws
/// std::invalid_argument beyond the limits.
OptimumResult brute_force_optimum(const Snapshot& snap, BruteForceLimits limits = {});

class WcsPolicy final : public Policy {
 public:
  explicit WcsPolicy(int max_iters) : max_iters_(max_iters) {}
  std::string name() const override { return "wcs"; }
  AssociationVector decide(const DecisionContext& ctx) override;

 private:
  int max_iters_;
};

class BruteForcePolicy final : public Policy {
 public:
  explicit BruteForcePolicy(BruteForceLimits limits = {}) : limits_(limits) {}
  std::string name() const override { return "brute_force"; }
  AssociationVector decide(const DecisionContext& ctx) override;

 private:
  BruteForceLimits limits_;
};

}  // namespace dkucb
