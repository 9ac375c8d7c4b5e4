#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dkucb/channel.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/sync.hpp"
#include "dkucb/types.hpp"

namespace dkucb {

/// Everything a policy may look at when deciding period t. Rows follow the
/// snapshot; `contexts[i]` holds one context per candidate station of row i,
/// in the same order as `snapshot->candidates[i]`.
struct DecisionContext {
  Period period = 0;
  const Snapshot* snapshot = nullptr;
  std::span<const std::vector<Context>> contexts;
};

/// Per-row outcome of a period, handed back to the policy.
struct Feedback {
  std::span<const Context> chosen;   // context of the serving station
  std::span<const double> rewards;   // realized rate, bits/s
};

/// A user-association algorithm. Distributed learners only use the contexts
/// and their own feedback; centralized ones read the snapshot's CSI.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;

  /// One serving station per row, chosen among the row's candidates.
  virtual AssociationVector decide(const DecisionContext& ctx) = 0;

  /// Realized rewards of the committed association. Returns the
  /// synchronizations performed (at most one per row).
  virtual std::vector<SyncRecord> feedback(const DecisionContext& ctx, const Feedback& fb) {
    (void)ctx;
    (void)fb;
    return {};
  }

  /// Vehicles that left the network.
  virtual void depart(std::span<const VehicleId> vehicles) { (void)vehicles; }

  /// Samples a kernel learner kept out of its model because they made the
  /// Gram system indefinite. Zero for everything else.
  virtual std::uint64_t model_rejections() const { return 0; }
};

using PolicyPtr = std::unique_ptr<Policy>;

}  // namespace dkucb
