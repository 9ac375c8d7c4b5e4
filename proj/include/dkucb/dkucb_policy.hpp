#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dkucb/bandit.hpp"
#include "dkucb/kinematics.hpp"
#include "dkucb/policy.hpp"
#include "dkucb/sync.hpp"

namespace dkucb {

struct DkUcbSettings {
  KernelFunction kernel;
  double lambda_k = 1.0;
  double jitter = 1e-10;
  AgentConfig agent;
  SyncSettings sync;
  std::string label = "dkucb";
};

/// Distributed kernel UCB: one agent per vehicle, event-triggered sharing
/// through per-station stores.
class DkUcbPolicy final : public Policy {
 public:
  DkUcbPolicy(DkUcbSettings settings, std::vector<BaseStation> stations);

  std::string name() const override { return settings_.label; }
  AssociationVector decide(const DecisionContext& ctx) override;
  std::vector<SyncRecord> feedback(const DecisionContext& ctx, const Feedback& fb) override;
  void depart(std::span<const VehicleId> vehicles) override;

  const CommLedger& ledger() const { return ledger_; }
  std::uint64_t model_rejections() const override;
  const Agent* agent(VehicleId id) const;
  const BsStore& station_store(ArmId bs) const { return bs_stores_.at(static_cast<std::size_t>(bs)); }

 private:
  struct Learner {
    Agent agent;
    std::map<ArmId, SyncState> sync;
  };

  Learner& learner(VehicleId id);

  DkUcbSettings settings_;
  std::vector<BaseStation> stations_;
  std::vector<BsStore> bs_stores_;
  std::map<VehicleId, Learner> learners_;
  CommLedger ledger_;
  std::uint64_t departed_rejections_ = 0;
};

}  // namespace dkucb
