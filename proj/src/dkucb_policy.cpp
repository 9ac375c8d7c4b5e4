#include "dkucb/dkucb_policy.hpp"

#include <stdexcept>

namespace dkucb {

DkUcbPolicy::DkUcbPolicy(DkUcbSettings settings, std::vector<BaseStation> stations)
    : settings_(std::move(settings)), stations_(std::move(stations)) {
  if (!settings_.kernel) throw std::invalid_argument("DK-UCB policy needs a kernel");
  if (!(settings_.lambda_k > 0.0)) throw std::invalid_argument("kernel.lambda must be > 0");
  settings_.agent.validate();
  if (settings_.sync.threshold < 0.0) throw std::invalid_argument("sync.D must be >= 0");
  if (!(settings_.sync.r_p > 0.0)) throw std::invalid_argument("sync.R_p must be > 0");
  for (const auto& bs : stations_) bs_stores_.emplace_back(bs.id, bs.position);
}

DkUcbPolicy::Learner& DkUcbPolicy::learner(VehicleId id) {
  auto it = learners_.find(id);
  if (it == learners_.end()) {
    it = learners_
             .emplace(id, Learner{Agent(id, settings_.kernel, settings_.lambda_k, settings_.jitter,
                                        settings_.agent),
                                  {}})
             .first;
  }
  return it->second;
}

const Agent* DkUcbPolicy::agent(VehicleId id) const {
  const auto it = learners_.find(id);
  return it == learners_.end() ? nullptr : &it->second.agent;
}

AssociationVector DkUcbPolicy::decide(const DecisionContext& ctx) {
  AssociationVector out;
  out.serving.reserve(ctx.snapshot->size());
  for (std::size_t i = 0; i < ctx.snapshot->size(); ++i) {
    out.serving.push_back(learner(ctx.snapshot->vehicles[i]).agent.select(ctx.contexts[i]).arm);
  }
  return out;
}

std::vector<SyncRecord> DkUcbPolicy::feedback(const DecisionContext& ctx, const Feedback& fb) {
  std::vector<SyncRecord> out;
  for (std::size_t i = 0; i < ctx.snapshot->size(); ++i) {
    Learner& l = learner(ctx.snapshot->vehicles[i]);
    const Context& x = fb.chosen[i];
    l.agent.record(x, fb.rewards[i], ctx.period);
    const auto it = l.sync.find(x.arm);
    if (it == l.sync.end()) {
      l.sync.emplace(x.arm, begin_tracking(l.agent, x.arm, ctx.period));
      continue;
    }
    if (should_synchronize(l.agent, it->second, x, settings_.sync, stations_)) {
      out.push_back(synchronize(l.agent, x, ctx.period, it->second,
                                bs_stores_.at(static_cast<std::size_t>(x.arm)),
                                settings_.sync.r_p, ledger_));
    }
  }
  return out;
}

void DkUcbPolicy::depart(std::span<const VehicleId> vehicles) {
  for (const VehicleId v : vehicles) {
    if (const auto it = learners_.find(v); it != learners_.end()) {
      departed_rejections_ += it->second.agent.model_rejections();
      learners_.erase(it);
    }
    for (auto& store : bs_stores_) store.release(v);
  }
}

std::uint64_t DkUcbPolicy::model_rejections() const {
  std::uint64_t n = departed_rejections_;
  for (const auto& [_, l] : learners_) n += l.agent.model_rejections();
  return n;
}

}  // namespace dkucb
