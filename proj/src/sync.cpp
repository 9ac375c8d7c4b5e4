#include "dkucb/sync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dkucb {

double trigger_statistic(std::span<const Context> s_new, std::span<const Context> s_all,
                         const KernelFunction& k, double lambda_k, double jitter) {
  if (s_new.empty()) return 0.0;
  const double all = logdet_ridge(build_kernel_matrix(s_all, k), lambda_k, jitter);
  const double fresh = logdet_ridge(build_kernel_matrix(s_new, k), lambda_k, jitter);
  return static_cast<double>(s_new.size()) * (all - fresh);
}

bool trigger(std::span<const Context> s_new, std::span<const Context> s_all, const KernelParams& p,
             double threshold) {
  if (std::isinf(threshold) && threshold > 0.0) return false;
  return trigger_statistic(s_new, s_all, composite_kernel(p), p.lambda_k, p.jitter) > threshold;
}

double trigger_statistic(const Agent& agent, ArmId arm, TriggerMode mode) {
  const ArmModel* model = agent.model(arm);
  const InformationTracker* fresh = agent.fresh(arm);
  if (model == nullptr || fresh == nullptr || fresh->size() == 0) return 0.0;
  const double all = model->logdet_ridge();
  const double reference = mode == TriggerMode::new_samples
                               ? fresh->logdet_ridge()
                               : model->logdet_ridge_prefix(agent.synchronized_model_size(arm));
  return static_cast<double>(fresh->size()) * (all - reference);
}

Vec2 station_position(std::span<const BaseStation> stations, ArmId id) {
  for (const auto& bs : stations) {
    if (bs.id == id) return bs.position;
  }
  throw std::out_of_range("unknown base station " + std::to_string(id));
}

std::vector<Sample> subspace_filter(std::span<const Sample> pool, const Context& center,
                                    double r_p, std::span<const BaseStation> stations) {
  const Vec2 origin = context_location(center, station_position(stations, center.arm));
  std::vector<Sample> kept;
  for (const auto& s : pool) {
    const Vec2 loc = context_location(s.context, station_position(stations, s.context.arm));
    if (distance(loc, origin) < r_p) kept.push_back(s);
  }
  return kept;
}

bool BsStore::insert(const Sample& s) {
  if (s.context.arm != station_) {
    throw std::invalid_argument("sample for arm " + std::to_string(s.context.arm) +
                                " uploaded to station " + std::to_string(station_));
  }
  const auto [it, added] =
      entries_.try_emplace(s.origin, Entry{s, context_location(s.context, position_), {}});
  if (added) ++inserted_;
  return added;
}

void BsStore::drop_holder(const SampleOrigin& key, VehicleId vehicle) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return;
  auto& h = it->second.holders;
  const auto pos = std::lower_bound(h.begin(), h.end(), vehicle);
  if (pos != h.end() && *pos == vehicle) h.erase(pos);
  if (h.empty()) entries_.erase(it);
}

void BsStore::set_holding(VehicleId vehicle, std::span<const Sample> held) {
  std::vector<SampleOrigin> keys;
  keys.reserve(held.size());
  for (const auto& s : held) {
    const auto it = entries_.find(s.origin);
    if (it == entries_.end()) {
      throw std::invalid_argument("holding refers to a sample the station does not have");
    }
    auto& h = it->second.holders;
    const auto pos = std::lower_bound(h.begin(), h.end(), vehicle);
    if (pos == h.end() || *pos != vehicle) h.insert(pos, vehicle);
    keys.push_back(s.origin);
  }
  std::sort(keys.begin(), keys.end());
  auto& previous = held_[vehicle];
  for (const auto& key : previous) {
    if (!std::binary_search(keys.begin(), keys.end(), key)) drop_holder(key, vehicle);
  }
  previous = std::move(keys);
}

void BsStore::release(VehicleId vehicle) {
  const auto it = held_.find(vehicle);
  if (it == held_.end()) return;
  for (const auto& key : it->second) drop_holder(key, vehicle);
  held_.erase(it);
}

bool BsStore::eligible(const Entry& e, VehicleId requester) const {
  return e.holders.size() > 1 || (e.holders.size() == 1 && e.holders.front() != requester);
}

std::vector<Sample> BsStore::pool(VehicleId requester) const {
  std::vector<Sample> out;
  for (const auto& [_, e] : entries_) {
    if (eligible(e, requester)) out.push_back(e.sample);
  }
  return out;
}

BsStore::Query BsStore::query(VehicleId requester, const Context& center, double r_p) const {
  const Vec2 origin = context_location(center, position_);
  Query q;
  for (const auto& [_, e] : entries_) {
    if (!eligible(e, requester)) continue;
    ++q.pool;
    if (distance(e.location, origin) < r_p) q.inside.push_back(e.sample);
  }
  return q;
}

void CommLedger::add(const SyncRecord& r) {
  records_.push_back(r);
  uploaded_ += r.uploaded;
  downloaded_ += r.downloaded;
  avoided_ += r.avoided();
}

SyncState begin_tracking(Agent& agent, ArmId arm, Period t) {
  agent.mark_synchronized(arm);
  return SyncState{t, std::nullopt, 0};
}

bool should_synchronize(const Agent& agent, const SyncState& state, const Context& current,
                        const SyncSettings& settings, std::span<const BaseStation> stations) {
  const bool finite_threshold = !(std::isinf(settings.threshold) && settings.threshold > 0.0);
  if (finite_threshold &&
      trigger_statistic(agent, current.arm, settings.mode) > settings.threshold) {
    return true;
  }
  if (!state.anchor) return false;
  const Vec2 bs = station_position(stations, current.arm);
  return distance(context_location(current, bs), context_location(*state.anchor, bs)) >
         settings.r_p;
}

SyncRecord synchronize(Agent& agent, const Context& current, Period t, SyncState& state,
                       BsStore& station, double r_p, CommLedger& ledger) {
  const ArmId arm = current.arm;
  if (arm != station.station()) throw std::invalid_argument("synchronizing with the wrong station");
  SyncRecord rec{t, agent.id(), arm, 0, 0, 0, 0};

  const auto held = agent.store().samples(arm);
  for (std::size_t i = state.upload_cursor; i < held.size(); ++i) {
    if (held[i].origin.vehicle == agent.id() && station.insert(held[i])) ++rec.uploaded;
  }

  const auto q = station.query(agent.id(), current, r_p);
  rec.pool = q.pool;
  rec.matched = q.inside.size();
  for (const auto& s : q.inside) {
    if (agent.absorb(s)) ++rec.downloaded;
  }
  station.set_holding(agent.id(), agent.store().samples(arm));

  agent.mark_synchronized(arm);
  state.t_syn = t;
  state.anchor = current;
  state.upload_cursor = agent.store().size(arm);
  ledger.add(rec);
  return rec;
}

double sync_rate(const CommLedger& ledger, VehicleId vehicle, Period periods) {
  if (periods < 1) throw std::invalid_argument("sync_rate needs T >= 1");
  std::set<Period> synced;
  for (const auto& r : ledger.records()) {
    if (r.vehicle == vehicle) synced.insert(r.period);
  }
  return static_cast<double>(synced.size()) / static_cast<double>(periods);
}

std::optional<double> sharing_efficiency(const CommLedger& ledger) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : ledger.records()) {
    if (r.pool == 0) continue;
    sum += 1.0 - static_cast<double>(r.matched) / static_cast<double>(r.pool);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace dkucb
