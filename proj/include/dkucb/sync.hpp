#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "dkucb/bandit.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/kinematics.hpp"

namespace dkucb {

/// Which log-determinant the trigger compares against.
///  - new_samples: samples gathered since the last synchronization alone
///  - gain_since_sync: the store as it was at the last synchronization
///    (the usual "information gained since sync" form; not the default)
enum class TriggerMode { new_samples, gain_since_sync };

/// |S_new| * [logdet(I + K_all/lambda) - logdet(I + K_new/lambda)].
double trigger_statistic(std::span<const Context> s_new, std::span<const Context> s_all,
                         const KernelFunction& k, double lambda_k, double jitter = 1e-10);

/// True iff the trigger statistic exceeds the threshold. An infinite
/// threshold never fires.
bool trigger(std::span<const Context> s_new, std::span<const Context> s_all, const KernelParams& p,
             double threshold);

/// Same statistic, read from an agent's incrementally maintained factors.
double trigger_statistic(const Agent& agent, ArmId arm, TriggerMode mode);

/// Position of a base station by id. Throws std::out_of_range if unknown.
Vec2 station_position(std::span<const BaseStation> stations, ArmId id);

/// Pool entries whose implied vehicle location lies strictly within r_p of
/// the location implied by `center`.
std::vector<Sample> subspace_filter(std::span<const Sample> pool, const Context& center,
                                    double r_p, std::span<const BaseStation> stations);

/// What one base station can hand out: the samples that the vehicles
/// currently in the network held for this station at their last
/// synchronization with it. A sample nobody present holds any more is
/// dropped.
class BsStore {
 public:
  BsStore(ArmId station, Vec2 position) : station_(station), position_(position) {}

  ArmId station() const { return station_; }
  Vec2 position() const { return position_; }

  /// Adds an uploaded sample; false if the origin key is already present.
  /// Throws std::invalid_argument if the sample belongs to another station.
  bool insert(const Sample& s);

  /// Replaces what `vehicle` is known to hold. Every key must be present.
  void set_holding(VehicleId vehicle, std::span<const Sample> held);
  /// Forgets a vehicle that left the network.
  void release(VehicleId vehicle);

  std::size_t size() const { return entries_.size(); }
  bool contains(const SampleOrigin& key) const { return entries_.contains(key); }
  /// Number of successful insert() calls over the store's lifetime.
  std::uint64_t inserted() const { return inserted_; }
  std::size_t holders() const { return held_.size(); }

  /// Union of the holdings of every registered vehicle except `requester`.
  std::vector<Sample> pool(VehicleId requester) const;

  struct Query {
    std::size_t pool = 0;
    std::vector<Sample> inside;
  };
  /// Size of pool(requester) and its part inside the subspace, in one pass.
  Query query(VehicleId requester, const Context& center, double r_p) const;

 private:
  struct Entry {
    Sample sample;
    Vec2 location;
    std::vector<VehicleId> holders;  // sorted
  };

  bool eligible(const Entry& e, VehicleId requester) const;
  void drop_holder(const SampleOrigin& key, VehicleId vehicle);

  ArmId station_;
  Vec2 position_;
  std::map<SampleOrigin, Entry> entries_;
  std::map<VehicleId, std::vector<SampleOrigin>> held_;
  std::uint64_t inserted_ = 0;
};

/// Per (vehicle, arm) synchronization bookkeeping.
struct SyncState {
  Period t_syn = 0;
  /// Context at the last actual synchronization; absent before the first one.
  std::optional<Context> anchor;
  /// Store index from which own samples have not been uploaded yet.
  std::size_t upload_cursor = 0;
};

struct SyncRecord {
  Period period = 0;
  VehicleId vehicle = 0;
  ArmId arm = 0;
  std::size_t uploaded = 0;
  std::size_t pool = 0;        // items eligible before subspace filtering
  std::size_t matched = 0;     // items inside the subspace
  std::size_t downloaded = 0;  // items actually new to the vehicle

  std::size_t avoided() const { return pool - matched; }
};

/// Communication accounting over a run.
class CommLedger {
 public:
  /// Bytes per shared item: d context scalars plus the reward, as doubles.
  static constexpr std::size_t kBytesPerItem = (Context::kDimension + 1) * sizeof(double);

  void add(const SyncRecord& r);

  std::span<const SyncRecord> records() const { return records_; }
  std::uint64_t syncs() const { return records_.size(); }
  std::uint64_t uploaded() const { return uploaded_; }
  std::uint64_t downloaded() const { return downloaded_; }
  std::uint64_t avoided() const { return avoided_; }
  std::uint64_t bytes() const { return (uploaded_ + downloaded_) * kBytesPerItem; }

 private:
  std::vector<SyncRecord> records_;
  std::uint64_t uploaded_ = 0;
  std::uint64_t downloaded_ = 0;
  std::uint64_t avoided_ = 0;
};

/// Starts tracking an arm at first contact: the first sample becomes the
/// synchronized prefix, without any communication.
SyncState begin_tracking(Agent& agent, ArmId arm, Period t);

struct SyncSettings {
  double threshold = 20.0;  // D
  double r_p = 60.0;        // m
  TriggerMode mode = TriggerMode::new_samples;
};

/// The trigger event, or a drift of more than r_p away from the context of
/// the last synchronization.
bool should_synchronize(const Agent& agent, const SyncState& state, const Context& current,
                        const SyncSettings& settings, std::span<const BaseStation> stations);

/// Uploads the agent's not-yet-shared samples for `current.arm`, downloads
/// the pooled samples of the other vehicles inside the subspace around
/// `current`, registers the agent's resulting holding at the station and
/// resets the synchronization state to period t.
SyncRecord synchronize(Agent& agent, const Context& current, Period t, SyncState& state,
                       BsStore& station, double r_p, CommLedger& ledger);

/// Fraction of the T periods in which the vehicle synchronized at least once.
double sync_rate(const CommLedger& ledger, VehicleId vehicle, Period periods);

/// Mean over synchronizations with a non-empty pool of 1 - matched / pool.
/// Absent when no such synchronization happened.
std::optional<double> sharing_efficiency(const CommLedger& ledger);

}  // namespace dkucb
