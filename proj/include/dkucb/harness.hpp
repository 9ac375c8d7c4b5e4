#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dkucb/config.hpp"
#include "dkucb/policy.hpp"
#include "dkucb/world.hpp"

namespace dkucb {

/// One vehicle in one period.
struct PeriodRow {
  Period period = 0;
  VehicleId vehicle = 0;
  ArmId chosen_bs = -1;
  double realized_rate = 0.0;  // bits/s
  ArmId best_bs = -1;
  double best_rate = 0.0;  // counterfactual best response, bits/s
  double regret = 0.0;     // best_rate - realized_rate
  bool synced = false;
  std::uint64_t items_up = 0;
  std::uint64_t items_down = 0;
  std::uint64_t pool = 0;     // items eligible at the station before filtering
  std::uint64_t matched = 0;  // items inside the subspace
};

/// Headline numbers of a run; every field is recomputable from the rows.
struct Summary {
  std::string policy;
  std::uint64_t seed = 0;
  Period periods = 0;
  std::uint64_t vehicle_periods = 0;
  double cumulative_regret = 0.0;
  double average_rate = 0.0;  // per vehicle-period, bits/s
  double sync_rate = 0.0;     // synchronized vehicle-periods / vehicle-periods
  std::optional<double> sharing_efficiency;
  std::uint64_t syncs = 0;
  std::uint64_t items_uploaded = 0;
  std::uint64_t items_downloaded = 0;
  std::uint64_t items_avoided = 0;
  std::uint64_t bytes_shared = 0;
  /// Diagnostic from the policy, not derived from the rows.
  std::uint64_t model_rejections = 0;
};

struct MetricsLog {
  std::vector<PeriodRow> rows;
  /// Cumulative regret after each period, index t-1.
  std::vector<double> regret_curve;
  Summary summary;
};

Summary summarize(std::span<const PeriodRow> rows, Period periods, const std::string& policy,
                  std::uint64_t seed);

PolicyPtr make_policy(const RunConfig& cfg, const World& world);

/// Runs T periods: mobility, contexts, decisions, rates, feedback.
MetricsLog run(const RunConfig& cfg);

void write_rows_csv(std::ostream& out, std::span<const PeriodRow> rows);
nlohmann::json summary_json(const Summary& s);
/// periods.csv, summary.json and config.json under `dir`.
void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const MetricsLog& log);

struct SweepRow {
  std::string value;
  Summary summary;
};

/// One run per value with everything else, including the seed, held fixed.
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis,
                            std::span<const std::string> values);
void write_sweep_csv(std::ostream& out, const std::string& axis, std::span<const SweepRow> rows);

}  // namespace dkucb
