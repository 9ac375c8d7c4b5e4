#include "dkucb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "dkucb/baselines.hpp"
#include "dkucb/dkucb_policy.hpp"

namespace dkucb {

namespace {

constexpr double kKmhToMs = 1000.0 / 3600.0;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Summary summarize(std::span<const PeriodRow> rows, Period periods, const std::string& policy,
                  std::uint64_t seed) {
  Summary s;
  s.policy = policy;
  s.seed = seed;
  s.periods = periods;
  s.vehicle_periods = rows.size();
  double rate_sum = 0.0;
  double eff_sum = 0.0;
  std::uint64_t eff_count = 0;
  std::uint64_t synced = 0;
  for (const auto& r : rows) {
    s.cumulative_regret += r.regret;
    rate_sum += r.realized_rate;
    if (r.synced) {
      ++synced;
      ++s.syncs;
      if (r.pool > 0) {
        eff_sum += 1.0 - static_cast<double>(r.matched) / static_cast<double>(r.pool);
        ++eff_count;
      }
    }
    s.items_uploaded += r.items_up;
    s.items_downloaded += r.items_down;
    s.items_avoided += r.pool - r.matched;
  }
  if (!rows.empty()) {
    s.average_rate = rate_sum / static_cast<double>(rows.size());
    s.sync_rate = static_cast<double>(synced) / static_cast<double>(rows.size());
  }
  if (eff_count > 0) s.sharing_efficiency = eff_sum / static_cast<double>(eff_count);
  s.bytes_shared = (s.items_uploaded + s.items_downloaded) * CommLedger::kBytesPerItem;
  return s;
}

PolicyPtr make_policy(const RunConfig& cfg, const World& world) {
  const auto& stations = world.map().stations;
  const int arms = static_cast<int>(stations.size());
  switch (cfg.policy) {
    case PolicyKind::dkucb:
    case PolicyKind::gaussian: {
      DkUcbSettings s;
      s.kernel = cfg.policy == PolicyKind::dkucb ? composite_kernel(cfg.kernel)
                                                 : gaussian_context_kernel(cfg.sigma_gaus);
      s.lambda_k = cfg.kernel.lambda_k;
      s.jitter = cfg.kernel.jitter;
      s.agent = cfg.agent_config();
      s.sync = cfg.sync;
      s.label = policy_name(cfg.policy);
      return std::make_unique<DkUcbPolicy>(std::move(s), stations);
    }
    case PolicyKind::hypercube: {
      HypercubeGrid grid;
      grid.upper = {2.0 * 3.141592653589793, cfg.r_max,
                    cfg.world.speed_max_kmh * kKmhToMs / cfg.world.channel.wavelength(),
                    cfg.hypercube_n_max};
      grid.bins = cfg.hypercube_bins;
      return std::make_unique<HypercubePolicy>(grid, arms,
                                               cfg.alpha * cfg.world.radio.bandwidth_hz);
    }
    case PolicyKind::random:
      return std::make_unique<RandomPolicy>(make_stream(cfg.seed, Stream::policy));
    case PolicyKind::wcs:
      return std::make_unique<WcsPolicy>(cfg.wcs_max_iters);
    case PolicyKind::brute_force:
      return std::make_unique<BruteForcePolicy>();
  }
  throw std::logic_error("unhandled policy kind");
}

MetricsLog run(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.world.seed = cfg.seed;
  cfg.validate();

  World world(cfg.world);
  PolicyPtr policy = make_policy(cfg, world);
  MetricsLog log;
  log.regret_curve.reserve(static_cast<std::size_t>(cfg.periods));
  double cumulative = 0.0;

  for (Period t = 1; t <= cfg.periods; ++t) {
    const auto departed = world.step_mobility();
    policy->depart(departed);
    world.update_links();

    const Snapshot snap = world.snapshot(cfg.r_max);
    std::vector<std::vector<Context>> contexts(snap.size());
    for (std::size_t i = 0; i < snap.size(); ++i) {
      const auto& v = world.vehicle(snap.vehicles[i]);
      for (const ArmId bs : snap.candidates[i]) contexts[i].push_back(world.context(v, bs));
    }
    const DecisionContext ctx{t, &snap, contexts};

    if (snap.size() > 0) {
      const AssociationVector assoc = policy->decide(ctx);
      check_association(snap, assoc);

      std::vector<Context> chosen;
      std::vector<double> rewards;
      const std::size_t first_row = log.rows.size();
      for (std::size_t i = 0; i < snap.size(); ++i) {
        const ArmId bs = assoc.serving[i];
        const double r = rate(snap, i, bs, assoc);
        const BestArm best = best_arm_rate(snap, i, assoc);
        const auto& cands = snap.candidates[i];
        chosen.push_back(
            contexts[i][static_cast<std::size_t>(std::find(cands.begin(), cands.end(), bs) -
                                                 cands.begin())]);
        rewards.push_back(r);
        PeriodRow row;
        row.period = t;
        row.vehicle = snap.vehicles[i];
        row.chosen_bs = bs;
        row.realized_rate = r;
        row.best_bs = best.bs;
        row.best_rate = best.rate;
        row.regret = best.rate - r;
        log.rows.push_back(row);
        cumulative += row.regret;
      }

      const auto syncs = policy->feedback(ctx, Feedback{chosen, rewards});
      for (const auto& s : syncs) {
        for (std::size_t i = first_row; i < log.rows.size(); ++i) {
          auto& row = log.rows[i];
          if (row.vehicle != s.vehicle) continue;
          if (row.synced) throw std::logic_error("vehicle synchronized twice in one period");
          row.synced = true;
          row.items_up = s.uploaded;
          row.items_down = s.downloaded;
          row.pool = s.pool;
          row.matched = s.matched;
        }
      }

      const auto loads = station_loads(snap, assoc);
      for (std::size_t i = 0; i < snap.size(); ++i) {
        const ArmId bs = assoc.serving[i];
        world.remember_load(snap.vehicles[i], bs, loads[static_cast<std::size_t>(bs)]);
      }
    }
    log.regret_curve.push_back(cumulative);
  }

  log.summary = summarize(log.rows, cfg.periods, policy_name(cfg.policy), cfg.seed);
  log.summary.model_rejections = policy->model_rejections();
  return log;
}

void write_rows_csv(std::ostream& out, std::span<const PeriodRow> rows) {
  out << "period,vehicle,chosen_bs,realized_rate,best_bs,best_rate,regret,synced,items_up,"
         "items_down,pool,matched\n";
  for (const auto& r : rows) {
    out << r.period << ',' << r.vehicle << ',' << r.chosen_bs << ',' << fmt_double(r.realized_rate)
        << ',' << r.best_bs << ',' << fmt_double(r.best_rate) << ',' << fmt_double(r.regret) << ','
        << (r.synced ? 1 : 0) << ',' << r.items_up << ',' << r.items_down << ',' << r.pool << ','
        << r.matched << '\n';
  }
}

nlohmann::json summary_json(const Summary& s) {
  nlohmann::json j;
  j["policy"] = s.policy;
  j["seed"] = s.seed;
  j["periods"] = s.periods;
  j["vehicle_periods"] = s.vehicle_periods;
  j["cumulative_regret"] = s.cumulative_regret;
  j["average_rate"] = s.average_rate;
  j["sync_rate"] = s.sync_rate;
  j["sharing_efficiency"] =
      s.sharing_efficiency ? nlohmann::json(*s.sharing_efficiency) : nlohmann::json(nullptr);
  j["syncs"] = s.syncs;
  j["items_uploaded"] = s.items_uploaded;
  j["items_downloaded"] = s.items_downloaded;
  j["items_avoided"] = s.items_avoided;
  j["bytes_shared"] = s.bytes_shared;
  j["model_rejections"] = s.model_rejections;
  return j;
}

void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const MetricsLog& log) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "periods.csv");
    write_rows_csv(out, log.rows);
    if (!out) throw std::runtime_error("cannot write " + (dir / "periods.csv").string());
  }
  {
    std::ofstream out(dir / "summary.json");
    out << summary_json(log.summary).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  }
  {
    std::ofstream out(dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  }
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis,
                            std::span<const std::string> values) {
  std::vector<SweepRow> out;
  for (const auto& v : values) {
    RunConfig cfg = base;
    set_axis(cfg, axis, v);
    out.push_back({v, run(cfg).summary});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::string& axis, std::span<const SweepRow> rows) {
  // The first column holds the swept value, named after the axis.
  out << (axis == "policy" || axis == "seed" ? "value" : axis)
      << ",policy,seed,cumulative_regret,average_rate,sync_rate,sharing_efficiency,syncs,"
         "bytes_shared\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << r.value << ',' << s.policy << ',' << s.seed << ',' << fmt_double(s.cumulative_regret)
        << ',' << fmt_double(s.average_rate) << ',' << fmt_double(s.sync_rate) << ','
        << (s.sharing_efficiency ? fmt_double(*s.sharing_efficiency) : std::string()) << ','
        << s.syncs << ',' << s.bytes_shared << '\n';
  }
}

}  // namespace dkucb
