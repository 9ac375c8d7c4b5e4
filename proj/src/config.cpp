#include "dkucb/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace dkucb {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Reads the members of one JSON object and remembers which keys were used,
/// so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out, bool allow_inf = false) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (v->is_number()) {
      out = v->get<double>();
    } else if (allow_inf && v->is_string() && (v->get<std::string>() == "inf")) {
      out = kInf;
    } else {
      throw ConfigError(field(key), allow_inf ? "expected a number or \"inf\"" : "expected a number");
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    out = v->get<Int>();
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    out = v->get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    out = v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json number_or_inf(double v) {
  if (std::isinf(v) && v > 0.0) return "inf";
  return v;
}

double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

PolicyKind parse_policy(const std::string& name) {
  if (name == "dkucb") return PolicyKind::dkucb;
  if (name == "gaussian") return PolicyKind::gaussian;
  if (name == "hypercube") return PolicyKind::hypercube;
  if (name == "random") return PolicyKind::random;
  if (name == "wcs") return PolicyKind::wcs;
  if (name == "brute_force") return PolicyKind::brute_force;
  throw ConfigError("policy",
                    "unknown policy '" + name +
                        "' (expected dkucb, gaussian, hypercube, random, wcs or brute_force)");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::dkucb: return "dkucb";
    case PolicyKind::gaussian: return "gaussian";
    case PolicyKind::hypercube: return "hypercube";
    case PolicyKind::random: return "random";
    case PolicyKind::wcs: return "wcs";
    case PolicyKind::brute_force: return "brute_force";
  }
  return "?";
}

void RunConfig::validate() const {
  require(periods >= 1, "periods", "must be >= 1");
  const auto& w = world;
  require(w.period_s > 0.0, "world.period_s", "must be > 0");
  require(w.arrival_rate >= 0.0 && std::isfinite(w.arrival_rate), "world.arrival_rate",
          "must be finite and >= 0");
  require(w.speed_min_kmh > 0.0 && w.speed_min_kmh <= w.speed_max_kmh, "world.speed_kmh",
          "must satisfy 0 < min <= max");
  require(w.initial_vehicles >= 0, "world.initial_vehicles", "must be >= 0");
  require(w.channel.carrier_hz > 0.0, "world.carrier_hz", "must be > 0");
  require(w.radio.bandwidth_hz > 0.0 && std::isfinite(w.radio.bandwidth_hz), "world.bandwidth_hz",
          "must be finite and > 0");
  require(w.radio.tx_power_w > 0.0 && std::isfinite(w.radio.tx_power_w), "world.tx_power_dbm",
          "must be finite");
  require(w.radio.noise_density_w_per_hz >= 0.0, "world.noise_dbm_per_hz", "must be finite");
  require(w.channel.reference_distance_m > 0.0, "world.reference_distance_m", "must be > 0");
  require(w.channel.exponent_los > 0.0, "world.exponent_los", "must be > 0");
  require(w.channel.exponent_nlos > 0.0, "world.exponent_nlos", "must be > 0");
  require(w.channel.ar_decay >= 0.0, "world.ar_decay", "must be >= 0");
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("world", e.what());
  }

  require(kernel.sigma_L > 0.0, "kernel.sigma_L", "must be > 0");
  require(kernel.sigma_f > 0.0, "kernel.sigma_f", "must be > 0");
  require(kernel.sigma_N > 0.0, "kernel.sigma_N", "must be > 0");
  require(kernel.lambda_k > 0.0, "kernel.lambda", "must be > 0");
  require(kernel.jitter >= 0.0, "kernel.jitter", "must be >= 0");

  require(alpha >= 0.0 && std::isfinite(alpha), "agent.alpha", "must be finite and >= 0");
  require(r_max > 0.0, "agent.r_max", "must be > 0");
  if (alpha_mode == AlphaMode::theoretical) {
    require(theory.delta > 0.0 && theory.delta < 1.0, "agent.delta", "must lie in (0, 1)");
    require(theory.horizon >= 1.0, "agent.horizon", "must be >= 1");
    require(theory.theta_norm >= 0.0, "agent.theta_norm", "must be >= 0");
    require(theory.noise_scale >= 0.0, "agent.noise_scale", "must be >= 0");
  }

  require(sync.threshold >= 0.0, "sync.D", "must be >= 0");
  require(sync.r_p > 0.0, "sync.R_p", "must be > 0");

  require(sigma_gaus > 0.0, "baselines.sigma_gaus", "must be > 0");
  require(hypercube_bins >= 1, "baselines.hypercube_bins", "must be >= 1");
  require(hypercube_n_max > 0.0, "baselines.hypercube_n_max", "must be > 0");
  require(wcs_max_iters >= 0, "baselines.wcs_max_iters", "must be >= 0");
}

AgentConfig RunConfig::agent_config() const {
  const double w = world.radio.bandwidth_hz;
  AgentConfig a;
  a.alpha = alpha * w;
  a.r_max = r_max;
  a.alpha_mode = alpha_mode;
  a.theory = theory;
  a.theory.theta_norm *= w;
  a.theory.noise_scale *= w;
  return a;
}

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  Section root(j, "");
  std::string policy = policy_name(cfg.policy);
  root.string("policy", policy);
  cfg.policy = parse_policy(policy);
  root.integer("periods", cfg.periods);
  root.integer("seed", cfg.seed);
  root.string("output", cfg.output);

  if (const json* w = root.find("world")) {
    Section s(*w, "world");
    auto& wc = cfg.world;
    s.number("period_s", wc.period_s);
    s.number("arrival_rate", wc.arrival_rate);
    if (const json* sp = s.find("speed_kmh")) {
      if (!sp->is_array() || sp->size() != 2 || !(*sp)[0].is_number() || !(*sp)[1].is_number()) {
        throw ConfigError("world.speed_kmh", "expected [min, max]");
      }
      wc.speed_min_kmh = (*sp)[0].get<double>();
      wc.speed_max_kmh = (*sp)[1].get<double>();
    }
    s.integer("initial_vehicles", wc.initial_vehicles);
    s.boolean("loop_routes", wc.loop_routes);
    s.string("map", cfg.map);
    s.number("carrier_hz", wc.channel.carrier_hz);
    s.number("bandwidth_hz", wc.radio.bandwidth_hz);
    double dbm = watts_to_dbm(wc.radio.tx_power_w);
    s.number("tx_power_dbm", dbm);
    wc.radio.tx_power_w = dbm_to_watts(dbm);
    double noise = watts_to_dbm(wc.radio.noise_density_w_per_hz);
    s.number("noise_dbm_per_hz", noise);
    wc.radio.noise_density_w_per_hz = dbm_to_watts(noise);
    s.number("mainlobe_gain_db", wc.radio.mainlobe_gain_db);
    s.number("sidelobe_db", wc.radio.sidelobe_db);
    s.number("reference_distance_m", wc.channel.reference_distance_m);
    s.number("exponent_los", wc.channel.exponent_los);
    s.number("exponent_nlos", wc.channel.exponent_nlos);
    s.number("nlos_penalty_db", wc.channel.nlos_penalty_db);
    s.number("rician_k_db", wc.channel.rician_k_db);
    s.number("ar_decay", wc.channel.ar_decay);
    s.finish();
  }

  if (const json* k = root.find("kernel")) {
    Section s(*k, "kernel");
    s.number("sigma_L", cfg.kernel.sigma_L);
    s.number("sigma_f", cfg.kernel.sigma_f);
    s.number("sigma_N", cfg.kernel.sigma_N);
    s.number("lambda", cfg.kernel.lambda_k);
    s.number("jitter", cfg.kernel.jitter);
    std::string angle(angle_kernel_name(cfg.kernel.angle));
    s.string("angle", angle);
    try {
      cfg.kernel.angle = parse_angle_kernel(angle);
    } catch (const std::invalid_argument&) {
      throw ConfigError("kernel.angle", "expected truncated, cosine or cos4_half");
    }
    s.finish();
  }

  bool horizon_given = false;
  if (const json* a = root.find("agent")) {
    Section s(*a, "agent");
    s.number("alpha", cfg.alpha);
    s.number("r_max", cfg.r_max);
    std::string mode = "fixed";
    s.string("alpha_mode", mode);
    if (mode == "fixed") {
      cfg.alpha_mode = AlphaMode::fixed;
    } else if (mode == "theoretical") {
      cfg.alpha_mode = AlphaMode::theoretical;
    } else {
      throw ConfigError("agent.alpha_mode", "expected \"fixed\" or \"theoretical\"");
    }
    s.number("theta_norm", cfg.theory.theta_norm);
    s.number("noise_scale", cfg.theory.noise_scale);
    s.number("delta", cfg.theory.delta);
    horizon_given = s.find("horizon") != nullptr;
    s.number("horizon", cfg.theory.horizon);
    s.finish();
  }
  if (!horizon_given) cfg.theory.horizon = static_cast<double>(cfg.periods);

  if (const json* y = root.find("sync")) {
    Section s(*y, "sync");
    s.number("D", cfg.sync.threshold, true);
    s.number("R_p", cfg.sync.r_p, true);
    std::string mode = "new_samples";
    s.string("trigger", mode);
    if (mode == "new_samples") {
      cfg.sync.mode = TriggerMode::new_samples;
    } else if (mode == "gain_since_sync") {
      cfg.sync.mode = TriggerMode::gain_since_sync;
    } else {
      throw ConfigError("sync.trigger", "expected \"new_samples\" or \"gain_since_sync\"");
    }
    s.finish();
  }

  if (const json* b = root.find("baselines")) {
    Section s(*b, "baselines");
    s.number("sigma_gaus", cfg.sigma_gaus);
    s.integer("hypercube_bins", cfg.hypercube_bins);
    s.number("hypercube_n_max", cfg.hypercube_n_max);
    s.integer("wcs_max_iters", cfg.wcs_max_iters);
    s.finish();
  }
  root.finish();

  if (cfg.map == "default") {
    cfg.world.map = default_map();
  } else if (cfg.map == "loop") {
    cfg.world.map = loop_map();
  } else {
    try {
      cfg.world.map = load_geometry(cfg.map);
    } catch (const std::runtime_error& e) {
      throw ConfigError("world.map", e.what());
    }
  }
  cfg.world.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  const auto& w = cfg.world;
  json j;
  j["policy"] = policy_name(cfg.policy);
  j["periods"] = cfg.periods;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["world"] = {
      {"period_s", w.period_s},
      {"arrival_rate", w.arrival_rate},
      {"speed_kmh", {w.speed_min_kmh, w.speed_max_kmh}},
      {"initial_vehicles", w.initial_vehicles},
      {"loop_routes", w.loop_routes},
      {"map", cfg.map},
      {"carrier_hz", w.channel.carrier_hz},
      {"bandwidth_hz", w.radio.bandwidth_hz},
      {"tx_power_dbm", watts_to_dbm(w.radio.tx_power_w)},
      {"noise_dbm_per_hz", watts_to_dbm(w.radio.noise_density_w_per_hz)},
      {"mainlobe_gain_db", w.radio.mainlobe_gain_db},
      {"sidelobe_db", w.radio.sidelobe_db},
      {"reference_distance_m", w.channel.reference_distance_m},
      {"exponent_los", w.channel.exponent_los},
      {"exponent_nlos", w.channel.exponent_nlos},
      {"nlos_penalty_db", w.channel.nlos_penalty_db},
      {"rician_k_db", w.channel.rician_k_db},
      {"ar_decay", w.channel.ar_decay},
  };
  j["kernel"] = {{"sigma_L", cfg.kernel.sigma_L},
                 {"sigma_f", cfg.kernel.sigma_f},
                 {"sigma_N", cfg.kernel.sigma_N},
                 {"lambda", cfg.kernel.lambda_k},
                 {"jitter", cfg.kernel.jitter},
                 {"angle", std::string(angle_kernel_name(cfg.kernel.angle))}};
  j["agent"] = {{"alpha", cfg.alpha},
                {"r_max", cfg.r_max},
                {"alpha_mode", cfg.alpha_mode == AlphaMode::fixed ? "fixed" : "theoretical"},
                {"theta_norm", cfg.theory.theta_norm},
                {"noise_scale", cfg.theory.noise_scale},
                {"delta", cfg.theory.delta},
                {"horizon", cfg.theory.horizon}};
  j["sync"] = {{"D", number_or_inf(cfg.sync.threshold)},
               {"R_p", number_or_inf(cfg.sync.r_p)},
               {"trigger", cfg.sync.mode == TriggerMode::new_samples ? "new_samples" : "gain_since_sync"}};
  j["baselines"] = {{"sigma_gaus", cfg.sigma_gaus},
                    {"hypercube_bins", cfg.hypercube_bins},
                    {"hypercube_n_max", cfg.hypercube_n_max},
                    {"wcs_max_iters", cfg.wcs_max_iters}};
  return j;
}

void set_axis(RunConfig& cfg, const std::string& axis, const std::string& value) {
  auto number = [&]() {
    if (value == "inf") return kInf;
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(axis, "not a number: '" + value + "'");
    }
  };
  if (axis == "bandwidth_hz") {
    cfg.world.radio.bandwidth_hz = number();
  } else if (axis == "arrival_rate") {
    cfg.world.arrival_rate = number();
  } else if (axis == "tx_power_dbm") {
    cfg.world.radio.tx_power_w = dbm_to_watts(number());
  } else if (axis == "D") {
    cfg.sync.threshold = number();
  } else if (axis == "R_p") {
    cfg.sync.r_p = number();
  } else if (axis == "alpha") {
    cfg.alpha = number();
  } else if (axis == "policy") {
    cfg.policy = parse_policy(value);
  } else if (axis == "seed") {
    const double v = number();
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("seed", "expected an integer >= 0");
    cfg.seed = static_cast<std::uint64_t>(v);
    cfg.world.seed = cfg.seed;
  } else {
    throw ConfigError(axis, "not a sweepable parameter (bandwidth_hz, arrival_rate, tx_power_dbm, "
                            "D, R_p, alpha, policy, seed)");
  }
  cfg.validate();
}

}  // namespace dkucb
