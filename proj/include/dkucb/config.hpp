#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dkucb/bandit.hpp"
#include "dkucb/baselines.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/sync.hpp"
#include "dkucb/world.hpp"

namespace dkucb {

/// Invalid configuration; `field()` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class PolicyKind { dkucb, gaussian, hypercube, random, wcs, brute_force };

PolicyKind parse_policy(const std::string& name);
std::string policy_name(PolicyKind kind);

struct RunConfig {
  PolicyKind policy = PolicyKind::dkucb;
  Period periods = 3000;
  std::uint64_t seed = 1;
  std::string output = "out";

  WorldConfig world;
  /// "default", "loop" or a geometry file path.
  std::string map = "default";

  KernelParams kernel;
  /// Exploration weight in bits/s/Hz; the agents use alpha x bandwidth.
  double alpha = 1.0;
  double r_max = 600.0;
  AlphaMode alpha_mode = AlphaMode::fixed;
  TheoreticalAlpha theory;  // theta_norm and noise_scale in bits/s/Hz as well

  SyncSettings sync;

  double sigma_gaus = 40.0;
  int hypercube_bins = 8;
  double hypercube_n_max = 16.0;
  int wcs_max_iters = 100;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// Agent settings in reward units (bits/s).
  AgentConfig agent_config() const;
};

/// Reads a run configuration; keys not listed in the README are rejected.
/// "inf" (string) is accepted wherever a number may be infinite.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Overrides one sweepable scalar: bandwidth_hz, arrival_rate, tx_power_dbm,
/// D, R_p, alpha, policy or seed. Throws ConfigError for other names.
void set_axis(RunConfig& cfg, const std::string& axis, const std::string& value);

}  // namespace dkucb
