#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dkucb/channel.hpp"
#include "dkucb/geometry.hpp"
#include "dkucb/kernel.hpp"
#include "dkucb/bandit.hpp"
#include "dkucb/kinematics.hpp"

namespace dkucb {

/// Roads, base stations and obstacles of a scenario.
struct MapGeometry {
  std::vector<BaseStation> stations;  // ids must equal their index
  std::vector<Polyline> roads;
  std::vector<Rect> obstacles;

  void validate() const;
};

/// 1 km square with a 2 x 2 block Manhattan grid, four base stations along
/// the central cross and six buildings.
MapGeometry default_map();

/// The default map's stations and buildings with closed loop roads around
/// the blocks, for fixed-fleet scenarios.
MapGeometry loop_map();

/// Plain-text geometry:
///   # comment
///   station <id> <x> <y>
///   road <x1> <y1> <x2> <y2> [<x3> <y3> ...]
///   obstacle <xmin> <ymin> <xmax> <ymax>
/// Throws std::runtime_error with the offending line number on bad input.
MapGeometry parse_geometry(std::istream& in);
MapGeometry load_geometry(const std::string& path);

struct WorldConfig {
  double period_s = 1.0;
  double arrival_rate = 0.3;  // Poisson mean per period
  double speed_min_kmh = 20.0;
  double speed_max_kmh = 80.0;
  int initial_vehicles = 0;
  /// Vehicles reaching the end of a closed road start over instead of leaving.
  bool loop_routes = false;
  RadioParams radio;
  ChannelParams channel;
  MapGeometry map = default_map();
  std::uint64_t seed = 1;

  void validate() const;
};

struct VehicleState {
  VehicleId id = 0;
  Period arrived = 0;
  std::size_t route = 0;
  double progress = 0.0;  // arc length along the route, m
  double speed = 0.0;     // m/s
  Vec2 position;
  Vec2 velocity;
  std::vector<int> n_tx_memory;  // per station, 0 before first contact
  std::vector<LinkState> links;  // per station
};

/// Independent random streams derived from one seed, so that mobility and
/// fading traces do not depend on how a policy consumes randomness.
enum class Stream : std::uint64_t { mobility = 1, fading = 2, policy = 3 };
std::mt19937_64 make_stream(std::uint64_t seed, Stream stream);

/// Discrete-time world: vehicle arrivals and motion along roads plus the
/// channel state of every vehicle/station link.
class World {
 public:
  explicit World(WorldConfig cfg);

  const WorldConfig& config() const { return cfg_; }
  const MapGeometry& map() const { return cfg_.map; }
  Period period() const { return period_; }
  std::span<const VehicleState> vehicles() const { return vehicles_; }
  const VehicleState& vehicle(VehicleId id) const;
  const std::vector<Polyline>& routes() const { return routes_; }

  /// Moves to the next period: advances every vehicle by speed x period,
  /// removes those past the end of their route and adds Poisson arrivals at
  /// route entry points. Returns the ids that left.
  std::vector<VehicleId> step_mobility();

  /// Recomputes blockage and path loss and steps the fading of every link.
  void update_links();

  /// Contexts for the stations within r_max of a vehicle.
  std::vector<Context> candidates(const VehicleState& v, double r_max) const;
  Context context(const VehicleState& v, ArmId bs) const;

  /// Current CSI of the vehicles with at least one station closer than
  /// r_max; the others do not transmit this period.
  Snapshot snapshot(double r_max) const;

  /// Stores the transmission count a vehicle saw at a station.
  void remember_load(VehicleId id, ArmId bs, int n_tx);

  /// Places a vehicle directly (tests and scripted scenarios).
  VehicleId add_vehicle(std::size_t route, double progress, double speed);

 private:
  void place(VehicleState& v) const;
  VehicleState& mutable_vehicle(VehicleId id);

  WorldConfig cfg_;
  std::vector<Polyline> routes_;
  std::vector<VehicleState> vehicles_;  // ascending id
  std::mt19937_64 mobility_rng_;
  std::mt19937_64 fading_rng_;
  Period period_ = 0;
  VehicleId next_id_ = 0;
};

}  // namespace dkucb
