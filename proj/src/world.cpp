#include "dkucb/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dkucb {

namespace {

constexpr double kKmhToMs = 1000.0 / 3600.0;

std::vector<BaseStation> central_stations() {
  return {{0, {250.0, 510.0}}, {1, {750.0, 490.0}}, {2, {510.0, 250.0}}, {3, {490.0, 750.0}}};
}

std::vector<Rect> city_buildings() {
  return {
      {{15.0, 15.0}, {230.0, 485.0}},    // south-west block, west of the alley
      {{270.0, 15.0}, {485.0, 485.0}},   // south-west block, east of the alley
      {{60.0, 560.0}, {440.0, 940.0}},   // north-west block, set back from the streets
      {{515.0, 515.0}, {985.0, 730.0}},  // north-east block, south of the passage
      {{515.0, 770.0}, {985.0, 985.0}},  // north-east block, north of the passage
      {{560.0, 60.0}, {940.0, 440.0}},   // south-east block, set back from the streets
  };
}

}  // namespace

void MapGeometry::validate() const {
  if (stations.empty()) throw std::invalid_argument("map has no base station");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].id != static_cast<ArmId>(i)) {
      throw std::invalid_argument("station ids must be 0..N-1 in order");
    }
  }
  if (roads.empty()) throw std::invalid_argument("map has no road");
  for (const auto& r : obstacles) {
    if (!(r.min.x < r.max.x && r.min.y < r.max.y)) {
      throw std::invalid_argument("obstacle rectangle has non-positive extent");
    }
  }
}

MapGeometry default_map() {
  MapGeometry m;
  m.stations = central_stations();
  for (const double c : {0.0, 500.0, 1000.0}) {
    m.roads.emplace_back(std::vector<Vec2>{{0.0, c}, {1000.0, c}});
    m.roads.emplace_back(std::vector<Vec2>{{c, 0.0}, {c, 1000.0}});
  }
  m.obstacles = city_buildings();
  return m;
}

MapGeometry loop_map() {
  MapGeometry m;
  m.stations = central_stations();
  for (const double x0 : {0.0, 500.0}) {
    for (const double y0 : {0.0, 500.0}) {
      m.roads.emplace_back(std::vector<Vec2>{{x0, y0},
                                             {x0 + 500.0, y0},
                                             {x0 + 500.0, y0 + 500.0},
                                             {x0, y0 + 500.0},
                                             {x0, y0}});
    }
  }
  m.obstacles = city_buildings();
  return m;
}

MapGeometry parse_geometry(std::istream& in) {
  MapGeometry m;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("geometry line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    std::vector<double> values;
    for (double v; ss >> v;) values.push_back(v);
    if (!ss.eof()) fail("expected numbers after '" + kind + "'");
    if (kind == "station") {
      if (values.size() != 3) fail("station needs <id> <x> <y>");
      m.stations.push_back({static_cast<ArmId>(values[0]), {values[1], values[2]}});
    } else if (kind == "road") {
      if (values.size() < 4 || values.size() % 2 != 0) fail("road needs an even number >= 4 of coordinates");
      std::vector<Vec2> pts;
      for (std::size_t i = 0; i < values.size(); i += 2) pts.push_back({values[i], values[i + 1]});
      try {
        m.roads.emplace_back(std::move(pts));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    } else if (kind == "obstacle") {
      if (values.size() != 4) fail("obstacle needs <xmin> <ymin> <xmax> <ymax>");
      m.obstacles.push_back({{values[0], values[1]}, {values[2], values[3]}});
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  std::sort(m.stations.begin(), m.stations.end(),
            [](const BaseStation& a, const BaseStation& b) { return a.id < b.id; });
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("geometry: ") + e.what());
  }
  return m;
}

MapGeometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry file " + path);
  return parse_geometry(in);
}

void WorldConfig::validate() const {
  if (!(period_s > 0.0)) throw std::invalid_argument("world.period_s must be > 0");
  if (!(arrival_rate >= 0.0)) throw std::invalid_argument("world.arrival_rate must be >= 0");
  if (!(speed_min_kmh > 0.0) || speed_min_kmh > speed_max_kmh) {
    throw std::invalid_argument("world.speed_kmh must satisfy 0 < min <= max");
  }
  if (initial_vehicles < 0) throw std::invalid_argument("world.initial_vehicles must be >= 0");
  radio.validate();
  channel.validate();
  map.validate();
  if (loop_routes) {
    for (const auto& r : map.roads) {
      if (!r.closed()) throw std::invalid_argument("world.loop_routes needs closed roads");
    }
  }
}

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

World::World(WorldConfig cfg)
    : cfg_(std::move(cfg)),
      mobility_rng_(make_stream(cfg_.seed, Stream::mobility)),
      fading_rng_(make_stream(cfg_.seed, Stream::fading)) {
  cfg_.validate();
  for (const auto& road : cfg_.map.roads) {
    routes_.push_back(road);
    routes_.push_back(road.reversed());
  }
  std::uniform_int_distribution<std::size_t> pick_route(0, routes_.size() - 1);
  std::uniform_real_distribution<double> speed(cfg_.speed_min_kmh * kKmhToMs,
                                               cfg_.speed_max_kmh * kKmhToMs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < cfg_.initial_vehicles; ++i) {
    const std::size_t route = pick_route(mobility_rng_);
    const double progress = unit(mobility_rng_) * routes_[route].length();
    add_vehicle(route, progress, speed(mobility_rng_));
  }
}

const VehicleState& World::vehicle(VehicleId id) const {
  const auto it = std::lower_bound(vehicles_.begin(), vehicles_.end(), id,
                                   [](const VehicleState& v, VehicleId x) { return v.id < x; });
  if (it == vehicles_.end() || it->id != id) {
    throw std::out_of_range("no vehicle " + std::to_string(id));
  }
  return *it;
}

VehicleState& World::mutable_vehicle(VehicleId id) {
  return const_cast<VehicleState&>(std::as_const(*this).vehicle(id));
}

void World::place(VehicleState& v) const {
  const Polyline& route = routes_[v.route];
  v.position = route.point_at(v.progress);
  v.velocity = route.direction_at(v.progress) * v.speed;
}

VehicleId World::add_vehicle(std::size_t route, double progress, double speed) {
  if (route >= routes_.size()) throw std::out_of_range("route index");
  VehicleState v;
  v.id = next_id_++;
  v.arrived = period_;
  v.route = route;
  v.progress = progress;
  v.speed = speed;
  v.n_tx_memory.assign(cfg_.map.stations.size(), 0);
  v.links.assign(cfg_.map.stations.size(), LinkState{});
  place(v);
  vehicles_.push_back(std::move(v));
  return vehicles_.back().id;
}

std::vector<VehicleId> World::step_mobility() {
  ++period_;
  std::vector<VehicleId> left;
  for (auto& v : vehicles_) {
    v.progress += v.speed * cfg_.period_s;
    const double length = routes_[v.route].length();
    if (v.progress > length) {
      if (cfg_.loop_routes) {
        v.progress = std::fmod(v.progress, length);
      } else {
        left.push_back(v.id);
        continue;
      }
    }
    place(v);
  }
  std::erase_if(vehicles_, [&](const VehicleState& v) {
    return std::find(left.begin(), left.end(), v.id) != left.end();
  });

  if (cfg_.arrival_rate > 0.0) {
    std::poisson_distribution<int> arrivals(cfg_.arrival_rate);
    std::uniform_int_distribution<std::size_t> pick_route(0, routes_.size() - 1);
    std::uniform_real_distribution<double> speed(cfg_.speed_min_kmh * kKmhToMs,
                                                 cfg_.speed_max_kmh * kKmhToMs);
    const int n = arrivals(mobility_rng_);
    for (int i = 0; i < n; ++i) {
      const std::size_t route = pick_route(mobility_rng_);
      add_vehicle(route, 0.0, speed(mobility_rng_));
    }
  }
  return left;
}

void World::update_links() {
  const double wavelength = cfg_.channel.wavelength();
  for (auto& v : vehicles_) {
    for (const auto& bs : cfg_.map.stations) {
      const Context x = extract_context(v.position, v.velocity, bs, 0, wavelength);
      evolve_link(v.links[static_cast<std::size_t>(bs.id)], v.position, bs.position, x.doppler,
                  cfg_.map.obstacles, cfg_.period_s, cfg_.channel, fading_rng_);
    }
  }
}

Context World::context(const VehicleState& v, ArmId bs) const {
  return extract_context(v.position, v.velocity, cfg_.map.stations.at(static_cast<std::size_t>(bs)),
                         v.n_tx_memory.at(static_cast<std::size_t>(bs)),
                         cfg_.channel.wavelength());
}

std::vector<Context> World::candidates(const VehicleState& v, double r_max) const {
  return candidate_set(
      v.position, v.velocity, cfg_.map.stations, r_max,
      [&v](ArmId a) { return v.n_tx_memory.at(static_cast<std::size_t>(a)); },
      cfg_.channel.wavelength());
}

Snapshot World::snapshot(double r_max) const {
  Snapshot s;
  s.radio = cfg_.radio;
  s.stations = static_cast<int>(cfg_.map.stations.size());
  std::vector<const VehicleState*> active;
  for (const auto& v : vehicles_) {
    std::vector<ArmId> cands;
    for (const auto& bs : cfg_.map.stations) {
      if (distance(v.position, bs.position) < r_max) cands.push_back(bs.id);
    }
    if (cands.empty()) continue;
    active.push_back(&v);
    s.vehicles.push_back(v.id);
    s.positions.push_back(v.position);
    s.candidates.push_back(std::move(cands));
  }
  s.gain.resize(static_cast<Eigen::Index>(active.size()), s.stations);
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (const auto& bs : cfg_.map.stations) {
      s.gain(static_cast<Eigen::Index>(i), bs.id) =
          active[i]->links[static_cast<std::size_t>(bs.id)].propagation_gain();
    }
  }
  return s;
}

void World::remember_load(VehicleId id, ArmId bs, int n_tx) {
  mutable_vehicle(id).n_tx_memory.at(static_cast<std::size_t>(bs)) = n_tx;
}

}  // namespace dkucb
