#include "dkucb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dkucb {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

double ChannelParams::wavelength() const { return kSpeedOfLight / carrier_hz; }

void ChannelParams::validate() const {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("channel.carrier_hz must be > 0");
  if (!(reference_distance_m > 0.0)) {
    throw std::invalid_argument("channel.reference_distance_m must be > 0");
  }
  if (!(exponent_los > 0.0) || !(exponent_nlos > 0.0)) {
    throw std::invalid_argument("channel path-loss exponents must be > 0");
  }
  if (!(ar_decay >= 0.0)) throw std::invalid_argument("channel.ar_decay must be >= 0");
}

double RadioParams::mainlobe_gain() const { return db_to_linear(mainlobe_gain_db); }
double RadioParams::sidelobe_gain() const { return db_to_linear(mainlobe_gain_db + sidelobe_db); }

void RadioParams::validate() const {
  if (!(tx_power_w > 0.0)) throw std::invalid_argument("tx power must be > 0");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth_hz must be > 0");
  if (!(noise_density_w_per_hz >= 0.0)) throw std::invalid_argument("noise density must be >= 0");
}

double path_loss(double d, bool los, const ChannelParams& p) {
  const double d0 = p.reference_distance_m;
  d = std::max(d, d0);
  const double free_space = p.wavelength() / (4.0 * std::numbers::pi * d0);
  const double n = los ? p.exponent_los : p.exponent_nlos;
  return free_space * free_space * std::pow(d / d0, -n);
}

double fading_correlation(double doppler_hz, double period_s, const ChannelParams& p) {
  return std::exp(-p.ar_decay * doppler_hz * period_s);
}

void evolve_link(LinkState& link, Vec2 vehicle, Vec2 station, double doppler_hz,
                 std::span<const Rect> obstacles, double period_s, const ChannelParams& p,
                 std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const std::complex<double> w(normal(rng), normal(rng));

  link.los = !segment_blocked(vehicle, station, obstacles);
  link.doppler_hz = doppler_hz;
  link.large_scale_gain =
      path_loss(distance(vehicle, station), link.los, p) *
      (link.los ? 1.0 : db_to_linear(-p.nlos_penalty_db));

  if (!link.initialized) {
    link.diffuse = w;
    link.initialized = true;
  } else {
    const double rho = fading_correlation(doppler_hz, period_s, p);
    link.diffuse = rho * link.diffuse + std::sqrt(1.0 - rho * rho) * w;
  }

  std::complex<double> g = link.diffuse;
  if (link.los) {
    const double k = db_to_linear(p.rician_k_db);
    g = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * link.diffuse;
  }
  link.fading_power = std::norm(g);
}

double channel_gain(const LinkState& link, double alignment_gain) {
  return alignment_gain * link.propagation_gain();
}

void check_association(const Snapshot& snap, const AssociationVector& assoc) {
  if (assoc.serving.size() != snap.size()) {
    throw std::invalid_argument("association does not cover every vehicle");
  }
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const auto& c = snap.candidates[i];
    if (std::find(c.begin(), c.end(), assoc.serving[i]) == c.end()) {
      throw std::invalid_argument("vehicle " + std::to_string(snap.vehicles[i]) +
                                  " associated with a non-candidate station");
    }
  }
}

double interference(const Snapshot& snap, ArmId bs, std::size_t row,
                    const AssociationVector& assoc) {
  const double main = snap.radio.mainlobe_gain();
  const double side = snap.radio.sidelobe_gain();
  double sum = 0.0;
  for (std::size_t k = 0; k < snap.size(); ++k) {
    if (k == row) continue;
    const double align = assoc.serving[k] == bs ? main : side;
    sum += snap.radio.tx_power_w * align * snap.gain(static_cast<Eigen::Index>(k), bs);
  }
  return sum + snap.radio.noise_power();
}

double shannon_rate(double bandwidth_hz, double sinr) {
  return bandwidth_hz * std::log2(1.0 + std::max(sinr, 0.0));
}

double rate(const Snapshot& snap, std::size_t row, ArmId bs, const AssociationVector& assoc) {
  const double signal = snap.radio.tx_power_w * snap.radio.mainlobe_gain() *
                        snap.gain(static_cast<Eigen::Index>(row), bs);
  const double noise = interference(snap, bs, row, assoc);
  if (noise <= 0.0) throw std::domain_error("zero interference-plus-noise power");
  return shannon_rate(snap.radio.bandwidth_hz, signal / noise);
}

BestArm best_arm_rate(const Snapshot& snap, std::size_t row, const AssociationVector& assoc) {
  const auto& cands = snap.candidates.at(row);
  if (cands.empty()) throw std::invalid_argument("vehicle has no candidate station");
  BestArm best;
  for (const ArmId j : cands) {
    const double r = rate(snap, row, j, assoc);
    if (best.bs < 0 || r > best.rate || (r == best.rate && j < best.bs)) best = {j, r};
  }
  return best;
}

double total_rate(const Snapshot& snap, const AssociationVector& assoc) {
  double sum = 0.0;
  for (std::size_t i = 0; i < snap.size(); ++i) sum += rate(snap, i, assoc.serving[i], assoc);
  return sum;
}

std::vector<int> station_loads(const Snapshot& snap, const AssociationVector& assoc) {
  std::vector<int> loads(static_cast<std::size_t>(snap.stations), 0);
  for (const ArmId j : assoc.serving) ++loads.at(static_cast<std::size_t>(j));
  return loads;
}

}  // namespace dkucb
