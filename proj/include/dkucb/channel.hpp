#pragma once

#include <complex>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dkucb/geometry.hpp"
#include "dkucb/types.hpp"

namespace dkucb {

/// Simplified mmWave link model: log-distance path loss, rectangle blockage
/// with a fixed NLOS penalty, and Rician (LOS) / Rayleigh (NLOS) small-scale
/// fading evolving as a first-order autoregressive process whose correlation
/// decays with the link's Doppler spread.
struct ChannelParams {
  double carrier_hz = 28e9;
  double reference_distance_m = 1.0;
  double exponent_los = 2.0;
  double exponent_nlos = 3.3;
  double nlos_penalty_db = 20.0;
  double rician_k_db = 10.0;
  double ar_decay = 1.0;  // c in rho = exp(-c f_D dt)

  double wavelength() const;
  void validate() const;
};

/// Transmit side of the uplink plus the beam alignment gains.
struct RadioParams {
  double tx_power_w = 1.0;
  double bandwidth_hz = 100e6;
  double noise_density_w_per_hz = 3.981071705534973e-21;  // -174 dBm/Hz
  double mainlobe_gain_db = 20.0;
  double sidelobe_db = -20.0;  // relative to the mainlobe

  double noise_power() const { return noise_density_w_per_hz * bandwidth_hz; }
  double mainlobe_gain() const;
  double sidelobe_gain() const;
  void validate() const;
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);

/// Large-scale power gain (linear) at distance d; d below the reference
/// distance is clamped to it.
double path_loss(double d, bool los, const ChannelParams& p);

/// State of one vehicle -> base station link.
struct LinkState {
  bool initialized = false;
  bool los = true;
  double large_scale_gain = 0.0;  // path loss x blockage factor
  std::complex<double> diffuse{1.0, 0.0};
  double fading_power = 1.0;  // |g|^2
  double doppler_hz = 0.0;

  /// Propagation gain without beam alignment.
  double propagation_gain() const { return large_scale_gain * fading_power; }
};

/// AR(1) correlation of the diffuse fading component over one period.
double fading_correlation(double doppler_hz, double period_s, const ChannelParams& p);

/// Advances the link to new geometry: recomputes LOS from the obstacles and
/// path loss, then takes one AR(1) step of the fading (or draws the initial
/// fading state for a fresh link). Consumes exactly two normal draws.
void evolve_link(LinkState& link, Vec2 vehicle, Vec2 station, double doppler_hz,
                 std::span<const Rect> obstacles, double period_s, const ChannelParams& p,
                 std::mt19937_64& rng);

/// |h|^2 = alignment gain x path loss x blockage factor x |g|^2.
double channel_gain(const LinkState& link, double alignment_gain);

/// One period's full channel state information.
struct Snapshot {
  RadioParams radio;
  std::vector<VehicleId> vehicles;  // row order
  std::vector<Vec2> positions;
  int stations = 0;
  Eigen::MatrixXd gain;  // propagation gain, vehicles x stations
  std::vector<std::vector<ArmId>> candidates;

  std::size_t size() const { return vehicles.size(); }
};

/// Serving base station per snapshot row.
struct AssociationVector {
  std::vector<ArmId> serving;

  bool operator==(const AssociationVector&) const = default;
};

/// Throws std::invalid_argument unless every vehicle is served by exactly one
/// of its candidate stations.
void check_association(const Snapshot& snap, const AssociationVector& assoc);

/// Interference plus noise at station `bs` while serving row `row`: power
/// sum over all other vehicles, each with mainlobe gain toward the station it
/// is associated with and sidelobe gain elsewhere.
double interference(const Snapshot& snap, ArmId bs, std::size_t row,
                    const AssociationVector& assoc);

/// Shannon rate W log2(1 + SINR) for `row` served by `bs`; the row's own
/// entry in `assoc` is ignored.
double rate(const Snapshot& snap, std::size_t row, ArmId bs, const AssociationVector& assoc);

/// Rate from a precomputed SINR.
double shannon_rate(double bandwidth_hz, double sinr);

struct BestArm {
  ArmId bs = -1;
  double rate = 0.0;
};

/// Best response of one vehicle with everyone else's association fixed.
/// Ties go to the lowest station id. Throws if the row has no candidates.
BestArm best_arm_rate(const Snapshot& snap, std::size_t row, const AssociationVector& assoc);

/// Sum of realized rates over all rows.
double total_rate(const Snapshot& snap, const AssociationVector& assoc);

/// Number of vehicles associated with each station.
std::vector<int> station_loads(const Snapshot& snap, const AssociationVector& assoc);

}  // namespace dkucb
