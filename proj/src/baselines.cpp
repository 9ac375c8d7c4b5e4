#include "dkucb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dkucb {

KernelFunction gaussian_context_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma_gaus must be > 0");
  const double scale = 1.0 / (2.0 * sigma * sigma);
  return [scale](const Context& x, const Context& y) {
    if (x.arm != y.arm) return 0.0;
    const double dt = x.theta - y.theta;
    const double dl = x.dist - y.dist;
    const double df = x.doppler - y.doppler;
    const double dn = static_cast<double>(x.n_tx - y.n_tx);
    return std::exp(-(dt * dt + dl * dl + df * df + dn * dn) * scale);
  };
}

// ---------------------------------------------------------------------------
// Hypercube

namespace {

std::array<double, 4> numeric_fields(const Context& x) {
  return {x.theta, x.dist, x.doppler, static_cast<double>(x.n_tx)};
}

}  // namespace

void HypercubeGrid::validate() const {
  if (bins < 1) throw std::invalid_argument("hypercube bins must be >= 1");
  for (std::size_t d = 0; d < 4; ++d) {
    if (!(upper[d] > lower[d])) throw std::invalid_argument("hypercube range must be non-empty");
  }
}

std::size_t HypercubeGrid::cells() const {
  const auto b = static_cast<std::size_t>(bins);
  return b * b * b * b;
}

std::size_t HypercubeGrid::cell_of(const Context& x) const {
  const auto v = numeric_fields(x);
  std::size_t cell = 0;
  for (std::size_t d = 0; d < 4; ++d) {
    const double u = (v[d] - lower[d]) / (upper[d] - lower[d]);
    const int k = std::clamp(static_cast<int>(std::floor(u * bins)), 0, bins - 1);
    cell = cell * static_cast<std::size_t>(bins) + static_cast<std::size_t>(k);
  }
  return cell;
}

HypercubeTable::HypercubeTable(HypercubeGrid grid, int arms) : grid_(grid), arms_(arms) {
  grid_.validate();
  if (arms < 1) throw std::invalid_argument("hypercube table needs at least one arm");
  counts_.assign(grid_.cells() * static_cast<std::size_t>(arms), 0);
  means_.assign(counts_.size(), 0.0);
}

std::size_t HypercubeTable::index(const Context& x) const {
  if (x.arm < 0 || x.arm >= arms_) throw std::out_of_range("arm outside hypercube table");
  return static_cast<std::size_t>(x.arm) * grid_.cells() + grid_.cell_of(x);
}

void HypercubeTable::update(const Context& x, double reward) {
  const std::size_t i = index(x);
  ++counts_[i];
  means_[i] += (reward - means_[i]) / static_cast<double>(counts_[i]);
  ++total_;
}

std::uint64_t HypercubeTable::count(const Context& x) const { return counts_[index(x)]; }
double HypercubeTable::mean(const Context& x) const { return means_[index(x)]; }

HypercubePolicy::HypercubePolicy(HypercubeGrid grid, int arms, double bonus_scale)
    : table_(grid, arms), bonus_scale_(bonus_scale) {
  if (!(bonus_scale >= 0.0)) throw std::invalid_argument("hypercube bonus scale must be >= 0");
}

AssociationVector HypercubePolicy::decide(const DecisionContext& ctx) {
  const double log_t = std::log(static_cast<double>(std::max<std::uint64_t>(table_.total(), 1)));
  AssociationVector out;
  for (std::size_t i = 0; i < ctx.snapshot->size(); ++i) {
    ArmId best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const Context& x : ctx.contexts[i]) {
      const auto n = table_.count(x);
      const double score =
          n == 0 ? std::numeric_limits<double>::infinity()
                 : table_.mean(x) + bonus_scale_ * std::sqrt(2.0 * log_t / static_cast<double>(n));
      if (best < 0 || score > best_score) {
        best = x.arm;
        best_score = score;
      }
    }
    out.serving.push_back(best);
  }
  return out;
}

std::vector<SyncRecord> HypercubePolicy::feedback(const DecisionContext& ctx, const Feedback& fb) {
  for (std::size_t i = 0; i < ctx.snapshot->size(); ++i) table_.update(fb.chosen[i], fb.rewards[i]);
  return {};
}

// ---------------------------------------------------------------------------
// Random

AssociationVector random_association(const Snapshot& snap, std::mt19937_64& rng) {
  AssociationVector out;
  for (const auto& c : snap.candidates) {
    if (c.empty()) throw std::invalid_argument("vehicle has no candidate station");
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    out.serving.push_back(c[pick(rng)]);
  }
  return out;
}

AssociationVector RandomPolicy::decide(const DecisionContext& ctx) {
  return random_association(*ctx.snapshot, rng_);
}

// ---------------------------------------------------------------------------
// WCS and brute force

AssociationVector greedy_association(const Snapshot& snap) {
  AssociationVector out;
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const auto& c = snap.candidates[i];
    if (c.empty()) throw std::invalid_argument("vehicle has no candidate station");
    ArmId best = c.front();
    for (const ArmId j : c) {
      if (snap.gain(static_cast<Eigen::Index>(i), j) >
          snap.gain(static_cast<Eigen::Index>(i), best)) {
        best = j;
      }
    }
    out.serving.push_back(best);
  }
  return out;
}

WcsResult wcs(const Snapshot& snap, int max_iters) {
  if (max_iters < 0) throw std::invalid_argument("wcs max_iters must be >= 0");
  WcsResult res;
  res.assoc = greedy_association(snap);
  res.total_rate = total_rate(snap, res.assoc);
  res.history.push_back(res.total_rate);

  while (res.iterations < max_iters) {
    std::vector<double> rates(snap.size());
    for (std::size_t i = 0; i < snap.size(); ++i) {
      rates[i] = rate(snap, i, res.assoc.serving[i], res.assoc);
    }
    std::vector<std::size_t> order(snap.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rates[a] < rates[b]; });

    bool moved = false;
    for (const std::size_t i : order) {
      const ArmId current = res.assoc.serving[i];
      ArmId best = current;
      double best_total = res.total_rate;
      for (const ArmId j : snap.candidates[i]) {
        if (j == current) continue;
        AssociationVector trial = res.assoc;
        trial.serving[i] = j;
        const double t = total_rate(snap, trial);
        if (t > best_total) {
          best = j;
          best_total = t;
        }
      }
      if (best != current) {
        res.assoc.serving[i] = best;
        res.total_rate = best_total;
        res.history.push_back(best_total);
        ++res.iterations;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return res;
}

OptimumResult brute_force_optimum(const Snapshot& snap, BruteForceLimits limits) {
  if (snap.size() > limits.max_vehicles || snap.stations > limits.max_stations) {
    throw std::invalid_argument("instance too large for exhaustive search (" +
                                std::to_string(snap.size()) + " vehicles, " +
                                std::to_string(snap.stations) + " stations)");
  }
  for (const auto& c : snap.candidates) {
    if (c.empty()) throw std::invalid_argument("vehicle has no candidate station");
  }
  OptimumResult best;
  best.total_rate = -1.0;
  std::vector<std::size_t> digit(snap.size(), 0);
  AssociationVector trial;
  trial.serving.resize(snap.size());
  while (true) {
    for (std::size_t i = 0; i < snap.size(); ++i) trial.serving[i] = snap.candidates[i][digit[i]];
    const double t = total_rate(snap, trial);
    if (t > best.total_rate) best = {trial, t};
    // odometer with the last row varying fastest
    std::size_t pos = snap.size();
    while (pos > 0) {
      --pos;
      if (++digit[pos] < snap.candidates[pos].size()) break;
      digit[pos] = 0;
      if (pos == 0) return best;
    }
    if (snap.size() == 0) return best;
  }
}

AssociationVector WcsPolicy::decide(const DecisionContext& ctx) {
  return wcs(*ctx.snapshot, max_iters_).assoc;
}

AssociationVector BruteForcePolicy::decide(const DecisionContext& ctx) {
  return brute_force_optimum(*ctx.snapshot, limits_).assoc;
}

}  // namespace dkucb
