#include "dkucb/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dkucb {

namespace {

void check_reward(double reward) {
  if (!std::isfinite(reward) || reward < 0.0) {
    throw std::invalid_argument("reward must be finite and >= 0, got " + std::to_string(reward));
  }
}

double confidence_width(double prior, double explained, double lambda_k) {
  // round-off can push the radicand slightly below zero
  return std::sqrt(std::max(prior - explained, 0.0)) / std::sqrt(lambda_k);
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleStore

void SampleStore::record(const Context& x, double reward, VehicleId vehicle, Period period) {
  check_reward(reward);
  const SampleOrigin key{vehicle, period, x.arm};
  if (!keys_.insert(key).second) {
    throw std::invalid_argument("sample already recorded for this vehicle, period and arm");
  }
  arms_[x.arm].samples.push_back(Sample{x, reward, key});
}

bool SampleStore::merge(const Sample& s) {
  check_reward(s.reward);
  if (s.origin.arm != s.context.arm) {
    throw std::invalid_argument("sample origin arm does not match its context");
  }
  if (!keys_.insert(s.origin).second) return false;
  arms_[s.context.arm].samples.push_back(s);
  return true;
}

std::span<const Sample> SampleStore::samples(ArmId arm) const {
  const auto it = arms_.find(arm);
  if (it == arms_.end()) return {};
  return it->second.samples;
}

std::vector<Context> SampleStore::contexts(ArmId arm, std::size_t from) const {
  const auto all = samples(arm);
  std::vector<Context> out;
  for (std::size_t i = from; i < all.size(); ++i) out.push_back(all[i].context);
  return out;
}

std::size_t SampleStore::size(ArmId arm) const { return samples(arm).size(); }

std::vector<ArmId> SampleStore::arms() const {
  std::vector<ArmId> out;
  for (const auto& [arm, _] : arms_) out.push_back(arm);
  return out;
}

std::size_t SampleStore::snapshot(ArmId arm) const {
  const auto it = arms_.find(arm);
  return it == arms_.end() ? 0 : it->second.snapshot;
}

void SampleStore::set_snapshot(ArmId arm, std::size_t index) {
  if (index > size(arm)) throw std::out_of_range("snapshot index beyond store size");
  arms_[arm].snapshot = index;
}

// ---------------------------------------------------------------------------
// From-scratch estimator

Estimate estimate(const Context& x, std::span<const Sample> samples, const KernelFunction& k,
                  double lambda_k, double jitter) {
  const double prior = k(x, x);
  if (samples.empty()) return {0.0, confidence_width(prior, 0.0, lambda_k)};

  std::vector<Context> contexts;
  contexts.reserve(samples.size());
  Eigen::VectorXd rewards(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].context.arm != x.arm) {
      throw std::invalid_argument("estimate: sample arm differs from the query arm");
    }
    contexts.push_back(samples[i].context);
    rewards(static_cast<Eigen::Index>(i)) = samples[i].reward;
  }

  Eigen::MatrixXd gram = build_kernel_matrix(contexts, k).entries;
  gram.diagonal().array() += lambda_k;
  const auto llt = factorize_spd(gram, jitter);
  const Eigen::VectorXd cross = kernel_vector(x, contexts, k);
  const Eigen::VectorXd weights = llt.solve(rewards);
  const Eigen::VectorXd half = llt.matrixL().solve(cross);
  return {cross.dot(weights), confidence_width(prior, half.squaredNorm(), lambda_k)};
}

Estimate estimate(const Context& x, std::span<const Sample> samples, const KernelParams& p) {
  return estimate(x, samples, composite_kernel(p), p.lambda_k, p.jitter);
}

// ---------------------------------------------------------------------------
// Arm selection

void AgentConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be > 0");
  if (alpha_mode == AlphaMode::theoretical) {
    if (!(theory.delta > 0.0 && theory.delta < 1.0)) {
      throw std::invalid_argument("theory.delta must lie in (0, 1)");
    }
    if (!(theory.horizon >= 1.0)) throw std::invalid_argument("theory.horizon must be >= 1");
    if (theory.theta_norm < 0.0 || theory.noise_scale < 0.0) {
      throw std::invalid_argument("theory.theta_norm and theory.noise_scale must be >= 0");
    }
  }
}

double AgentConfig::exploration_weight(double arm_logdet, double lambda_k) const {
  if (alpha_mode == AlphaMode::fixed) return alpha;
  const double radicand =
      4.0 * std::log(theory.horizon / theory.delta) + 2.0 * std::max(arm_logdet, 0.0);
  return std::sqrt(lambda_k) * theory.theta_norm + theory.noise_scale * std::sqrt(radicand);
}

std::size_t argmax_ucb(std::span<const ArmScore> scores) {
  if (scores.empty()) throw std::invalid_argument("no candidate base station within range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& s = scores[i];
    const auto& b = scores[best];
    if (s.ucb > b.ucb || (s.ucb == b.ucb && s.context.arm < b.context.arm)) best = i;
  }
  return best;
}

Context select_arm(std::span<const Context> candidates, const SampleStore& store,
                   const AgentConfig& cfg, const KernelParams& p) {
  std::vector<ArmScore> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto samples = store.samples(c.arm);
    const Estimate e = estimate(c, samples, p);
    double arm_logdet = 0.0;
    if (cfg.alpha_mode == AlphaMode::theoretical) {
      arm_logdet = logdet_ridge(build_kernel_matrix(store.contexts(c.arm), p), p.lambda_k, p.jitter);
    }
    scores.push_back({c, e, e.mu + cfg.exploration_weight(arm_logdet, p.lambda_k) * e.sigma});
  }
  return scores[argmax_ucb(scores)].context;
}

std::vector<Context> candidate_set(Vec2 position, Vec2 velocity,
                                   std::span<const BaseStation> stations, double r_max,
                                   const std::function<int(ArmId)>& n_tx_of, double wavelength) {
  std::vector<Context> out;
  for (const auto& bs : stations) {
    if (distance(position, bs.position) < r_max) {
      out.push_back(extract_context(position, velocity, bs, n_tx_of(bs.id), wavelength));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Incremental models

ArmModel::ArmModel(KernelFunction kernel, double lambda_k, double jitter)
    : kernel_(std::move(kernel)), lambda_(lambda_k), factor_(jitter) {}

bool ArmModel::add(const Context& x, double reward) {
  check_reward(reward);
  std::vector<double> column(contexts_.size());
  for (std::size_t i = 0; i < contexts_.size(); ++i) column[i] = kernel_(x, contexts_[i]);
  try {
    factor_.append(column, kernel_(x, x) + lambda_);
  } catch (const NotPositiveDefinite&) {
    ++rejected_;
    return false;
  }
  contexts_.push_back(x);
  rewards_.push_back(reward);
  stale_ = true;
  return true;
}

void ArmModel::refresh_weights() const {
  weights_.resize(rewards_.size());
  factor_.forward_solve(rewards_, weights_);
  factor_.backward_solve(weights_);
  stale_ = false;
}

Estimate ArmModel::query(const Context& x) const {
  const double prior = kernel_(x, x);
  if (contexts_.empty()) return {0.0, confidence_width(prior, 0.0, lambda_)};
  if (stale_) refresh_weights();
  const std::size_t n = contexts_.size();
  std::vector<double> cross(n);
  for (std::size_t i = 0; i < n; ++i) cross[i] = kernel_(x, contexts_[i]);
  const double mu = std::inner_product(cross.begin(), cross.end(), weights_.begin(), 0.0);
  std::vector<double> half(n);
  factor_.forward_solve(cross, half);
  const double explained = std::inner_product(half.begin(), half.end(), half.begin(), 0.0);
  return {mu, confidence_width(prior, explained, lambda_)};
}

double ArmModel::logdet_ridge_prefix(std::size_t m) const {
  // factor holds K + lambda I; det(I + K/lambda) = det(K + lambda I) / lambda^m
  return std::max(factor_.logdet_prefix(m) - static_cast<double>(m) * std::log(lambda_), 0.0);
}

InformationTracker::InformationTracker(KernelFunction kernel, double lambda_k, double jitter)
    : kernel_(std::move(kernel)), lambda_(lambda_k), factor_(jitter) {}

bool InformationTracker::add(const Context& x) {
  std::vector<double> column(contexts_.size());
  for (std::size_t i = 0; i < contexts_.size(); ++i) column[i] = kernel_(x, contexts_[i]);
  try {
    factor_.append(column, kernel_(x, x) + lambda_);
  } catch (const NotPositiveDefinite&) {
    return false;
  }
  contexts_.push_back(x);
  return true;
}

void InformationTracker::clear() {
  factor_.clear();
  contexts_.clear();
}

double InformationTracker::logdet_ridge() const {
  const double m = static_cast<double>(contexts_.size());
  return std::max(factor_.logdet() - m * std::log(lambda_), 0.0);
}

// ---------------------------------------------------------------------------
// Agent

Agent::Agent(VehicleId id, KernelFunction kernel, double lambda_k, double jitter, AgentConfig cfg)
    : id_(id), kernel_(std::move(kernel)), lambda_(lambda_k), jitter_(jitter), cfg_(cfg) {
  cfg_.validate();
}

std::vector<ArmScore> Agent::score(std::span<const Context> candidates) const {
  std::vector<ArmScore> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    const ArmModel* m = model(c.arm);
    Estimate e;
    double arm_logdet = 0.0;
    if (m != nullptr) {
      e = m->query(c);
      arm_logdet = m->logdet_ridge();
    } else {
      e = {0.0, confidence_width(kernel_(c, c), 0.0, lambda_)};
    }
    scores.push_back({c, e, e.mu + cfg_.exploration_weight(arm_logdet, lambda_) * e.sigma});
  }
  return scores;
}

Context Agent::select(std::span<const Context> candidates) const {
  const auto scores = score(candidates);
  return scores[argmax_ucb(scores)].context;
}

void Agent::record(const Context& x, double reward, Period t) {
  store_.record(x, reward, id_, t);
  model_for(x.arm).add(x, reward);
  fresh_for(x.arm).add(x);
}

bool Agent::absorb(const Sample& s) {
  if (!store_.merge(s)) return false;
  model_for(s.context.arm).add(s.context, s.reward);
  return true;
}

const ArmModel* Agent::model(ArmId arm) const {
  const auto it = models_.find(arm);
  return it == models_.end() ? nullptr : &it->second;
}

const InformationTracker* Agent::fresh(ArmId arm) const {
  const auto it = fresh_.find(arm);
  return it == fresh_.end() ? nullptr : &it->second;
}

void Agent::mark_synchronized(ArmId arm) {
  store_.set_snapshot(arm, store_.size(arm));
  fresh_for(arm).clear();
  const ArmModel* m = model(arm);
  synced_model_size_[arm] = m == nullptr ? 0 : m->size();
}

std::size_t Agent::synchronized_model_size(ArmId arm) const {
  const auto it = synced_model_size_.find(arm);
  return it == synced_model_size_.end() ? 0 : it->second;
}

std::size_t Agent::model_rejections() const {
  std::size_t n = 0;
  for (const auto& [_, m] : models_) n += m.rejected();
  return n;
}

ArmModel& Agent::model_for(ArmId arm) {
  return models_.try_emplace(arm, kernel_, lambda_, jitter_).first->second;
}

InformationTracker& Agent::fresh_for(ArmId arm) {
  return fresh_.try_emplace(arm, kernel_, lambda_, jitter_).first->second;
}

}  // namespace dkucb
