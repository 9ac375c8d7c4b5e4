#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dkucb/bandit.hpp"
#include "dkucb/kinematics.hpp"
#include "support.hpp"

using namespace dkucb;

namespace {

KernelParams psd_params() {
  KernelParams p;
  p.angle = AngleKernel::cos4_half;
  return p;
}

std::vector<Sample> random_samples(std::mt19937_64& rng, std::size_t n, ArmId arm) {
  std::uniform_real_distribution<double> reward(0.0, 2e8);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Context c = testing::random_context(rng, 1);
    c.arm = arm;
    out.push_back({c, reward(rng), {1, static_cast<Period>(i), arm}});
  }
  return out;
}

}  // namespace

TEST_CASE("sample store") {
  SampleStore s;
  const Context x = make_context(2, 0.1, 10, 1, 0);
  s.record(x, 1.0, 7, 1);
  CHECK(s.size(2) == 1);
  CHECK(s.total_size() == 1);
  CHECK_THROWS_AS(s.record(x, 2.0, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(s.record(x, -1.0, 7, 2), std::invalid_argument);
  CHECK_THROWS_AS(s.record(x, NAN, 7, 3), std::invalid_argument);
  CHECK_FALSE(s.merge({x, 1.0, {7, 1, 2}}));
  CHECK(s.merge({x, 3.0, {8, 1, 2}}));
  CHECK(s.size(2) == 2);

  SampleStore big;
  for (int i = 0; i < 1000; ++i) big.record(make_context(0, 0.0, i, 0, 0), i, 1, i);
  REQUIRE(big.size(0) == 1000);
  const auto all = big.samples(0);
  for (int i = 0; i < 1000; ++i) CHECK(all[static_cast<std::size_t>(i)].reward == i);

  CHECK(big.snapshot(0) == 0);
  big.set_snapshot(0, 10);
  CHECK(big.snapshot(0) == 10);
  CHECK_THROWS_AS(big.set_snapshot(0, 1001), std::out_of_range);
}

TEST_CASE("estimator worked examples") {
  KernelParams p;
  const Context x = make_context(0, 1.0, 100, 50, 2);
  const auto empty = estimate(x, std::vector<Sample>{}, p);
  CHECK(empty.mu == 0.0);
  CHECK(empty.sigma == 1.0);

  const std::vector<Sample> one{{x, 5.0, {1, 1, 0}}};
  const auto e = estimate(x, one, p);
  CHECK(e.mu == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(e.sigma == doctest::Approx(0.7071067811865476).epsilon(1e-14));

  p.lambda_k = 4.0;
  CHECK(estimate(x, std::vector<Sample>{}, p).sigma == doctest::Approx(0.5));

  Context other = x;
  other.arm = 1;
  CHECK_THROWS_AS(estimate(other, one, KernelParams{}), std::invalid_argument);
}

TEST_CASE("estimator matches a dense Gaussian-elimination solve") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    KernelParams p = psd_params();
    p.sigma_L = testing::log_uniform(rng, 5, 500);
    p.sigma_f = testing::log_uniform(rng, 20, 2000);
    p.lambda_k = testing::log_uniform(rng, 0.1, 10);
    const auto samples = random_samples(rng, 1 + rng() % 30, 0);
    Context x = testing::random_context(rng, 1);
    const auto k = composite_kernel(p);
    const auto got = estimate(x, samples, p);
    const auto want = testing::ref_estimate(x, samples, k, p.lambda_k);
    CHECK(testing::close_rel(got.mu, want.mu, 1e-8, 1e-6));
    CHECK(testing::close_rel(got.sigma, want.sigma, 1e-8, 1e-12));
  }
}

TEST_CASE("incremental arm model matches the from-scratch estimator") {
  std::mt19937_64 rng(4);
  const KernelParams p = psd_params();
  ArmModel model(composite_kernel(p), p.lambda_k, p.jitter);
  std::vector<Sample> seen;
  for (const auto& s : random_samples(rng, 40, 0)) {
    CHECK(model.add(s.context, s.reward));
    seen.push_back(s);
    const Context q = testing::random_context(rng, 1);
    const auto a = model.query(q);
    const auto b = estimate(q, seen, p);
    CHECK(testing::close_rel(a.mu, b.mu, 1e-8, 1e-6));
    CHECK(testing::close_rel(a.sigma, b.sigma, 1e-8, 1e-12));
  }
  std::vector<Context> ctx;
  for (const auto& s : seen) ctx.push_back(s.context);
  CHECK(model.logdet_ridge() ==
        doctest::Approx(logdet_ridge(build_kernel_matrix(ctx, p), p.lambda_k)).epsilon(1e-9));
  CHECK(model.logdet_ridge_prefix(0) == 0.0);
}

TEST_CASE("arm model skips a sample that makes the system indefinite") {
  // A kernel that is not positive semi-definite: k(a, b) = 3 off the diagonal.
  KernelFunction bad = [](const Context& a, const Context& b) { return a == b ? 1.0 : 3.0; };
  ArmModel model(bad, 1.0);
  CHECK(model.add(make_context(0, 0.0, 1, 0, 0), 1.0));
  CHECK_FALSE(model.add(make_context(0, 0.0, 2, 0, 0), 1.0));
  CHECK(model.size() == 1);
  CHECK(model.rejected() == 1);
  CHECK(model.query(make_context(0, 0.0, 1, 0, 0)).mu == doctest::Approx(0.5));
}

TEST_CASE("recording a sample shrinks the width at that context") {
  std::mt19937_64 rng(21);
  const KernelParams p = psd_params();
  for (int trial = 0; trial < 50; ++trial) {
    auto samples = random_samples(rng, rng() % 20, 0);
    const Context x = testing::random_context(rng, 1);
    const double before = estimate(x, samples, p).sigma;
    samples.push_back({x, 1e6, {2, trial, 0}});
    CHECK(estimate(x, samples, p).sigma < before);
  }
}

TEST_CASE("estimator scaling and zero rewards") {
  std::mt19937_64 rng(31);
  const KernelParams p = psd_params();
  auto samples = random_samples(rng, 15, 0);
  const Context x = testing::random_context(rng, 1);
  const auto base = estimate(x, samples, p);
  auto scaled = samples;
  for (auto& s : scaled) s.reward *= 3.5;
  const auto e = estimate(x, scaled, p);
  CHECK(e.mu == doctest::Approx(3.5 * base.mu).epsilon(1e-10));
  CHECK(e.sigma == doctest::Approx(base.sigma).epsilon(1e-14));
  for (auto& s : samples) s.reward = 0.0;
  CHECK(estimate(x, samples, p).mu == 0.0);
  CHECK(estimate(x, samples, p).sigma >= 0.0);
}

TEST_CASE("UCB selection") {
  const Context a = make_context(0, 0.0, 100, 0, 1);
  const Context b = make_context(1, 0.0, 100, 0, 1);
  std::vector<ArmScore> scores{{a, {}, 2.5}, {b, {}, 3.0}};
  CHECK(argmax_ucb(scores) == 1);
  scores[0].ucb = 3.0;
  CHECK(argmax_ucb(scores) == 0);
  std::vector<ArmScore> reversed{{b, {}, 3.0}, {a, {}, 3.0}};
  CHECK(argmax_ucb(reversed) == 1);
  CHECK_THROWS_AS(argmax_ucb(std::vector<ArmScore>{}), std::invalid_argument);

  // All arms unexplored with equal contexts: lowest id.
  SampleStore empty;
  AgentConfig cfg;
  const std::vector<Context> cands{make_context(2, 0, 50, 0, 0), make_context(1, 0, 50, 0, 0),
                                   make_context(3, 0, 50, 0, 0)};
  CHECK(select_arm(cands, empty, cfg, KernelParams{}).arm == 1);
  CHECK_THROWS_AS(select_arm(std::vector<Context>{}, empty, cfg, KernelParams{}),
                  std::invalid_argument);

  // alpha = 0: a sampled high-reward arm beats an unexplored arm (prior mean 0).
  SampleStore store;
  for (int t = 0; t < 5; ++t) store.record(a, 1e8, 1, t);
  cfg.alpha = 0.0;
  const std::vector<Context> two{a, b};
  CHECK(select_arm(two, store, cfg, KernelParams{}).arm == 0);
  // With a large alpha the unexplored arm's width wins.
  cfg.alpha = 1e9;
  CHECK(select_arm(two, store, cfg, KernelParams{}).arm == 1);
}

TEST_CASE("theoretical exploration weight") {
  AgentConfig cfg;
  cfg.alpha_mode = AlphaMode::theoretical;
  cfg.theory = {2.0, 0.5, 0.1, 100.0};
  const double expected = std::sqrt(4.0) * 2.0 + 0.5 * std::sqrt(4.0 * std::log(1000.0) + 2.0 * 3.0);
  CHECK(cfg.exploration_weight(3.0, 4.0) == doctest::Approx(expected));
  cfg.theory.delta = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("agent selection agrees with the from-scratch path") {
  std::mt19937_64 rng(55);
  const KernelParams p = psd_params();
  AgentConfig cfg;
  cfg.alpha = 3e7;
  Agent agent(1, composite_kernel(p), p.lambda_k, p.jitter, cfg);
  for (int t = 1; t <= 60; ++t) {
    const auto cands = testing::random_contexts(rng, 3, 3);
    std::vector<Context> distinct;
    for (const auto& c : cands) {
      bool dup = false;
      for (const auto& d : distinct) dup = dup || d.arm == c.arm;
      if (!dup) distinct.push_back(c);
    }
    const Context chosen = agent.select(distinct);
    CHECK(chosen == select_arm(distinct, agent.store(), cfg, p));
    agent.record(chosen, std::uniform_real_distribution<double>(0, 2e8)(rng), t);
  }
}

TEST_CASE("candidate set and context extraction") {
  const std::vector<BaseStation> stations{{0, {0, 0}}, {1, {600, 0}}};
  const auto none = [](ArmId) { return 0; };
  const auto c = candidate_set({300, 0}, {10, 0}, stations, 500, none, 0.01);
  REQUIRE(c.size() == 2);
  const auto far = candidate_set({-300, 0}, {10, 0}, stations, 500, none, 0.01);
  REQUIRE(far.size() == 1);
  CHECK(far[0].arm == 0);

  // Due east of the station and driving straight at it.
  const Context radial = extract_context({300, 0}, {-15, 0}, stations[0], 3, 0.01);
  CHECK(radial.theta == doctest::Approx(0.0));
  CHECK(radial.dist == doctest::Approx(300.0));
  CHECK(radial.doppler == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(radial.n_tx == 3);
  // Circular motion around the station: fully tangential.
  const Context tangential = extract_context({0, 200}, {-20, 0}, stations[0], 0, 0.01);
  CHECK(tangential.theta == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(tangential.doppler == doctest::Approx(2000.0));
  const Vec2 back = context_location(tangential, stations[0].position);
  CHECK(back.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(back.y == doctest::Approx(200.0));
}
