#include <gtest/gtest.h>

#include <cmath>

#include "stst/detail/moments.hpp"
#include "stst/simulator.hpp"

namespace stst::sim {
namespace {

TEST(Walk, GaussianMoments) {
  WalkSpec spec;
  spec.n = 50;
  spec.step = Gaussian{2.0};
  spec.drift = 0.05;
  spec.seed = 17;
  const std::size_t trials = 100000;
  stst::detail::RunningMoments m;
  for (std::size_t t = 0; t < trials; ++t) m.add(simulate_walk(spec, t).back());
  const double mean = 50 * 0.05, var = 50 * 4.0;
  EXPECT_LE(std::abs(m.mean - mean), 3.0 * std::sqrt(var / trials));
  EXPECT_LE(std::abs(m.sample_variance() - var), 3.0 * var * std::sqrt(2.0 / (trials - 1)));
}

TEST(Walk, RademacherSingleStep) {
  WalkSpec spec;
  spec.n = 1;
  spec.step = Rademacher{1.0};
  int plus = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    const auto p = simulate_walk(spec, t);
    ASSERT_EQ(p.size(), 1u);
    ASSERT_TRUE(p[0] == 1.0 || p[0] == -1.0);
    plus += p[0] > 0;
  }
  EXPECT_GT(plus, 400);
  EXPECT_LT(plus, 600);
}

TEST(Walk, UniformStepsBounded) {
  WalkSpec spec;
  spec.n = 200;
  spec.step = UniformSym{0.5};
  spec.drift = 1.0;
  const auto p = simulate_walk(spec, 3);
  double prev = 0.0;
  for (double s : p) {
    EXPECT_GE(s - prev, 0.5);
    EXPECT_LE(s - prev, 1.5);
    prev = s;
  }
  EXPECT_DOUBLE_EQ(spec.step_variance(), 0.25 / 3.0);
  EXPECT_DOUBLE_EQ(spec.step_bound(), 1.5);
}

TEST(Walk, Deterministic) {
  WalkSpec spec;
  spec.seed = 5;
  EXPECT_EQ(simulate_walk(spec, 2), simulate_walk(spec, 2));
  EXPECT_NE(simulate_walk(spec, 2), simulate_walk(spec, 3));
}

TEST(Walk, InvalidSpec) {
  WalkSpec spec;
  spec.step = Gaussian{0.0};
  EXPECT_THROW(simulate_walk(spec), DomainError);
  spec.step = Gaussian{1.0};
  spec.n = 0;
  EXPECT_THROW(simulate_walk(spec), DomainError);
}

WalkSpec unit_bridge_spec(std::size_t n = 2000) {
  WalkSpec spec;
  spec.n = n;
  spec.step = Gaussian{1.0 / std::sqrt(static_cast<double>(n))};
  spec.seed = 101;
  return spec;
}

TEST(Bridge, MatchesClosedForm) {
  const auto spec = unit_bridge_spec();
  BridgeOptions opts;
  opts.trials = 20000;
  const std::vector<double> taus{0.5, 1.0, 1.5, 2.0};
  const auto est = empirical_bridge_crossing(spec, taus, 0.0, opts);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double closed = crossing_probability(taus[k], 0.0, 1.0);
    EXPECT_EQ(est[k].accepted, opts.trials);
    EXPECT_LE(std::abs(est[k].probability_hat - closed),
              std::max(0.02, 4.0 * est[k].standard_error))
        << "tau " << taus[k];
  }
}

TEST(Bridge, NonzeroThetaMatchesClosedForm) {
  const auto spec = unit_bridge_spec(1000);
  BridgeOptions opts;
  opts.trials = 20000;
  const auto e = empirical_bridge_crossing(spec, 0.8, -0.5, opts);
  EXPECT_LE(std::abs(e.probability_hat - crossing_probability(0.8, -0.5, 1.0)),
            std::max(0.02, 4.0 * e.standard_error));
}

TEST(Bridge, UnreachableTauGivesZero) {
  const auto spec = unit_bridge_spec(100);
  BridgeOptions opts;
  opts.trials = 2000;
  EXPECT_EQ(empirical_bridge_crossing(spec, 50.0, 0.0, opts).probability_hat, 0.0);
}

TEST(Bridge, ScaleInvarianceIsExact) {
  auto spec = unit_bridge_spec(300);
  BridgeOptions opts;
  opts.trials = 3000;
  for (auto mode : {BridgeMode::ExactBridge, BridgeMode::Rejection}) {
    opts.mode = mode;
    const auto a = empirical_bridge_crossing(spec, 1.0, 0.0, opts);
    auto scaled = spec;
    scaled.step = Gaussian{4.0 * std::get<Gaussian>(spec.step).std};
    const auto b = empirical_bridge_crossing(scaled, 4.0, 0.0, opts);
    EXPECT_EQ(a.probability_hat, b.probability_hat);
    EXPECT_EQ(a.accepted, b.accepted);
  }
}

TEST(Bridge, EstimatesNestInTau) {
  const auto spec = unit_bridge_spec(300);
  BridgeOptions opts;
  opts.trials = 5000;
  std::vector<double> taus;
  for (int k = 1; k <= 30; ++k) taus.push_back(0.1 * k);
  const auto est = empirical_bridge_crossing(spec, taus, 0.0, opts);
  for (std::size_t k = 1; k < est.size(); ++k)
    EXPECT_LE(est[k].probability_hat, est[k - 1].probability_hat);
}

TEST(Bridge, RejectionAgreesWithExact) {
  const auto spec = unit_bridge_spec(500);
  BridgeOptions exact;
  exact.trials = 20000;
  BridgeOptions rej = exact;
  rej.mode = BridgeMode::Rejection;
  rej.trials = 60000;
  const auto a = empirical_bridge_crossing(spec, 1.0, 0.0, exact);
  const auto b = empirical_bridge_crossing(spec, 1.0, 0.0, rej);
  EXPECT_LT(b.accepted, b.trials_used);
  EXPECT_GT(b.accepted, 1000u);
  const double se = std::hypot(a.standard_error, b.standard_error);
  EXPECT_LE(std::abs(a.probability_hat - b.probability_hat), 3.0 * se);
}

TEST(Bridge, RejectionWorksForBoundedSteps) {
  WalkSpec spec;
  spec.n = 400;
  spec.step = Rademacher{0.05};  // var(S_n) = 1
  spec.seed = 9;
  BridgeOptions opts;
  opts.mode = BridgeMode::Rejection;
  // Endpoints sit on a 0.1 lattice; a band edge on a lattice point would let
  // rounding decide acceptance. 0.05 keeps only S_n = 0.
  opts.band = 0.05;
  opts.trials = 60000;
  const auto e = empirical_bridge_crossing(spec, 1.0, 0.0, opts);
  EXPECT_LE(std::abs(e.probability_hat - crossing_probability(1.0, 0.0, 1.0)),
            std::max(0.02, 4.0 * e.standard_error));
}

TEST(Bridge, DeterministicAcrossThreads) {
  const auto spec = unit_bridge_spec(200);
  BridgeOptions opts;
  opts.trials = 4000;
  const double taus[] = {0.5, 1.0};
  const auto a = empirical_bridge_crossing(spec, taus, 0.0, opts);
  opts.threads = 3;
  const auto b = empirical_bridge_crossing(spec, taus, 0.0, opts);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(a[k].probability_hat, b[k].probability_hat);
}

TEST(Bridge, Errors) {
  auto spec = unit_bridge_spec(100);
  BridgeOptions opts;
  opts.trials = 10;
  EXPECT_THROW(empirical_bridge_crossing(spec, 0.0, 0.0, opts), DomainError);
  opts.mode = BridgeMode::Rejection;
  opts.band = 1e-12;
  EXPECT_THROW(empirical_bridge_crossing(spec, 1.0, 0.0, opts), InsufficientAcceptanceError);
  spec.drift = 0.1;
  EXPECT_THROW(empirical_bridge_crossing(spec, 1.0, 0.0, opts), DomainError);
  spec.drift = 0.0;
  spec.step = Rademacher{1.0};
  opts.mode = BridgeMode::ExactBridge;
  EXPECT_THROW(empirical_bridge_crossing(spec, 1.0, 0.0, opts), DomainError);
}

TEST(StopError, MatchesInequalityClosedForm) {
  const auto spec = unit_bridge_spec();
  const double deltas[] = {0.05, 0.1, 0.2};
  const auto est = empirical_stop_error(spec, deltas, 0.0, 20000);
  for (const auto& e : est) {
    // Under S_n < 0 the continuous-limit rate is 2 Q(2 tau / sigma).
    const double closed = 2.0 * (1.0 - detail::normal_cdf(2.0 * e.tau));
    EXPECT_NEAR(e.inequality_closed_form, closed, 1e-12);
    EXPECT_LE(std::abs(e.estimate.probability_hat - closed),
              std::max(0.01, 4.0 * e.estimate.standard_error))
        << "delta " << e.delta;
  }
  EXPECT_LT(est[0].estimate.probability_hat, est[1].estimate.probability_hat);
  EXPECT_LT(est[1].estimate.probability_hat, est[2].estimate.probability_hat);
}

TEST(StopError, DeltaOneMeansZeroBoundary) {
  const auto spec = unit_bridge_spec();
  const auto e = empirical_stop_error(spec, 1.0, 0.0, 5000);
  EXPECT_EQ(e.tau, 0.0);
  EXPECT_GT(e.estimate.probability_hat, 0.9);
}

TEST(StopError, Errors) {
  auto spec = unit_bridge_spec(10);
  spec.drift = 1.0;
  EXPECT_THROW(empirical_stop_error(spec, 0.1, 0.0, 100), DomainError);
  spec.drift = 0.0;
  EXPECT_THROW(empirical_stop_error(spec, 0.1, -100.0, 100), InsufficientAcceptanceError);
}

TEST(StoppingTime, ImmediateCrossing) {
  WalkSpec spec;
  spec.n = 4;
  spec.step = Rademacher{1.0};
  spec.drift = 2.0;
  const auto r = empirical_stopping_time(spec, 0.9, 1000);
  EXPECT_LE(r.tau, 1.0);
  EXPECT_EQ(r.mean_time, 1.0);
  EXPECT_EQ(r.max_time, 1u);
  EXPECT_EQ(r.censored_fraction, 0.0);
}

TEST(StoppingTime, WaldIdentity) {
  WalkSpec spec;
  spec.n = 1000;
  spec.step = UniformSym{1.0};
  spec.drift = 0.1;
  spec.seed = 4;
  const auto r = empirical_stopping_time(spec, 0.1, 20000);
  EXPECT_LE(std::abs(r.wald_residual), 3.0 * r.wald_residual_stderr);
  EXPECT_LE(r.mean_time, r.bound);
  EXPECT_LE(r.min_time, r.median_time);
  EXPECT_LE(r.median_time, r.max_time);
  EXPECT_LE(r.max_time, spec.n);
}

TEST(StoppingTime, DeterministicAcrossThreads) {
  WalkSpec spec;
  spec.n = 500;
  spec.step = Rademacher{1.0};
  spec.drift = 0.2;
  const auto a = empirical_stopping_time(spec, 0.1, 3000, 1);
  const auto b = empirical_stopping_time(spec, 0.1, 3000, 4);
  EXPECT_EQ(a.mean_time, b.mean_time);
  EXPECT_EQ(a.wald_residual, b.wald_residual);
}

TEST(StoppingTime, Errors) {
  WalkSpec spec;
  EXPECT_THROW(empirical_stopping_time(spec, 0.1, 100), DomainError);
  spec.drift = 0.1;
  EXPECT_THROW(empirical_stopping_time(spec, 0.1, 1), DomainError);
}

TEST(LogLogSlope, RecoversPowerLaw) {
  const double xs[] = {10.0, 100.0, 1000.0};
  const double ys[] = {3.0 * std::sqrt(10.0), 3.0 * 10.0, 3.0 * std::sqrt(1000.0)};
  EXPECT_NEAR(loglog_slope(xs, ys), 0.5, 1e-12);
  const double bad[] = {1.0, -1.0, 2.0};
  EXPECT_THROW(loglog_slope(xs, bad), DomainError);
}

}  // namespace
}  // namespace stst::sim
