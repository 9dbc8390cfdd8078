#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stst/detail/random.hpp"
#include "stst/predictor.hpp"

namespace stst {
namespace {

struct Case {
  WeightedModel model;
  std::vector<double> x;
};

// Random linear model with per-term evaluations drawn independently.
Case random_case(std::uint64_t seed, std::size_t max_n = 200) {
  auto eng = detail::make_engine(seed, 0);
  detail::NormalSampler normal;
  const std::size_t n = 1 + detail::uniform_index(eng, max_n);
  std::vector<double> w(n), x(n), mu(n);
  for (auto& c : w) c = normal(eng);
  for (auto& c : x) c = normal(eng);
  for (auto& c : mu) c = 0.2 * normal(eng);
  auto m = WeightedModel::linear(std::move(w), 0.3 * normal(eng));
  m.set_mu(std::move(mu));
  return {std::move(m), std::move(x)};
}

std::vector<double> brute_prefix(const Case& c) {
  std::vector<double> out;
  double s = 0.0;
  for (std::size_t i = 0; i < c.model.size(); ++i) {
    s += c.model.weight(i) * (c.x[i] - c.model.mu(i));
    out.push_back(s);
  }
  return out;
}

TEST(Attentive, FourTermExampleStopsOnStrictCrossing) {
  const auto m = WeightedModel::linear({1.0, 1.0, 1.0, 1.0});
  const std::vector<double> x{-1.0, -1.0, -1.0, -1.0};
  const StoppingRule rule(0.0, -2.0, Direction::RejectBelow);
  const auto p = attentive_predict(m, x, rule);
  EXPECT_EQ(p.label, -1);
  EXPECT_EQ(p.terms_evaluated, 3u);
  EXPECT_EQ(p.reported_score, -2.0);
  EXPECT_TRUE(p.stopped_early);
}

TEST(Attentive, RejectAboveMirror) {
  const auto m = WeightedModel::linear({1.0, 1.0, 1.0, 1.0});
  const std::vector<double> x{1.0, 1.0, 1.0, 1.0};
  const auto p = attentive_predict(m, x, StoppingRule(0.0, 2.0, Direction::RejectAbove));
  EXPECT_EQ(p.label, +1);
  EXPECT_EQ(p.terms_evaluated, 3u);
  EXPECT_EQ(p.reported_score, 2.0);
}

TEST(Attentive, CrossingOnLastTermIsNotAnEarlyStop) {
  const auto m = WeightedModel::linear({1.0, 1.0});
  const std::vector<double> x{0.0, -5.0};
  const auto p = attentive_predict(m, x, StoppingRule(0.0, -1.0, Direction::RejectBelow));
  EXPECT_FALSE(p.stopped_early);
  EXPECT_EQ(p.terms_evaluated, 2u);
  EXPECT_EQ(p.reported_score, -5.0);
  EXPECT_EQ(p.label, -1);
}

TEST(Attentive, UnattainableTauReducesToFull) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto c = random_case(seed);
    const auto never = StoppingRule::never(c.model.theta(), Direction::RejectBelow);
    const auto a = attentive_predict(c.model, c.x, never);
    const auto f = full_predict(c.model, c.x);
    ASSERT_EQ(a, f) << "seed " << seed;
    EXPECT_EQ(a.terms_evaluated, c.model.size());
    const auto never_up = StoppingRule::never(c.model.theta(), Direction::RejectAbove);
    ASSERT_EQ(attentive_predict(c.model, c.x, never_up), f);
  }
}

TEST(Attentive, NoEarlierCrossingThanReported) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto c = random_case(seed);
    const auto prefix = brute_prefix(c);
    const double tau = c.model.theta() - 0.5 - static_cast<double>(seed % 7);
    const StoppingRule rule(c.model.theta(), tau, Direction::RejectBelow);
    const auto p = attentive_predict(c.model, c.x, rule);
    std::size_t expect = prefix.size();
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i)
      if (prefix[i] < tau) {
        expect = i + 1;
        break;
      }
    ASSERT_EQ(p.terms_evaluated, expect) << "seed " << seed;
    for (std::size_t j = 0; j + 1 < p.terms_evaluated; ++j) ASSERT_GE(prefix[j], tau);
    if (p.stopped_early) {
      EXPECT_LT(prefix[p.terms_evaluated - 1], tau);
      EXPECT_EQ(p.reported_score, tau);
      EXPECT_EQ(p.label, -1);
    }
  }
}

TEST(Attentive, MonotoneWorkInTau) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto c = random_case(seed);
    const double theta = c.model.theta();
    std::size_t prev = c.model.size() + 1;
    for (int k = 0; k <= 20; ++k) {
      const double tau = theta - 10.0 + 0.5 * k - 1e-9;
      const auto p = attentive_predict(c.model, c.x, StoppingRule(theta, tau, Direction::RejectBelow));
      ASSERT_LE(p.terms_evaluated, prev) << "seed " << seed << " k " << k;
      prev = p.terms_evaluated;
    }
  }
}

TEST(Attentive, StrideOnlyDelays) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto c = random_case(seed);
    const StoppingRule rule(c.model.theta(), c.model.theta() - 1.0, Direction::RejectBelow);
    const auto base = attentive_predict(c.model, c.x, rule);
    for (std::size_t stride : {2u, 3u, 10u}) {
      const auto p = attentive_predict(c.model, c.x, rule, {stride});
      ASSERT_GE(p.terms_evaluated, base.terms_evaluated);
      if (p.stopped_early) {
        EXPECT_EQ(p.terms_evaluated % stride, 0u);
      } else {
        EXPECT_EQ(p, full_predict(c.model, c.x));
      }
    }
  }
  const auto c = random_case(1);
  EXPECT_THROW(attentive_predict(c.model, c.x, StoppingRule(0.0, -1.0, Direction::RejectBelow), {0}),
               DomainError);
}

TEST(Attentive, TwoSided) {
  const auto m = WeightedModel::linear({1.0, 1.0, 1.0, 1.0});
  const TwoSidedRule rule(StoppingRule(0.0, -1.5, Direction::RejectBelow),
                          StoppingRule(0.0, 1.5, Direction::RejectAbove));
  const std::vector<double> up{1.0, 1.0, -5.0, -5.0};
  const std::vector<double> down{-1.0, -1.0, 5.0, 5.0};
  const std::vector<double> flat{1.0, -1.0, 1.0, -1.0};
  auto p = attentive_predict(m, up, rule);
  EXPECT_EQ(p, (Prediction{+1, 1.5, 2, true}));
  p = attentive_predict(m, down, rule);
  EXPECT_EQ(p, (Prediction{-1, -1.5, 2, true}));
  p = attentive_predict(m, flat, rule);
  EXPECT_EQ(p, (Prediction{+1, 0.0, 4, false}));
  EXPECT_THROW(TwoSidedRule(StoppingRule(0.0, 1.0, Direction::RejectAbove),
                            StoppingRule(0.0, 1.5, Direction::RejectAbove)),
               DomainError);
}

TEST(Budgeted, HandExample) {
  const auto m = WeightedModel::linear({1.0, -2.0, 1.0});
  const std::vector<double> x{1.0, 1.0, 1.0};
  const auto p = budgeted_predict(m, x, 2, 0.0);
  EXPECT_EQ(p.reported_score, -1.0);
  EXPECT_EQ(p.label, -1);
  EXPECT_EQ(p.terms_evaluated, 2u);
  EXPECT_TRUE(p.stopped_early);
}

TEST(Budgeted, BudgetOneAndFull) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto c = random_case(seed);
    const double theta = c.model.theta();
    const auto one = budgeted_predict(c.model, c.x, 1, theta);
    const double s1 = c.model.weight(0) * (c.x[0] - c.model.mu(0));
    EXPECT_EQ(one.reported_score, s1);
    EXPECT_EQ(one.label, s1 >= theta ? +1 : -1);
    const auto all = budgeted_predict(c.model, c.x, c.model.size(), theta);
    ASSERT_EQ(all, full_predict(c.model, c.x));
    EXPECT_FALSE(all.stopped_early);
    EXPECT_EQ(all.reported_score, full_score(c.model, c.x));
  }
}

TEST(Budgeted, OutOfRange) {
  const auto m = WeightedModel::linear({1.0, 1.0});
  const std::vector<double> x{1.0, 1.0};
  EXPECT_THROW(budgeted_predict(m, x, 0, 0.0), DomainError);
  EXPECT_THROW(budgeted_predict(m, x, 3, 0.0), DomainError);
}

TEST(Full, TieGoesPositive) {
  const auto m = WeightedModel::linear({1.0}, 2.0);
  const std::vector<double> x{2.0};
  EXPECT_EQ(full_predict(m, x).label, +1);
}

TEST(Permute, DeterministicAndIdentityForOneTerm) {
  const auto c = random_case(5);
  EXPECT_EQ(permute_terms(c.model, 9), permute_terms(c.model, 9));
  const auto one = WeightedModel::linear({4.0});
  EXPECT_EQ(permute_terms(one, 9), one);
}

TEST(Permute, SameMultisetOfTerms) {
  const auto c = random_case(11);
  const auto p = permute_terms(c.model, 3);
  const auto& pc = std::get<CoordinateTerms>(p.evaluators()).coords;
  std::vector<bool> seen(c.model.size(), false);
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto i = pc[j];
    EXPECT_FALSE(seen[i]);
    seen[i] = true;
    EXPECT_EQ(p.weight(j), c.model.weight(i));
    EXPECT_EQ(p.mu(j), c.model.mu(i));
  }
}

TEST(Permute, FullScoreInvariant) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto eng = detail::make_engine(seed, 7);
    detail::NormalSampler normal;
    const std::size_t n = 1000;
    std::vector<double> w(n), x(n);
    for (auto& v : w) v = normal(eng);
    for (auto& v : x) v = normal(eng);
    const auto m = WeightedModel::linear(w);
    const double a = full_score(m, x);
    const double b = full_score(permute_terms(m, seed), x);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(w[i] * x[i]);
    // Relative to the sum of magnitudes; a cancelling sum has no meaningful
    // relative error of its own.
    ASSERT_LE(std::abs(a - b), 1e-9 * std::max(std::abs(a), scale)) << "seed " << seed;
  }
}

TEST(PredictAll, MatchesSerialAcrossThreads) {
  auto eng = detail::make_engine(1, 0);
  detail::NormalSampler normal;
  Dataset ds;
  ds.dim = 30;
  for (int j = 0; j < 257; ++j) {
    Example ex;
    ex.label = j % 2 ? +1 : -1;
    for (std::size_t i = 0; i < ds.dim; i += 2) {
      ex.x.indices.push_back(i);
      ex.x.values.push_back(normal(eng));
    }
    ds.examples.push_back(ex);
  }
  std::vector<double> w(30);
  for (auto& v : w) v = normal(eng);
  const auto m = WeightedModel::linear(w);
  const StoppingRule rule(0.0, -1.0, Direction::RejectBelow);
  auto fn = [&](std::span<const double> x) { return attentive_predict(m, x, rule); };
  const auto serial = predict_all(m, ds, fn, 1);
  EXPECT_EQ(predict_all(m, ds, fn, 4), serial);
  for (std::size_t j = 0; j < ds.size(); ++j)
    EXPECT_EQ(serial[j], attentive_predict(m, ds.examples[j].x.to_dense(30), rule));
}

}  // namespace
}  // namespace stst
