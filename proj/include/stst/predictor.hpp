#pragma once

// Attentive (early-stopping), budgeted, and full evaluation of a
// WeightedModel. Terms are always evaluated in model order.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "stst/core.hpp"
#include "stst/data.hpp"
#include "stst/detail/parallel.hpp"
#include "stst/detail/random.hpp"
#include "stst/model.hpp"

namespace stst {

struct Prediction {
  int label = +1;
  // Final partial sum, or tau exactly when the walk stopped early.
  double reported_score = 0.0;
  std::size_t terms_evaluated = 0;
  bool stopped_early = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline int label_for(double score, double theta) noexcept { return score >= theta ? +1 : -1; }

struct AttentiveOptions {
  // Check the boundary every `check_stride` terms (and always after the last
  // term). Strides above 1 only delay stopping.
  std::size_t check_stride = 1;
};

// Evaluates terms in order and stops at the first i where S_i lies strictly
// beyond rule.tau(). A stop reports tau as the score and the rule's label.
inline Prediction attentive_predict(const WeightedModel& model, std::span<const double> x,
                                    const StoppingRule& rule, AttentiveOptions opts = {}) {
  if (x.size() != model.dim()) throw ShapeError("input dimension mismatch");
  if (opts.check_stride == 0) throw DomainError("check stride must be >= 1");
  const std::size_t n = model.size();
  const auto& w = model.weights();
  const auto& mu = model.mu();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += w[i] * (model.evaluate_unchecked(i, x) - mu[i]);
    const std::size_t evaluated = i + 1;
    if (evaluated < n && evaluated % opts.check_stride == 0 && rule.crossed(s))
      return Prediction{stop_label(rule.direction()), rule.tau(), evaluated, true};
  }
  return Prediction{label_for(s, rule.theta()), s, n, false};
}

// Rejects both classes early: stops on whichever boundary is crossed first.
// The joint stop-error is bounded by the sum of the two rules' deltas.
struct TwoSidedRule {
  StoppingRule lower;  // RejectBelow
  StoppingRule upper;  // RejectAbove

  TwoSidedRule(StoppingRule lo, StoppingRule hi) : lower(lo), upper(hi) {
    if (lower.direction() != Direction::RejectBelow || upper.direction() != Direction::RejectAbove)
      throw DomainError("two-sided rule needs one reject-below and one reject-above rule");
    if (lower.theta() != upper.theta()) throw DomainError("two-sided rules must share theta");
  }
};

inline Prediction attentive_predict(const WeightedModel& model, std::span<const double> x,
                                    const TwoSidedRule& rule, AttentiveOptions opts = {}) {
  if (x.size() != model.dim()) throw ShapeError("input dimension mismatch");
  if (opts.check_stride == 0) throw DomainError("check stride must be >= 1");
  const std::size_t n = model.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += model.weights()[i] * (model.evaluate_unchecked(i, x) - model.mu()[i]);
    const std::size_t evaluated = i + 1;
    if (evaluated < n && evaluated % opts.check_stride == 0) {
      if (rule.lower.crossed(s)) return Prediction{-1, rule.lower.tau(), evaluated, true};
      if (rule.upper.crossed(s)) return Prediction{+1, rule.upper.tau(), evaluated, true};
    }
  }
  return Prediction{label_for(s, rule.lower.theta()), s, n, false};
}

// Sum of the first `budget` terms, labelled against theta.
inline Prediction budgeted_predict(const WeightedModel& model, std::span<const double> x,
                                   std::size_t budget, double theta) {
  if (budget < 1 || budget > model.size())
    throw DomainError("budget " + std::to_string(budget) + " outside [1, " +
                      std::to_string(model.size()) + "]");
  if (x.size() != model.dim()) throw ShapeError("input dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < budget; ++i)
    s += model.weights()[i] * (model.evaluate_unchecked(i, x) - model.mu()[i]);
  return Prediction{label_for(s, theta), s, budget, budget < model.size()};
}

inline Prediction full_predict(const WeightedModel& model, std::span<const double> x,
                               double theta) {
  return budgeted_predict(model, x, model.size(), theta);
}

inline Prediction full_predict(const WeightedModel& model, std::span<const double> x) {
  return full_predict(model, x, model.theta());
}

// Seeded uniform permutation of the terms (weights, evaluators and mu move
// together).
inline WeightedModel permute_terms(const WeightedModel& model, std::uint64_t seed) {
  std::vector<std::size_t> order(model.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto eng = detail::make_engine(seed, 2);
  detail::shuffle(order.begin(), order.end(), eng);
  return model.reordered(order);
}

// Prefix sums S_1..S_n.
inline std::vector<double> partial_scores(const WeightedModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw ShapeError("input dimension mismatch");
  std::vector<double> out(model.size());
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    s += model.weights()[i] * (model.evaluate_unchecked(i, x) - model.mu()[i]);
    out[i] = s;
  }
  return out;
}

// Runs `predict(dense_x)` over every example of `data` in parallel; results
// are stored by example index.
template <class PredictFn>
std::vector<Prediction> predict_all(const WeightedModel& model, const Dataset& data,
                                    PredictFn&& predict, unsigned threads = 1) {
  if (data.dim > model.dim())
    for (const auto& ex : data.examples)
      if (!ex.x.indices.empty() && ex.x.indices.back() >= model.dim())
        throw ShapeError("example feature index exceeds model dimension");
  std::vector<Prediction> out(data.size());
  detail::parallel_for(data.size(), threads, [&](std::size_t j) {
    thread_local std::vector<double> dense;
    dense.assign(model.dim(), 0.0);
    const auto& sx = data.examples[j].x;
    for (std::size_t k = 0; k < sx.nnz(); ++k) dense[sx.indices[k]] = sx.values[k];
    out[j] = predict(std::span<const double>(dense));
  });
  return out;
}

}  // namespace stst
