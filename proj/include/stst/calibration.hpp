#pragma once

// Connects the boundary math to a concrete model: the per-term drift
// correction mu, the score variance var(S_n), and measured stop-error rates.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stst/core.hpp"
#include "stst/data.hpp"
#include "stst/detail/moments.hpp"
#include "stst/errors.hpp"
#include "stst/model.hpp"
#include "stst/predictor.hpp"

namespace stst {

enum class VarianceMode {
  // Unbiased sample variance of the corrected full scores.
  DirectScore,
  // sum_i w_i^2 var_i over per-term sample variances; assumes independent terms.
  IndependentTerms,
};

struct CalibrationReport {
  std::vector<double> mu;
  double variance_hat = 0.0;
  std::size_t n_calibration = 0;
  int class_used = +1;
};

namespace detail {

inline std::vector<std::vector<double>> dense_class_rows(const WeightedModel& model,
                                                         const Dataset& set, int class_used) {
  std::vector<std::vector<double>> rows;
  for (const auto& ex : set.examples) {
    if (ex.label != class_used) continue;
    if (!ex.x.indices.empty() && ex.x.indices.back() >= model.dim())
      throw ShapeError("calibration example exceeds model dimension");
    rows.push_back(ex.x.to_dense(model.dim()));
  }
  return rows;
}

}  // namespace detail

// mu_i = mean over class_used examples of the raw evaluator X_i(x).
inline std::vector<double> estimate_mu(const WeightedModel& model, const Dataset& calibration_set,
                                       int class_used) {
  const auto rows = detail::dense_class_rows(model, calibration_set, class_used);
  if (rows.empty())
    throw CalibrationError("calibration set has no examples of class " + std::to_string(class_used));
  std::vector<double> mu(model.size(), 0.0);
  for (std::size_t i = 0; i < model.size(); ++i) {
    double acc = 0.0;
    for (const auto& x : rows) acc += model.evaluate_unchecked(i, x);
    mu[i] = acc / static_cast<double>(rows.size());
  }
  return mu;
}

inline double estimate_variance(const WeightedModel& model, const Dataset& calibration_set,
                                int class_used, VarianceMode mode = VarianceMode::DirectScore) {
  const auto rows = detail::dense_class_rows(model, calibration_set, class_used);
  if (rows.size() < 2)
    throw CalibrationError("variance estimation needs >= 2 examples of class " +
                           std::to_string(class_used) + ", got " + std::to_string(rows.size()));
  double variance = 0.0;
  if (mode == VarianceMode::DirectScore) {
    detail::RunningMoments m;
    for (const auto& x : rows) m.add(full_score(model, x));
    variance = m.sample_variance();
  } else {
    for (std::size_t i = 0; i < model.size(); ++i) {
      detail::RunningMoments m;
      for (const auto& x : rows) m.add(model.evaluate_unchecked(i, x));
      const double w = model.weight(i);
      variance += w * w * m.sample_variance();
    }
  }
  if (!(variance > 0.0))
    throw DegenerateDataError("calibration scores have zero variance; no stopping rule exists");
  return variance;
}

inline CalibrationReport calibrate(const WeightedModel& model, const Dataset& calibration_set,
                                   int class_used, VarianceMode mode = VarianceMode::DirectScore) {
  CalibrationReport r;
  r.mu = estimate_mu(model, calibration_set, class_used);
  r.variance_hat = estimate_variance(model, calibration_set, class_used, mode);
  r.n_calibration = calibration_set.count(class_used);
  r.class_used = class_used;
  return r;
}

// Class to centre on: the one opposite the rejection direction, so scores of
// examples the rule must not stop are driftless.
constexpr int centering_class(Direction d) noexcept { return -stop_label(d); }

// Installs mu and variance. theta shifts by -sum_i w_i (mu_new_i - mu_old_i) so
// the full predictor's decisions are unchanged.
inline WeightedModel apply_calibration(const WeightedModel& model, const CalibrationReport& report) {
  WeightedModel out = model;
  double shift = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i)
    shift += model.weight(i) * (report.mu.at(i) - model.mu(i));
  out.set_mu(report.mu);
  out.set_theta(model.theta() - shift);
  out.set_variance(report.variance_hat);
  return out;
}

// Fraction of examples with full.label == condition that the early-stopping
// pass stopped with the opposite label. Without a condition the denominator
// is every example. Returns nullopt when the denominator is empty.
inline std::optional<double> measure_stop_error(std::span<const Prediction> early,
                                                std::span<const Prediction> full,
                                                std::optional<int> condition) {
  if (early.size() != full.size())
    throw std::invalid_argument("prediction lists are misaligned: " + std::to_string(early.size()) +
                                " vs " + std::to_string(full.size()));
  std::size_t denom = 0, errors = 0;
  for (std::size_t j = 0; j < full.size(); ++j) {
    if (condition && full[j].label != *condition) continue;
    ++denom;
    errors += early[j].stopped_early && early[j].label != full[j].label;
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(errors) / static_cast<double>(denom);
}

}  // namespace stst
