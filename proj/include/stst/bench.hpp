#pragma once

// Benchmark harness: attentive threshold sweeps with matched-budget
// baselines, precision-recall curves, and the Monte-Carlo theory suite.
// All CSV output is locale-independent and uses shortest round-trip doubles,
// so identical inputs give byte-identical files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stst/calibration.hpp"
#include "stst/core.hpp"
#include "stst/data.hpp"
#include "stst/errors.hpp"
#include "stst/model.hpp"
#include "stst/predictor.hpp"
#include "stst/simulator.hpp"

namespace stst::bench {

enum class Mode { Attentive, Budgeted, Full };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Attentive: return "attentive";
    case Mode::Budgeted: return "budgeted";
    case Mode::Full: return "full";
  }
  return "?";
}

struct SweepRecord {
  Mode mode = Mode::Full;
  std::size_t grid_index = 0;
  double tau = std::numeric_limits<double>::quiet_NaN();  // attentive only
  std::size_t budget = 0;                                 // budgeted and full
  double theta = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double mean_terms = 0.0;
  // Stop-errors over every example (early label differs from the full label).
  double stop_error_rate = 0.0;
  // Same, restricted to examples whose full label is the conditioning class.
  double stop_error_conditional = std::numeric_limits<double>::quiet_NaN();
  double wall_time_ms = 0.0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const noexcept {
    return static_cast<double>(tp + tn) / static_cast<double>(total());
  }
};

struct SweepConfig {
  std::size_t grid_points = 50;
  // One grid point per distinct per-example extreme partial score.
  bool exhaustive = false;
  Direction direction = Direction::RejectBelow;
  unsigned threads = 1;
};

struct SweepResult {
  SweepRecord full;
  // budgeted[k] is matched to attentive[k].
  std::vector<SweepRecord> attentive;
  std::vector<SweepRecord> budgeted;
  std::vector<double> taus;
  int condition = +1;
  bool calibrated = true;
};

namespace detail {

inline SweepRecord summarize(Mode mode, std::span<const Prediction> preds,
                             std::span<const Prediction> full, const Dataset& data, double theta,
                             int condition) {
  SweepRecord r;
  r.mode = mode;
  r.theta = theta;
  double terms = 0.0;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const bool pred_pos = preds[j].label > 0;
    const bool true_pos = data.examples[j].label > 0;
    r.tp += pred_pos && true_pos;
    r.fp += pred_pos && !true_pos;
    r.tn += !pred_pos && !true_pos;
    r.fn += !pred_pos && true_pos;
    terms += static_cast<double>(preds[j].terms_evaluated);
  }
  r.mean_terms = terms / static_cast<double>(preds.size());
  r.stop_error_rate = measure_stop_error(preds, full, std::nullopt).value_or(0.0);
  r.stop_error_conditional = measure_stop_error(preds, full, condition)
                                 .value_or(std::numeric_limits<double>::quiet_NaN());
  return r;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace detail

// b = round(mean_terms) with ties to even, clamped to [1, n].
inline std::size_t matched_budget(double mean_terms, std::size_t n) {
  const double r = std::nearbyint(mean_terms);
  return static_cast<std::size_t>(std::clamp(r, 1.0, static_cast<double>(n)));
}

// Extreme partial score per example: min_i S_i for RejectBelow, max for
// RejectAbove.
inline std::vector<double> extreme_partial_scores(const WeightedModel& model, const Dataset& data,
                                                  Direction direction, unsigned threads = 1) {
  std::vector<double> out(data.size());
  stst::detail::parallel_for(data.size(), threads, [&](std::size_t j) {
    const auto x = data.examples[j].x.to_dense(model.dim());
    const auto ps = partial_scores(model, x);
    out[j] = direction == Direction::RejectBelow ? *std::min_element(ps.begin(), ps.end())
                                                 : *std::max_element(ps.begin(), ps.end());
  });
  return out;
}

// Stopping thresholds between the most extreme observed partial score and
// theta. The theta end is nudged one ulp so every rule stays strict.
inline std::vector<double> sweep_grid(std::span<const double> extremes, double theta,
                                      const SweepConfig& config) {
  const bool below = config.direction == Direction::RejectBelow;
  const double far_end = theta + (below ? -1.0 : 1.0) * std::numeric_limits<double>::infinity();
  const double near = std::nextafter(theta, far_end);
  std::vector<double> taus;
  if (config.exhaustive) {
    for (double e : extremes)
      if (below ? e < theta : e > theta) taus.push_back(e);
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    if (!below) std::reverse(taus.begin(), taus.end());
  } else {
    if (config.grid_points < 2) throw DomainError("sweep grid needs >= 2 points");
    const double extreme = below ? *std::min_element(extremes.begin(), extremes.end())
                                 : *std::max_element(extremes.begin(), extremes.end());
    if (below ? extreme < theta : extreme > theta) {
      const auto g = config.grid_points;
      for (std::size_t k = 0; k + 1 < g; ++k)
        taus.push_back(extreme + (theta - extreme) * static_cast<double>(k) / static_cast<double>(g - 1));
      taus.push_back(near);
    }
  }
  if (taus.empty())
    throw DomainError("sweep grid is empty: no partial score lies beyond theta in the stopping "
                      "direction");
  return taus;
}

inline bool is_calibrated(const WeightedModel& model) {
  return std::any_of(model.mu().begin(), model.mu().end(), [](double m) { return m != 0.0; });
}

// One full pass, then for each tau an attentive pass and a budgeted pass
// whose budget matches the attentive pass's mean terms evaluated.
inline SweepResult run_sweep(const WeightedModel& model, const Dataset& test,
                             const SweepConfig& config = {}) {
  if (test.empty()) throw EmptyDatasetError("test set is empty");
  SweepResult result;
  result.calibrated = is_calibrated(model);
  result.condition = centering_class(config.direction);
  const double theta = model.theta();
  const int cond = result.condition;

  auto t0 = std::chrono::steady_clock::now();
  const auto full = predict_all(
      model, test, [&](std::span<const double> x) { return full_predict(model, x, theta); },
      config.threads);
  result.full = detail::summarize(Mode::Full, full, full, test, theta, cond);
  result.full.budget = model.size();
  result.full.wall_time_ms = detail::elapsed_ms(t0);

  const auto extremes = extreme_partial_scores(model, test, config.direction, config.threads);
  result.taus = sweep_grid(extremes, theta, config);

  for (std::size_t k = 0; k < result.taus.size(); ++k) {
    const StoppingRule rule(theta, result.taus[k], config.direction);
    t0 = std::chrono::steady_clock::now();
    const auto att = predict_all(
        model, test, [&](std::span<const double> x) { return attentive_predict(model, x, rule); },
        config.threads);
    auto ar = detail::summarize(Mode::Attentive, att, full, test, theta, cond);
    ar.grid_index = k;
    ar.tau = rule.tau();
    ar.wall_time_ms = detail::elapsed_ms(t0);

    const std::size_t b = matched_budget(ar.mean_terms, model.size());
    t0 = std::chrono::steady_clock::now();
    const auto bud = predict_all(
        model, test, [&](std::span<const double> x) { return budgeted_predict(model, x, b, theta); },
        config.threads);
    auto br = detail::summarize(Mode::Budgeted, bud, full, test, theta, cond);
    br.grid_index = k;
    br.budget = b;
    br.wall_time_ms = detail::elapsed_ms(t0);

    result.attentive.push_back(ar);
    result.budgeted.push_back(br);
  }
  return result;
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return stst::detail::format_double(v);
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& r, bool include_timing = false) {
  out << "mode,grid_index,tau,budget,theta,tp,fp,tn,fn,accuracy,mean_terms,stop_error,"
         "stop_error_conditional";
  if (include_timing) out << ",wall_time_ms";
  out << '\n';
  auto row = [&](const SweepRecord& s) {
    out << to_string(s.mode) << ',' << s.grid_index << ',' << csv_number(s.tau) << ','
        << (s.mode == Mode::Attentive ? std::string() : std::to_string(s.budget)) << ','
        << csv_number(s.theta) << ',' << s.tp << ',' << s.fp << ',' << s.tn << ',' << s.fn << ','
        << csv_number(s.accuracy()) << ',' << csv_number(s.mean_terms) << ','
        << csv_number(s.stop_error_rate) << ',' << csv_number(s.stop_error_conditional);
    if (include_timing) out << ',' << csv_number(s.wall_time_ms);
    out << '\n';
  };
  row(r.full);
  for (std::size_t k = 0; k < r.attentive.size(); ++k) {
    row(r.attentive[k]);
    row(r.budgeted[k]);
  }
}

// ---------------------------------------------------------------------------
// Precision-recall

struct PrPoint {
  double threshold = 0.0;  // predict positive when score >= threshold
  std::size_t tp = 0;
  std::size_t fp = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // thresholds in descending order
  // Step-wise area: sum_k (R_k - R_{k-1}) P_k.
  double average_precision = 0.0;
};

inline PrCurve precision_recall(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::size_t positives = 0;
  for (int l : labels) positives += l > 0;
  if (positives == 0) throw DomainError("recall is undefined: no positive examples");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  PrCurve curve;
  std::size_t tp = 0, fp = 0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double t = scores[order[k]];
    while (k < order.size() && scores[order[k]] == t) {
      (labels[order[k]] > 0 ? tp : fp)++;
      ++k;
    }
    PrPoint p;
    p.threshold = t;
    p.tp = tp;
    p.fp = fp;
    p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.recall = static_cast<double>(tp) / static_cast<double>(positives);
    curve.average_precision += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
    curve.points.push_back(p);
  }
  return curve;
}

inline PrCurve precision_recall(std::span<const Prediction> preds, const Dataset& data) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t j = 0; j < preds.size(); ++j) {
    scores.push_back(preds[j].reported_score);
    labels.push_back(data.examples.at(j).label);
  }
  return precision_recall(scores, labels);
}

inline void write_pr_csv_header(std::ostream& out) {
  out << "mode,threshold,tp,fp,precision,recall\n";
}

inline void write_pr_csv_rows(std::ostream& out, const std::string& mode, const PrCurve& c) {
  for (const auto& p : c.points)
    out << mode << ',' << csv_number(p.threshold) << ',' << p.tp << ',' << p.fp << ','
        << csv_number(p.precision) << ',' << csv_number(p.recall) << '\n';
}

// ---------------------------------------------------------------------------
// Theory suite

struct ExperimentRow {
  std::string experiment;
  double n = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double trials = std::numeric_limits<double>::quiet_NaN();
  double accepted = std::numeric_limits<double>::quiet_NaN();
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
  double closed_form = std::numeric_limits<double>::quiet_NaN();
  // Empty when no tolerance applies to the row.
  std::optional<bool> pass;
};

inline void write_experiment_csv_header(std::ostream& out) {
  out << "experiment,n,delta,tau,theta,trials,accepted,estimate,stderr,closed_form,pass\n";
}

inline void write_experiment_csv_row(std::ostream& out, const ExperimentRow& r) {
  out << r.experiment << ',' << csv_number(r.n) << ',' << csv_number(r.delta) << ','
      << csv_number(r.tau) << ',' << csv_number(r.theta) << ',' << csv_number(r.trials) << ','
      << csv_number(r.accepted) << ',' << csv_number(r.estimate) << ',' << csv_number(r.stderr_)
      << ',' << csv_number(r.closed_form) << ','
      << (r.pass ? (*r.pass ? "pass" : "fail") : "") << '\n';
}

struct Tolerances {
  double bridge_abs = 0.02;
  double bridge_se = 4.0;
  double stop_error_low = 0.5;   // x delta
  double stop_error_high = 1.5;  // x delta
  std::size_t stop_error_min_accepted = 50000;
  double max_censored = 0.01;
  double wald_se = 3.0;
  double slope_low = 0.4;
  double slope_high = 0.6;
};

struct TheoryConfig {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;

  std::size_t bridge_n = 2000;
  std::vector<double> bridge_taus{0.5, 1.0, 1.5, 2.0};  // in units of sqrt(var(S_n))
  std::size_t bridge_trials = 100000;

  std::size_t stop_n = 2000;
  std::vector<double> stop_deltas{0.05, 0.1, 0.2};
  std::size_t stop_trials = 110000;

  std::vector<std::size_t> time_ns{100, 1000, 10000};
  double time_delta = 0.1;
  double time_drift = 0.1;
  double time_scale = 1.0;  // Rademacher step scale
  std::size_t time_trials = 10000;

  Tolerances tol;
};

inline bool bridge_pass(double est, double se, double closed_form, const Tolerances& tol) {
  return std::abs(est - closed_form) <= std::max(tol.bridge_abs, tol.bridge_se * se);
}

inline std::vector<ExperimentRow> bridge_rows(const TheoryConfig& c) {
  // Unit total variance.
  sim::WalkSpec spec{c.bridge_n, sim::Gaussian{1.0 / std::sqrt(static_cast<double>(c.bridge_n))},
                     0.0, c.seed};
  const double variance = 1.0;
  sim::BridgeOptions opts;
  opts.mode = sim::BridgeMode::ExactBridge;
  opts.trials = c.bridge_trials;
  opts.threads = c.threads;
  const auto est = sim::empirical_bridge_crossing(spec, c.bridge_taus, 0.0, opts);
  std::vector<ExperimentRow> rows;
  for (std::size_t k = 0; k < est.size(); ++k) {
    ExperimentRow r;
    r.experiment = "bridge_crossing";
    r.n = static_cast<double>(c.bridge_n);
    r.tau = c.bridge_taus[k];
    r.theta = 0.0;
    r.trials = static_cast<double>(est[k].trials_used);
    r.accepted = static_cast<double>(est[k].accepted);
    r.estimate = est[k].probability_hat;
    r.stderr_ = est[k].standard_error;
    r.closed_form = crossing_probability(r.tau, 0.0, variance);
    r.pass = bridge_pass(r.estimate, r.stderr_, r.closed_form, c.tol);
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<ExperimentRow> stop_error_rows(const TheoryConfig& c) {
  sim::WalkSpec spec{c.stop_n, sim::Gaussian{1.0 / std::sqrt(static_cast<double>(c.stop_n))}, 0.0,
                     c.seed + 1};
  const auto est = sim::empirical_stop_error(spec, c.stop_deltas, 0.0, c.stop_trials, c.threads);
  std::vector<ExperimentRow> rows;
  for (const auto& e : est) {
    ExperimentRow r;
    r.experiment = "stop_error";
    r.n = static_cast<double>(c.stop_n);
    r.delta = e.delta;
    r.tau = e.tau;
    r.theta = e.theta;
    r.trials = static_cast<double>(e.estimate.trials_used);
    r.accepted = static_cast<double>(e.estimate.accepted);
    r.estimate = e.estimate.probability_hat;
    r.stderr_ = e.estimate.standard_error;
    r.closed_form = e.delta;
    r.pass = e.estimate.accepted >= c.tol.stop_error_min_accepted &&
             r.estimate >= c.tol.stop_error_low * e.delta &&
             r.estimate <= c.tol.stop_error_high * e.delta;
    rows.push_back(r);
    // Same estimate against the continuum value for the inequality conditioning.
    ExperimentRow g = r;
    g.experiment = "stop_error_inequality_limit";
    g.closed_form = e.inequality_closed_form;
    g.pass.reset();
    rows.push_back(g);
  }
  return rows;
}

struct StoppingTimeStudy {
  std::vector<sim::StoppingTimeSummary> summaries;
  double slope = 0.0;
};

inline StoppingTimeStudy stopping_time_study(const TheoryConfig& c) {
  StoppingTimeStudy study;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < c.time_ns.size(); ++k) {
    sim::WalkSpec spec{c.time_ns[k], sim::Rademacher{c.time_scale}, c.time_drift, c.seed + 2 + k};
    study.summaries.push_back(sim::empirical_stopping_time(spec, c.time_delta, c.time_trials, c.threads));
    xs.push_back(static_cast<double>(c.time_ns[k]));
    ys.push_back(study.summaries.back().mean_time);
  }
  study.slope = sim::loglog_slope(xs, ys);
  return study;
}

inline std::vector<ExperimentRow> stopping_time_rows(const TheoryConfig& c) {
  const auto study = stopping_time_study(c);
  std::vector<ExperimentRow> rows;
  bool all_uncensored = true;
  for (const auto& s : study.summaries) {
    ExperimentRow r;
    r.experiment = "stopping_time";
    r.n = static_cast<double>(s.n);
    r.delta = s.delta;
    r.tau = s.tau;
    r.trials = static_cast<double>(s.trials);
    r.accepted = std::round((1.0 - s.censored_fraction) * static_cast<double>(s.trials));
    r.estimate = s.mean_time;
    r.stderr_ = s.stderr_time;
    r.closed_form = s.bound;
    const bool censor_ok = s.censored_fraction < c.tol.max_censored;
    all_uncensored = all_uncensored && censor_ok;
    r.pass = censor_ok;
    rows.push_back(r);

    ExperimentRow w = r;
    w.experiment = "wald_residual";
    w.estimate = s.wald_residual;
    w.stderr_ = s.wald_residual_stderr;
    w.closed_form = 0.0;
    w.pass = std::abs(s.wald_residual) <= c.tol.wald_se * s.wald_residual_stderr;
    rows.push_back(w);
  }
  ExperimentRow slope;
  slope.experiment = "stopping_time_slope";
  slope.delta = c.time_delta;
  slope.estimate = study.slope;
  slope.closed_form = 0.5;
  slope.pass = all_uncensored && study.slope >= c.tol.slope_low && study.slope <= c.tol.slope_high;
  rows.push_back(slope);
  return rows;
}

inline std::vector<ExperimentRow> run_theory_suite(const TheoryConfig& c) {
  auto rows = bridge_rows(c);
  for (auto& r : stop_error_rows(c)) rows.push_back(std::move(r));
  for (auto& r : stopping_time_rows(c)) rows.push_back(std::move(r));
  return rows;
}

}  // namespace stst::bench
