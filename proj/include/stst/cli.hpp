#pragma once

// Command-line front end: train, calibrate, sweep, pr, theory, simulate.
// run_cli is the whole program; tools/stst_bench.cpp only forwards argv.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stst/bench.hpp"
#include "stst/calibration.hpp"
#include "stst/core.hpp"
#include "stst/data.hpp"
#include "stst/model.hpp"
#include "stst/predictor.hpp"
#include "stst/simulator.hpp"
#include "stst/trainer.hpp"

namespace stst::cli {

namespace detail {

inline Dataset read_dataset(const std::string& path, std::size_t dim, bool lenient,
                            std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  std::vector<std::string> warnings;
  Dataset ds = parse_sparse(in, ParseOptions{lenient, dim}, &warnings);
  ds.name = path;
  for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
  return ds;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  write_sparse(out, ds);
}

inline WeightedModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model '" + path + "'");
  return import_kernel_model(in);
}

inline void write_model(const std::string& path, const WeightedModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model '" + path + "'");
  save_model(out, model);
}

// Output sink: a file when a path is given, else the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write output '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

inline int parse_class(const std::string& s) {
  if (s == "+1" || s == "1" || s == "pos" || s == "positive") return +1;
  if (s == "-1" || s == "neg" || s == "negative") return -1;
  throw DomainError("unknown class '" + s + "'");
}

inline sim::StepKind parse_step(const std::string& kind, double scale) {
  if (kind == "gaussian") return sim::Gaussian{scale};
  if (kind == "rademacher") return sim::Rademacher{scale};
  if (kind == "uniform") return sim::UniformSym{scale};
  throw DomainError("unknown step kind '" + kind + "'");
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constant sequential thresholded sum test: early-stopping prediction benchmarks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file supplying any flag; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  unsigned threads = 1;
  std::string output;
  app.add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
  app.add_option("-o,--output", output, "CSV output path (default stdout)");

  // train --------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a linear model with Pegasos");
  std::string train_path, model_out, save_train, save_test, save_calib;
  bool synthetic = false;
  SyntheticSpec syn;
  double test_fraction = 0.3, calib_fraction = 0.0;
  std::uint64_t split_seed = 11;
  std::optional<double> lambda, cost;
  TrainConfig tcfg;
  tcfg.epochs = 20;
  bool lenient = false;
  std::size_t dim_override = 0;
  train->add_option("--train", train_path, "training set (sparse text format)");
  train->add_flag("--synthetic", synthetic, "generate a synthetic two-Gaussian dataset");
  train->add_option("--dim", syn.dim, "synthetic dimension");
  train->add_option("--n-pos", syn.n_pos, "synthetic positives");
  train->add_option("--n-neg", syn.n_neg, "synthetic negatives");
  train->add_option("--separation", syn.mean_separation, "synthetic class-mean separation");
  train->add_option("--noise", syn.noise_std, "synthetic noise std");
  train->add_option("--data-seed", syn.seed, "synthetic generator seed");
  train->add_option("--test-fraction", test_fraction, "held-out test fraction (synthetic data)");
  train->add_option("--calib-fraction", calib_fraction,
                    "fraction of the training side held out for calibration");
  train->add_option("--split-seed", split_seed, "seed for the train/test/calibration splits");
  train->add_option("--save-train", save_train, "write the training split");
  train->add_option("--save-test", save_test, "write the test split");
  train->add_option("--save-calib", save_calib, "write the calibration split");
  train->add_option("--lambda", lambda, "Pegasos regularization");
  train->add_option("--C", cost, "SVM cost; lambda = 1/(C m)");
  train->add_option("--epochs", tcfg.epochs, "passes over the training set");
  train->add_option("--seed", tcfg.seed, "training seed");
  train->add_option("--model", model_out, "output model container")->required();
  train->add_flag("--lenient", lenient, "accept unordered feature indices");
  train->add_option("--feature-dim", dim_override, "declared feature dimension");

  // calibrate ----------------------------------------------------------------
  auto* cal = app.add_subcommand("calibrate", "estimate mu and var(S_n) for a model");
  std::string model_in, calib_path, test_path, cal_out, direction_s = "reject-below",
                                                        variance_mode = "direct";
  std::string class_s;
  bool calib_on_test = false;
  double delta = 0.1;
  cal->add_option("--model", model_in, "input model container")->required();
  cal->add_option("--calib", calib_path, "calibration set (held out from training)");
  cal->add_flag("--calib-on-test", calib_on_test,
                "calibrate on the test set's positives (replication protocol; leaks test data)");
  cal->add_option("--test", test_path, "test set (with --calib-on-test)");
  cal->add_option("--direction", direction_s, "reject-below | reject-above");
  cal->add_option("--class", class_s, "class to centre on (default: opposite the direction)");
  cal->add_option("--variance-mode", variance_mode, "direct | independent");
  cal->add_option("--delta", delta, "target stop-error rate reported in the CSV");
  cal->add_option("--out", cal_out, "output calibrated model")->required();
  cal->add_option("--feature-dim", dim_override, "declared feature dimension");

  // sweep --------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "attentive vs budgeted threshold sweep");
  std::string grid_s = "50";
  bool timing = false;
  sweep->add_option("--model", model_in, "calibrated model container")->required();
  sweep->add_option("--test", test_path, "test set")->required();
  sweep->add_option("--grid", grid_s, "number of tau points, or 'exhaustive'");
  sweep->add_option("--direction", direction_s, "reject-below | reject-above");
  sweep->add_flag("--timing", timing, "append a wall_time_ms column (not reproducible)");
  sweep->add_option("--feature-dim", dim_override, "declared feature dimension");

  // pr -----------------------------------------------------------------------
  auto* pr = app.add_subcommand("pr", "precision-recall curves for full, attentive, budgeted");
  std::optional<double> tau_opt;
  pr->add_option("--model", model_in, "calibrated model container")->required();
  pr->add_option("--test", test_path, "test set")->required();
  pr->add_option("--delta", delta, "target stop-error rate (needs a calibrated variance)");
  pr->add_option("--tau", tau_opt, "explicit stopping threshold (overrides --delta)");
  pr->add_option("--direction", direction_s, "reject-below | reject-above");
  pr->add_option("--feature-dim", dim_override, "declared feature dimension");

  // theory -------------------------------------------------------------------
  auto* theory = app.add_subcommand("theory", "Monte-Carlo checks of the boundary theory");
  bench::TheoryConfig tc;
  theory->add_option("--seed", tc.seed, "base seed");
  theory->add_option("--bridge-n", tc.bridge_n, "walk length for the bridge experiment");
  theory->add_option("--bridge-taus", tc.bridge_taus, "taus in units of sqrt(var(S_n))");
  theory->add_option("--bridge-trials", tc.bridge_trials, "bridge trials");
  theory->add_option("--stop-n", tc.stop_n, "walk length for the stop-error experiment");
  theory->add_option("--stop-deltas", tc.stop_deltas, "deltas for the stop-error experiment");
  theory->add_option("--stop-trials", tc.stop_trials, "stop-error trials");
  theory->add_option("--time-ns", tc.time_ns, "walk lengths for the stopping-time scaling");
  theory->add_option("--time-delta", tc.time_delta, "delta for the stopping-time experiment");
  theory->add_option("--time-drift", tc.time_drift, "per-step drift");
  theory->add_option("--time-scale", tc.time_scale, "Rademacher step scale");
  theory->add_option("--time-trials", tc.time_trials, "stopping-time trials per n");

  // simulate -----------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run one random-walk experiment");
  std::string experiment = "bridge", step_kind = "gaussian", bridge_mode = "exact";
  sim::WalkSpec ws;
  double step_scale = 1.0, theta = 0.0, band = 0.0;
  std::size_t trials = 10000;
  std::vector<double> taus{1.0}, deltas{0.1};
  simulate->add_option("--experiment", experiment, "walk | bridge | stop-error | stopping-time");
  simulate->add_option("--n", ws.n, "walk length");
  simulate->add_option("--step", step_kind, "gaussian | rademacher | uniform");
  simulate->add_option("--scale", step_scale, "step std / scale / half-width");
  simulate->add_option("--drift", ws.drift, "per-step drift");
  simulate->add_option("--seed", ws.seed, "seed");
  simulate->add_option("--trials", trials, "Monte-Carlo trials");
  simulate->add_option("--tau", taus, "boundaries (bridge)");
  simulate->add_option("--theta", theta, "pinned endpoint / conditioning threshold");
  simulate->add_option("--delta", deltas, "target rates (stop-error, stopping-time)");
  simulate->add_option("--band", band, "rejection half-width (0 = 0.1 sqrt(var))");
  simulate->add_option("--mode", bridge_mode, "exact | rejection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    detail::Sink sink(output, out);
    std::ostream& csv = *sink;

    if (*train) {
      Dataset all, train_set, test_set, calib_set;
      if (synthetic == !train_path.empty())
        throw DomainError("give exactly one of --train or --synthetic");
      if (synthetic) {
        all = generate_synthetic(syn);
        std::tie(train_set, test_set) = split(all, test_fraction, split_seed);
      } else {
        train_set = detail::read_dataset(train_path, dim_override, lenient, err);
      }
      if (calib_fraction > 0.0) {
        auto [fit, holdout] = split(train_set, calib_fraction, split_seed + 1);
        train_set = std::move(fit);
        calib_set = std::move(holdout);
      }
      TrainConfig cfg = tcfg;
      if (lambda && cost) throw DomainError("give at most one of --lambda and --C");
      if (lambda) cfg.lambda = *lambda;
      if (cost) cfg.lambda = TrainConfig::lambda_from_c(*cost, train_set.size());
      if (!lambda && !cost) cfg.lambda = TrainConfig::lambda_from_c(1.0, train_set.size());
      const auto result = train_linear_with_history(train_set, cfg);
      detail::write_model(model_out, result.model);
      if (!save_train.empty()) detail::write_dataset(save_train, train_set);
      if (!save_test.empty()) {
        if (test_set.empty()) throw DomainError("--save-test needs --synthetic");
        detail::write_dataset(save_test, test_set);
      }
      if (!save_calib.empty()) {
        if (calib_set.empty()) throw DomainError("--save-calib needs --calib-fraction");
        detail::write_dataset(save_calib, calib_set);
      }
      csv << "epoch,objective,train_accuracy\n";
      const double train_acc = accuracy(result.model, train_set);
      for (std::size_t e = 0; e < result.objective.size(); ++e)
        csv << e + 1 << ',' << bench::csv_number(result.objective[e]) << ','
            << (e + 1 == result.objective.size() ? bench::csv_number(train_acc) : "") << '\n';
      return 0;
    }

    const Direction direction = direction_from_string(direction_s);

    if (*cal) {
      WeightedModel model = detail::read_model(model_in);
      Dataset calib;
      if (calib_on_test) {
        if (test_path.empty()) throw DomainError("--calib-on-test needs --test");
        if (!calib_path.empty()) throw DomainError("--calib-on-test replaces --calib");
        calib = detail::read_dataset(test_path, dim_override, false, err);
      } else {
        if (calib_path.empty()) throw DomainError("--calib is required (or --calib-on-test)");
        calib = detail::read_dataset(calib_path, dim_override, false, err);
      }
      const int cls = class_s.empty() ? centering_class(direction) : detail::parse_class(class_s);
      VarianceMode vm;
      if (variance_mode == "direct") vm = VarianceMode::DirectScore;
      else if (variance_mode == "independent") vm = VarianceMode::IndependentTerms;
      else throw DomainError("unknown variance mode '" + variance_mode + "'");
      const auto report = calibrate(model, calib, cls, vm);
      const auto calibrated = apply_calibration(model, report);
      detail::write_model(cal_out, calibrated);
      const auto rule = make_stopping_rule(calibrated.theta(), {delta, report.variance_hat}, direction);
      csv << "class_used,n_calibration,variance_hat,theta,delta,tau\n";
      csv << report.class_used << ',' << report.n_calibration << ','
          << bench::csv_number(report.variance_hat) << ',' << bench::csv_number(calibrated.theta())
          << ',' << bench::csv_number(delta) << ',' << bench::csv_number(rule.tau()) << '\n';
      return 0;
    }

    if (*sweep) {
      const WeightedModel model = detail::read_model(model_in);
      const Dataset test = detail::read_dataset(test_path, dim_override, false, err);
      bench::SweepConfig sc;
      sc.direction = direction;
      sc.threads = threads;
      if (grid_s == "exhaustive") {
        sc.exhaustive = true;
      } else {
        std::size_t g = 0;
        if (!stst::detail::parse_number(std::string_view(grid_s), g))
          throw DomainError("--grid expects a count or 'exhaustive'");
        sc.grid_points = g;
      }
      if (!bench::is_calibrated(model))
        err << "warning: model has mu = 0; stopping on uncentred scores voids the delta guarantee\n";
      const auto result = bench::run_sweep(model, test, sc);
      bench::write_sweep_csv(csv, result, timing);
      return 0;
    }

    if (*pr) {
      const WeightedModel model = detail::read_model(model_in);
      const Dataset test = detail::read_dataset(test_path, dim_override, false, err);
      std::optional<StoppingRule> rule;
      if (tau_opt) {
        rule.emplace(model.theta(), *tau_opt, direction);
      } else {
        if (!model.variance())
          throw CalibrationError("model has no calibrated variance; run calibrate or pass --tau");
        rule.emplace(make_stopping_rule(model.theta(), {delta, *model.variance()}, direction));
      }
      const double th = model.theta();
      const auto full = predict_all(model, test, [&](auto x) { return full_predict(model, x, th); },
                                    threads);
      const auto att = predict_all(model, test,
                                   [&](auto x) { return attentive_predict(model, x, *rule); }, threads);
      double mean_terms = 0.0;
      for (const auto& p : att) mean_terms += static_cast<double>(p.terms_evaluated);
      mean_terms /= static_cast<double>(att.size());
      const auto b = bench::matched_budget(mean_terms, model.size());
      const auto bud = predict_all(model, test,
                                   [&](auto x) { return budgeted_predict(model, x, b, th); }, threads);
      bench::write_pr_csv_header(csv);
      bench::write_pr_csv_rows(csv, "full", bench::precision_recall(full, test));
      bench::write_pr_csv_rows(csv, "attentive", bench::precision_recall(att, test));
      bench::write_pr_csv_rows(csv, "budgeted", bench::precision_recall(bud, test));
      return 0;
    }

    if (*theory) {
      tc.threads = threads;
      bench::write_experiment_csv_header(csv);
      for (const auto& row : bench::run_theory_suite(tc)) bench::write_experiment_csv_row(csv, row);
      return 0;
    }

    if (*simulate) {
      ws.step = detail::parse_step(step_kind, step_scale);
      ws.validate();
      if (experiment == "walk") {
        csv << "i,s\n";
        const auto path = sim::simulate_walk(ws);
        for (std::size_t i = 0; i < path.size(); ++i)
          csv << i + 1 << ',' << bench::csv_number(path[i]) << '\n';
        return 0;
      }
      bench::write_experiment_csv_header(csv);
      if (experiment == "bridge") {
        sim::BridgeOptions opts;
        if (bridge_mode == "exact") opts.mode = sim::BridgeMode::ExactBridge;
        else if (bridge_mode == "rejection") opts.mode = sim::BridgeMode::Rejection;
        else throw DomainError("unknown bridge mode '" + bridge_mode + "'");
        opts.band = band;
        opts.trials = trials;
        opts.threads = threads;
        const auto est = sim::empirical_bridge_crossing(ws, taus, theta, opts);
        for (std::size_t k = 0; k < est.size(); ++k) {
          bench::ExperimentRow r;
          r.experiment = "bridge_crossing";
          r.n = static_cast<double>(ws.n);
          r.tau = taus[k];
          r.theta = theta;
          r.trials = static_cast<double>(est[k].trials_used);
          r.accepted = static_cast<double>(est[k].accepted);
          r.estimate = est[k].probability_hat;
          r.stderr_ = est[k].standard_error;
          if (taus[k] >= 0.0) r.closed_form = crossing_probability(taus[k], theta, ws.walk_variance());
          bench::write_experiment_csv_row(csv, r);
        }
      } else if (experiment == "stop-error") {
        for (const auto& e : sim::empirical_stop_error(ws, deltas, theta, trials, threads)) {
          bench::ExperimentRow r;
          r.experiment = "stop_error";
          r.n = static_cast<double>(ws.n);
          r.delta = e.delta;
          r.tau = e.tau;
          r.theta = e.theta;
          r.trials = static_cast<double>(e.estimate.trials_used);
          r.accepted = static_cast<double>(e.estimate.accepted);
          r.estimate = e.estimate.probability_hat;
          r.stderr_ = e.estimate.standard_error;
          r.closed_form = e.inequality_closed_form;
          bench::write_experiment_csv_row(csv, r);
        }
      } else if (experiment == "stopping-time") {
        for (double d : deltas) {
          const auto s = sim::empirical_stopping_time(ws, d, trials, threads);
          bench::ExperimentRow r;
          r.experiment = "stopping_time";
          r.n = static_cast<double>(ws.n);
          r.delta = d;
          r.tau = s.tau;
          r.trials = static_cast<double>(s.trials);
          r.accepted = std::round((1.0 - s.censored_fraction) * static_cast<double>(s.trials));
          r.estimate = s.mean_time;
          r.stderr_ = s.stderr_time;
          r.closed_form = s.bound;
          bench::write_experiment_csv_row(csv, r);
        }
      } else {
        throw DomainError("unknown experiment '" + experiment + "'");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace stst::cli
