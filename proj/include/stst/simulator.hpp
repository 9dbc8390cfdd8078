#pragma once

// Monte-Carlo checks of the boundary math on plain random walks
// S_i = X_1 + ... + X_i with i.i.d. steps X = drift + noise.
//
// Every trial draws from its own seed stream (seed, trial index), so results
// are identical for any thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stst/core.hpp"
#include "stst/detail/moments.hpp"
#include "stst/detail/parallel.hpp"
#include "stst/detail/random.hpp"
#include "stst/errors.hpp"

namespace stst::sim {

struct Gaussian {
  double std = 1.0;
};
struct Rademacher {
  double scale = 1.0;  // +/- scale with equal probability
};
struct UniformSym {
  double half_width = 1.0;  // uniform on [-h, h]
};

using StepKind = std::variant<Gaussian, Rademacher, UniformSym>;

struct WalkSpec {
  std::size_t n = 1000;
  StepKind step = Gaussian{1.0};
  double drift = 0.0;  // added to every step
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1) throw DomainError("walk length must be >= 1");
    const double p = std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Gaussian>) return s.std;
          else if constexpr (std::is_same_v<T, Rademacher>) return s.scale;
          else return s.half_width;
        },
        step);
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("step scale must be finite and > 0");
    if (!std::isfinite(drift)) throw DomainError("drift must be finite");
  }

  // Variance of one step.
  double step_variance() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Gaussian>) return s.std * s.std;
          else if constexpr (std::is_same_v<T, Rademacher>) return s.scale * s.scale;
          else return s.half_width * s.half_width / 3.0;
        },
        step);
  }

  double walk_variance() const { return static_cast<double>(n) * step_variance(); }

  // sup |X|; infinite for Gaussian steps.
  double step_bound() const {
    return std::visit(
        [this](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Gaussian>) return std::numeric_limits<double>::infinity();
          else if constexpr (std::is_same_v<T, Rademacher>) return s.scale + std::abs(drift);
          else return s.half_width + std::abs(drift);
        },
        step);
  }

  bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(step); }
};

namespace detail {

class StepSampler {
 public:
  explicit StepSampler(const WalkSpec& spec) : step_(spec.step), drift_(spec.drift) {}

  double operator()(stst::detail::Engine& eng) {
    return drift_ + std::visit(
                        [&](const auto& s) -> double {
                          using T = std::decay_t<decltype(s)>;
                          if constexpr (std::is_same_v<T, Gaussian>) {
                            return s.std * normal_(eng);
                          } else if constexpr (std::is_same_v<T, Rademacher>) {
                            return (eng() >> 63) ? s.scale : -s.scale;
                          } else {
                            return s.half_width * (2.0 * stst::detail::uniform01(eng) - 1.0);
                          }
                        },
                        step_);
  }

 private:
  StepKind step_;
  double drift_;
  stst::detail::NormalSampler normal_;
};

inline void fill_path(const WalkSpec& spec, std::uint64_t trial, std::span<double> path) {
  auto eng = stst::detail::make_engine(spec.seed, trial);
  StepSampler step(spec);
  double s = 0.0;
  for (auto& v : path) {
    s += step(eng);
    v = s;
  }
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// Prefix sums S_1..S_n of trial `trial` (default: the spec's own stream).
inline std::vector<double> simulate_walk(const WalkSpec& spec, std::uint64_t trial = 0) {
  spec.validate();
  std::vector<double> path(spec.n);
  detail::fill_path(spec, trial, path);
  return path;
}

struct CrossingEstimate {
  double probability_hat = 0.0;
  std::size_t trials_used = 0;
  std::size_t accepted = 0;
  double standard_error = 0.0;
};

inline CrossingEstimate make_estimate(std::size_t hits, std::size_t accepted, std::size_t trials) {
  CrossingEstimate e;
  e.trials_used = trials;
  e.accepted = accepted;
  e.probability_hat = static_cast<double>(hits) / static_cast<double>(accepted);
  e.standard_error =
      std::sqrt(e.probability_hat * (1.0 - e.probability_hat) / static_cast<double>(accepted));
  return e;
}

enum class BridgeMode {
  // Keep walks whose endpoint lands in [theta - band, theta + band].
  Rejection,
  // Gaussian only: B_i = W_i - (i/n)(W_n - theta) pins the endpoint exactly.
  ExactBridge,
};

struct BridgeOptions {
  BridgeMode mode = BridgeMode::ExactBridge;
  // Rejection half-width; <= 0 selects 0.1 sqrt(var(S_n)).
  double band = 0.0;
  std::size_t trials = 100000;
  unsigned threads = 1;
};

// P(max_i S_i >= tau | S_n = theta) for each tau, sharing the same paths so
// the estimates nest (larger tau never gains a crossing).
inline std::vector<CrossingEstimate> empirical_bridge_crossing(const WalkSpec& spec,
                                                               std::span<const double> taus,
                                                               double theta,
                                                               const BridgeOptions& opts) {
  spec.validate();
  if (spec.drift != 0.0) throw DomainError("bridge crossing requires a driftless walk");
  for (double tau : taus)
    if (!(tau > theta)) throw DomainError("bridge crossing requires tau > theta");
  if (opts.trials == 0) throw DomainError("trials must be >= 1");
  if (opts.mode == BridgeMode::ExactBridge && !spec.is_gaussian())
    throw DomainError("exact-bridge mode requires Gaussian steps");
  const double band = opts.band > 0.0 ? opts.band : 0.1 * std::sqrt(spec.walk_variance());

  constexpr double kRejected = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> maxima(opts.trials);
  stst::detail::parallel_for(opts.trials, opts.threads, [&](std::size_t t) {
    thread_local std::vector<double> path;
    path.resize(spec.n);
    detail::fill_path(spec, t, path);
    const double end = path.back();
    double mx = -std::numeric_limits<double>::infinity();
    if (opts.mode == BridgeMode::ExactBridge) {
      const double pull = end - theta;
      const double n = static_cast<double>(spec.n);
      for (std::size_t i = 0; i < spec.n; ++i)
        mx = std::max(mx, path[i] - (static_cast<double>(i + 1) / n) * pull);
    } else {
      if (std::abs(end - theta) > band) {
        maxima[t] = kRejected;
        return;
      }
      for (double v : path) mx = std::max(mx, v);
    }
    maxima[t] = mx;
  });

  std::size_t accepted = 0;
  for (double m : maxima) accepted += !std::isnan(m);
  if (accepted == 0)
    throw InsufficientAcceptanceError("no walk ended inside the conditioning band; widen the band "
                                      "or raise the trial count");
  std::vector<CrossingEstimate> out;
  for (double tau : taus) {
    std::size_t hits = 0;
    for (double m : maxima) hits += !std::isnan(m) && m >= tau;
    out.push_back(make_estimate(hits, accepted, opts.trials));
  }
  return out;
}

inline CrossingEstimate empirical_bridge_crossing(const WalkSpec& spec, double tau, double theta,
                                                  const BridgeOptions& opts) {
  const double taus[] = {tau};
  return empirical_bridge_crossing(spec, taus, theta, opts).front();
}

// Exact P(max S >= tau | S_n < theta) for a driftless Gaussian walk in the
// continuous limit: P(S_n > 2 tau - theta) / P(S_n < theta).
inline double inequality_crossing_probability(double tau, double theta, double variance) {
  if (!(variance > 0.0)) throw DomainError("variance must be > 0");
  if (tau < std::max(theta, 0.0)) return 1.0;
  const double sd = std::sqrt(variance);
  return (1.0 - detail::normal_cdf((2.0 * tau - theta) / sd)) / detail::normal_cdf(theta / sd);
}

struct StopErrorEstimate {
  double delta = 0.0;
  double tau = 0.0;
  double theta = 0.0;
  CrossingEstimate estimate;
  // Continuous-limit value under the same inequality conditioning.
  double inequality_closed_form = 0.0;
};

// Stop-error of the constant boundary tau = theta + crossing_magnitude(delta,
// var(S_n)), conditioned on S_n < theta, for each delta on shared paths.
inline std::vector<StopErrorEstimate> empirical_stop_error(const WalkSpec& spec,
                                                           std::span<const double> deltas,
                                                           double theta, std::size_t trials,
                                                           unsigned threads = 1) {
  spec.validate();
  if (spec.drift != 0.0) throw DomainError("stop-error experiment requires a driftless walk");
  if (trials == 0) throw DomainError("trials must be >= 1");
  const double variance = spec.walk_variance();

  struct PathSummary {
    double max;
    bool accepted;
  };
  std::vector<PathSummary> summary(trials);
  stst::detail::parallel_for(trials, threads, [&](std::size_t t) {
    thread_local std::vector<double> path;
    path.resize(spec.n);
    detail::fill_path(spec, t, path);
    summary[t] = {*std::max_element(path.begin(), path.end()), path.back() < theta};
  });
  std::size_t accepted = 0;
  for (const auto& s : summary) accepted += s.accepted;
  if (accepted == 0)
    throw InsufficientAcceptanceError("no walk ended below theta; raise the trial count");

  std::vector<StopErrorEstimate> out;
  for (double delta : deltas) {
    StopErrorEstimate e;
    e.delta = delta;
    e.theta = theta;
    e.tau = theta + crossing_magnitude({delta, variance});
    std::size_t hits = 0;
    for (const auto& s : summary) hits += s.accepted && s.max >= e.tau;
    e.estimate = make_estimate(hits, accepted, trials);
    e.inequality_closed_form = inequality_crossing_probability(e.tau, theta, variance);
    out.push_back(e);
  }
  return out;
}

inline StopErrorEstimate empirical_stop_error(const WalkSpec& spec, double delta, double theta,
                                              std::size_t trials, unsigned threads = 1) {
  const double deltas[] = {delta};
  return empirical_stop_error(spec, deltas, theta, trials, threads).front();
}

struct StoppingTimeSummary {
  std::size_t n = 0;
  double delta = 0.0;
  double tau = 0.0;
  std::size_t trials = 0;
  double mean_time = 0.0;
  double stddev_time = 0.0;
  double stderr_time = 0.0;
  std::size_t min_time = 0;
  std::size_t median_time = 0;
  std::size_t max_time = 0;
  double censored_fraction = 0.0;  // paths that never crossed (T counted as n)
  double mean_stopped_sum = 0.0;   // E[S_T]
  // Wald: E[S_T - T E[X]] = 0. Mean and standard error of that residual.
  double wald_residual = 0.0;
  double wald_residual_stderr = 0.0;
  // (tau + k) / E[X]; infinite for unbounded steps.
  double bound = 0.0;
};

// First time S_i >= tau with tau = sqrt(var(S_n) ln(1/sqrt(delta))), capped
// at n.
inline StoppingTimeSummary empirical_stopping_time(const WalkSpec& spec, double delta,
                                                   std::size_t trials, unsigned threads = 1) {
  spec.validate();
  if (!(spec.drift > 0.0)) throw DomainError("stopping-time experiment requires drift > 0");
  if (trials < 2) throw DomainError("stopping-time experiment needs >= 2 trials");
  const ConfidenceParams params{delta, spec.walk_variance()};
  const double tau = crossing_magnitude(params);

  std::vector<std::size_t> times(trials);
  std::vector<double> sums(trials);
  stst::detail::parallel_for(trials, threads, [&](std::size_t t) {
    auto eng = stst::detail::make_engine(spec.seed, t);
    detail::StepSampler step(spec);
    double s = 0.0;
    std::size_t i = 0;
    while (i < spec.n) {
      s += step(eng);
      ++i;
      if (s >= tau) break;
    }
    times[t] = i;
    sums[t] = s;
  });

  StoppingTimeSummary r;
  r.n = spec.n;
  r.delta = delta;
  r.tau = tau;
  r.trials = trials;
  stst::detail::RunningMoments tm, wm, sm;
  std::size_t censored = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double T = static_cast<double>(times[t]);
    tm.add(T);
    sm.add(sums[t]);
    wm.add(sums[t] - spec.drift * T);
    censored += times[t] == spec.n && sums[t] < tau;
  }
  r.mean_time = tm.mean;
  r.stddev_time = std::sqrt(tm.sample_variance());
  r.stderr_time = r.stddev_time / std::sqrt(static_cast<double>(trials));
  r.mean_stopped_sum = sm.mean;
  r.wald_residual = wm.mean;
  r.wald_residual_stderr = std::sqrt(wm.sample_variance() / static_cast<double>(trials));
  r.censored_fraction = static_cast<double>(censored) / static_cast<double>(trials);
  std::sort(times.begin(), times.end());
  r.min_time = times.front();
  r.max_time = times.back();
  r.median_time = times[trials / 2];
  const double k = spec.step_bound();
  r.bound = std::isfinite(k) ? expected_stop_bound(params, k, spec.drift)
                             : std::numeric_limits<double>::infinity();
  return r;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("slope fit needs >= 2 points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("log-log fit needs positive values");
    mx += std::log(xs[i]) / n;
    my += std::log(ys[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace stst::sim
