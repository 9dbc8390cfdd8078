#pragma once

// Closed-form mathematics of the constant stopping boundary.
//
// A driftless partial-sum walk S_1..S_n started at 0 and pinned at S_n = theta
// crosses an upward boundary tau (tau > max(0, theta)) with probability
//
//     exp(-2 tau (tau - theta) / var(S_n)),
//
// so choosing |tau| = sqrt(var(S_n) ln(1/sqrt(delta))) at theta = 0 yields a
// stop-error rate of delta. Downward rules are handled through the symmetry
// (S, tau, theta) -> (-S, -tau, -theta) of the walk.

#include <cmath>
#include <limits>
#include <string>

#include "stst/errors.hpp"

namespace stst {

// Which side of theta an early stop predicts. RejectBelow stops when the
// partial score falls below tau (< theta) and predicts -1.
enum class Direction { RejectBelow, RejectAbove };

inline const char* to_string(Direction d) {
  return d == Direction::RejectBelow ? "reject-below" : "reject-above";
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "reject-below" || s == "below") return Direction::RejectBelow;
  if (s == "reject-above" || s == "above") return Direction::RejectAbove;
  throw DomainError("unknown direction '" + s + "'");
}

// Label an early stop produces.
constexpr int stop_label(Direction d) noexcept {
  return d == Direction::RejectBelow ? -1 : +1;
}

struct ConfidenceParams {
  double delta = 0.1;     // target stop-error rate, (0, 1]
  double variance = 1.0;  // var(S_n), squared score units

  void validate() const {
    if (!(delta > 0.0 && delta <= 1.0))
      throw DomainError("delta must lie in (0, 1], got " + std::to_string(delta));
    if (!(variance > 0.0) || !std::isfinite(variance))
      throw DomainError("variance must be finite and > 0, got " +
                        std::to_string(variance));
  }
};

class StoppingRule {
 public:
  StoppingRule(double theta, double tau, Direction direction)
      : theta_(theta), tau_(tau), direction_(direction) {
    if (!std::isfinite(theta) || !std::isfinite(tau))
      throw DomainError("stopping rule thresholds must be finite");
    const bool ok = direction == Direction::RejectBelow ? tau < theta : tau > theta;
    if (!ok)
      throw DegenerateRuleError(std::string("tau must lie strictly ") +
                                (direction == Direction::RejectBelow ? "below" : "above") +
                                " theta for a " + to_string(direction) + " rule");
  }

  // Sentinel rule whose boundary can never be crossed (tau = -inf / +inf).
  static StoppingRule never(double theta, Direction direction) {
    StoppingRule r;
    r.theta_ = theta;
    r.direction_ = direction;
    r.tau_ = direction == Direction::RejectBelow ? -std::numeric_limits<double>::infinity()
                                                 : std::numeric_limits<double>::infinity();
    return r;
  }

  double theta() const noexcept { return theta_; }
  double tau() const noexcept { return tau_; }
  Direction direction() const noexcept { return direction_; }

  // True when the partial score s lies strictly beyond the boundary.
  bool crossed(double s) const noexcept {
    return direction_ == Direction::RejectBelow ? s < tau_ : s > tau_;
  }

  friend bool operator==(const StoppingRule&, const StoppingRule&) = default;

 private:
  StoppingRule() = default;

  double theta_ = 0.0;
  double tau_ = 0.0;
  Direction direction_ = Direction::RejectBelow;
};

// sqrt(variance * ln(1/sqrt(delta))), the boundary's distance from theta.
inline double crossing_magnitude(const ConfidenceParams& params) {
  params.validate();
  // ln(1/sqrt(delta)) = -0.5 ln(delta); avoids cancellation near delta = 1.
  return std::sqrt(params.variance * (-0.5 * std::log(params.delta)));
}

enum class ThresholdMode {
  // tau = theta -/+ crossing_magnitude; exact at theta = 0.
  Constant,
  // Solves exp(-2 tau (tau - theta) / v) = delta for tau in canonical form.
  Exact,
};

inline StoppingRule make_stopping_rule(double theta, const ConfidenceParams& params,
                                       Direction direction,
                                       ThresholdMode mode = ThresholdMode::Constant) {
  const double m = crossing_magnitude(params);
  if (m == 0.0)
    throw DegenerateRuleError("delta = 1 gives tau = theta; no strict rule exists");
  if (!std::isfinite(theta)) throw DomainError("theta must be finite");

  if (mode == ThresholdMode::Constant) {
    return StoppingRule(theta, direction == Direction::RejectBelow ? theta - m : theta + m,
                        direction);
  }
  // Canonical upward orientation: RejectBelow is mapped by negation.
  const double canon_theta = direction == Direction::RejectBelow ? -theta : theta;
  // tau^2 - theta tau - m^2 = 0, larger root.
  const double canon_tau = 0.5 * (canon_theta + std::sqrt(canon_theta * canon_theta + 4.0 * m * m));
  const double tau = direction == Direction::RejectBelow ? -canon_tau : canon_tau;
  return StoppingRule(theta, tau, direction);
}

// P(max_i S_i >= tau | S_n = theta) for a driftless walk from 0, upward form.
inline double crossing_probability(double tau, double theta, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw DomainError("variance must be finite and > 0");
  if (!(tau > theta))
    throw DomainError("crossing_probability needs theta < tau; the pinned endpoint is "
                      "already at or beyond the boundary");
  if (tau < 0.0)
    throw DomainError("crossing_probability needs tau >= 0; the walk starts beyond the "
                      "boundary");
  return std::exp(-2.0 * tau * (tau - theta) / variance);
}

// Same probability for a rule in either orientation.
inline double crossing_probability(const StoppingRule& rule, double variance) {
  if (rule.direction() == Direction::RejectAbove)
    return crossing_probability(rule.tau(), rule.theta(), variance);
  return crossing_probability(-rule.tau(), -rule.theta(), variance);
}

// (sqrt(variance ln(1/sqrt(delta))) + step_bound) / drift: Wald's bound on the
// mean first-crossing time of a walk with positive drift and |X_i| <= step_bound.
inline double expected_stop_bound(const ConfidenceParams& params, double step_bound,
                                  double drift) {
  if (!(drift > 0.0)) throw DomainError("expected_stop_bound requires drift > 0");
  if (!(step_bound >= 0.0)) throw DomainError("step bound must be >= 0");
  return (crossing_magnitude(params) + step_bound) / drift;
}

}  // namespace stst
