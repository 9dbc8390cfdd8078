// Trains a linear model on synthetic data, calibrates it, and compares
// attentive and full prediction on the held-out split.

#include <cstdio>

#include "stst/calibration.hpp"
#include "stst/data.hpp"
#include "stst/predictor.hpp"
#include "stst/trainer.hpp"

int main() {
  const auto data = stst::generate_synthetic({});
  auto [train, test] = stst::split(data, 0.3, 11);
  auto [fit, holdout] = stst::split(train, 0.25, 12);

  stst::TrainConfig cfg;
  cfg.lambda = stst::TrainConfig::lambda_from_c(1.0, fit.size());
  cfg.epochs = 20;
  auto model = stst::train_linear(fit, cfg);
  model = stst::permute_terms(model, 5);

  const auto direction = stst::Direction::RejectBelow;
  const auto report = stst::calibrate(model, holdout, stst::centering_class(direction));
  model = stst::apply_calibration(model, report);
  const auto rule = stst::make_stopping_rule(model.theta(), {0.1, report.variance_hat}, direction);

  const auto full = stst::predict_all(model, test, [&](auto x) { return stst::full_predict(model, x); });
  const auto att = stst::predict_all(model, test, [&](auto x) { return stst::attentive_predict(model, x, rule); });

  double terms = 0.0;
  for (const auto& p : att) terms += static_cast<double>(p.terms_evaluated);
  std::printf("theta %.4f  tau %.4f  var %.4f\n", rule.theta(), rule.tau(), report.variance_hat);
  std::printf("mean terms %.2f of %zu\n", terms / static_cast<double>(att.size()), model.size());
  std::printf("stop-error | full=+1: %.4f\n", *stst::measure_stop_error(att, full, +1));
  return 0;
}
