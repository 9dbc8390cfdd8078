#pragma once

// Pegasos-style linear SVM training, and import of externally trained kernel
// models through the model container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <vector>

#include "stst/data.hpp"
#include "stst/detail/random.hpp"
#include "stst/errors.hpp"
#include "stst/model.hpp"

namespace stst {

struct TrainConfig {
  double lambda = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  // Learn a bias through an always-1 extra coordinate. The bias is folded into
  // theta and never becomes an early-stopping term.
  bool bias = true;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    if (epochs < 1) throw DomainError("epochs must be >= 1");
  }

  // Pegasos regularization matching SVM cost C on m examples.
  static double lambda_from_c(double c, std::size_t m) { return 1.0 / (c * static_cast<double>(m)); }
};

struct TrainResult {
  WeightedModel model;
  // Regularized hinge objective lambda/2 ||w||^2 + mean hinge, after each epoch.
  std::vector<double> objective;
};

namespace detail {

inline double sparse_dot(const std::vector<double>& w, const SparseVector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.nnz(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

}  // namespace detail

// Pegasos without the projection step: at step t pick a random example,
// eta = 1/(lambda t), shrink w by (1 - eta lambda) and add eta y x on a
// margin violation. One epoch is |train| steps.
inline TrainResult train_linear_with_history(const Dataset& train, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw TrainingError("training set is empty");
  if (train.count(+1) == 0 || train.count(-1) == 0)
    throw TrainingError("training set must contain both classes");
  const std::size_t dim = train.dim;
  if (dim == 0) throw TrainingError("training set has dimension 0");

  // w stored as scale * v so the shrink step is O(1).
  std::vector<double> v(dim, 0.0);
  double v_bias = 0.0;
  double scale = 1.0;
  const double bias_feature = config.bias ? 1.0 : 0.0;
  auto eng = detail::make_engine(config.seed, 3);
  const std::size_t m = train.size();

  auto objective = [&] {
    double norm2 = v_bias * v_bias;
    for (double c : v) norm2 += c * c;
    norm2 *= scale * scale;
    double hinge = 0.0;
    for (const auto& ex : train.examples) {
      const double margin = ex.label * scale * (detail::sparse_dot(v, ex.x) + v_bias * bias_feature);
      hinge += std::max(0.0, 1.0 - margin);
    }
    return 0.5 * config.lambda * norm2 + hinge / static_cast<double>(m);
  };

  TrainResult result{WeightedModel::linear(std::vector<double>(dim, 0.0)), {}};
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t step = 0; step < m; ++step) {
      ++t;
      const auto& ex = train.examples[detail::uniform_index(eng, m)];
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const double margin = ex.label * scale * (detail::sparse_dot(v, ex.x) + v_bias * bias_feature);
      const double shrink = 1.0 - eta * config.lambda;
      if (shrink == 0.0) {
        // t = 1: w collapses to 0 before the update.
        std::fill(v.begin(), v.end(), 0.0);
        v_bias = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step_size = eta * ex.label / scale;
        for (std::size_t k = 0; k < ex.x.nnz(); ++k) v[ex.x.indices[k]] += step_size * ex.x.values[k];
        v_bias += step_size * bias_feature;
      }
      if (scale < 1e-100) {
        for (auto& c : v) c *= scale;
        v_bias *= scale;
        scale = 1.0;
      }
    }
    result.objective.push_back(objective());
  }

  std::vector<double> w(dim);
  for (std::size_t i = 0; i < dim; ++i) w[i] = scale * v[i];
  const double bias = scale * v_bias * bias_feature;
  // sign(w.x + b) == sign(S_n - theta) with theta = -b.
  result.model = WeightedModel::linear(std::move(w), -bias);
  return result;
}

inline WeightedModel train_linear(const Dataset& train, const TrainConfig& config) {
  return train_linear_with_history(train, config).model;
}

inline double accuracy(const WeightedModel& model, const Dataset& data) {
  std::size_t correct = 0;
  std::vector<double> dense;
  for (const auto& ex : data.examples) {
    dense = ex.x.to_dense(model.dim());
    correct += (decision_value(model, dense) >= 0.0 ? +1 : -1) == ex.label;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Loads a container and checks every bundled verification row against the
// model's own decision value (relative tolerance 1e-6, absolute floor 1e-6
// for decisions near zero).
inline WeightedModel import_kernel_model(std::istream& in) {
  ModelContainer c = load_model_container(in);
  for (std::size_t k = 0; k < c.verification.size(); ++k) {
    const auto& row = c.verification[k];
    if (!row.x.indices.empty() && row.x.indices.back() >= c.model.dim())
      throw ModelFormatError("verification row " + std::to_string(k) + " exceeds model dimension");
    const auto x = row.x.to_dense(c.model.dim());
    const double got = decision_value(c.model, x);
    const double tol = 1e-6 * std::max(1.0, std::abs(row.decision));
    if (!(std::abs(got - row.decision) <= tol))
      throw ModelFormatError("verification row " + std::to_string(k) + ": model decision " +
                             detail::format_double(got) + " disagrees with exporter value " +
                             detail::format_double(row.decision));
  }
  return std::move(c.model);
}

}  // namespace stst
