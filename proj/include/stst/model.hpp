#pragma once

// WeightedModel: an ordered list of weighted feature evaluators with a
// per-term drift correction mu, scored as S_t = sum_{i<=t} w_i (X_i(x) - mu_i).
// The decision is sign(S_n - theta); ties go to +1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stst/data.hpp"
#include "stst/detail/random.hpp"
#include "stst/errors.hpp"

namespace stst {

enum class KernelKind { Linear, Rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double sigma = 1.0;  // Rbf only

  void validate() const {
    if (kind == KernelKind::Rbf && !(sigma > 0.0 && std::isfinite(sigma)))
      throw DomainError("RBF sigma must be finite and > 0");
  }

  // Linear: <u, v>. Rbf: exp(-||u - v||^2 / (2 sigma^2)).
  double operator()(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != v.size())
      throw ShapeError("kernel arguments differ in dimension: " + std::to_string(u.size()) +
                       " vs " + std::to_string(v.size()));
    double acc = 0.0;
    if (kind == KernelKind::Linear) {
      for (std::size_t k = 0; k < u.size(); ++k) acc += u[k] * v[k];
      return acc;
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u[k] - v[k];
      acc += d * d;
    }
    return std::exp(-acc / (2.0 * sigma * sigma));
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Term i reads raw coordinate coords[i] of the input.
struct CoordinateTerms {
  std::vector<std::size_t> coords;
  friend bool operator==(const CoordinateTerms&, const CoordinateTerms&) = default;
};

// Term i evaluates kernel(support[i], x).
struct KernelTerms {
  KernelSpec kernel;
  std::vector<std::vector<double>> support;
  friend bool operator==(const KernelTerms&, const KernelTerms&) = default;
};

class WeightedModel {
 public:
  using Evaluators = std::variant<CoordinateTerms, KernelTerms>;

  WeightedModel(std::size_t dim, Evaluators evaluators, std::vector<double> weights,
                std::vector<double> mu, double theta)
      : dim_(dim),
        evaluators_(std::move(evaluators)),
        weights_(std::move(weights)),
        mu_(std::move(mu)),
        theta_(theta) {
    check();
  }

  static WeightedModel linear(std::size_t dim, std::vector<std::size_t> coords,
                              std::vector<double> weights, double theta = 0.0) {
    std::vector<double> mu(weights.size(), 0.0);
    return WeightedModel(dim, CoordinateTerms{std::move(coords)}, std::move(weights),
                         std::move(mu), theta);
  }

  // All dim coordinates in natural order.
  static WeightedModel linear(std::vector<double> weights, double theta = 0.0) {
    std::vector<std::size_t> coords(weights.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    const auto dim = weights.size();
    return linear(dim, std::move(coords), std::move(weights), theta);
  }

  static WeightedModel kernel(KernelSpec spec, std::vector<std::vector<double>> support,
                              std::vector<double> alphas, double theta = 0.0) {
    const std::size_t dim = support.empty() ? 0 : support.front().size();
    std::vector<double> mu(alphas.size(), 0.0);
    return WeightedModel(dim, KernelTerms{spec, std::move(support)}, std::move(alphas),
                         std::move(mu), theta);
  }

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  double theta() const noexcept { return theta_; }
  double weight(std::size_t i) const { return weights_.at(i); }
  double mu(std::size_t i) const { return mu_.at(i); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  const Evaluators& evaluators() const noexcept { return evaluators_; }
  bool is_kernel() const noexcept { return std::holds_alternative<KernelTerms>(evaluators_); }

  // Calibrated var(S_n), carried with the model once known.
  std::optional<double> variance() const noexcept { return variance_; }
  void set_variance(std::optional<double> v) {
    if (v && !(*v > 0.0)) throw DomainError("model variance must be > 0");
    variance_ = v;
  }

  void set_theta(double theta) {
    if (!std::isfinite(theta)) throw DomainError("theta must be finite");
    theta_ = theta;
  }

  void set_mu(std::vector<double> mu) {
    if (mu.size() != size())
      throw ShapeError("mu has " + std::to_string(mu.size()) + " entries, model has " +
                       std::to_string(size()) + " terms");
    mu_ = std::move(mu);
  }

  // Raw evaluator value X_i(x), before weighting and correction.
  double evaluate(std::size_t i, std::span<const double> x) const {
    if (x.size() != dim_)
      throw ShapeError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                       std::to_string(dim_));
    return evaluate_unchecked(i, x);
  }

  double evaluate_unchecked(std::size_t i, std::span<const double> x) const {
    if (const auto* c = std::get_if<CoordinateTerms>(&evaluators_)) return x[c->coords[i]];
    const auto& k = std::get<KernelTerms>(evaluators_);
    return k.kernel(k.support[i], x);
  }

  // Terms reordered so that new term j is old term order[j].
  WeightedModel reordered(std::span<const std::size_t> order) const {
    if (order.size() != size()) throw ShapeError("permutation size mismatch");
    std::vector<double> w(size()), m(size());
    Evaluators ev = std::visit(
        [&](const auto& terms) -> Evaluators {
          using T = std::decay_t<decltype(terms)>;
          T out;
          if constexpr (std::is_same_v<T, CoordinateTerms>) {
            out.coords.resize(size());
            for (std::size_t j = 0; j < size(); ++j) out.coords[j] = terms.coords.at(order[j]);
          } else {
            out.kernel = terms.kernel;
            out.support.resize(size());
            for (std::size_t j = 0; j < size(); ++j) out.support[j] = terms.support.at(order[j]);
          }
          return out;
        },
        evaluators_);
    for (std::size_t j = 0; j < size(); ++j) {
      w[j] = weights_.at(order[j]);
      m[j] = mu_.at(order[j]);
    }
    WeightedModel out(dim_, std::move(ev), std::move(w), std::move(m), theta_);
    out.variance_ = variance_;
    return out;
  }

  friend bool operator==(const WeightedModel&, const WeightedModel&) = default;

 private:
  void check() const {
    if (weights_.empty()) throw ShapeError("a model needs at least one term");
    if (mu_.size() != weights_.size()) throw ShapeError("mu and weights differ in length");
    if (!std::isfinite(theta_)) throw DomainError("theta must be finite");
    std::visit(
        [&](const auto& terms) {
          using T = std::decay_t<decltype(terms)>;
          if constexpr (std::is_same_v<T, CoordinateTerms>) {
            if (terms.coords.size() != weights_.size())
              throw ShapeError("coordinate list and weights differ in length");
            for (auto c : terms.coords)
              if (c >= dim_)
                throw ShapeError("coordinate " + std::to_string(c) + " outside dimension " +
                                 std::to_string(dim_));
          } else {
            terms.kernel.validate();
            if (terms.support.size() != weights_.size())
              throw ShapeError("support vectors and weights differ in length");
            for (const auto& sv : terms.support)
              if (sv.size() != dim_) throw ShapeError("support vector dimension mismatch");
          }
        },
        evaluators_);
  }

  std::size_t dim_ = 0;
  Evaluators evaluators_;
  std::vector<double> weights_;
  std::vector<double> mu_;
  double theta_ = 0.0;
  std::optional<double> variance_;
};

// w_i (X_i(x) - mu_i) for zero-based term index i.
inline double score_term(const WeightedModel& model, std::size_t i, std::span<const double> x) {
  if (i >= model.size())
    throw ShapeError("term index " + std::to_string(i) + " out of range for " +
                     std::to_string(model.size()) + " terms");
  return model.weight(i) * (model.evaluate(i, x) - model.mu(i));
}

// Corrected full score S_n.
inline double full_score(const WeightedModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw ShapeError("input dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i)
    s += model.weights()[i] * (model.evaluate_unchecked(i, x) - model.mu()[i]);
  return s;
}

// S_n - theta; unaffected by recalibration that shifts mu and theta together.
inline double decision_value(const WeightedModel& model, std::span<const double> x) {
  return full_score(model, x) - model.theta();
}

// ---------------------------------------------------------------------------
// Model container (text). Doubles are printed in shortest round-trip form so
// save -> load reproduces every score bit-for-bit.
//
//   stst-model 1
//   dim <d>
//   theta <theta>
//   kernel coordinate | linear | rbf <sigma>
//   variance <v>                      (optional)
//   terms <n>
//   <w> <mu> <coord>                  (coordinate models, 1-based coord)
//   <w> <mu> <idx>:<val> ...          (kernel models, sparse support vector)
//   verify <m>                        (optional)
//   <decision value> <idx>:<val> ...
//   end
// ---------------------------------------------------------------------------

struct VerificationRow {
  double decision = 0.0;  // exporter's S_n - theta
  SparseVector x;
};

struct ModelContainer {
  WeightedModel model;
  std::vector<VerificationRow> verification;
};

namespace detail {

inline void write_sparse_row(std::ostream& out, const SparseVector& v) {
  for (std::size_t k = 0; k < v.nnz(); ++k)
    out << ' ' << v.indices[k] + 1 << ':' << format_double(v.values[k]);
}

inline SparseVector parse_sparse_tokens(std::istringstream& in, std::size_t dim,
                                        std::size_t line_no) {
  SparseVector v;
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    std::size_t idx = 0;
    double val = 0.0;
    if (colon == std::string::npos || !parse_number(std::string_view(tok).substr(0, colon), idx) ||
        idx == 0 || idx > dim ||
        !parse_number(std::string_view(tok).substr(colon + 1), val))
      throw ModelFormatError("line " + std::to_string(line_no) + ": bad sparse entry '" + tok + "'");
    if (!v.indices.empty() && idx - 1 <= v.indices.back())
      throw ModelFormatError("line " + std::to_string(line_no) + ": indices not ascending");
    v.indices.push_back(idx - 1);
    v.values.push_back(val);
  }
  return v;
}

}  // namespace detail

inline void save_model(std::ostream& out, const WeightedModel& model,
                       std::span<const VerificationRow> verification = {}) {
  using detail::format_double;
  out << "stst-model 1\n";
  out << "dim " << model.dim() << '\n';
  out << "theta " << format_double(model.theta()) << '\n';
  const auto* kt = std::get_if<KernelTerms>(&model.evaluators());
  if (!kt)
    out << "kernel coordinate\n";
  else if (kt->kernel.kind == KernelKind::Linear)
    out << "kernel linear\n";
  else
    out << "kernel rbf " << format_double(kt->kernel.sigma) << '\n';
  if (model.variance()) out << "variance " << format_double(*model.variance()) << '\n';
  out << "terms " << model.size() << '\n';
  for (std::size_t i = 0; i < model.size(); ++i) {
    out << format_double(model.weight(i)) << ' ' << format_double(model.mu(i));
    if (!kt)
      out << ' ' << std::get<CoordinateTerms>(model.evaluators()).coords[i] + 1;
    else
      detail::write_sparse_row(out, SparseVector::from_dense(kt->support[i]));
    out << '\n';
  }
  if (!verification.empty()) {
    out << "verify " << verification.size() << '\n';
    for (const auto& row : verification) {
      out << format_double(row.decision);
      detail::write_sparse_row(out, row.x);
      out << '\n';
    }
  }
  out << "end\n";
}

inline ModelContainer load_model_container(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto next_line = [&](const char* what) -> std::istringstream {
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = detail::trim(line);
      if (!t.empty() && t.front() != '#') return std::istringstream(std::string(t));
    }
    throw ModelFormatError(std::string("unexpected end of model container, expected ") + what);
  };
  auto fail = [&](const std::string& msg) -> ModelFormatError {
    return ModelFormatError("line " + std::to_string(line_no) + ": " + msg);
  };
  auto read_double = [&](std::istringstream& s, const char* what) {
    std::string tok;
    double v = 0.0;
    if (!(s >> tok) || !detail::parse_number(tok, v) || !std::isfinite(v))
      throw fail(std::string("bad ") + what);
    return v;
  };
  auto expect_key = [&](std::istringstream& s, const char* key) {
    std::string k;
    if (!(s >> k) || k != key) throw fail(std::string("expected '") + key + "'");
  };

  {
    auto s = next_line("header");
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "stst-model")
      throw fail("not an stst-model container");
    if (version != 1) throw fail("unsupported container version " + std::to_string(version));
  }
  std::size_t dim = 0;
  {
    auto s = next_line("dim");
    expect_key(s, "dim");
    if (!(s >> dim) || dim == 0) throw fail("bad dim");
  }
  double theta = 0.0;
  {
    auto s = next_line("theta");
    expect_key(s, "theta");
    theta = read_double(s, "theta");
  }
  bool coordinate = false;
  KernelSpec kspec;
  {
    auto s = next_line("kernel");
    expect_key(s, "kernel");
    std::string kind;
    s >> kind;
    if (kind == "coordinate") {
      coordinate = true;
    } else if (kind == "linear") {
      kspec.kind = KernelKind::Linear;
    } else if (kind == "rbf") {
      kspec.kind = KernelKind::Rbf;
      kspec.sigma = read_double(s, "rbf sigma");
      if (!(kspec.sigma > 0.0)) throw fail("rbf sigma must be > 0");
    } else {
      throw fail("unsupported kernel kind '" + kind + "'");
    }
  }
  std::optional<double> variance;
  std::size_t n = 0;
  {
    auto s = next_line("terms");
    std::string key;
    s >> key;
    if (key == "variance") {
      variance = read_double(s, "variance");
      s = next_line("terms");
      s >> key;
    }
    if (key != "terms") throw fail("expected 'terms'");
    if (!(s >> n) || n == 0) throw fail("bad term count");
  }
  std::vector<double> w(n), mu(n);
  CoordinateTerms coords;
  KernelTerms kterms{kspec, {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto s = next_line("term row");
    w[i] = read_double(s, "weight");
    mu[i] = read_double(s, "mu");
    if (coordinate) {
      std::size_t c = 0;
      if (!(s >> c) || c == 0 || c > dim) throw fail("bad coordinate index");
      coords.coords.push_back(c - 1);
    } else {
      kterms.support.push_back(detail::parse_sparse_tokens(s, dim, line_no).to_dense(dim));
    }
  }
  std::vector<VerificationRow> verification;
  {
    auto s = next_line("end");
    std::string key;
    s >> key;
    if (key == "verify") {
      std::size_t m = 0;
      if (!(s >> m)) throw fail("bad verification count");
      for (std::size_t k = 0; k < m; ++k) {
        auto r = next_line("verification row");
        VerificationRow row;
        row.decision = read_double(r, "decision value");
        row.x = detail::parse_sparse_tokens(r, dim, line_no);
        verification.push_back(std::move(row));
      }
      s = next_line("end");
      s >> key;
    }
    if (key != "end") throw fail("expected 'end'");
  }

  try {
    WeightedModel model = coordinate
                              ? WeightedModel(dim, std::move(coords), std::move(w), std::move(mu), theta)
                              : WeightedModel(dim, std::move(kterms), std::move(w), std::move(mu), theta);
    model.set_variance(variance);
    return ModelContainer{std::move(model), std::move(verification)};
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("inconsistent model: ") + e.what());
  }
}

inline WeightedModel load_model(std::istream& in) { return load_model_container(in).model; }

}  // namespace stst
