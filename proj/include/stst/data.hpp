#pragma once

// Labeled datasets: the sparse "<label> <index>:<value> ..." text format,
// seeded synthetic two-Gaussian data, and seeded train/test splits.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "stst/detail/random.hpp"
#include "stst/errors.hpp"

namespace stst {

// Zero-based, strictly ascending indices.
struct SparseVector {
  std::vector<std::size_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  void densify_into(std::span<double> out) const {
    if (!indices.empty() && indices.back() >= out.size())
      throw ShapeError("feature index " + std::to_string(indices.back() + 1) +
                       " exceeds dimension " + std::to_string(out.size()));
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] = values[k];
  }

  std::vector<double> to_dense(std::size_t dim) const {
    std::vector<double> out(dim, 0.0);
    densify_into(out);
    return out;
  }

  static SparseVector from_dense(std::span<const double> x) {
    SparseVector v;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) {
        v.indices.push_back(i);
        v.values.push_back(x[i]);
      }
    }
    return v;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct Example {
  SparseVector x;
  int label = +1;  // +1 or -1

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t dim = 0;
  std::string name;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }

  std::size_t count(int label) const {
    std::size_t c = 0;
    for (const auto& e : examples) c += e.label == label;
    return c;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.examples == b.examples && a.dim == b.dim;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

struct ParseOptions {
  // Accept unordered indices (sorted on load) instead of failing.
  bool lenient = false;
  // Declared dimension; 0 means "max index seen".
  std::size_t dim = 0;
};

// Parses the sparse labeled text format. Blank lines and '#' comments are
// skipped. Warnings (label remapping, lenient reordering) go to `warnings`
// when provided.
inline Dataset parse_sparse(std::istream& in, const ParseOptions& opts = {},
                            std::vector<std::string>* warnings = nullptr) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back("line " + std::to_string(line_no) + ": " + std::move(msg));
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = detail::trim(line);
    if (rest.empty() || rest.front() == '#') continue;

    auto next_token = [&rest]() {
      const auto end = rest.find_first_of(" \t");
      std::string_view tok = rest.substr(0, end);
      rest = end == std::string_view::npos ? std::string_view{}
                                           : detail::trim(rest.substr(end));
      return tok;
    };

    Example ex;
    const std::string_view label_tok = next_token();
    double raw_label = 0.0;
    if (!detail::parse_number(label_tok, raw_label) || !std::isfinite(raw_label))
      throw ParseError(line_no, "malformed label '" + std::string(label_tok) + "'");
    if (raw_label > 0.0) {
      ex.label = +1;
      if (raw_label != 1.0) warn("label " + std::string(label_tok) + " mapped to +1");
    } else {
      ex.label = -1;
      if (raw_label != -1.0 && raw_label != 0.0)
        warn("label " + std::string(label_tok) + " mapped to -1");
    }

    bool sorted = true;
    while (!rest.empty()) {
      const std::string_view tok = next_token();
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected <index>:<value>, got '" + std::string(tok) + "'");
      std::size_t index = 0;
      double value = 0.0;
      if (!detail::parse_number(tok.substr(0, colon), index) || index == 0)
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) +
                                      "' (indices are 1-based)");
      if (!detail::parse_number(tok.substr(colon + 1), value) || !std::isfinite(value))
        throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      const std::size_t zero_based = index - 1;
      if (!ex.x.indices.empty() && zero_based <= ex.x.indices.back()) {
        if (!opts.lenient || zero_based == ex.x.indices.back())
          throw ParseError(line_no, "feature indices must be strictly ascending at '" +
                                        std::string(tok) + "'");
        sorted = false;
      }
      ex.x.indices.push_back(zero_based);
      ex.x.values.push_back(value);
      max_index = std::max(max_index, index);
    }

    if (!sorted) {
      warn("unordered feature indices sorted");
      std::vector<std::size_t> order(ex.x.nnz());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return ex.x.indices[a] < ex.x.indices[b]; });
      SparseVector s;
      for (auto k : order) {
        if (!s.indices.empty() && s.indices.back() == ex.x.indices[k])
          throw ParseError(line_no, "duplicate feature index " +
                                        std::to_string(ex.x.indices[k] + 1));
        s.indices.push_back(ex.x.indices[k]);
        s.values.push_back(ex.x.values[k]);
      }
      ex.x = std::move(s);
    }
    ds.examples.push_back(std::move(ex));
  }

  if (ds.examples.empty()) throw EmptyDatasetError("dataset contains no examples");
  if (opts.dim != 0) {
    if (max_index > opts.dim)
      throw ParseError(line_no, "feature index " + std::to_string(max_index) +
                                    " exceeds declared dimension " + std::to_string(opts.dim));
    ds.dim = opts.dim;
  } else {
    ds.dim = max_index;
  }
  return ds;
}

// Writes values in shortest round-trip form so parse_sparse reads back the
// exact same doubles.
inline void write_sparse(std::ostream& out, const Dataset& ds) {
  for (const auto& ex : ds.examples) {
    out << (ex.label > 0 ? "+1" : "-1");
    for (std::size_t k = 0; k < ex.x.nnz(); ++k)
      out << ' ' << ex.x.indices[k] + 1 << ':' << detail::format_double(ex.x.values[k]);
    out << '\n';
  }
}

struct SyntheticSpec {
  std::size_t dim = 20;
  std::size_t n_pos = 500;
  std::size_t n_neg = 500;
  double mean_separation = 4.0;
  double noise_std = 1.0;
  std::uint64_t seed = 7;

  void validate() const {
    if (dim < 1) throw DomainError("synthetic dim must be >= 1");
    if (n_pos < 1 || n_neg < 1) throw DomainError("synthetic class counts must be >= 1");
    if (!(noise_std > 0.0)) throw DomainError("synthetic noise_std must be > 0");
    if (!(mean_separation >= 0.0)) throw DomainError("mean_separation must be >= 0");
  }
};

// Two isotropic Gaussian classes centred at +/-(separation/2) u for a seeded
// random unit direction u. Examples are shuffled; features stored densely.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  auto eng = detail::make_engine(spec.seed, 0);
  detail::NormalSampler normal;

  std::vector<double> u(spec.dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& c : u) {
      c = normal(eng);
      norm += c * c;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& c : u) c /= norm;

  Dataset ds;
  ds.dim = spec.dim;
  ds.name = "synthetic";
  ds.examples.reserve(spec.n_pos + spec.n_neg);
  auto emit = [&](int label, std::size_t count) {
    const double offset = 0.5 * spec.mean_separation * label;
    for (std::size_t k = 0; k < count; ++k) {
      Example ex;
      ex.label = label;
      ex.x.indices.resize(spec.dim);
      ex.x.values.resize(spec.dim);
      for (std::size_t i = 0; i < spec.dim; ++i) {
        ex.x.indices[i] = i;
        ex.x.values[i] = offset * u[i] + spec.noise_std * normal(eng);
      }
      ds.examples.push_back(std::move(ex));
    }
  };
  emit(+1, spec.n_pos);
  emit(-1, spec.n_neg);
  detail::shuffle(ds.examples.begin(), ds.examples.end(), eng);
  return ds;
}

// Seeded uniform split without replacement. Test size is
// round(test_fraction * size).
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw DomainError("test fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * ds.size()));
  if (n_test == 0 || n_test >= ds.size())
    throw DomainError("test fraction " + std::to_string(test_fraction) +
                      " leaves an empty side for " + std::to_string(ds.size()) + " examples");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto eng = detail::make_engine(seed, 1);
  detail::shuffle(order.begin(), order.end(), eng);

  Dataset train, test;
  train.dim = test.dim = ds.dim;
  train.name = ds.name + ":train";
  test.name = ds.name + ":test";
  // Keep original relative order inside each side.
  std::vector<char> in_test(ds.size(), 0);
  for (std::size_t k = 0; k < n_test; ++k) in_test[order[k]] = 1;
  for (std::size_t i = 0; i < ds.size(); ++i)
    (in_test[i] ? test : train).examples.push_back(ds.examples[i]);
  return {std::move(train), std::move(test)};
}

// Examples of one class, in order.
inline Dataset filter_class(const Dataset& ds, int label) {
  Dataset out;
  out.dim = ds.dim;
  out.name = ds.name;
  for (const auto& e : ds.examples)
    if (e.label == label) out.examples.push_back(e);
  return out;
}

}  // namespace stst
