#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "stst/data.hpp"
#include "stst/detail/random.hpp"

namespace stst {
namespace {

Dataset parse(const std::string& text, ParseOptions opts = {},
              std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_sparse(in, opts, warnings);
}

TEST(ParseSparse, BasicLine) {
  const auto ds = parse("+1 1:0.5 3:2.0\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.dim, 3u);
  EXPECT_EQ(ds.examples[0].label, +1);
  EXPECT_EQ(ds.examples[0].x.indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(ds.examples[0].x.values, (std::vector<double>{0.5, 2.0}));
}

TEST(ParseSparse, EmptyFeatureList) {
  const auto ds = parse("-1\n", {0, 5});
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.examples[0].label, -1);
  EXPECT_EQ(ds.examples[0].x.nnz(), 0u);
  EXPECT_EQ(ds.examples[0].x.to_dense(5), std::vector<double>(5, 0.0));
}

TEST(ParseSparse, LabelMapping) {
  std::vector<std::string> warnings;
  const auto ds = parse("0 1:1\n1 1:1\n-1 1:1\n2 1:1\n-3 1:1\n", {}, &warnings);
  EXPECT_EQ(ds.examples[0].label, -1);
  EXPECT_EQ(ds.examples[1].label, +1);
  EXPECT_EQ(ds.examples[2].label, -1);
  EXPECT_EQ(ds.examples[3].label, +1);
  EXPECT_EQ(ds.examples[4].label, -1);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(ParseSparse, CommentsAndBlankLinesSkipped) {
  const auto ds = parse("# header\n\n+1 2:1\n   \n-1 1:3\n");
  EXPECT_EQ(ds.size(), 2u);
}

TEST(ParseSparse, ErrorsCarryLineNumbers) {
  const char* bad[] = {
      "+1 1:1\nx 1:1\n",       // label
      "+1 1:1\n+1 1-1\n",      // missing colon
      "+1 1:1\n+1 0:1\n",      // zero index
      "+1 1:1\n+1 2:abc\n",    // value
      "+1 1:1\n+1 3:1 2:1\n",  // descending
      "+1 1:1\n+1 2:1 2:1\n",  // duplicate
      "+1 1:1\n+1 2:inf\n",    // non-finite
  };
  for (const char* text : bad) {
    try {
      parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << text;
    }
  }
}

TEST(ParseSparse, LenientSortsUnorderedIndices) {
  std::vector<std::string> warnings;
  const auto ds = parse("+1 3:1 1:2\n", {true, 0}, &warnings);
  EXPECT_EQ(ds.examples[0].x.indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(ds.examples[0].x.values, (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(parse("+1 3:1 1:2 3:4\n", {true, 0}), ParseError);
}

TEST(ParseSparse, EmptyInput) {
  EXPECT_THROW(parse(""), EmptyDatasetError);
  EXPECT_THROW(parse("# nothing\n\n"), EmptyDatasetError);
}

TEST(ParseSparse, DeclaredDimension) {
  EXPECT_EQ(parse("+1 2:1\n", {false, 10}).dim, 10u);
  EXPECT_THROW(parse("+1 12:1\n", {false, 10}), ParseError);
}

Dataset random_sparse_dataset(std::uint64_t seed) {
  auto eng = detail::make_engine(seed, 99);
  detail::NormalSampler normal;
  Dataset ds;
  ds.dim = 1 + detail::uniform_index(eng, 60);
  const auto rows = 1 + detail::uniform_index(eng, 20);
  for (std::size_t r = 0; r < rows; ++r) {
    Example ex;
    ex.label = detail::uniform01(eng) < 0.5 ? -1 : +1;
    for (std::size_t i = 0; i < ds.dim; ++i) {
      if (detail::uniform01(eng) < 0.3) {
        ex.x.indices.push_back(i);
        // Mix magnitudes so shortest round-trip printing is exercised.
        double v = normal(eng) * std::pow(10.0, static_cast<double>(detail::uniform_index(eng, 30)) - 15.0);
        if (detail::uniform01(eng) < 0.05) v = 0.0;
        ex.x.values.push_back(v);
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

TEST(ParseSparse, RoundTripIsExact) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto ds = random_sparse_dataset(seed);
    std::ostringstream out;
    write_sparse(out, ds);
    std::istringstream in(out.str());
    const auto back = parse_sparse(in, {false, ds.dim});
    ASSERT_EQ(back, ds) << "seed " << seed;
  }
}

TEST(Synthetic, DeterministicAndShaped) {
  SyntheticSpec spec;
  spec.dim = 5;
  spec.n_pos = 30;
  spec.n_neg = 20;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a.count(+1), 30u);
  EXPECT_EQ(a.count(-1), 20u);
  spec.seed = 8;
  EXPECT_NE(generate_synthetic(spec), a);
}

TEST(Synthetic, ClassMeansSeparatedAlongUnitDirection) {
  SyntheticSpec spec;
  spec.dim = 3;
  spec.n_pos = spec.n_neg = 20000;
  spec.mean_separation = 4.0;
  spec.noise_std = 1.0;
  const auto ds = generate_synthetic(spec);
  std::vector<double> mp(3, 0.0), mn(3, 0.0);
  for (const auto& ex : ds.examples) {
    auto& m = ex.label > 0 ? mp : mn;
    for (std::size_t k = 0; k < ex.x.nnz(); ++k) m[ex.x.indices[k]] += ex.x.values[k] / 20000.0;
  }
  double dist2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    dist2 += (mp[i] - mn[i]) * (mp[i] - mn[i]);
    EXPECT_NEAR(mp[i], -mn[i], 0.05);
  }
  EXPECT_NEAR(std::sqrt(dist2), 4.0, 0.05);
}

TEST(Synthetic, InvalidSpec) {
  SyntheticSpec spec;
  spec.noise_std = 0.0;
  EXPECT_THROW(generate_synthetic(spec), DomainError);
  spec = {};
  spec.n_pos = 0;
  EXPECT_THROW(generate_synthetic(spec), DomainError);
}

TEST(Split, PartitionAndDeterminism) {
  SyntheticSpec spec;
  spec.dim = 2;
  const auto ds = generate_synthetic(spec);
  auto [train, test] = split(ds, 0.3, 4);
  EXPECT_EQ(test.size(), 300u);
  EXPECT_EQ(train.size() + test.size(), ds.size());
  auto [train2, test2] = split(ds, 0.3, 4);
  EXPECT_EQ(train, train2);
  EXPECT_EQ(test, test2);

  // Each example lands on exactly one side (examples are distinct draws).
  std::multiset<std::vector<double>> all, parts;
  for (const auto& e : ds.examples) all.insert(e.x.values);
  for (const auto& e : train.examples) parts.insert(e.x.values);
  for (const auto& e : test.examples) parts.insert(e.x.values);
  EXPECT_EQ(all, parts);
}

TEST(Split, RejectsEmptySides) {
  SyntheticSpec spec;
  spec.n_pos = spec.n_neg = 2;
  const auto ds = generate_synthetic(spec);
  EXPECT_THROW(split(ds, 0.0, 1), DomainError);
  EXPECT_THROW(split(ds, 1.0, 1), DomainError);
  EXPECT_THROW(split(ds, 0.05, 1), DomainError);
  EXPECT_THROW(split(ds, 0.95, 1), DomainError);
}

TEST(Split, ClassCountsFollowHypergeometric) {
  // N = 100 with K = 40 positives, test size 25: mean 10, variance
  // 25 * 0.4 * 0.6 * 75/99.
  Dataset ds;
  ds.dim = 1;
  for (int i = 0; i < 100; ++i) ds.examples.push_back({SparseVector{{0}, {double(i)}}, i < 40 ? +1 : -1});
  const double mean = 10.0;
  const double var = 25.0 * 0.4 * 0.6 * 75.0 / 99.0;
  const int reps = 2000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += static_cast<double>(split(ds, 0.25, r).second.count(+1));
  const double avg = sum / reps;
  EXPECT_LE(std::abs(avg - mean), 4.0 * std::sqrt(var / reps));
}

}  // namespace
}  // namespace stst
