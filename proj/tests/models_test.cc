// Copyright 2026 The NELM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nelm/models.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "testing/oracles.h"

namespace nelm {
namespace {

using testing::Str;

// Every string over k symbols with length 1..max_len.
std::vector<Str> StringsUpTo(std::size_t k, std::size_t max_len) {
  std::vector<Str> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    for (Str& s : testing::AllStrings(k, len)) out.push_back(std::move(s));
  }
  return out;
}

void ExpectRelNear(double got, double want, double tol) {
  if (want == 0.0) {
    EXPECT_EQ(got, 0.0);
  } else {
    EXPECT_NEAR(got / want, 1.0, tol) << got << " vs " << want;
  }
}

std::shared_ptr<CountEmission> AbabTable(int n) {
  return std::make_shared<CountEmission>(std::make_shared<CountStore>(
      CountStore::Build(Corpus::FromSymbols({0, 1, 0, 1}), n, 3)));
}

TEST(BasicModelTest, UniformOrderZero) {
  BasicModel m(0, std::make_shared<DenseEmission>(2, 0));
  EXPECT_EQ(m.Predict(Str{}, 0), 0.5);
  EXPECT_EQ(m.Predict(Str{1, 0, 1}, 1), 0.5);
  EXPECT_EQ(m.Probability(Str{0, 1, 1}).ToDouble(), 0.125);
}

TEST(BasicModelTest, AbabBigram) {
  BasicModel m(1, AbabTable(1));
  EXPECT_EQ(m.Predict(Str{1, 0}, 1), 1.0);
  EXPECT_EQ(m.Predict(Str{0}, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.Predict(Str{}, 0), 3.0 / 7.0);
}

TEST(MixtureModelTest, LambdaWeights) {
  auto table = std::make_shared<DenseEmission>(2, 2);
  MixtureModel m(Semantics::kInterpolated, 2, table, DenseUntiedScheme(*table));
  m.set_lambda(table->StateOf(Str{0, 1}), 0.3);
  m.set_lambda(table->StateOf(Str{1}), 0.6);
  auto w = m.LambdaWeights(Str{0, 1});
  ASSERT_EQ(w.size(), 3u);
  EXPECT_DOUBLE_EQ(w[2], 0.3);
  EXPECT_DOUBLE_EQ(w[1], 0.42);
  EXPECT_DOUBLE_EQ(w[0], 0.28);
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-15);
  m.SetAllLambdas(1.0);
  EXPECT_EQ(m.LambdaWeights(Str{0, 1}), (std::vector<double>{0.0, 0.0, 1.0}));
  auto one = std::make_shared<DenseEmission>(2, 1);
  MixtureModel half(Semantics::kInterpolated, 1, one, DenseUntiedScheme(*one));
  EXPECT_EQ(half.LambdaWeights(Str{1}), (std::vector<double>{0.5, 0.5}));
}

TEST(MixtureModelTest, InterpolatedHandExample) {
  auto table = std::make_shared<DenseEmission>(2, 1);
  table->SetRow(Str{0}, std::vector<double>{0.0, 1.0});
  MixtureModel m(Semantics::kInterpolated, 1, table, DenseUntiedScheme(*table));
  EXPECT_EQ(m.Interpolated(Str{0}, 1), 0.75);
  m.SetAllLambdas(0.0);
  EXPECT_EQ(m.Interpolated(Str{0}, 1), 0.5);
  EXPECT_EQ(m.Interpolated(Str{1, 0}, 0), 0.5);
}

TEST(MixtureModelTest, LambdaValidation) {
  auto table = std::make_shared<DenseEmission>(2, 1);
  MixtureModel m(Semantics::kNonEmitting, 1, table, DenseUntiedScheme(*table));
  EXPECT_EQ(m.lambdas()[0], 1.0);
  EXPECT_EQ(m.lambdas()[1], 0.5);
  EXPECT_THROW(m.set_lambda(1, 1.5), NumericError);
  EXPECT_THROW(m.set_lambda(1, NAN), NumericError);
  EXPECT_THROW(m.set_lambda(0, 0.5), UsageError);
  EXPECT_THROW(m.set_lambda(99, 0.5), UsageError);
  m.SetAllLambdas(0.2);
  EXPECT_EQ(m.lambdas()[0], 1.0);
  EXPECT_EQ(m.StateLambda(kNoState), 0.0);
  EXPECT_EQ(m.StateLambda(kRootState), 1.0);
}

TEST(MixtureModelTest, UnseenStatesDescend) {
  // Context "c" never occurs, so its prediction is the order-0 estimate.
  auto table = AbabTable(1);
  MixtureModel m(Semantics::kInterpolated, 1, table, UntiedScheme(table->store()));
  EXPECT_DOUBLE_EQ(m.Interpolated(Str{2}, 0), 3.0 / 7.0);
  MixtureModel e = m.WithSemantics(Semantics::kNonEmitting);
  EXPECT_DOUBLE_EQ(e.Conditionals(Str{2, 0}).back(), 3.0 / 7.0);
}

class RandomModelTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    rng_.seed(1000 + GetParam());
    k_ = 2 + GetParam() % 2;
    n_ = GetParam() % 4;
    params_ = testing::RandomParams(k_, n_, rng_, GetParam() % 3 == 0);
  }
  Str RandomString(std::size_t len) {
    std::uniform_int_distribution<Symbol> sym(0, static_cast<Symbol>(k_ - 1));
    Str s(len);
    for (Symbol& v : s) v = sym(rng_);
    return s;
  }
  std::mt19937_64 rng_;
  std::size_t k_ = 2;
  int n_ = 1;
  testing::Params params_;
};

TEST_P(RandomModelTest, InterpolatedMatchesRecursion) {
  MixtureModel m = testing::ToModel(params_, Semantics::kInterpolated);
  for (const Str& h : StringsUpTo(k_, 4)) {
    double sum = 0.0;
    for (Symbol y = 0; y < k_; ++y) {
      const double p = m.Interpolated(h, y);
      EXPECT_NEAR(p, testing::InterpOracle(params_, h, y), 1e-14);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    // Weighted sum of the per-order deltas.
    const auto w = m.LambdaWeights(h);
    double mixed = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      mixed += w[i] * params_.Delta(testing::Suffix(h, i), h.back());
    }
    EXPECT_NEAR(mixed, testing::InterpOracle(params_, h, h.back()), 1e-12);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Str x = RandomString(12);
    ExpectRelNear(m.Probability(x).ToDouble(), testing::InterpStringOracle(params_, x), 1e-12);
  }
}

TEST_P(RandomModelTest, NonEmittingMatchesRecursion) {
  MixtureModel m = testing::ToModel(params_, Semantics::kNonEmitting);
  for (int trial = 0; trial < 10; ++trial) {
    const Str x = RandomString(8);
    ExpectRelNear(m.Probability(x).ToDouble(), testing::NonEmitOracle(params_, {}, x), 1e-9);
    const auto cond = m.Conditionals(x);
    double prod = 1.0;
    for (double c : cond) prod *= c;
    ExpectRelNear(prod, m.Probability(x).ToDouble(), 1e-9);
  }
  for (const Str& ctx : StringsUpTo(k_, static_cast<std::size_t>(n_))) {
    const Str y = RandomString(5);
    ExpectRelNear(m.NonEmittingFromState(ctx, y).ToDouble(),
                  testing::NonEmitOracle(params_, ctx, y), 1e-9);
  }
}

TEST_P(RandomModelTest, ConditionalsNormalize) {
  for (Semantics sem : {Semantics::kInterpolated, Semantics::kNonEmitting}) {
    MixtureModel m = testing::ToModel(params_, sem);
    for (const Str& h : StringsUpTo(k_, 4)) {
      double sum = 0.0;
      for (Symbol y = 0; y < k_; ++y) sum += m.Conditionals(testing::Append(h, y)).back();
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST_P(RandomModelTest, StringsSumToOne) {
  for (Semantics sem : {Semantics::kInterpolated, Semantics::kNonEmitting}) {
    MixtureModel m = testing::ToModel(params_, sem);
    for (std::size_t len = 1; len <= 6; ++len) {
      double total = 0.0;
      for (const Str& x : testing::AllStrings(k_, len)) total += m.Probability(x).ToDouble();
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST_P(RandomModelTest, GeneralFormsMatchRecursion) {
  testing::GeneralParams g = testing::RandomGeneral(k_, n_, rng_);
  MixtureModel interp = testing::ToGeneralModel(g, Semantics::kInterpolated);
  MixtureModel nonemit = testing::ToGeneralModel(g, Semantics::kNonEmitting);
  EXPECT_EQ(interp.hierarchy(), Hierarchy::kGeneral);
  for (const Str& h : StringsUpTo(k_, 4)) {
    for (Symbol y = 0; y < k_; ++y) {
      EXPECT_NEAR(interp.Interpolated(h, y), testing::GeneralInterpOracle(g, h, y), 1e-14);
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Str x = RandomString(7);
    ExpectRelNear(nonemit.Probability(x).ToDouble(), testing::GeneralNonEmitOracle(g, {}, x),
                  1e-9);
  }
  for (std::size_t len = 1; len <= 5; ++len) {
    double total = 0.0;
    for (const Str& x : testing::AllStrings(k_, len)) total += nonemit.Probability(x).ToDouble();
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST_P(RandomModelTest, ToBasicReproducesInterpolated) {
  MixtureModel m = testing::ToModel(params_, Semantics::kInterpolated);
  BasicModel b = ToBasic(m);
  EXPECT_EQ(b.order(), n_);
  for (std::size_t len = 1; len <= 8; ++len) {
    for (const Str& x : testing::AllStrings(2, len)) {
      ExpectRelNear(b.Probability(x).ToDouble(), m.Probability(x).ToDouble(), 1e-12);
    }
  }
  // Markov property of interpolated models.
  for (int trial = 0; trial < 20; ++trial) {
    const Str x = RandomString(10);
    const Str tail = testing::Suffix(x, static_cast<std::size_t>(n_) + 1);
    EXPECT_NEAR(m.Conditionals(x).back(), m.Conditionals(tail).back(), 1e-14);
  }
}

TEST_P(RandomModelTest, NonEmittingFromBasicIsEquivalent) {
  auto table = std::make_shared<DenseEmission>(DenseEmission::Random(k_, n_, rng_));
  BasicModel b(n_, table);
  MixtureModel m = NonEmittingFromBasic(b);
  EXPECT_EQ(m.semantics(), Semantics::kNonEmitting);
  for (int trial = 0; trial < 30; ++trial) {
    const Str x = RandomString(1 + trial % 10);
    ExpectRelNear(m.Probability(x).ToDouble(), b.Probability(x).ToDouble(), 1e-12);
  }
}

TEST_P(RandomModelTest, OrderZeroAndOneEquivalences) {
  const testing::Params low = testing::RandomParams(k_, n_ % 2, rng_, GetParam() % 3 == 0);
  MixtureModel interp = testing::ToModel(low, Semantics::kInterpolated);
  MixtureModel nonemit = interp.WithSemantics(Semantics::kNonEmitting);
  for (const Str& x : StringsUpTo(k_, k_ == 2 ? 10 : 6)) {
    ExpectRelNear(nonemit.Probability(x).ToDouble(), interp.Probability(x).ToDouble(), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomModelTest, ::testing::Range(0, 24));

TEST(ConversionTest, OrderZeroToBasicIsDelta) {
  auto table = std::make_shared<DenseEmission>(3, 0);
  table->SetRow(Str{}, std::vector<double>{0.2, 0.5, 0.3});
  MixtureModel m(Semantics::kInterpolated, 0, table, DenseUntiedScheme(*table));
  BasicModel b = ToBasic(m);
  EXPECT_EQ(b.Predict(Str{}, 1), 0.5);
  EXPECT_EQ(b.Predict(Str{2, 2}, 2), 0.3);
  EXPECT_THROW(ToBasic(m.WithSemantics(Semantics::kNonEmitting)), UsageError);
  auto big = std::make_shared<DenseEmission>(2, 6);
  MixtureModel large(Semantics::kInterpolated, 6, big, DenseUntiedScheme(*big));
  EXPECT_THROW(ToBasic(large, 100), UsageError);
}

TEST(ConversionTest, UniformBasicToNonEmitting) {
  BasicModel b(0, std::make_shared<DenseEmission>(2, 0));
  MixtureModel m = NonEmittingFromBasic(b);
  for (std::size_t len = 1; len <= 8; ++len) {
    for (const Str& x : testing::AllStrings(2, len)) {
      EXPECT_EQ(m.Probability(x).ToDouble(), std::exp2(-static_cast<double>(len)));
    }
  }
}

TEST(ConversionTest, AbabBasicToNonEmitting) {
  BasicModel b(1, AbabTable(1));
  MixtureModel m = NonEmittingFromBasic(b);
  for (const Str& x : StringsUpTo(3, 8)) {
    ExpectRelNear(m.Probability(x).ToDouble(), b.Probability(x).ToDouble(), 1e-12);
  }
}

TEST(Lemma1Test, PredictionsDependOnDistantPrefix) {
  MixtureModel m = Lemma1Model();
  for (std::size_t t = 4; t <= 12; ++t) {
    Str zero_prefix(t, 1), one_prefix(t, 1);
    zero_prefix[0] = 0;
    // Both strings end in 1; after "0 1 1" the second order state persists.
    const double after_zero = m.Conditionals(zero_prefix).back();
    const double after_ones = m.Conditionals(one_prefix).back();
    EXPECT_NEAR(after_zero, 0.1, 1e-12) << t;
    EXPECT_NEAR(after_ones, 0.9, 1e-12) << t;
    EXPECT_NEAR(after_ones - after_zero, 0.8, 1e-12);
    // The Markov property fails for every bounded window.
    for (std::size_t p = 1; p + 1 < t; ++p) {
      const Str window = testing::Suffix(zero_prefix, p + 1);
      EXPECT_GT(std::abs(m.Conditionals(window).back() - after_zero), 0.5) << t << " " << p;
    }
    // Final symbol 0 is predicted by the same states.
    Str zero_end = zero_prefix;
    zero_end.back() = 0;
    EXPECT_NEAR(m.Conditionals(zero_end).back(), 0.9, 1e-12);
  }
}

TEST(Lemma1Test, ConfigurableDeltas) {
  Lemma1Params p;
  p.delta0_one = 0.7;
  p.delta2_one_after11 = 0.25;
  MixtureModel m = Lemma1Model(p);
  EXPECT_NEAR(m.Conditionals(Str{0, 1, 1, 1, 1}).back(), 0.25, 1e-12);
  EXPECT_NEAR(m.Conditionals(Str{1, 1, 1, 1, 1}).back(), 0.7, 1e-12);
  double total = 0.0;
  for (const Str& x : testing::AllStrings(2, 6)) total += m.Probability(x).ToDouble();
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace
}  // namespace nelm
