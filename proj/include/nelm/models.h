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

// Basic, interpolated and non-emitting Markov models.
//
// A mixture model of order n carries emitting probabilities delta_i(y|x^i)
// for i = 0..n and per-state lambda parameters. In the hierarchical
// parameterization lambda_i(x^i) is the probability of using state x^i rather
// than falling to its suffix x_2^i; lambda_0 = 1 and states that were never
// followed by a symbol in training get lambda = 0.
//
// Interpolated semantics re-enter the chain x^n -> x^{n-1} -> ... -> empty at
// every step. Non-emitting semantics make the fall permanent: after emitting
// y from x^i the model continues from x^i y (truncated to n symbols), so the
// state order is a hidden variable carried along the string.

#ifndef NELM_MODELS_H_
#define NELM_MODELS_H_

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "nelm/emission.h"
#include "nelm/numeric.h"
#include "nelm/tying.h"
#include "nelm/types.h"

namespace nelm {

// Any model assigning probabilities to finite strings of a given length.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual std::size_t alphabet_size() const = 0;
  virtual int order() const = 0;

  // p(x_t | x^{t-1}) for t = 1..T, starting from the empty context.
  virtual std::vector<double> Conditionals(std::span<const Symbol> x) const = 0;

  // p(x^T | T). The default multiplies the conditionals.
  virtual ExtScalar Probability(std::span<const Symbol> x) const;

  double Log2Prob(std::span<const Symbol> x) const { return Probability(x).Log2(); }
};

// Order-n Markov model: p(y | history) = delta_m(y | last m symbols) with
// m = min(n, |history|). A context with no counts uses its longest counted
// suffix.
class BasicModel : public SequenceModel {
 public:
  BasicModel(int order, std::shared_ptr<const EmissionTable> delta);

  std::size_t alphabet_size() const override { return delta_->alphabet_size(); }
  int order() const override { return order_; }
  std::vector<double> Conditionals(std::span<const Symbol> x) const override;

  double Predict(std::span<const Symbol> history, Symbol y) const;

  const EmissionTable& emission() const { return *delta_; }
  std::shared_ptr<const EmissionTable> shared_emission() const { return delta_; }

 private:
  int order_;
  std::shared_ptr<const EmissionTable> delta_;
};

enum class Semantics { kInterpolated, kNonEmitting };
enum class Hierarchy { kHierarchical, kGeneral };

std::string_view SemanticsName(Semantics s);
std::string_view HierarchyName(Hierarchy h);

// Parameters of one prediction step for orders 0..top.
struct StepParams {
  int top = 0;
  std::array<StateId, kMaxOrder + 1> state{};
  std::array<double, kMaxOrder + 1> delta{};
  std::array<double, kMaxOrder + 1> lambda{};
};

// Hierarchical non-emitting transition over one symbol. `arrival` holds the
// probability of having generated the prefix and entered order i (before any
// non-emitting descent); `next` (zeroed by the caller, length >= n + 1)
// receives the same for the following time step.
void AdvanceNonEmitting(const StepParams& step, int order,
                        std::span<const ExtScalar> arrival, std::span<ExtScalar> next);

class MixtureModel : public SequenceModel {
 public:
  // Hierarchical parameterization; every class starts at lambda 0.5.
  MixtureModel(Semantics semantics, int order, std::shared_ptr<const EmissionTable> delta,
               TyingScheme tying);

  // General parameterization: weights[state] is a distribution over orders
  // 0..order(state), lambda(j | x^i). Evaluation only.
  static MixtureModel General(Semantics semantics, int order,
                              std::shared_ptr<const EmissionTable> delta,
                              std::vector<std::vector<double>> weights);

  std::size_t alphabet_size() const override { return delta_->alphabet_size(); }
  int order() const override { return order_; }
  Semantics semantics() const { return semantics_; }
  Hierarchy hierarchy() const { return hierarchy_; }
  const TyingScheme& tying() const { return tying_; }
  const EmissionTable& emission() const { return *delta_; }
  std::shared_ptr<const EmissionTable> shared_emission() const { return delta_; }
  MixtureModel WithSemantics(Semantics semantics) const;
  // Same parameters over another table with identical state numbering.
  MixtureModel WithEmission(std::shared_ptr<const EmissionTable> delta) const;

  std::span<const double> lambdas() const { return lambda_; }
  // Class 0 (the empty context) is pinned to 1.
  void set_lambda(ClassId c, double value);
  void SetAllLambdas(double value);

  // lambda for a state id from the emission table: 0 for kNoState, 1 for the
  // empty context.
  double StateLambda(StateId state) const {
    if (state == kNoState) return 0.0;
    if (state == kRootState) return 1.0;
    ClassId c = tying_(state);
    return c == kNoClass ? 0.0 : lambda_[c];
  }
  std::span<const double> GeneralWeights(StateId state) const { return general_.at(state); }

  // Fills `out` for predicting y after `history`; top = min(n, |history|).
  void Step(std::span<const Symbol> history, Symbol y, StepParams& out) const;

  // Distribution over orders 0..min(n, |history|) used to mix delta values
  // after `history` (the product form of the hierarchical parameters).
  std::vector<double> LambdaWeights(std::span<const Symbol> history) const;

  // Mixed prediction p_c(y | history).
  double Interpolated(std::span<const Symbol> history, Symbol y) const;

  // p_e(y | x^i): probability of the string y when starting in the state
  // given by `context`.
  ExtScalar NonEmittingFromState(std::span<const Symbol> context,
                                 std::span<const Symbol> y) const;

  std::vector<double> Conditionals(std::span<const Symbol> x) const override;
  ExtScalar Probability(std::span<const Symbol> x) const override;

 private:
  MixtureModel(Semantics semantics, Hierarchy hierarchy, int order,
               std::shared_ptr<const EmissionTable> delta);

  // Forward pass from `start_order` with unit mass; calls `on_step(total)`
  // after each symbol with the total arrival mass.
  template <typename OnStep>
  ExtScalar RunForward(std::span<const Symbol> context, std::span<const Symbol> y,
                       OnStep on_step) const;

  Semantics semantics_;
  Hierarchy hierarchy_;
  int order_;
  std::shared_ptr<const EmissionTable> delta_;
  TyingScheme tying_;
  std::vector<double> lambda_;
  std::vector<std::vector<double>> general_;
};

// Equivalent basic model of the same order: delta'_i(y|x^i) = p_c(y|x^i) for
// every context of length i <= n. Throws UsageError when k^0..k^n contexts
// exceed `state_limit`.
BasicModel ToBasic(const MixtureModel& interpolated, std::size_t state_limit = 1u << 20);

// Non-emitting model with lambda = 1 everywhere, equivalent to `basic`.
MixtureModel NonEmittingFromBasic(const BasicModel& basic,
                                  std::size_t state_limit = 1u << 20);

// The order-2 binary model separating non-emitting from Markov models:
// lambda("0") = 1, lambda("1") = 0, lambda of every order-2 state = 1.
struct Lemma1Params {
  double delta0_one = 0.9;         // delta_0(1)
  double delta1_one_after0 = 0.5;  // delta_1(1 | 0)
  double delta1_one_after1 = 0.5;  // delta_1(1 | 1)
  double delta2_one_after01 = 0.5;
  double delta2_one_after11 = 0.1;
  double delta2_one_after00 = 0.5;
  double delta2_one_after10 = 0.5;
};
MixtureModel Lemma1Model(const Lemma1Params& params = {});

}  // namespace nelm

#endif  // NELM_MODELS_H_
