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

#include <algorithm>
#include <cmath>
#include <string>

namespace nelm {

ExtScalar SequenceModel::Probability(std::span<const Symbol> x) const {
  ExtScalar p = ExtScalar::One();
  for (double c : Conditionals(x)) p *= c;
  return p;
}

BasicModel::BasicModel(int order, std::shared_ptr<const EmissionTable> delta)
    : order_(order), delta_(std::move(delta)) {
  if (order < 0 || order > delta_->order()) {
    throw UsageError("basic model order exceeds its emission table");
  }
}

double BasicModel::Predict(std::span<const Symbol> history, Symbol y) const {
  const int top = static_cast<int>(std::min<std::size_t>(order_, history.size()));
  std::array<StateId, kMaxOrder + 1> states;
  std::array<double, kMaxOrder + 1> delta;
  delta_->Lookup(history, y, top, states, delta);
  // A context without counts predicts from its longest counted suffix.
  int i = top;
  while (i > 0 && states[i] == kNoState) --i;
  return delta[i];
}

std::vector<double> BasicModel::Conditionals(std::span<const Symbol> x) const {
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = Predict(x.first(t), x[t]);
  return out;
}

std::string_view SemanticsName(Semantics s) {
  return s == Semantics::kInterpolated ? "interpolated" : "nonemitting";
}

std::string_view HierarchyName(Hierarchy h) {
  return h == Hierarchy::kHierarchical ? "hierarchical" : "general";
}

void AdvanceNonEmitting(const StepParams& step, int order,
                        std::span<const ExtScalar> arrival, std::span<ExtScalar> next) {
  // visit(i) = arrival(i) + visit(i+1) * (1 - lambda(i+1)); every visited
  // order emits with probability lambda(i) * delta(i) and enters order i+1
  // (capped at n) at the next step.
  ExtScalar carry;
  for (int i = step.top; i >= 0; --i) {
    const ExtScalar visit = arrival[i] + carry;
    const double lam = step.lambda[i];
    next[std::min(i + 1, order)] += visit * (lam * step.delta[i]);
    carry = visit * (1.0 - lam);
  }
}

MixtureModel::MixtureModel(Semantics semantics, Hierarchy hierarchy, int order,
                           std::shared_ptr<const EmissionTable> delta)
    : semantics_(semantics), hierarchy_(hierarchy), order_(order), delta_(std::move(delta)) {
  if (order < 0 || order > kMaxOrder) throw UsageError("model order out of range");
  if (order > delta_->order()) {
    throw UsageError("model order exceeds its emission table");
  }
}

MixtureModel::MixtureModel(Semantics semantics, int order,
                           std::shared_ptr<const EmissionTable> delta, TyingScheme tying)
    : MixtureModel(semantics, Hierarchy::kHierarchical, order, std::move(delta)) {
  tying_ = std::move(tying);
  lambda_.assign(std::max<std::size_t>(tying_.class_count(), 1), 0.5);
  lambda_[0] = 1.0;
}

MixtureModel MixtureModel::General(Semantics semantics, int order,
                                   std::shared_ptr<const EmissionTable> delta,
                                   std::vector<std::vector<double>> weights) {
  MixtureModel m(semantics, Hierarchy::kGeneral, order, std::move(delta));
  if (weights.size() < m.delta_->state_capacity()) {
    throw UsageError("general weights must cover every state");
  }
  for (std::size_t s = 0; s < m.delta_->state_capacity(); ++s) {
    const auto expected =
        static_cast<std::size_t>(m.delta_->StateOrder(static_cast<StateId>(s))) + 1;
    if (weights[s].size() != expected) {
      throw UsageError("general weight row has the wrong number of orders");
    }
  }
  m.general_ = std::move(weights);
  return m;
}

MixtureModel MixtureModel::WithSemantics(Semantics semantics) const {
  MixtureModel copy = *this;
  copy.semantics_ = semantics;
  return copy;
}

MixtureModel MixtureModel::WithEmission(std::shared_ptr<const EmissionTable> delta) const {
  if (delta->order() < order_ || delta->alphabet_size() != delta_->alphabet_size()) {
    throw UsageError("replacement emission table does not match the model");
  }
  MixtureModel copy = *this;
  copy.delta_ = std::move(delta);
  return copy;
}

void MixtureModel::set_lambda(ClassId c, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw NumericError("lambda outside [0, 1]");
  if (c >= lambda_.size()) throw UsageError("lambda class out of range");
  if (c == 0 && value != 1.0) throw UsageError("lambda of the empty context is fixed at 1");
  lambda_[c] = value;
}

void MixtureModel::SetAllLambdas(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw NumericError("lambda outside [0, 1]");
  std::fill(lambda_.begin(), lambda_.end(), value);
  if (!lambda_.empty()) lambda_[0] = 1.0;
}

void MixtureModel::Step(std::span<const Symbol> history, Symbol y, StepParams& out) const {
  out.top = static_cast<int>(std::min<std::size_t>(order_, history.size()));
  delta_->Lookup(history, y, out.top, out.state, out.delta);
  if (hierarchy_ == Hierarchy::kHierarchical) {
    for (int i = 0; i <= out.top; ++i) out.lambda[i] = StateLambda(out.state[i]);
  }
}

std::vector<double> MixtureModel::LambdaWeights(std::span<const Symbol> history) const {
  StepParams step;
  Step(history, 0, step);
  std::vector<double> w(static_cast<std::size_t>(step.top) + 1, 0.0);
  if (hierarchy_ == Hierarchy::kGeneral) {
    auto row = general_.at(step.state[step.top]);
    std::copy(row.begin(), row.end(), w.begin());
    return w;
  }
  double remaining = 1.0;
  for (int i = step.top; i >= 0; --i) {
    w[i] = remaining * step.lambda[i];
    remaining *= 1.0 - step.lambda[i];
  }
  return w;
}

double MixtureModel::Interpolated(std::span<const Symbol> history, Symbol y) const {
  StepParams step;
  Step(history, y, step);
  double p = 0.0;
  if (hierarchy_ == Hierarchy::kGeneral) {
    auto row = general_.at(step.state[step.top]);
    for (int i = 0; i <= step.top; ++i) p += row[i] * step.delta[i];
    return p;
  }
  // Innermost first: p_c(y | x^i) = lambda_i delta_i + (1 - lambda_i) p_c(y | x_2^i).
  for (int i = 0; i <= step.top; ++i) {
    p = step.lambda[i] * step.delta[i] + (1.0 - step.lambda[i]) * p;
  }
  return p;
}

template <typename OnStep>
ExtScalar MixtureModel::RunForward(std::span<const Symbol> context,
                                   std::span<const Symbol> y, OnStep on_step) const {
  const auto width = static_cast<std::size_t>(order_) + 1;
  std::vector<ExtScalar> arrival(width), next(width);
  std::vector<Symbol> history(context.begin(), context.end());
  history.reserve(context.size() + y.size());
  arrival[std::min<std::size_t>(order_, context.size())] = ExtScalar::One();
  StepParams step;
  ExtScalar total = ExtScalar::One();
  for (Symbol sym : y) {
    Step(history, sym, step);
    std::fill(next.begin(), next.end(), ExtScalar());
    if (hierarchy_ == Hierarchy::kHierarchical) {
      AdvanceNonEmitting(step, order_, arrival, next);
    } else {
      for (int i = 0; i <= step.top; ++i) {
        if (arrival[i].is_zero()) continue;
        auto row = general_.at(step.state[i]);
        for (int l = 0; l <= i; ++l) {
          next[std::min(l + 1, order_)] += arrival[i] * (row[l] * step.delta[l]);
        }
      }
    }
    arrival.swap(next);
    total = ExtScalar();
    for (const auto& a : arrival) total += a;
    on_step(total);
    history.push_back(sym);
  }
  return total;
}

ExtScalar MixtureModel::NonEmittingFromState(std::span<const Symbol> context,
                                             std::span<const Symbol> y) const {
  return RunForward(context, y, [](ExtScalar) {});
}

std::vector<double> MixtureModel::Conditionals(std::span<const Symbol> x) const {
  std::vector<double> out(x.size());
  if (semantics_ == Semantics::kInterpolated) {
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = Interpolated(x.first(t), x[t]);
    return out;
  }
  ExtScalar prev = ExtScalar::One();
  std::size_t t = 0;
  RunForward({}, x, [&](ExtScalar total) {
    out[t++] = prev.is_zero() ? 0.0 : Ratio(total, prev);
    prev = total;
  });
  return out;
}

ExtScalar MixtureModel::Probability(std::span<const Symbol> x) const {
  if (semantics_ == Semantics::kInterpolated) return SequenceModel::Probability(x);
  return RunForward({}, x, [](ExtScalar) {});
}

BasicModel ToBasic(const MixtureModel& interpolated, std::size_t state_limit) {
  if (interpolated.semantics() != Semantics::kInterpolated) {
    throw UsageError("only interpolated models convert to basic models");
  }
  const std::size_t k = interpolated.alphabet_size();
  const int n = interpolated.order();
  CheckDenseSize(k, n, state_limit);
  auto table = std::make_shared<DenseEmission>(k, n);
  std::vector<double> row(k);
  for (std::size_t s = 0; s < table->state_capacity(); ++s) {
    const std::vector<Symbol> ctx = table->ContextOf(static_cast<StateId>(s));
    for (Symbol y = 0; y < k; ++y) row[y] = interpolated.Interpolated(ctx, y);
    table->SetRow(ctx, row);
  }
  return BasicModel(n, std::move(table));
}

MixtureModel NonEmittingFromBasic(const BasicModel& basic, std::size_t state_limit) {
  // Every context becomes a state with lambda 1, including contexts the
  // source table has never seen, so count tables are densified.
  auto dense = std::dynamic_pointer_cast<const DenseEmission>(basic.shared_emission());
  if (!dense) {
    const std::size_t k = basic.alphabet_size();
    CheckDenseSize(k, basic.order(), state_limit);
    auto table = std::make_shared<DenseEmission>(k, basic.order());
    std::vector<double> row(k);
    for (std::size_t s = 0; s < table->state_capacity(); ++s) {
      const std::vector<Symbol> ctx = table->ContextOf(static_cast<StateId>(s));
      for (Symbol y = 0; y < k; ++y) row[y] = basic.Predict(ctx, y);
      table->SetRow(ctx, row);
    }
    dense = std::move(table);
  }
  MixtureModel m(Semantics::kNonEmitting, basic.order(), dense, DenseOrderScheme(*dense));
  m.SetAllLambdas(1.0);
  return m;
}

MixtureModel Lemma1Model(const Lemma1Params& p) {
  auto table = std::make_shared<DenseEmission>(2, 2);
  auto set = [&](std::vector<Symbol> ctx, double one) {
    const double row[2] = {1.0 - one, one};
    table->SetRow(ctx, row);
  };
  set({}, p.delta0_one);
  set({0}, p.delta1_one_after0);
  set({1}, p.delta1_one_after1);
  set({0, 0}, p.delta2_one_after00);
  set({0, 1}, p.delta2_one_after01);
  set({1, 0}, p.delta2_one_after10);
  set({1, 1}, p.delta2_one_after11);
  TyingScheme tying = DenseUntiedScheme(*table);
  const std::vector<Symbol> zero = {0}, one = {1};
  const StateId s0 = table->StateOf(zero), s1 = table->StateOf(one);
  MixtureModel m(Semantics::kNonEmitting, 2, table, std::move(tying));
  m.SetAllLambdas(1.0);
  m.set_lambda(m.tying()(s0), 1.0);
  m.set_lambda(m.tying()(s1), 0.0);
  return m;
}

}  // namespace nelm
