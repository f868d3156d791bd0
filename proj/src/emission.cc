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

#include "nelm/emission.h"

#include <algorithm>
#include <string>

namespace nelm {

CountEmission::CountEmission(std::shared_ptr<const CountStore> store)
    : store_(std::move(store)) {}

void CountEmission::Lookup(std::span<const Symbol> history, Symbol y, int top,
                           std::span<StateId> states, std::span<double> delta) const {
  const CountStore& s = *store_;
  const std::size_t h = history.size();
  NodeId ctx = s.root();
  NodeId succ = s.Child(ctx, y);
  states[0] = kRootState;
  delta[0] = static_cast<double>((succ == kNoNode ? 0 : s.occurrences(succ)) + 1) /
             static_cast<double>(s.context_total(ctx) + s.alphabet_size());
  int i = 1;
  for (; i <= top; ++i) {
    const Symbol x = history[h - static_cast<std::size_t>(i)];
    ctx = s.Child(ctx, x);
    if (ctx == kNoNode || s.context_total(ctx) == 0) break;
    succ = s.Child(succ, x);
    states[i] = ctx;
    delta[i] = succ == kNoNode ? 0.0
                               : static_cast<double>(s.occurrences(succ)) /
                                     static_cast<double>(s.context_total(ctx));
  }
  for (; i <= top; ++i) {
    states[i] = kNoState;
    delta[i] = 0.0;
  }
}

void CheckDenseSize(std::size_t alphabet_size, int order, std::size_t limit) {
  std::size_t total = 0;
  std::size_t width = 1;
  for (int i = 0; i <= order; ++i) {
    total += width;
    if (total > limit) {
      throw UsageError("dense table over " + std::to_string(alphabet_size) + "^" +
                       std::to_string(order) + " contexts exceeds the configured limit");
    }
    if (i < order) {
      if (width > limit / std::max<std::size_t>(alphabet_size, 1)) {
        throw UsageError("dense table exceeds the configured limit");
      }
      width *= alphabet_size;
    }
  }
}

DenseEmission::DenseEmission(std::size_t alphabet_size, int order)
    : k_(alphabet_size), order_(order) {
  if (k_ < 1) throw UsageError("alphabet must be nonempty");
  if (order < 0 || order > kMaxOrder) throw UsageError("model order out of range");
  CheckDenseSize(k_, order, std::size_t{1} << 26);
  offsets_.push_back(0);
  std::size_t width = 1;
  for (int i = 0; i <= order; ++i) {
    offsets_.push_back(offsets_.back() + width);
    width *= k_;
  }
  probs_.assign(offsets_.back() * k_, 1.0 / static_cast<double>(k_));
}

StateId DenseEmission::StateOf(std::span<const Symbol> context) const {
  if (context.size() > static_cast<std::size_t>(order_)) {
    throw UsageError("context longer than the table order");
  }
  std::size_t index = 0;
  for (Symbol x : context) {
    if (x >= k_) throw UsageError("symbol outside the alphabet");
    index = index * k_ + x;
  }
  return static_cast<StateId>(offsets_[context.size()] + index);
}

int DenseEmission::StateOrder(StateId state) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(state));
  return static_cast<int>(it - offsets_.begin()) - 1;
}

std::vector<Symbol> DenseEmission::ContextOf(StateId state) const {
  const int i = StateOrder(state);
  std::size_t index = state - offsets_[i];
  std::vector<Symbol> ctx(static_cast<std::size_t>(i));
  for (int j = i - 1; j >= 0; --j) {
    ctx[j] = static_cast<Symbol>(index % k_);
    index /= k_;
  }
  return ctx;
}

double DenseEmission::Get(std::span<const Symbol> context, Symbol y) const {
  return probs_[StateOf(context) * k_ + y];
}

void DenseEmission::SetRow(std::span<const Symbol> context, std::span<const double> row) {
  if (row.size() != k_) throw UsageError("row size does not match the alphabet");
  std::copy(row.begin(), row.end(), MutableRow(StateOf(context)).begin());
}

void DenseEmission::Lookup(std::span<const Symbol> history, Symbol y, int top,
                           std::span<StateId> states, std::span<double> delta) const {
  const std::size_t h = history.size();
  std::size_t index = 0;
  std::size_t scale = 1;
  for (int i = 0; i <= top; ++i) {
    if (i > 0) {
      index += history[h - static_cast<std::size_t>(i)] * scale;
      scale *= k_;
    }
    const std::size_t state = offsets_[i] + index;
    states[i] = static_cast<StateId>(state);
    delta[i] = probs_[state * k_ + y];
  }
}

DenseEmission DenseEmission::Random(std::size_t alphabet_size, int order,
                                    std::mt19937_64& rng) {
  DenseEmission d(alphabet_size, order);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < d.state_capacity(); ++s) {
    auto row = d.MutableRow(static_cast<StateId>(s));
    double sum = 0.0;
    for (double& v : row) {
      v = 1.0 - unit(rng);  // (0, 1]
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return d;
}

}  // namespace nelm
