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

#include "nelm/backoff.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace nelm {
namespace {

constexpr double kMassSlack = 1e-9;
// Denominators of eta at or below this are treated as zero.
constexpr double kDegenerate = 1e-15;

double ThresholdAt(std::span<const double> thresholds, int i) {
  if (thresholds.empty()) return 0.0;
  return thresholds[std::min<std::size_t>(static_cast<std::size_t>(i), thresholds.size() - 1)];
}

}  // namespace

Dictionary SelectDictionary(const CountStore& store, int order,
                            std::span<const double> thresholds,
                            std::size_t alphabet_size) {
  if (order < 0 || order > store.order()) {
    throw UsageError("dictionary order exceeds the count store");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0)) throw UsageError("dictionary thresholds must be nonnegative");
  }
  Dictionary e;
  auto& root = e[{}];
  for (Symbol y = 0; y < alphabet_size; ++y) root.push_back(y);
  for (NodeId node = 1; node < store.node_count(); ++node) {
    const int len = store.length(node);
    if (len < 2 || len > order + 1) continue;
    if (!(static_cast<double>(store.occurrences(node)) > ThresholdAt(thresholds, len - 1))) {
      continue;
    }
    std::vector<Symbol> s = store.String(node);
    const Symbol y = s.back();
    s.pop_back();
    e[s].push_back(y);
  }
  for (auto& [ctx, symbols] : e) std::sort(symbols.begin(), symbols.end());
  return e;
}

BackoffDelta EstimateBackoffDelta(const CountStore& store, const Dictionary& dictionary,
                                  double discount) {
  if (!(discount > 0.0 && discount < 1.0)) throw UsageError("discount must lie in (0, 1)");
  const std::size_t k = store.alphabet_size();
  BackoffDelta delta;
  for (const auto& [ctx, symbols] : dictionary) {
    auto& row = delta[ctx];
    if (ctx.empty()) {
      if (symbols.size() != k) throw DataError("dictionary lacks some order-0 transitions");
      for (Symbol y : symbols) row.emplace_back(y, store.MlDelta(ctx, y));
      continue;
    }
    const std::uint64_t c = store.ContextTotal(ctx);
    const bool complete = symbols.size() == k;
    for (Symbol y : symbols) {
      const std::uint64_t cy = store.SuccessorCount(ctx, y);
      if (cy == 0 || c == 0) {
        throw DataError("dictionary entry of order " + std::to_string(ctx.size()) +
                        " has no count");
      }
      const double num = complete ? static_cast<double>(cy) : static_cast<double>(cy) - discount;
      row.emplace_back(y, num / static_cast<double>(c));
    }
  }
  return delta;
}

BackoffModel::BackoffModel(BackoffSemantics semantics, int order, std::size_t alphabet_size,
                           BackoffDelta delta)
    : semantics_(semantics), order_(order), k_(alphabet_size), delta_(std::move(delta)) {
  if (order < 0 || order > kMaxOrder) throw UsageError("backoff order out of range");
  std::vector<const std::vector<Symbol>*> contexts;
  for (auto& [ctx, row] : delta_) {
    if (ctx.size() > static_cast<std::size_t>(order)) {
      throw UsageError("dictionary context longer than the model order");
    }
    std::sort(row.begin(), row.end());
    ContextEntry entry;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto [y, p] = row[j];
      if (y >= k_) throw UsageError("dictionary symbol outside the alphabet");
      if (j > 0 && row[j - 1].first == y) throw UsageError("duplicate dictionary entry");
      if (!(p >= 0.0 && p <= 1.0)) throw NumericError("backoff probability outside [0, 1]");
      entry.mass += p;
    }
    if (entry.mass > 1.0 + kMassSlack) {
      throw NumericError("backoff probabilities of a context sum above 1");
    }
    entry.symbols = row;
    entry.complete = row.size() == k_;
    entries_.emplace(ctx, std::move(entry));
    contexts.push_back(&ctx);
  }
  const ContextEntry* root = Entry({});
  if (root == nullptr || !root->complete || std::abs(root->mass - 1.0) > kMassSlack) {
    throw UsageError("the empty context must hold a complete distribution");
  }
  // Shorter contexts first: eta(x) needs p_b over x_2.
  std::stable_sort(contexts.begin(), contexts.end(),
                   [](const auto* a, const auto* b) { return a->size() < b->size(); });
  for (const auto* ctx : contexts) {
    if (ctx->empty()) continue;
    ContextEntry& entry = entries_.at(*ctx);
    const std::span<const Symbol> shorter = std::span<const Symbol>(*ctx).subspan(1);
    double lower = 0.0;
    for (const auto& [y, p] : entry.symbols) lower += Predict(shorter, y);
    const double num = std::max(0.0, 1.0 - entry.mass);
    const double den = 1.0 - lower;
    if (den <= kDegenerate) {
      entry.eta = 0.0;
      if (!entry.complete && num > 0.0) warnings_.push_back(*ctx);
    } else {
      entry.eta = num / den;
    }
  }
}

BackoffModel BackoffModel::WithSemantics(BackoffSemantics semantics) const {
  BackoffModel copy = *this;
  copy.semantics_ = semantics;
  return copy;
}

Dictionary BackoffModel::dictionary() const {
  Dictionary e;
  for (const auto& [ctx, row] : delta_) {
    auto& symbols = e[ctx];
    for (const auto& [y, p] : row) symbols.push_back(y);
  }
  return e;
}

const BackoffModel::ContextEntry* BackoffModel::Entry(std::span<const Symbol> context) const {
  auto it = entries_.find(std::vector<Symbol>(context.begin(), context.end()));
  return it == entries_.end() ? nullptr : &it->second;
}

const double* BackoffModel::Find(const ContextEntry& e, Symbol y) {
  auto it = std::lower_bound(e.symbols.begin(), e.symbols.end(), y,
                             [](const auto& entry, Symbol s) { return entry.first < s; });
  return it != e.symbols.end() && it->first == y ? &it->second : nullptr;
}

double BackoffModel::Eta(std::span<const Symbol> context) const {
  const ContextEntry* e = Entry(context);
  return e == nullptr ? 1.0 : e->eta;
}

double BackoffModel::StepFactor(std::span<const Symbol> state, Symbol y,
                                std::size_t& state_len) const {
  double factor = 1.0;
  for (std::size_t i = state.size();; --i) {
    const ContextEntry* e = Entry(state.last(i));
    if (e != nullptr) {
      if (const double* p = Find(*e, y)) {
        state_len = i;
        return factor * *p;
      }
      factor *= e->eta;
    }
    if (i == 0) break;
  }
  state_len = 0;
  return 0.0;
}

double BackoffModel::Predict(std::span<const Symbol> history, Symbol y) const {
  const std::size_t top = std::min<std::size_t>(order_, history.size());
  std::size_t used = 0;
  return StepFactor(history.last(top), y, used);
}

ExtScalar BackoffModel::NonEmittingFromState(std::span<const Symbol> state,
                                             std::span<const Symbol> y) const {
  const auto n = static_cast<std::size_t>(order_);
  std::vector<Symbol> cur(state.end() - std::min(n, state.size()), state.end());
  ExtScalar p = ExtScalar::One();
  for (Symbol sym : y) {
    std::size_t used = 0;
    p *= StepFactor(cur, sym, used);
    cur.erase(cur.begin(), cur.end() - used);
    cur.push_back(sym);
    if (cur.size() > n) cur.erase(cur.begin());
  }
  return p;
}

std::vector<double> BackoffModel::Conditionals(std::span<const Symbol> x) const {
  std::vector<double> out(x.size());
  if (semantics_ == BackoffSemantics::kBackoff) {
    for (std::size_t t = 0; t < x.size(); ++t) out[t] = Predict(x.first(t), x[t]);
    return out;
  }
  // The backoff path is deterministic, so each conditional is the factor of
  // its own step.
  const auto n = static_cast<std::size_t>(order_);
  std::vector<Symbol> cur;
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::size_t used = 0;
    out[t] = StepFactor(cur, x[t], used);
    cur.erase(cur.begin(), cur.end() - used);
    cur.push_back(x[t]);
    if (cur.size() > n) cur.erase(cur.begin());
  }
  return out;
}

ExtScalar BackoffModel::Probability(std::span<const Symbol> x) const {
  if (semantics_ == BackoffSemantics::kBackoff) return SequenceModel::Probability(x);
  return NonEmittingFromState({}, x);
}

BackoffDelta CompleteDelta(const BasicModel& basic) {
  const std::size_t k = basic.alphabet_size();
  const int n = basic.order();
  CheckDenseSize(k, n, std::size_t{1} << 22);
  BackoffDelta delta;
  std::vector<Symbol> ctx;
  for (int i = 0; i <= n; ++i) {
    ctx.assign(static_cast<std::size_t>(i), 0);
    while (true) {
      auto& row = delta[ctx];
      for (Symbol y = 0; y < k; ++y) row.emplace_back(y, basic.Predict(ctx, y));
      int j = i - 1;
      while (j >= 0 && ctx[j] + 1 == k) ctx[j--] = 0;
      if (j < 0) break;
      ++ctx[j];
    }
  }
  return delta;
}

BackoffModel BackoffGapModel(const GapParams& p) {
  auto row = [](double one) {
    return std::vector<std::pair<Symbol, double>>{{0, 1.0 - one}, {1, one}};
  };
  BackoffDelta delta;
  delta[{}] = row(p.delta0_one);
  delta[{0}] = row(p.delta1_one_after0);
  delta[{0, 0}] = row(p.delta2_one_other);
  delta[{0, 1}] = row(p.delta2_one_other);
  delta[{1, 0}] = row(p.delta2_one_other);
  delta[{1, 1}] = row(p.delta2_one_after11);
  return BackoffModel(BackoffSemantics::kNonEmitting, 2, 2, std::move(delta));
}

}  // namespace nelm
