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

// Backoff models over a dictionary E of (context, symbol) transitions.
//
// A backoff model predicts y after x^i with delta(y|x^i) when (x^i, y) is in
// E and otherwise with eta(x^i) p_b(y | x_2^i), where
//   eta(x^i) = (1 - delta(E(x^i)|x^i)) / (1 - p_b(E(x^i)|x_2^i)).
// The non-emitting variant makes each backoff permanent: after falling from
// x^i to x_2^i the model keeps extending the shorter state.

#ifndef NELM_BACKOFF_H_
#define NELM_BACKOFF_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "nelm/counts.h"
#include "nelm/models.h"
#include "nelm/numeric.h"
#include "nelm/types.h"

namespace nelm {

// (context, symbol) pairs, grouped by context. Symbols are kept sorted.
using Dictionary = std::map<std::vector<Symbol>, std::vector<Symbol>>;

// E = {(x^i, y) : c(x^i y) > thresholds[i], i <= order} plus every order-0
// transition. Orders beyond the threshold vector reuse its last entry; an
// empty vector means 0 everywhere.
Dictionary SelectDictionary(const CountStore& store, int order,
                            std::span<const double> thresholds,
                            std::size_t alphabet_size);

// delta(y | context) for every entry of a dictionary.
using BackoffDelta = std::map<std::vector<Symbol>, std::vector<std::pair<Symbol, double>>>;

// Absolute discounting: (c(x^i y) - discount) / c(x^i) at orders >= 1, where
// c(x^i) counts the occurrences of x^i followed by a symbol. A context whose
// entries cover the whole alphabet keeps its undiscounted estimate. Order 0
// is the add-one estimate over the alphabet. Throws DataError for entries
// with zero count.
BackoffDelta EstimateBackoffDelta(const CountStore& store, const Dictionary& dictionary,
                                  double discount);

enum class BackoffSemantics { kBackoff, kNonEmitting };

class BackoffModel : public SequenceModel {
 public:
  // `delta` must contain the complete empty context. `order` bounds the
  // context length; longer contexts never have entries.
  BackoffModel(BackoffSemantics semantics, int order, std::size_t alphabet_size,
               BackoffDelta delta);

  std::size_t alphabet_size() const override { return k_; }
  int order() const override { return order_; }
  BackoffSemantics semantics() const { return semantics_; }
  BackoffModel WithSemantics(BackoffSemantics semantics) const;

  const BackoffDelta& delta() const { return delta_; }
  Dictionary dictionary() const;
  // Contexts whose eta hit a zero denominator and was set to 0.
  const std::vector<std::vector<Symbol>>& warnings() const { return warnings_; }

  // eta(context); 1 for contexts without entries.
  double Eta(std::span<const Symbol> context) const;

  // p_b(y | history).
  double Predict(std::span<const Symbol> history, Symbol y) const;

  // p(y^j | state) under permanent backoff.
  ExtScalar NonEmittingFromState(std::span<const Symbol> state,
                                 std::span<const Symbol> y) const;

  std::vector<double> Conditionals(std::span<const Symbol> x) const override;
  ExtScalar Probability(std::span<const Symbol> x) const override;

 private:
  struct ContextEntry {
    std::vector<std::pair<Symbol, double>> symbols;  // sorted
    double mass = 0.0;  // delta(E(x) | x)
    double eta = 1.0;
    bool complete = false;
  };

  const ContextEntry* Entry(std::span<const Symbol> context) const;
  static const double* Find(const ContextEntry& e, Symbol y);

  // Factor for emitting y from `state`; on return `state_len` is the length
  // of the suffix of `state` that emitted.
  double StepFactor(std::span<const Symbol> state, Symbol y, std::size_t& state_len) const;

  BackoffSemantics semantics_;
  int order_;
  std::size_t k_;
  BackoffDelta delta_;
  absl::flat_hash_map<std::vector<Symbol>, ContextEntry> entries_;
  std::vector<std::vector<Symbol>> warnings_;
};

// Dictionary over all contexts of length 0..order with every symbol, using
// the delta rows of a basic model.
BackoffDelta CompleteDelta(const BasicModel& basic);

// Binary order-2 non-emitting backoff model whose dictionary has no entries
// for context "1" while "0" and every order-2 context are complete. After
// "0 1" the state climbs to "11" and stays there; after "1 1" it keeps
// falling back to the empty context.
struct GapParams {
  double delta0_one = 0.9;         // delta(1 | empty)
  double delta1_one_after0 = 0.5;  // delta(1 | 0)
  double delta2_one_after11 = 0.1;
  double delta2_one_other = 0.5;   // delta(1 | 00), (1 | 01), (1 | 10)
};
BackoffModel BackoffGapModel(const GapParams& params = {});

}  // namespace nelm

#endif  // NELM_BACKOFF_H_
