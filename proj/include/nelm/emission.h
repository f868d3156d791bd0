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

// Emitting transition probabilities delta_i(y | x^i) for orders 0..n.

#ifndef NELM_EMISSION_H_
#define NELM_EMISSION_H_

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "nelm/counts.h"
#include "nelm/types.h"

namespace nelm {

class EmissionTable {
 public:
  virtual ~EmissionTable() = default;

  virtual int order() const = 0;
  virtual std::size_t alphabet_size() const = 0;
  // Upper bound (exclusive) on state ids returned by Lookup.
  virtual std::size_t state_capacity() const = 0;

  // For each order i in [0, top], writes the state id of the length-i suffix
  // of `history` and delta_i(y | that suffix). A context without observed
  // successors yields kNoState and delta 0, as do all longer ones. Requires
  // top <= min(order(), history.size()).
  virtual void Lookup(std::span<const Symbol> history, Symbol y, int top,
                      std::span<StateId> states, std::span<double> delta) const = 0;

  // Order of a state id returned by Lookup.
  virtual int StateOrder(StateId state) const = 0;
};

// Maximum-likelihood estimates read live from a count store, so withholding
// a block in the store changes the estimates seen by every model sharing it.
class CountEmission : public EmissionTable {
 public:
  explicit CountEmission(std::shared_ptr<const CountStore> store);

  int order() const override { return store_->order(); }
  std::size_t alphabet_size() const override { return store_->alphabet_size(); }
  std::size_t state_capacity() const override { return store_->node_count(); }
  void Lookup(std::span<const Symbol> history, Symbol y, int top,
              std::span<StateId> states, std::span<double> delta) const override;
  int StateOrder(StateId state) const override { return store_->length(state); }

  const CountStore& store() const { return *store_; }
  std::shared_ptr<const CountStore> shared_store() const { return store_; }

 private:
  std::shared_ptr<const CountStore> store_;
};

// Explicit tables over every context in A^0..A^n. Used for hand-built
// models, conversions and exhaustive checks on small alphabets.
class DenseEmission : public EmissionTable {
 public:
  // All rows uniform.
  DenseEmission(std::size_t alphabet_size, int order);

  int order() const override { return order_; }
  std::size_t alphabet_size() const override { return k_; }
  std::size_t state_capacity() const override { return offsets_.back(); }
  void Lookup(std::span<const Symbol> history, Symbol y, int top,
              std::span<StateId> states, std::span<double> delta) const override;
  int StateOrder(StateId state) const override;

  // Number of contexts of length i (k^i).
  std::size_t contexts(int i) const { return offsets_[i + 1] - offsets_[i]; }
  StateId StateOf(std::span<const Symbol> context) const;
  std::vector<Symbol> ContextOf(StateId state) const;

  double Get(std::span<const Symbol> context, Symbol y) const;
  // Replaces the row for `context`; must hold k values.
  void SetRow(std::span<const Symbol> context, std::span<const double> row);
  std::span<const double> Row(StateId state) const {
    return std::span<const double>(probs_).subspan(state * k_, k_);
  }
  std::span<double> MutableRow(StateId state) {
    return std::span<double>(probs_).subspan(state * k_, k_);
  }

  // Every row drawn independently: uniform weights in (0,1], normalized.
  static DenseEmission Random(std::size_t alphabet_size, int order, std::mt19937_64& rng);

 private:
  std::size_t k_;
  int order_;
  std::vector<std::size_t> offsets_;  // offsets_[i] = first state of order i
  std::vector<double> probs_;
};

// Throws UsageError when a dense table over k^0..k^n contexts would exceed
// `limit` states.
void CheckDenseSize(std::size_t alphabet_size, int order, std::size_t limit);

}  // namespace nelm

#endif  // NELM_EMISSION_H_
