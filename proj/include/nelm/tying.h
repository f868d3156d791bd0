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

// Parameter tying: states sharing a class share one lambda value and pool
// their EM expectations. The empty context always owns class 0, whose lambda
// is pinned to 1.

#ifndef NELM_TYING_H_
#define NELM_TYING_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nelm/corpus.h"
#include "nelm/counts.h"
#include "nelm/emission.h"
#include "nelm/types.h"

namespace nelm {

enum class TyingKind { kUntied, kOrder, kFreqDiv, kFreqDivLog, kPosterior };

inline constexpr int kDefaultPosteriorLevels = 16;

struct TyingSpec {
  TyingKind kind = TyingKind::kUntied;
  int levels = kDefaultPosteriorLevels;  // posterior only
};

// Accepts none|untied|order|freq-div|freq-div-log|posterior[:levels].
TyingSpec ParseTyingSpec(std::string_view text);
std::string FormatTyingSpec(const TyingSpec& spec);

class TyingScheme {
 public:
  TyingScheme() = default;
  TyingScheme(TyingSpec spec, std::vector<ClassId> class_of, std::size_t class_count);

  const TyingSpec& spec() const { return spec_; }
  std::size_t class_count() const { return class_count_; }
  // Class of a state; kNoClass for ids that are not trainable states.
  ClassId operator()(StateId state) const {
    return state < class_of_.size() ? class_of_[state] : kNoClass;
  }
  std::span<const ClassId> class_of() const { return class_of_; }

 private:
  TyingSpec spec_;
  std::vector<ClassId> class_of_;
  std::size_t class_count_ = 0;
};

// Count-store schemes. States are contexts of order <= n with at least one
// observed successor.
TyingScheme UntiedScheme(const CountStore& store);
TyingScheme OrderScheme(const CountStore& store);
// Class = exact (frequency, diversity) pair, frequency being the number of
// times the state was followed by a symbol. `log_buckets` replaces both by
// floor(log2(.)).
TyingScheme FreqDivScheme(const CountStore& store, bool log_buckets = false);

// Dense-table schemes: every context is a state.
TyingScheme DenseUntiedScheme(const DenseEmission& table);
TyingScheme DenseOrderScheme(const DenseEmission& table);

struct PosteriorStats {
  // Indexed by node id.
  std::vector<double> empirical_expectation;
  std::vector<double> mean_posterior;
};

// Empirical posterior of the order-i state at the position `t` of `corpus`
// (the history being the symbols of t's block before t): the state's
// frequency over the sum of frequencies of the states of order
// 1..min(n, history length).
double EmpiricalPosterior(const CountStore& store, const Corpus& corpus, std::size_t t,
                          int i);

// Accumulates empirical posteriors over every predicting position in O(nT).
PosteriorStats ComputePosteriorStats(const CountStore& store, const Corpus& corpus);

// Class = (order, floor(mean_posterior * levels) clamped to levels - 1).
TyingScheme PosteriorScheme(const CountStore& store, const Corpus& corpus, int levels);

// Builds the scheme named by `spec` over a count store. `corpus` is only
// consulted by posterior tying.
TyingScheme MakeTyingScheme(const TyingSpec& spec, const CountStore& store,
                            const Corpus& corpus);

}  // namespace nelm

#endif  // NELM_TYING_H_
