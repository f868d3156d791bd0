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

// Scoring and diagnostics: message entropy, state-order occupancy and
// exhaustive enumeration over short strings.

#ifndef NELM_ANALYSIS_H_
#define NELM_ANALYSIS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nelm/corpus.h"
#include "nelm/models.h"

namespace nelm {

struct Report {
  double log2_prob = 0.0;
  double bits_per_symbol = 0.0;
  double perplexity = 0.0;
  std::size_t symbol_count = 0;
};

// -(1/v) log2 p(test), each block evaluated from the empty context. Returns
// infinite entropy when the model gives the test zero probability. Throws
// DataError when a test symbol is outside the model's alphabet.
Report MessageEntropy(const SequenceModel& model, const Corpus& test);

// Occupancy conventions:
//   kPosterior   p(order i emitted x_t | whole test string), from alpha/beta.
//   kPredictive  p(order i emits at t | x^{t-1}): the mixture weights actually
//                used to predict x_t, before seeing it.
enum class Occupancy { kPosterior, kPredictive };

std::string_view OccupancyName(Occupancy occupancy);
Occupancy ParseOccupancy(std::string_view name);

struct OccupancyTable {
  Occupancy convention = Occupancy::kPosterior;
  int order = 0;
  std::size_t from = 0;  // first position (0-based symbol index)
  // cells[j][i]: probability of order i at position from + j.
  std::vector<std::vector<double>> cells;
  // p(x_t | x^{t-1}) at each position of the window.
  std::vector<double> conditional;
  // Mean order over the whole test string.
  double mean_order = 0.0;
};

// Occupancy over positions [from, to) of `test`, conditioning on the full
// string. Hierarchical mixture models only.
OccupancyTable ComputeOccupancy(const MixtureModel& model, std::span<const Symbol> test,
                                std::size_t from, std::size_t to, Occupancy convention);

// Enumeration limit: NELM_ENUM_LIMIT if set, else 10^6.
std::size_t EnumLimit();

// Sum of p(x^T) over A^T. When `dist` is set it receives every string's
// probability, strings in lexicographic order. Throws UsageError when k^T
// exceeds `limit`.
double BruteForceTotal(const SequenceModel& model, std::size_t length,
                       std::vector<double>* dist = nullptr, std::size_t limit = EnumLimit());

}  // namespace nelm

#endif  // NELM_ANALYSIS_H_
