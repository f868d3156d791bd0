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

#include "nelm/analysis.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "nelm/estimation.h"

namespace nelm {

Report MessageEntropy(const SequenceModel& model, const Corpus& test) {
  const std::size_t k = model.alphabet_size();
  for (Symbol s : test.data) {
    if (s >= k) throw DataError("test symbol outside the model alphabet");
  }
  Report r;
  r.symbol_count = test.size();
  for (std::size_t b = 0; b < test.num_blocks(); ++b) {
    r.log2_prob += model.Probability(test.block(b)).Log2();
  }
  if (r.symbol_count == 0) {
    r.perplexity = 1.0;
    return r;
  }
  r.bits_per_symbol = -r.log2_prob / static_cast<double>(r.symbol_count);
  r.perplexity = std::exp2(r.bits_per_symbol);
  return r;
}

std::string_view OccupancyName(Occupancy occupancy) {
  return occupancy == Occupancy::kPosterior ? "posterior" : "predictive";
}

Occupancy ParseOccupancy(std::string_view name) {
  if (name == "posterior") return Occupancy::kPosterior;
  if (name == "predictive") return Occupancy::kPredictive;
  throw UsageError("unknown occupancy convention '" + std::string(name) +
                   "' (expected posterior|predictive)");
}

OccupancyTable ComputeOccupancy(const MixtureModel& model, std::span<const Symbol> test,
                                std::size_t from, std::size_t to, Occupancy convention) {
  if (from > to || to > test.size()) throw UsageError("occupancy window outside the test");
  if (model.hierarchy() != Hierarchy::kHierarchical) {
    throw UsageError("occupancy needs a hierarchical model");
  }
  const int n = model.order();
  OccupancyTable table;
  table.convention = convention;
  table.order = n;
  table.from = from;
  std::vector<double> column(static_cast<std::size_t>(n) + 1);
  double order_sum = 0.0;
  auto record = [&](std::size_t t, double conditional) {
    double mean = 0.0;
    for (int i = 0; i <= n; ++i) mean += i * column[i];
    order_sum += mean;
    if (t >= from && t < to) {
      table.cells.push_back(column);
      table.conditional.push_back(conditional);
    }
  };

  if (model.semantics() == Semantics::kInterpolated) {
    StepParams step;
    for (std::size_t t = 0; t < test.size(); ++t) {
      model.Step(test.first(t), test[t], step);
      std::fill(column.begin(), column.end(), 0.0);
      double remaining = 1.0;
      double p = 0.0;
      for (int i = step.top; i >= 0; --i) {
        const double w = remaining * step.lambda[i];
        remaining *= 1.0 - step.lambda[i];
        column[i] = convention == Occupancy::kPredictive ? w : w * step.delta[i];
        p += w * step.delta[i];
      }
      if (convention == Occupancy::kPosterior) {
        if (!(p > 0.0)) throw NumericError("test has zero probability under the model");
        for (double& c : column) c /= p;
      }
      record(t, p);
    }
  } else {
    const StepTable steps(model, test);
    Lattice lattice;
    ForwardPass(steps, lattice);
    if (lattice.total.is_zero()) throw NumericError("test has zero probability under the model");
    if (convention == Occupancy::kPosterior) BackwardPass(steps, lattice);
    std::vector<ExtScalar> visit(static_cast<std::size_t>(n) + 1);
    ExtScalar prefix = ExtScalar::One();
    for (std::size_t t = 0; t < test.size(); ++t) {
      Visits(steps, lattice, t, visit);
      std::fill(column.begin(), column.end(), 0.0);
      ExtScalar next;
      for (int i = 0; i <= n; ++i) next += lattice.a(t + 1, i);
      for (int i = 0; i <= steps.top(t); ++i) {
        const double lam = steps.lambda(t, i);
        if (convention == Occupancy::kPredictive) {
          column[i] = Ratio(visit[i], prefix) * lam;
        } else {
          column[i] = Ratio(visit[i] * lattice.b(t + 1, std::min(i + 1, n)), lattice.total) *
                      (lam * steps.delta(t, i));
        }
      }
      record(t, Ratio(next, prefix));
      prefix = next;
    }
  }
  table.mean_order = test.empty() ? 0.0 : order_sum / static_cast<double>(test.size());
  return table;
}

std::size_t EnumLimit() {
  const char* env = std::getenv("NELM_ENUM_LIMIT");
  if (env == nullptr || *env == '\0') return 1000000;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError("NELM_ENUM_LIMIT must be a nonnegative integer");
  }
}

double BruteForceTotal(const SequenceModel& model, std::size_t length,
                       std::vector<double>* dist, std::size_t limit) {
  const std::size_t k = model.alphabet_size();
  std::size_t count = 1;
  for (std::size_t j = 0; j < length; ++j) {
    if (count > limit / std::max<std::size_t>(k, 1)) {
      throw UsageError("enumeration of " + std::to_string(k) + "^" + std::to_string(length) +
                       " strings exceeds the limit " + std::to_string(limit));
    }
    count *= k;
  }
  if (count > limit) throw UsageError("enumeration exceeds the limit");
  if (dist) dist->clear();
  std::vector<Symbol> x(length, 0);
  double total = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const double p = model.Probability(x).ToDouble();
    total += p;
    if (dist) dist->push_back(p);
    for (std::size_t j = length; j-- > 0;) {
      if (++x[j] < k) break;
      x[j] = 0;
    }
  }
  return total;
}

}  // namespace nelm
