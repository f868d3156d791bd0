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

#include "nelm/estimation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace nelm {
namespace {

void RequireNonEmittingHierarchical(const MixtureModel& model) {
  if (model.semantics() != Semantics::kNonEmitting ||
      model.hierarchy() != Hierarchy::kHierarchical) {
    throw UsageError("lattices need a hierarchical non-emitting model");
  }
}

double NonEmittingExpectation(const MixtureModel& model, std::span<const Symbol> x,
                              Accumulators& acc) {
  const StepTable steps(model, x);
  Lattice lattice;
  ForwardPass(steps, lattice);
  if (lattice.total.is_zero()) throw NumericError("block has zero probability under the model");
  BackwardPass(steps, lattice);
  const int n = steps.order();
  const ExtScalar total = lattice.total;
  std::vector<ExtScalar> visit(static_cast<std::size_t>(n) + 1);
  const TyingScheme& tying = model.tying();
  for (std::size_t t = 0; t < steps.length(); ++t) {
    Visits(steps, lattice, t, visit);
    for (int i = 0; i <= steps.top(t); ++i) {
      const ClassId c = tying(steps.state(t, i));
      if (c == kNoClass) continue;
      const double lam = steps.lambda(t, i);
      acc.plus[c] += Ratio(visit[i] * lattice.b(t + 1, std::min(i + 1, n)), total) *
                     (lam * steps.delta(t, i));
      if (i > 0) {
        acc.minus[c] += Ratio(visit[i] * lattice.b(t, i - 1), total) * (1.0 - lam);
      }
    }
  }
  return total.Log2();
}

double InterpolatedExpectation(const MixtureModel& model, std::span<const Symbol> x,
                               Accumulators& acc) {
  const TyingScheme& tying = model.tying();
  StepParams step;
  std::array<double, kMaxOrder + 1> emit{};
  double log2p = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    model.Step(x.first(t), x[t], step);
    double remaining = 1.0;
    double p = 0.0;
    for (int i = step.top; i >= 0; --i) {
      emit[i] = remaining * step.lambda[i] * step.delta[i];
      remaining *= 1.0 - step.lambda[i];
      p += emit[i];
    }
    if (!(p > 0.0)) throw NumericError("block has zero probability under the model");
    log2p += std::log2(p);
    // Order i is visited whenever the emitting order is <= i; it emits with
    // posterior emit[i] / p and descends with the mass of all lower orders.
    double below = 0.0;
    for (int i = 0; i <= step.top; ++i) {
      const double e = emit[i] / p;
      const ClassId c = tying(step.state[i]);
      if (c != kNoClass) {
        acc.plus[c] += e;
        acc.minus[c] += below;
      }
      below += e;
    }
  }
  return log2p;
}

struct PassResult {
  double log2 = 0.0;
  std::size_t symbols = 0;
};

// Scores block `b` under `model`, adding its expectations to `acc` if set.
double ScoreBlock(const Corpus& corpus, std::size_t b, const MixtureModel& model,
                  Accumulators* acc) {
  auto x = corpus.block(b);
  return acc ? ExpectationStep(model, x, *acc) : BlockLog2Prob(model, x);
}

// Cross-estimation pass. Each block is scored against the counts of the
// others into its own accumulators, and these are merged in block order, so
// the result does not depend on the thread count. Workers other than the
// first own a copy of the counts.
PassResult CrossPass(const Corpus& corpus, TrainedModel& trained, int threads,
                     Accumulators* acc) {
  const std::size_t blocks = corpus.num_blocks();
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, blocks);
  const std::size_t classes = acc ? acc->plus.size() : 0;
  std::vector<CountStore*> stores = {trained.store.get()};
  std::vector<const MixtureModel*> models = {&trained.model};
  std::deque<MixtureModel> copies;
  for (std::size_t w = 1; w < workers; ++w) {
    auto store = std::make_shared<CountStore>(*trained.store);
    stores.push_back(store.get());
    copies.push_back(trained.model.WithEmission(std::make_shared<CountEmission>(store)));
    models.push_back(&copies.back());
  }
  std::vector<Accumulators> partial(workers, Accumulators(classes, 0.0));
  std::vector<double> log2(workers);
  std::vector<std::exception_ptr> errors(workers);
  PassResult total;
  for (std::size_t first = 0; first < blocks; first += workers) {
    const std::size_t count = std::min(workers, blocks - first);
    auto run = [&](std::size_t w) {
      try {
        Accumulators* a = acc ? &partial[w] : nullptr;
        if (a) {
          std::fill(a->plus.begin(), a->plus.end(), 0.0);
          std::fill(a->minus.begin(), a->minus.end(), 0.0);
        }
        WithheldBlock held(*stores[w], corpus, first + w);
        log2[w] = ScoreBlock(corpus, first + w, *models[w], a);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < count; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& th : pool) th.join();
    for (std::size_t w = 0; w < count; ++w) {
      if (errors[w]) std::rethrow_exception(errors[w]);
      total.log2 += log2[w];
      total.symbols += corpus.block(first + w).size();
      if (acc) {
        for (std::size_t c = 0; c < classes; ++c) {
          acc->plus[c] += partial[w].plus[c];
          acc->minus[c] += partial[w].minus[c];
        }
      }
    }
  }
  return total;
}

void LogIteration(const EstimationOptions& options, int iteration, const PassResult& r,
                  double seconds) {
  if (options.log == nullptr) return;
  char line[160];
  std::snprintf(line, sizeof(line),
                "iteration %d withheld_log2=%.10g bits_per_symbol=%.6f seconds=%.2f\n",
                iteration, r.log2,
                r.symbols ? -r.log2 / static_cast<double>(r.symbols) : 0.0, seconds);
  *options.log << line << std::flush;
}

template <typename Pass>
EstimationTrace Iterate(MixtureModel& model, const EstimationOptions& options, Pass pass) {
  if (options.iterations < 0) throw UsageError("iterations must be nonnegative");
  if (!(options.acc_floor >= 0.0)) throw UsageError("accumulator floor must be nonnegative");
  EstimationTrace trace;
  for (int it = 0;; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const bool final_pass = it == options.iterations;
    Accumulators acc(model.lambdas().size(), options.acc_floor);
    const PassResult r = pass(final_pass ? nullptr : &acc);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    LogIteration(options, it, r, seconds);
    trace.withheld_symbols = r.symbols;
    const bool converged =
        options.early_stop > 0.0 && !trace.withheld_log2.empty() &&
        (r.log2 - trace.withheld_log2.back()) <
            options.early_stop * std::abs(trace.withheld_log2.back());
    trace.withheld_log2.push_back(r.log2);
    if (final_pass || converged) break;
    MaximizationStep(model, acc);
  }
  return trace;
}

}  // namespace

StepTable::StepTable(const MixtureModel& model, std::span<const Symbol> x)
    : length_(x.size()), order_(model.order()) {
  if (model.hierarchy() != Hierarchy::kHierarchical) {
    throw UsageError("step tables need a hierarchical model");
  }
  const std::size_t width = static_cast<std::size_t>(order_) + 1;
  state_.assign(length_ * width, kNoState);
  delta_.assign(length_ * width, 0.0);
  lambda_.assign(length_ * width, 0.0);
  StepParams step;
  for (std::size_t t = 0; t < length_; ++t) {
    model.Step(x.first(t), x[t], step);
    for (int i = 0; i <= step.top; ++i) {
      state_[Index(t, i)] = step.state[i];
      delta_[Index(t, i)] = step.delta[i];
      lambda_[Index(t, i)] = step.lambda[i];
    }
  }
}

void ForwardPass(const StepTable& steps, Lattice& lattice) {
  const int n = steps.order();
  lattice.order = n;
  lattice.length = steps.length();
  lattice.alpha.assign((lattice.length + 1) * (static_cast<std::size_t>(n) + 1), ExtScalar());
  lattice.beta.clear();
  lattice.a(0, 0) = ExtScalar::One();
  for (std::size_t t = 0; t < steps.length(); ++t) {
    ExtScalar carry;
    for (int i = steps.top(t); i >= 0; --i) {
      const ExtScalar visit = lattice.a(t, i) + carry;
      const double lam = steps.lambda(t, i);
      lattice.a(t + 1, std::min(i + 1, n)) += visit * (lam * steps.delta(t, i));
      carry = visit * (1.0 - lam);
    }
  }
  lattice.total = ExtScalar();
  for (int i = 0; i <= n; ++i) lattice.total += lattice.a(lattice.length, i);
}

void BackwardPass(const StepTable& steps, Lattice& lattice) {
  const int n = steps.order();
  const std::size_t b = steps.length();
  lattice.beta.assign(lattice.alpha.size(), ExtScalar());
  for (int i = 0; i <= n; ++i) lattice.b(b, i) = ExtScalar::One();
  for (std::size_t t = b; t-- > 0;) {
    for (int i = 0; i <= steps.top(t); ++i) {
      const double lam = steps.lambda(t, i);
      ExtScalar v = lattice.b(t + 1, std::min(i + 1, n)) * (lam * steps.delta(t, i));
      if (i > 0) v += lattice.b(t, i - 1) * (1.0 - lam);
      lattice.b(t, i) = v;
    }
  }
}

void Visits(const StepTable& steps, const Lattice& lattice, std::size_t t,
            std::span<ExtScalar> visit) {
  ExtScalar carry;
  for (int i = steps.top(t); i >= 0; --i) {
    visit[i] = lattice.a(t, i) + carry;
    carry = visit[i] * (1.0 - steps.lambda(t, i));
  }
}

Lattice Forward(const MixtureModel& model, std::span<const Symbol> x) {
  RequireNonEmittingHierarchical(model);
  Lattice lattice;
  ForwardPass(StepTable(model, x), lattice);
  return lattice;
}

Lattice ForwardBackward(const MixtureModel& model, std::span<const Symbol> x) {
  RequireNonEmittingHierarchical(model);
  const StepTable steps(model, x);
  Lattice lattice;
  ForwardPass(steps, lattice);
  BackwardPass(steps, lattice);
  return lattice;
}

Accumulators::Accumulators(std::size_t classes, double floor)
    : plus(classes, floor), minus(classes, floor) {}

double ExpectationStep(const MixtureModel& model, std::span<const Symbol> x,
                       Accumulators& acc) {
  if (model.hierarchy() != Hierarchy::kHierarchical) {
    throw UsageError("estimation needs a hierarchical model");
  }
  if (acc.plus.size() != model.lambdas().size()) {
    throw UsageError("accumulators do not match the model's classes");
  }
  return model.semantics() == Semantics::kNonEmitting ? NonEmittingExpectation(model, x, acc)
                                                      : InterpolatedExpectation(model, x, acc);
}

void MaximizationStep(MixtureModel& model, const Accumulators& acc) {
  for (ClassId c = 1; c < acc.plus.size(); ++c) {
    const double sum = acc.plus[c] + acc.minus[c];
    if (sum > 0.0) model.set_lambda(c, std::clamp(acc.plus[c] / sum, 0.0, 1.0));
  }
}

double BlockLog2Prob(const MixtureModel& model, std::span<const Symbol> x) {
  return model.Probability(x).Log2();
}

TrainedModel InitialModel(const Corpus& corpus, std::size_t alphabet_size, int order,
                          Semantics semantics, const TyingSpec& tying) {
  auto store = std::make_shared<CountStore>(CountStore::Build(corpus, order, alphabet_size));
  TyingScheme scheme = MakeTyingScheme(tying, *store, corpus);
  MixtureModel model(semantics, order, std::make_shared<CountEmission>(store),
                     std::move(scheme));
  return TrainedModel{std::move(store), std::move(model)};
}

EstimationTrace CrossEstimate(const Corpus& corpus, TrainedModel& trained,
                              const EstimationOptions& options) {
  if (corpus.num_blocks() < 2) {
    throw UsageError("cross-estimation needs at least two blocks");
  }
  return Iterate(trained.model, options, [&](Accumulators* acc) {
    return CrossPass(corpus, trained, options.threads, acc);
  });
}

Corpus JoinBlocks(const Corpus& b_delta, const Corpus& b_lambda) {
  Corpus joined;
  joined.data = b_delta.data;
  joined.data.insert(joined.data.end(), b_lambda.data.begin(), b_lambda.data.end());
  joined.bounds = {0, b_delta.size(), joined.data.size()};
  return joined;
}

EstimationTrace ForwardEstimate(const Corpus& joined, TrainedModel& trained,
                                const EstimationOptions& options) {
  if (joined.num_blocks() != 2 || joined.block(0).empty() || joined.block(1).empty()) {
    throw UsageError("forward estimation needs two nonempty blocks");
  }
  WithheldBlock held(*trained.store, joined, 1);
  return Iterate(trained.model, options, [&](Accumulators* acc) {
    return PassResult{ScoreBlock(joined, 1, trained.model, acc), joined.block(1).size()};
  });
}

}  // namespace nelm
