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

// Forward/backward lattices and EM estimation of hierarchical lambdas.
//
// Lattice conventions for a block x of length b under a non-emitting model:
//   alpha(t, i)  probability of generating x^t and entering order i at time t,
//                before any non-emitting descent at t. alpha(0, 0) = 1.
//   beta(t, i)   probability of generating x_{t+1..b} from order i at time t,
//                descents at t included. beta(b, i) = 1.
// With this pairing sum_i alpha(t, i) beta(t, i) = p(x^b) for every t.

#ifndef NELM_ESTIMATION_H_
#define NELM_ESTIMATION_H_

#include <algorithm>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "nelm/corpus.h"
#include "nelm/counts.h"
#include "nelm/models.h"
#include "nelm/numeric.h"
#include "nelm/tying.h"

namespace nelm {

// Per-position parameters of a block, looked up once per E-step.
class StepTable {
 public:
  StepTable(const MixtureModel& model, std::span<const Symbol> x);

  std::size_t length() const { return length_; }
  int order() const { return order_; }
  int top(std::size_t t) const { return static_cast<int>(std::min<std::size_t>(order_, t)); }
  StateId state(std::size_t t, int i) const { return state_[Index(t, i)]; }
  double delta(std::size_t t, int i) const { return delta_[Index(t, i)]; }
  double lambda(std::size_t t, int i) const { return lambda_[Index(t, i)]; }

 private:
  std::size_t Index(std::size_t t, int i) const {
    return t * (static_cast<std::size_t>(order_) + 1) + static_cast<std::size_t>(i);
  }

  std::size_t length_;
  int order_;
  std::vector<StateId> state_;
  std::vector<double> delta_;
  std::vector<double> lambda_;
};

struct Lattice {
  int order = 0;
  std::size_t length = 0;
  std::vector<ExtScalar> alpha;  // (length + 1) x (order + 1)
  std::vector<ExtScalar> beta;   // same shape; empty until Backward runs
  ExtScalar total;

  ExtScalar& a(std::size_t t, int i) { return alpha[Index(t, i)]; }
  ExtScalar a(std::size_t t, int i) const { return alpha[Index(t, i)]; }
  ExtScalar& b(std::size_t t, int i) { return beta[Index(t, i)]; }
  ExtScalar b(std::size_t t, int i) const { return beta[Index(t, i)]; }
  std::size_t Index(std::size_t t, int i) const {
    return t * (static_cast<std::size_t>(order) + 1) + static_cast<std::size_t>(i);
  }
};

// Both require a hierarchical non-emitting model.
Lattice Forward(const MixtureModel& model, std::span<const Symbol> x);
Lattice ForwardBackward(const MixtureModel& model, std::span<const Symbol> x);
void ForwardPass(const StepTable& steps, Lattice& lattice);
void BackwardPass(const StepTable& steps, Lattice& lattice);

// Visit mass v(t, i) = alpha(t, i) + v(t, i + 1) (1 - lambda(t, i + 1)) for
// i = 0..top(t), written to `visit`.
void Visits(const StepTable& steps, const Lattice& lattice, std::size_t t,
            std::span<ExtScalar> visit);

struct Accumulators {
  Accumulators(std::size_t classes, double floor);

  std::vector<double> plus;   // expected emissions per class
  std::vector<double> minus;  // expected descents per class
};

// Adds posterior emission and descent expectations of `x` to `acc` and
// returns log2 p(x). Interpolated models re-enter the descent chain at every
// position. Throws NumericError when p(x) = 0.
double ExpectationStep(const MixtureModel& model, std::span<const Symbol> x,
                       Accumulators& acc);

// Sets lambda(c) = plus(c) / (plus(c) + minus(c)) for every class but 0.
void MaximizationStep(MixtureModel& model, const Accumulators& acc);

// log2 p(x) of a block evaluated from the empty context.
double BlockLog2Prob(const MixtureModel& model, std::span<const Symbol> x);

struct EstimationOptions {
  int iterations = 10;
  double acc_floor = 0.1;
  // Stop once the relative withheld log-likelihood gain drops below this;
  // 0 disables early stopping.
  double early_stop = 0.0;
  int threads = 1;
  std::ostream* log = nullptr;
};

struct EstimationTrace {
  // Withheld log2-likelihood under the lambdas of iteration 0, 1, ...; the
  // last entry follows the final maximization step.
  std::vector<double> withheld_log2;
  std::size_t withheld_symbols = 0;
};

// Model plus the count store backing its emission table.
struct TrainedModel {
  std::shared_ptr<CountStore> store;
  MixtureModel model;
};

// Builds counts over all blocks, a tying scheme from `tying`, and a model
// whose lambdas all start at 0.5.
TrainedModel InitialModel(const Corpus& corpus, std::size_t alphabet_size, int order,
                          Semantics semantics, const TyingSpec& tying);

// Cross-estimation over the blocks of `corpus` (at least two). `trained`
// must come from InitialModel on the same corpus; its counts are restored to
// the full corpus on return.
EstimationTrace CrossEstimate(const Corpus& corpus, TrainedModel& trained,
                              const EstimationOptions& options);

// Joins two corpora into one corpus of two blocks.
Corpus JoinBlocks(const Corpus& b_delta, const Corpus& b_lambda);

// Forward estimation on JoinBlocks(b_delta, b_lambda): block 1 is withheld
// from the counts during the iterations and restored at the end.
EstimationTrace ForwardEstimate(const Corpus& joined, TrainedModel& trained,
                                const EstimationOptions& options);

}  // namespace nelm

#endif  // NELM_ESTIMATION_H_
