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

#include "nelm/tying.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <utility>

namespace nelm {
namespace {

bool IsState(const CountStore& store, NodeId n) {
  return store.length(n) <= store.order() && store.context_total(n) > 0;
}

// Assigns class 1 + rank(key) to every non-root state, where rank orders the
// distinct keys.
template <typename Key, typename KeyFn>
TyingScheme KeyedScheme(const CountStore& store, TyingSpec spec, KeyFn key_of) {
  std::map<Key, ClassId> keys;
  for (NodeId n = 1; n < store.node_count(); ++n) {
    if (IsState(store, n)) keys.emplace(key_of(n), 0);
  }
  ClassId next = 1;
  for (auto& [key, id] : keys) id = next++;
  std::vector<ClassId> class_of(store.node_count(), kNoClass);
  class_of[store.root()] = 0;
  for (NodeId n = 1; n < store.node_count(); ++n) {
    if (IsState(store, n)) class_of[n] = keys.at(key_of(n));
  }
  return TyingScheme(spec, std::move(class_of), next);
}

}  // namespace

TyingSpec ParseTyingSpec(std::string_view text) {
  TyingSpec spec;
  if (text == "none" || text == "untied") {
    spec.kind = TyingKind::kUntied;
  } else if (text == "order") {
    spec.kind = TyingKind::kOrder;
  } else if (text == "freq-div") {
    spec.kind = TyingKind::kFreqDiv;
  } else if (text == "freq-div-log") {
    spec.kind = TyingKind::kFreqDivLog;
  } else if (text.substr(0, 9) == "posterior") {
    spec.kind = TyingKind::kPosterior;
    if (text.size() > 9) {
      if (text[9] != ':') throw UsageError("malformed tying '" + std::string(text) + "'");
      std::string levels(text.substr(10));
      try {
        std::size_t used = 0;
        spec.levels = std::stoi(levels, &used);
        if (used != levels.size()) throw std::invalid_argument(levels);
      } catch (const std::exception&) {
        throw UsageError("malformed posterior level count '" + levels + "'");
      }
      if (spec.levels < 1) throw UsageError("posterior levels must be at least 1");
    }
  } else {
    throw UsageError("unknown tying '" + std::string(text) +
                     "' (expected none|order|freq-div|freq-div-log|posterior[:levels])");
  }
  return spec;
}

std::string FormatTyingSpec(const TyingSpec& spec) {
  switch (spec.kind) {
    case TyingKind::kUntied:
      return "none";
    case TyingKind::kOrder:
      return "order";
    case TyingKind::kFreqDiv:
      return "freq-div";
    case TyingKind::kFreqDivLog:
      return "freq-div-log";
    case TyingKind::kPosterior:
      return "posterior:" + std::to_string(spec.levels);
  }
  return "none";
}

TyingScheme::TyingScheme(TyingSpec spec, std::vector<ClassId> class_of,
                         std::size_t class_count)
    : spec_(spec), class_of_(std::move(class_of)), class_count_(class_count) {}

TyingScheme UntiedScheme(const CountStore& store) {
  std::vector<std::uint32_t> rank = store.CanonicalRanks(store.order());
  std::vector<NodeId> states;
  for (NodeId n = 1; n < store.node_count(); ++n) {
    if (IsState(store, n)) states.push_back(n);
  }
  std::sort(states.begin(), states.end(),
            [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
  std::vector<ClassId> class_of(store.node_count(), kNoClass);
  class_of[store.root()] = 0;
  ClassId next = 1;
  for (NodeId n : states) class_of[n] = next++;
  return TyingScheme({TyingKind::kUntied, 0}, std::move(class_of), next);
}

TyingScheme OrderScheme(const CountStore& store) {
  std::vector<ClassId> class_of(store.node_count(), kNoClass);
  class_of[store.root()] = 0;
  for (NodeId n = 1; n < store.node_count(); ++n) {
    if (IsState(store, n)) class_of[n] = static_cast<ClassId>(store.length(n));
  }
  return TyingScheme({TyingKind::kOrder, 0}, std::move(class_of),
                     static_cast<std::size_t>(store.order()) + 1);
}

TyingScheme FreqDivScheme(const CountStore& store, bool log_buckets) {
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  if (log_buckets) {
    return KeyedScheme<Key>(store, {TyingKind::kFreqDivLog, 0}, [&](NodeId n) {
      return Key(std::bit_width(store.context_total(n)) - 1,
                 std::bit_width(store.diversity(n)) - 1);
    });
  }
  return KeyedScheme<Key>(store, {TyingKind::kFreqDiv, 0}, [&](NodeId n) {
    return Key(store.context_total(n), store.diversity(n));
  });
}

TyingScheme DenseUntiedScheme(const DenseEmission& table) {
  std::vector<ClassId> class_of(table.state_capacity());
  for (std::size_t s = 0; s < class_of.size(); ++s) class_of[s] = static_cast<ClassId>(s);
  return TyingScheme({TyingKind::kUntied, 0}, std::move(class_of), class_of.size());
}

TyingScheme DenseOrderScheme(const DenseEmission& table) {
  std::vector<ClassId> class_of(table.state_capacity());
  for (std::size_t s = 0; s < class_of.size(); ++s) {
    class_of[s] = static_cast<ClassId>(table.StateOrder(static_cast<StateId>(s)));
  }
  return TyingScheme({TyingKind::kOrder, 0}, std::move(class_of),
                     static_cast<std::size_t>(table.order()) + 1);
}

double EmpiricalPosterior(const CountStore& store, const Corpus& corpus, std::size_t t,
                          int i) {
  if (t >= corpus.size()) throw UsageError("position outside the corpus");
  const std::size_t b = corpus.block_of(t);
  const std::size_t start = corpus.bounds[b];
  const std::size_t avail = std::min<std::size_t>(store.order(), t - start);
  if (avail == 0) throw UsageError("no state of positive order at a block start");
  if (i < 1 || static_cast<std::size_t>(i) > avail) {
    throw UsageError("state order outside [1, min(n, t)]");
  }
  double total = 0.0;
  double mine = 0.0;
  NodeId node = store.root();
  for (std::size_t j = 1; j <= avail; ++j) {
    node = store.Child(node, corpus.data[t - j]);
    if (node == kNoNode) break;
    const auto w = static_cast<double>(store.context_total(node));
    total += w;
    if (j == static_cast<std::size_t>(i)) mine = w;
  }
  return total > 0.0 ? mine / total : 0.0;
}

PosteriorStats ComputePosteriorStats(const CountStore& store, const Corpus& corpus) {
  PosteriorStats stats;
  stats.empirical_expectation.assign(store.node_count(), 0.0);
  stats.mean_posterior.assign(store.node_count(), 0.0);
  const auto n = static_cast<std::size_t>(store.order());
  std::vector<NodeId> nodes(n + 1);
  for (std::size_t b = 0; b < corpus.num_blocks(); ++b) {
    auto block = corpus.block(b);
    for (std::size_t t = 1; t < block.size(); ++t) {
      const std::size_t avail = std::min(n, t);
      double total = 0.0;
      std::size_t found = 0;
      NodeId node = store.root();
      for (std::size_t j = 1; j <= avail; ++j) {
        node = store.Child(node, block[t - j]);
        if (node == kNoNode || store.context_total(node) == 0) break;
        nodes[j] = node;
        total += static_cast<double>(store.context_total(node));
        found = j;
      }
      for (std::size_t j = 1; j <= found; ++j) {
        stats.empirical_expectation[nodes[j]] +=
            static_cast<double>(store.context_total(nodes[j])) / total;
      }
    }
  }
  for (NodeId s = 1; s < store.node_count(); ++s) {
    if (IsState(store, s)) {
      stats.mean_posterior[s] = stats.empirical_expectation[s] /
                                static_cast<double>(store.context_total(s));
    }
  }
  return stats;
}

TyingScheme PosteriorScheme(const CountStore& store, const Corpus& corpus, int levels) {
  if (levels < 1) throw UsageError("posterior levels must be at least 1");
  PosteriorStats stats = ComputePosteriorStats(store, corpus);
  using Key = std::pair<int, int>;
  return KeyedScheme<Key>(store, {TyingKind::kPosterior, levels}, [&](NodeId n) {
    int bucket = static_cast<int>(std::floor(stats.mean_posterior[n] * levels));
    return Key(store.length(n), std::clamp(bucket, 0, levels - 1));
  });
}

TyingScheme MakeTyingScheme(const TyingSpec& spec, const CountStore& store,
                            const Corpus& corpus) {
  switch (spec.kind) {
    case TyingKind::kUntied:
      return UntiedScheme(store);
    case TyingKind::kOrder:
      return OrderScheme(store);
    case TyingKind::kFreqDiv:
      return FreqDivScheme(store, false);
    case TyingKind::kFreqDivLog:
      return FreqDivScheme(store, true);
    case TyingKind::kPosterior:
      return PosteriorScheme(store, corpus, spec.levels);
  }
  throw UsageError("unknown tying kind");
}

}  // namespace nelm
