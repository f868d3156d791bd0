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

// Context statistics for all orders 0..n.
//
// Every substring of length 1..n+1 that occurs inside a block is a node of a
// reversed-context trie: the children of a node are the strings obtained by
// prepending one symbol. Walking from the root along x_t, x_{t-1}, ...
// therefore visits the contexts of increasing order at time t, and the
// occurrence count of the node for x^i y is the successor count c(x^i y).

#ifndef NELM_COUNTS_H_
#define NELM_COUNTS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "nelm/corpus.h"
#include "nelm/types.h"

namespace nelm {

using NodeId = StateId;
inline constexpr NodeId kNoNode = kNoState;

class CountStore {
 public:
  CountStore() = default;

  // Counts every substring of length <= order + 1 within each block.
  static CountStore Build(const Corpus& corpus, int order, std::size_t alphabet_size);

  // Rebuilds a store from (string, occurrence count) events, as written to
  // model files. Each string has length 1..order+1.
  using Event = std::pair<std::vector<Symbol>, std::uint64_t>;
  static CountStore FromEvents(int order, std::size_t alphabet_size,
                               const std::vector<Event>& events);

  int order() const { return order_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t node_count() const { return nodes_.size(); }
  NodeId root() const { return 0; }

  // Node for (symbol + string(node)), or kNoNode.
  NodeId Child(NodeId node, Symbol symbol) const {
    if (node == kNoNode) return kNoNode;
    auto it = children_.find(Key(node, symbol));
    return it == children_.end() ? kNoNode : it->second;
  }
  // Node for `s` (natural reading order), or kNoNode.
  NodeId Find(std::span<const Symbol> s) const;

  int length(NodeId n) const { return nodes_[n].length; }
  Symbol first_symbol(NodeId n) const { return nodes_[n].symbol; }
  // Node for the string without its first symbol.
  NodeId parent(NodeId n) const { return nodes_[n].parent; }
  // Node for the string without its last symbol.
  NodeId prefix(NodeId n) const { return nodes_[n].prefix; }

  // c(x^i): times the string occurs inside a block. For the empty string this
  // is the number of predicted positions.
  std::uint64_t occurrences(NodeId n) const { return nodes_[n].occurrences; }
  // Number of occurrences followed by a symbol in the same block.
  std::uint64_t context_total(NodeId n) const { return nodes_[n].context_total; }
  // q(x^i): distinct symbols observed after the context.
  std::uint64_t diversity(NodeId n) const { return nodes_[n].diversity; }

  // Convenience lookups by string; zero for unseen strings.
  std::uint64_t Occurrences(std::span<const Symbol> s) const;
  std::uint64_t ContextTotal(std::span<const Symbol> context) const;
  std::uint64_t SuccessorCount(std::span<const Symbol> context, Symbol y) const;
  std::uint64_t Diversity(std::span<const Symbol> context) const;

  // Maximum-likelihood transition probability; add-one over the alphabet for
  // the empty context, 0 for unseen nonempty contexts.
  double MlDelta(std::span<const Symbol> context, Symbol y) const;

  // Natural-order string represented by `n`.
  std::vector<Symbol> String(NodeId n) const;

  // Removes (sign = -1) or re-adds (sign = +1) the statistics of one block of
  // the corpus this store was built from. O(order * |block|).
  void Withhold(const Corpus& corpus, std::size_t block);
  void Restore(const Corpus& corpus, std::size_t block);

  // Canonical rank of every node with nonzero occurrences and length in
  // [1, max_length]: nodes sorted by (length, string). Others get kNoState.
  // The root always has rank 0 and ranks of length-L nodes follow all
  // shorter ones, starting at 1.
  std::vector<std::uint32_t> CanonicalRanks(int max_length) const;

  // Visits (string, occurrences) for every nonzero node of length >= 1 in
  // canonical order.
  void ForEachEvent(
      const std::function<void(std::span<const Symbol>, std::uint64_t)>& visit) const;

  // Statistics equality ignoring node numbering and zero-count nodes.
  bool SameStatistics(const CountStore& other) const;

 private:
  struct Node {
    NodeId parent = kNoNode;
    NodeId prefix = kNoNode;
    Symbol symbol = 0;
    std::uint32_t occurrences = 0;
    std::uint32_t context_total = 0;
    std::uint32_t diversity = 0;
    std::uint8_t length = 0;
  };

  static std::uint64_t Key(NodeId node, Symbol symbol) {
    return (static_cast<std::uint64_t>(node) << 32) | symbol;
  }

  NodeId GetOrCreate(NodeId node, Symbol symbol);
  // Fills prefix links, context totals and diversities from occurrences.
  void Finalize();
  void ApplyBlock(std::span<const Symbol> block, int sign);
  void AdjustOccurrence(NodeId n, int sign);

  int order_ = 0;
  std::size_t alphabet_size_ = 0;
  std::vector<Node> nodes_;
  absl::flat_hash_map<std::uint64_t, NodeId> children_;
};

// Scoped "B - B_i" view: withholds one block for the lifetime of the object.
class WithheldBlock {
 public:
  WithheldBlock(CountStore& store, const Corpus& corpus, std::size_t block)
      : store_(store), corpus_(corpus), block_(block) {
    store_.Withhold(corpus_, block_);
  }
  ~WithheldBlock() { store_.Restore(corpus_, block_); }
  WithheldBlock(const WithheldBlock&) = delete;
  WithheldBlock& operator=(const WithheldBlock&) = delete;

 private:
  CountStore& store_;
  const Corpus& corpus_;
  std::size_t block_;
};

}  // namespace nelm

#endif  // NELM_COUNTS_H_
