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

#include "nelm/counts.h"

#include <algorithm>
#include <limits>
#include <string>
#include <tuple>

namespace nelm {

NodeId CountStore::GetOrCreate(NodeId node, Symbol symbol) {
  auto [it, inserted] =
      children_.try_emplace(Key(node, symbol), static_cast<NodeId>(nodes_.size()));
  if (inserted) {
    if (nodes_.size() >= static_cast<std::size_t>(kNoNode)) {
      throw DataError("count store exceeds the node limit");
    }
    Node child;
    child.parent = node;
    child.symbol = symbol;
    child.length = static_cast<std::uint8_t>(nodes_[node].length + 1);
    nodes_.push_back(child);
  }
  return it->second;
}

CountStore CountStore::Build(const Corpus& corpus, int order, std::size_t alphabet_size) {
  if (order < 0 || order > kMaxOrder) {
    throw UsageError("model order must lie in [0, " + std::to_string(kMaxOrder) + "]");
  }
  corpus.Validate(alphabet_size);
  if (corpus.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("corpus too large for 32-bit counts");
  }
  CountStore s;
  s.order_ = order;
  s.alphabet_size_ = alphabet_size;
  s.nodes_.emplace_back();
  const auto max_len = static_cast<std::size_t>(order) + 1;
  for (std::size_t b = 0; b < corpus.num_blocks(); ++b) {
    auto block = corpus.block(b);
    for (std::size_t end = 1; end <= block.size(); ++end) {
      NodeId node = s.root();
      const std::size_t depth = std::min(max_len, end);
      for (std::size_t m = 1; m <= depth; ++m) {
        node = s.GetOrCreate(node, block[end - m]);
        ++s.nodes_[node].occurrences;
      }
    }
  }
  s.Finalize();
  return s;
}

CountStore CountStore::FromEvents(int order, std::size_t alphabet_size,
                                  const std::vector<Event>& events) {
  if (order < 0 || order > kMaxOrder) {
    throw DataError("model order out of range in count events");
  }
  CountStore s;
  s.order_ = order;
  s.alphabet_size_ = alphabet_size;
  s.nodes_.emplace_back();
  for (const auto& [str, count] : events) {
    if (str.empty() || str.size() > static_cast<std::size_t>(order) + 1) {
      throw DataError("count event has invalid length");
    }
    if (count == 0 || count >= std::numeric_limits<std::uint32_t>::max()) {
      throw DataError("count event has invalid count");
    }
    NodeId node = s.root();
    for (std::size_t m = 1; m <= str.size(); ++m) {
      Symbol y = str[str.size() - m];
      if (y >= alphabet_size) throw DataError("count event symbol outside alphabet");
      node = s.GetOrCreate(node, y);
    }
    s.nodes_[node].occurrences += static_cast<std::uint32_t>(count);
  }
  s.Finalize();
  return s;
}

void CountStore::Finalize() {
  std::vector<std::vector<NodeId>> by_length(static_cast<std::size_t>(order_) + 2);
  for (NodeId n = 1; n < nodes_.size(); ++n) by_length[nodes_[n].length].push_back(n);
  for (auto& node : nodes_) {
    node.context_total = 0;
    node.diversity = 0;
  }
  for (std::size_t len = 1; len < by_length.size(); ++len) {
    for (NodeId n : by_length[len]) {
      Node& node = nodes_[n];
      node.prefix = len == 1 ? root() : Child(nodes_[node.parent].prefix, node.symbol);
      if (node.prefix == kNoNode) {
        throw DataError("count store is missing the prefix of a stored string");
      }
      if (node.occurrences > 0) {
        nodes_[node.prefix].context_total += node.occurrences;
        ++nodes_[node.prefix].diversity;
      }
    }
  }
  nodes_[root()].occurrences = nodes_[root()].context_total;
}

void CountStore::AdjustOccurrence(NodeId n, int sign) {
  Node& node = nodes_[n];
  Node& pre = nodes_[node.prefix];
  if (sign < 0) {
    if (node.occurrences == 0) throw DataError("withholding more counts than stored");
    --node.occurrences;
    --pre.context_total;
    if (node.occurrences == 0) --pre.diversity;
  } else {
    if (node.occurrences == 0) ++pre.diversity;
    ++node.occurrences;
    ++pre.context_total;
  }
}

void CountStore::ApplyBlock(std::span<const Symbol> block, int sign) {
  const auto max_len = static_cast<std::size_t>(order_) + 1;
  for (std::size_t end = 1; end <= block.size(); ++end) {
    NodeId node = root();
    const std::size_t depth = std::min(max_len, end);
    for (std::size_t m = 1; m <= depth; ++m) {
      node = Child(node, block[end - m]);
      if (node == kNoNode) throw DataError("block statistics are not in the store");
      AdjustOccurrence(node, sign);
    }
  }
  auto len = static_cast<std::uint32_t>(block.size());
  if (sign < 0) {
    nodes_[root()].occurrences -= len;
  } else {
    nodes_[root()].occurrences += len;
  }
}

void CountStore::Withhold(const Corpus& corpus, std::size_t block) {
  if (block >= corpus.num_blocks()) {
    throw UsageError("invalid block id " + std::to_string(block));
  }
  ApplyBlock(corpus.block(block), -1);
}

void CountStore::Restore(const Corpus& corpus, std::size_t block) {
  if (block >= corpus.num_blocks()) {
    throw UsageError("invalid block id " + std::to_string(block));
  }
  ApplyBlock(corpus.block(block), +1);
}

NodeId CountStore::Find(std::span<const Symbol> s) const {
  NodeId node = root();
  for (std::size_t m = 1; m <= s.size() && node != kNoNode; ++m) {
    node = Child(node, s[s.size() - m]);
  }
  return node;
}

std::uint64_t CountStore::Occurrences(std::span<const Symbol> s) const {
  NodeId n = Find(s);
  return n == kNoNode ? 0 : occurrences(n);
}

std::uint64_t CountStore::ContextTotal(std::span<const Symbol> context) const {
  NodeId n = Find(context);
  return n == kNoNode ? 0 : context_total(n);
}

std::uint64_t CountStore::SuccessorCount(std::span<const Symbol> context, Symbol y) const {
  NodeId n = Child(root(), y);
  for (std::size_t m = 1; m <= context.size() && n != kNoNode; ++m) {
    n = Child(n, context[context.size() - m]);
  }
  return n == kNoNode ? 0 : occurrences(n);
}

std::uint64_t CountStore::Diversity(std::span<const Symbol> context) const {
  NodeId n = Find(context);
  return n == kNoNode ? 0 : diversity(n);
}

double CountStore::MlDelta(std::span<const Symbol> context, Symbol y) const {
  if (context.size() > static_cast<std::size_t>(order_)) {
    throw UsageError("context longer than the store order");
  }
  const std::uint64_t num = SuccessorCount(context, y);
  if (context.empty()) {
    return static_cast<double>(num + 1) /
           static_cast<double>(context_total(root()) + alphabet_size_);
  }
  const std::uint64_t den = ContextTotal(context);
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<Symbol> CountStore::String(NodeId n) const {
  std::vector<Symbol> out;
  out.reserve(nodes_[n].length);
  for (; n != root(); n = nodes_[n].parent) out.push_back(nodes_[n].symbol);
  return out;
}

std::vector<std::uint32_t> CountStore::CanonicalRanks(int max_length) const {
  std::vector<std::uint32_t> rank(nodes_.size(), kNoState);
  rank[root()] = 0;
  std::vector<std::vector<NodeId>> by_length(static_cast<std::size_t>(max_length) + 1);
  for (NodeId n = 1; n < nodes_.size(); ++n) {
    const Node& node = nodes_[n];
    if (node.occurrences > 0 && node.length <= max_length) {
      by_length[node.length].push_back(n);
    }
  }
  std::uint32_t next = 1;
  for (std::size_t len = 1; len < by_length.size(); ++len) {
    auto& bucket = by_length[len];
    // Lexicographic order of symbol + string(parent); parents are already
    // ranked monotonically within their own length.
    std::sort(bucket.begin(), bucket.end(), [&](NodeId a, NodeId b) {
      return std::tie(nodes_[a].symbol, rank[nodes_[a].parent]) <
             std::tie(nodes_[b].symbol, rank[nodes_[b].parent]);
    });
    for (NodeId n : bucket) rank[n] = next++;
  }
  return rank;
}

void CountStore::ForEachEvent(
    const std::function<void(std::span<const Symbol>, std::uint64_t)>& visit) const {
  std::vector<std::uint32_t> rank = CanonicalRanks(order_ + 1);
  std::vector<NodeId> ordered;
  for (NodeId n = 1; n < nodes_.size(); ++n) {
    if (rank[n] != kNoState) ordered.push_back(n);
  }
  std::sort(ordered.begin(), ordered.end(),
            [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
  for (NodeId n : ordered) {
    std::vector<Symbol> s = String(n);
    visit(s, occurrences(n));
  }
}

bool CountStore::SameStatistics(const CountStore& other) const {
  using Row = std::tuple<std::vector<Symbol>, std::uint64_t, std::uint64_t, std::uint64_t>;
  auto collect = [](const CountStore& s) {
    std::vector<Row> rows;
    rows.emplace_back(std::vector<Symbol>{}, s.occurrences(s.root()),
                      s.context_total(s.root()), s.diversity(s.root()));
    for (NodeId n = 1; n < s.nodes_.size(); ++n) {
      if (s.occurrences(n) == 0) continue;
      rows.emplace_back(s.String(n), s.occurrences(n), s.context_total(n), s.diversity(n));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  return order_ == other.order_ && alphabet_size_ == other.alphabet_size_ &&
         collect(*this) == collect(other);
}

}  // namespace nelm
