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

#ifndef NELM_CORPUS_H_
#define NELM_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "nelm/types.h"

namespace nelm {

enum class Unit { kChar, kWord };

std::string_view UnitName(Unit unit);
Unit ParseUnit(std::string_view name);

// Bidirectional token <-> id map. Ids are dense; the out-of-vocabulary
// symbol is always the last id and has an empty surface form.
class Alphabet {
 public:
  Alphabet() = default;

  // `tokens` must be distinct and nonempty. The OOV symbol is appended.
  Alphabet(std::vector<std::string> tokens, Unit unit);

  std::size_t size() const { return tokens_.size(); }
  Symbol oov_id() const { return oov_id_; }
  Unit unit() const { return unit_; }

  // Id of `token`, or oov_id() when unknown.
  Symbol Lookup(std::string_view token) const;
  bool Contains(std::string_view token) const;
  const std::string& token(Symbol id) const { return tokens_.at(id); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.unit_ == b.unit_ && a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  absl::flat_hash_map<std::string, Symbol> index_;
  Symbol oov_id_ = 0;
  Unit unit_ = Unit::kChar;
};

// A symbol sequence partitioned into contiguous nonempty blocks. Statistics
// never span a block boundary.
struct Corpus {
  std::vector<Symbol> data;
  // bounds.front() == 0, bounds.back() == data.size(), strictly increasing.
  std::vector<std::size_t> bounds;

  // Single block covering all of `symbols`.
  static Corpus FromSymbols(std::vector<Symbol> symbols);
  // One block per element of `blocks`.
  static Corpus FromBlocks(const std::vector<std::vector<Symbol>>& blocks);

  std::size_t size() const { return data.size(); }
  std::size_t num_blocks() const { return bounds.empty() ? 0 : bounds.size() - 1; }
  std::span<const Symbol> block(std::size_t i) const {
    return std::span<const Symbol>(data).subspan(bounds[i], bounds[i + 1] - bounds[i]);
  }
  std::size_t block_of(std::size_t position) const;

  // Throws DataError when the block invariants or id range are violated.
  void Validate(std::size_t alphabet_size) const;
};

struct LoadedCorpus {
  Alphabet alphabet;
  Corpus corpus;
};

// Alphabet = distinct code points of the text plus OOV.
LoadedCorpus CharCorpusFromText(std::string_view utf8);
LoadedCorpus LoadCharCorpus(const std::filesystem::path& path);

// Vocabulary = whitespace-separated tokens with frequency >= min_freq, plus
// OOV; rarer tokens map to OOV.
LoadedCorpus WordCorpusFromText(std::string_view text, std::size_t min_freq);
LoadedCorpus LoadWordCorpus(const std::filesystem::path& path, std::size_t min_freq);

// Encodes text with a fixed alphabet; unknown units map to OOV.
Corpus EncodeText(std::string_view text, const Alphabet& alphabet);
Corpus EncodeFile(const std::filesystem::path& path, const Alphabet& alphabet);

// Re-blocks `corpus` into m contiguous spans whose lengths differ by at most
// one, longer spans first.
Corpus PartitionBlocks(const Corpus& corpus, std::size_t m);

// Prefix of floor(fraction * T) symbols, and the remainder. Both sides come
// back as single-block corpora.
std::pair<Corpus, Corpus> TrainTestSplit(const Corpus& corpus, double train_fraction);

// Splits UTF-8 into code points, each returned as its own UTF-8 string.
// Throws DataError naming the byte offset of the first malformed sequence.
std::vector<std::string> SplitCodePoints(std::string_view utf8);

std::string ReadFile(const std::filesystem::path& path);

}  // namespace nelm

#endif  // NELM_CORPUS_H_
