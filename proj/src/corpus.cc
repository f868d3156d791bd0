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

#include "nelm/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace nelm {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> SplitWords(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace

std::string_view UnitName(Unit unit) { return unit == Unit::kChar ? "char" : "word"; }

Unit ParseUnit(std::string_view name) {
  if (name == "char") return Unit::kChar;
  if (name == "word") return Unit::kWord;
  throw UsageError("unknown unit '" + std::string(name) + "' (expected char|word)");
}

Alphabet::Alphabet(std::vector<std::string> tokens, Unit unit)
    : tokens_(std::move(tokens)), unit_(unit) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw DataError("alphabet tokens must be nonempty");
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<Symbol>(i));
    if (!inserted) throw DataError("duplicate alphabet token '" + tokens_[i] + "'");
  }
  oov_id_ = static_cast<Symbol>(tokens_.size());
  tokens_.emplace_back();
}

Symbol Alphabet::Lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? oov_id_ : it->second;
}

bool Alphabet::Contains(std::string_view token) const { return index_.contains(std::string(token)); }

Corpus Corpus::FromSymbols(std::vector<Symbol> symbols) {
  Corpus c;
  c.bounds = {0, symbols.size()};
  c.data = std::move(symbols);
  return c;
}

Corpus Corpus::FromBlocks(const std::vector<std::vector<Symbol>>& blocks) {
  Corpus c;
  c.bounds.push_back(0);
  for (const auto& b : blocks) {
    c.data.insert(c.data.end(), b.begin(), b.end());
    c.bounds.push_back(c.data.size());
  }
  return c;
}

std::size_t Corpus::block_of(std::size_t position) const {
  auto it = std::upper_bound(bounds.begin(), bounds.end(), position);
  return static_cast<std::size_t>(it - bounds.begin()) - 1;
}

void Corpus::Validate(std::size_t alphabet_size) const {
  if (bounds.size() < 2 || bounds.front() != 0 || bounds.back() != data.size()) {
    throw DataError("corpus block bounds do not cover the data");
  }
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (bounds[i] <= bounds[i - 1]) throw DataError("corpus contains an empty block");
  }
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (data[t] >= alphabet_size) {
      throw DataError("symbol id at position " + std::to_string(t) +
                      " is outside the alphabet");
    }
  }
}

std::vector<std::string> SplitCodePoints(std::string_view utf8) {
  std::vector<std::string> out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    auto b0 = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > utf8.size()) {
      throw DataError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (std::size_t j = 1; j < len; ++j) {
      auto b = static_cast<unsigned char>(utf8[i + j]);
      if ((b & 0xC0) != 0x80) {
        throw DataError("invalid UTF-8 continuation byte at offset " +
                        std::to_string(i + j));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr std::uint32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw DataError("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.emplace_back(utf8.substr(i, len));
    i += len;
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedCorpus CharCorpusFromText(std::string_view utf8) {
  if (utf8.empty()) throw DataError("corpus is empty");
  std::vector<std::string> units = SplitCodePoints(utf8);
  std::vector<std::string> distinct = units;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  LoadedCorpus out{Alphabet(std::move(distinct), Unit::kChar), {}};
  std::vector<Symbol> ids;
  ids.reserve(units.size());
  for (const auto& u : units) ids.push_back(out.alphabet.Lookup(u));
  out.corpus = Corpus::FromSymbols(std::move(ids));
  return out;
}

LoadedCorpus LoadCharCorpus(const std::filesystem::path& path) {
  return CharCorpusFromText(ReadFile(path));
}

LoadedCorpus WordCorpusFromText(std::string_view text, std::size_t min_freq) {
  if (min_freq < 1) throw UsageError("min_freq must be at least 1");
  std::vector<std::string_view> words = SplitWords(text);
  if (words.empty()) throw DataError("corpus is empty");
  absl::flat_hash_map<std::string_view, std::size_t> freq;
  for (auto w : words) ++freq[w];
  std::vector<std::string> vocab;
  for (const auto& [w, c] : freq) {
    if (c >= min_freq) vocab.emplace_back(w);
  }
  std::sort(vocab.begin(), vocab.end());
  LoadedCorpus out{Alphabet(std::move(vocab), Unit::kWord), {}};
  std::vector<Symbol> ids;
  ids.reserve(words.size());
  for (auto w : words) ids.push_back(out.alphabet.Lookup(w));
  out.corpus = Corpus::FromSymbols(std::move(ids));
  return out;
}

LoadedCorpus LoadWordCorpus(const std::filesystem::path& path, std::size_t min_freq) {
  return WordCorpusFromText(ReadFile(path), min_freq);
}

Corpus EncodeText(std::string_view text, const Alphabet& alphabet) {
  std::vector<Symbol> ids;
  if (alphabet.unit() == Unit::kChar) {
    for (const auto& u : SplitCodePoints(text)) ids.push_back(alphabet.Lookup(u));
  } else {
    for (auto w : SplitWords(text)) ids.push_back(alphabet.Lookup(w));
  }
  if (ids.empty()) throw DataError("text is empty");
  return Corpus::FromSymbols(std::move(ids));
}

Corpus EncodeFile(const std::filesystem::path& path, const Alphabet& alphabet) {
  return EncodeText(ReadFile(path), alphabet);
}

Corpus PartitionBlocks(const Corpus& corpus, std::size_t m) {
  const std::size_t t = corpus.size();
  if (m < 1) throw UsageError("block count must be at least 1");
  if (m > t) {
    throw UsageError("block count " + std::to_string(m) + " exceeds corpus length " +
                     std::to_string(t));
  }
  Corpus out;
  out.data = corpus.data;
  out.bounds.reserve(m + 1);
  out.bounds.push_back(0);
  const std::size_t base = t / m;
  const std::size_t extra = t % m;
  for (std::size_t i = 0; i < m; ++i) {
    out.bounds.push_back(out.bounds.back() + base + (i < extra ? 1 : 0));
  }
  return out;
}

std::pair<Corpus, Corpus> TrainTestSplit(const Corpus& corpus, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie strictly between 0 and 1");
  }
  const auto cut = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(corpus.size())));
  if (cut == 0 || cut == corpus.size()) {
    throw DataError("train/test split leaves one side empty");
  }
  std::vector<Symbol> train(corpus.data.begin(), corpus.data.begin() + cut);
  std::vector<Symbol> test(corpus.data.begin() + cut, corpus.data.end());
  return {Corpus::FromSymbols(std::move(train)), Corpus::FromSymbols(std::move(test))};
}

}  // namespace nelm
