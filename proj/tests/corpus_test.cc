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

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"

namespace nelm {
namespace {

std::vector<std::size_t> BlockLengths(const Corpus& c) {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < c.num_blocks(); ++b) out.push_back(c.block(b).size());
  return out;
}

TEST(CorpusTest, CharAbab) {
  LoadedCorpus l = CharCorpusFromText("abab");
  ASSERT_EQ(l.alphabet.size(), 3u);
  EXPECT_EQ(l.alphabet.token(0), "a");
  EXPECT_EQ(l.alphabet.token(1), "b");
  EXPECT_EQ(l.alphabet.oov_id(), 2u);
  EXPECT_EQ(l.corpus.data, (std::vector<Symbol>{0, 1, 0, 1}));
  EXPECT_EQ(l.corpus.size(), 4u);
  l.corpus.Validate(l.alphabet.size());
}

TEST(CorpusTest, CharSingleSymbol) {
  LoadedCorpus l = CharCorpusFromText("aaaa");
  EXPECT_EQ(l.alphabet.size(), 2u);
  EXPECT_EQ(l.corpus.size(), 4u);
}

TEST(CorpusTest, CharUnicodeCodePoints) {
  LoadedCorpus l = CharCorpusFromText("h\xC3\xA9h");
  EXPECT_EQ(l.alphabet.size(), 3u);
  EXPECT_EQ(l.corpus.size(), 3u);
  EXPECT_EQ(l.alphabet.token(l.corpus.data[1]), "\xC3\xA9");
}

TEST(CorpusTest, CharErrors) {
  EXPECT_THROW(CharCorpusFromText(""), DataError);
  try {
    CharCorpusFromText("ab\xFFz");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 2"), std::string::npos);
  }
  EXPECT_THROW(CharCorpusFromText("a\xC3"), DataError);
}

TEST(CorpusTest, WordMinFreq) {
  LoadedCorpus l = WordCorpusFromText("a b a c", 2);
  ASSERT_EQ(l.alphabet.size(), 2u);
  EXPECT_EQ(l.alphabet.token(0), "a");
  const Symbol a = 0, oov = l.alphabet.oov_id();
  EXPECT_EQ(l.corpus.data, (std::vector<Symbol>{a, oov, a, oov}));
}

TEST(CorpusTest, WordSingle) {
  LoadedCorpus l = WordCorpusFromText("x x x", 1);
  EXPECT_EQ(l.alphabet.size(), 2u);
  EXPECT_EQ(l.corpus.data, (std::vector<Symbol>{0, 0, 0}));
  EXPECT_THROW(WordCorpusFromText("   \n", 1), DataError);
  EXPECT_THROW(WordCorpusFromText("a", 0), UsageError);
}

TEST(CorpusTest, TestTokensMapToOov) {
  LoadedCorpus l = WordCorpusFromText("the cat the dog", 1);
  Corpus test = EncodeText("the bird cat fish", l.alphabet);
  for (Symbol s : test.data) EXPECT_LT(s, l.alphabet.size());
  EXPECT_EQ(test.data[1], l.alphabet.oov_id());
  EXPECT_EQ(test.data[3], l.alphabet.oov_id());
  EXPECT_EQ(test.data[2], l.alphabet.Lookup("cat"));
}

TEST(CorpusTest, PartitionBlocks) {
  Corpus c = Corpus::FromSymbols(std::vector<Symbol>(10, 0));
  EXPECT_EQ(BlockLengths(PartitionBlocks(c, 3)), (std::vector<std::size_t>{4, 3, 3}));
  Corpus five = Corpus::FromSymbols(std::vector<Symbol>(5, 0));
  EXPECT_EQ(BlockLengths(PartitionBlocks(five, 5)), (std::vector<std::size_t>(5, 1)));
  EXPECT_THROW(PartitionBlocks(five, 6), UsageError);
  EXPECT_THROW(PartitionBlocks(five, 0), UsageError);
  Corpus big = Corpus::FromSymbols(std::vector<Symbol>(1000, 0));
  auto lengths = BlockLengths(PartitionBlocks(big, 21));
  EXPECT_EQ(lengths.size(), 21u);
  EXPECT_LE(*std::max_element(lengths.begin(), lengths.end()) -
                *std::min_element(lengths.begin(), lengths.end()),
            1u);
}

TEST(CorpusTest, TrainTestSplit) {
  std::vector<Symbol> ids(100);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Symbol>(i % 7);
  Corpus c = Corpus::FromSymbols(ids);
  auto [train, test] = TrainTestSplit(c, 0.9);
  EXPECT_EQ(train.size(), 90u);
  EXPECT_EQ(test.size(), 10u);
  EXPECT_EQ(test.data.front(), ids[90]);
  Corpus ten = Corpus::FromSymbols(std::vector<Symbol>(10, 0));
  auto [a, b] = TrainTestSplit(ten, 0.5);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(b.size(), 5u);
  EXPECT_THROW(TrainTestSplit(ten, 1.0), UsageError);
  EXPECT_THROW(TrainTestSplit(ten, 0.01), DataError);
}

TEST(CorpusTest, ValidateRejectsBadCorpora) {
  Corpus c = Corpus::FromBlocks({{0, 1}, {}, {1}});
  EXPECT_THROW(c.Validate(2), DataError);
  Corpus d = Corpus::FromSymbols({0, 5});
  EXPECT_THROW(d.Validate(2), DataError);
}

TEST(CorpusTest, ReloadIsDeterministic) {
  const auto path = std::filesystem::temp_directory_path() / "nelm_corpus_test.txt";
  {
    std::ofstream out(path);
    out << "the quick brown fox\njumps over the lazy dog\n";
  }
  LoadedCorpus a = LoadCharCorpus(path), b = LoadCharCorpus(path);
  EXPECT_EQ(a.corpus.data, b.corpus.data);
  EXPECT_TRUE(a.alphabet == b.alphabet);
  EXPECT_EQ(EncodeFile(path, a.alphabet).data, a.corpus.data);
  std::filesystem::remove(path);
  EXPECT_THROW(LoadCharCorpus(path), DataError);
}

}  // namespace
}  // namespace nelm
