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

// Trained models and their text file format.
//
// The file is line oriented UTF-8:
//
//   nelm-model 1
//   [meta]       key=value lines
//   [alphabet]   one hex-encoded token per line in id order (OOV excluded)
//   [counts]     <context length>\t<context ids, comma separated>\t<symbol>\t<count>
//   [lambda]     <class>\t<log2 lambda>\t<lambda>
//   [tying]      <context length>\t<context ids>\t<class>   (posterior tying only)
//   [backoff]    discount=, thresholds=, then dictionary entries as count lines
//   [end]
//
// Reals use 17 significant digits. The lambda column is authoritative on
// load; the log2 column is for reading. Tying classes other than posterior
// are rebuilt from the counts, which reproduces the same class numbering.

#ifndef NELM_MODEL_IO_H_
#define NELM_MODEL_IO_H_

#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nelm/backoff.h"
#include "nelm/corpus.h"
#include "nelm/counts.h"
#include "nelm/models.h"
#include "nelm/tying.h"

namespace nelm {

enum class Mode { kBasic, kInterpolated, kNonEmitting, kBackoff, kNonEmittingBackoff };

std::string_view ModeName(Mode mode);
// Accepts basic|interpolated|nonemit|backoff|nonemit-backoff.
Mode ParseMode(std::string_view name);
bool IsMixtureMode(Mode mode);
bool IsBackoffMode(Mode mode);

struct BackoffConfig {
  std::vector<double> thresholds;  // per order; empty means 0
  double discount = 0.5;
};

struct ModelBundle {
  Mode mode = Mode::kBasic;
  Alphabet alphabet;
  int order = 0;
  std::shared_ptr<const CountStore> store;
  TyingSpec tying;
  BackoffConfig backoff_config;
  std::string estimation;  // recorded for reference only
  std::optional<MixtureModel> mixture;
  std::optional<BasicModel> basic;
  std::optional<BackoffModel> backoff;

  const SequenceModel& model() const;
};

// Builds the evaluable model of a count-based bundle: basic or backoff
// modes from `store`, or wraps a trained mixture.
ModelBundle MakeBasicBundle(Alphabet alphabet, int order, std::shared_ptr<const CountStore> store);
ModelBundle MakeBackoffBundle(Mode mode, Alphabet alphabet, int order,
                              std::shared_ptr<const CountStore> store, BackoffConfig config);
ModelBundle MakeMixtureBundle(Mode mode, Alphabet alphabet,
                              std::shared_ptr<const CountStore> store, MixtureModel model);

void SaveModel(const ModelBundle& bundle, std::ostream& out);
void SaveModelFile(const ModelBundle& bundle, const std::filesystem::path& path);
// Throws DataError for malformed files.
ModelBundle LoadModel(std::istream& in);
ModelBundle LoadModelFile(const std::filesystem::path& path);

}  // namespace nelm

#endif  // NELM_MODEL_IO_H_
