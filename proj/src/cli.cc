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

#include "nelm/cli.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nelm/analysis.h"
#include "nelm/estimation.h"
#include "nelm/model_io.h"

namespace nelm {
namespace {

struct TrainConfig {
  std::string input;
  std::string model_path;
  std::string mode = "nonemit";
  int order = 3;
  std::string tying = "none";
  std::string estimation = "cross";
  int iterations = 10;
  std::size_t blocks = 21;
  std::string unit = "char";
  std::size_t min_freq = 1;
  double train_fraction = 1.0;
  double acc_floor = 0.1;
  double early_stop = 0.0;
  double discount = 0.5;
  std::string thresholds;
  int threads = 1;
};

struct EvalConfig {
  std::vector<std::string> models;
  std::string test;
  double split = 0.0;
  std::string report;
  std::string format = "text";
  std::string out;
  bool occupancy = false;
  std::string convention = "posterior";
  std::size_t from = 0;
  std::size_t to = 0;
  bool to_set = false;
};

std::string Fixed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<double> ParseThresholds(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    double v = 0.0;
    try {
      v = ParseDouble(item);
    } catch (const Error&) {
      throw UsageError("bad threshold '" + item + "'");
    }
    if (!(v >= 0.0)) throw UsageError("thresholds must be nonnegative");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void Validate(const TrainConfig& c, const CLI::App& app, Mode mode) {
  if (c.order < 0 || c.order > kMaxOrder - 1) {
    throw UsageError("--order must lie in [0, " + std::to_string(kMaxOrder - 1) + "]");
  }
  const bool mixture = IsMixtureMode(mode);
  for (const char* flag : {"--tying", "--estimation", "--iterations", "--blocks", "--acc-floor",
                           "--early-stop", "--threads"}) {
    if (!mixture && app.count(flag) > 0) {
      throw UsageError(std::string(flag) + " applies only to interpolated and nonemit modes");
    }
  }
  for (const char* flag : {"--discount", "--thresholds"}) {
    if (!IsBackoffMode(mode) && app.count(flag) > 0) {
      throw UsageError(std::string(flag) + " applies only to backoff and nonemit-backoff modes");
    }
  }
  if (c.estimation != "cross" && c.estimation != "forward") {
    throw UsageError("--estimation must be cross or forward");
  }
  if (c.iterations < 0) throw UsageError("--iterations must be nonnegative");
  if (c.blocks < 2 && mixture) throw UsageError("--blocks must be at least 2");
  if (!(c.acc_floor >= 0.0)) throw UsageError("--acc-floor must be nonnegative");
  if (!(c.early_stop >= 0.0)) throw UsageError("--early-stop must be nonnegative");
  if (!(c.train_fraction > 0.0 && c.train_fraction <= 1.0)) {
    throw UsageError("--train-fraction must lie in (0, 1]");
  }
  if (!(c.discount > 0.0 && c.discount < 1.0)) throw UsageError("--discount must lie in (0, 1)");
  if (c.threads < 1) throw UsageError("--threads must be at least 1");
  if (c.min_freq < 1) throw UsageError("--min-freq must be at least 1");
}

int Train(const TrainConfig& c, const CLI::App& app, std::ostream& err) {
  const Mode mode = ParseMode(c.mode);
  Validate(c, app, mode);
  const Unit unit = ParseUnit(c.unit);
  const TyingSpec tying = ParseTyingSpec(c.tying);
  const std::vector<double> thresholds = ParseThresholds(c.thresholds);
  const auto start = std::chrono::steady_clock::now();

  LoadedCorpus loaded =
      unit == Unit::kChar ? LoadCharCorpus(c.input) : LoadWordCorpus(c.input, c.min_freq);
  Corpus train = std::move(loaded.corpus);
  if (c.train_fraction < 1.0) train = TrainTestSplit(train, c.train_fraction).first;
  const std::size_t k = loaded.alphabet.size();
  err << "corpus symbols=" << train.size() << " alphabet=" << k << '\n';

  ModelBundle bundle;
  if (IsMixtureMode(mode)) {
    const Semantics semantics =
        mode == Mode::kInterpolated ? Semantics::kInterpolated : Semantics::kNonEmitting;
    EstimationOptions options;
    options.iterations = c.iterations;
    options.acc_floor = c.acc_floor;
    options.early_stop = c.early_stop;
    options.threads = c.threads;
    options.log = &err;
    const Corpus blocks = PartitionBlocks(train, c.blocks);
    Corpus counted;
    if (c.estimation == "cross") {
      counted = blocks;
    } else {
      // The last block estimates lambda; the others estimate delta.
      const std::size_t cut = blocks.bounds[blocks.num_blocks() - 1];
      counted.data = blocks.data;
      counted.bounds = {0, cut, blocks.data.size()};
    }
    TrainedModel trained = InitialModel(counted, k, c.order, semantics, tying);
    err << "states=" << trained.store->node_count()
        << " lambda_classes=" << trained.model.lambdas().size() << '\n';
    if (c.estimation == "cross") {
      CrossEstimate(counted, trained, options);
    } else {
      ForwardEstimate(counted, trained, options);
    }
    bundle = MakeMixtureBundle(mode, std::move(loaded.alphabet), trained.store,
                               std::move(trained.model));
    bundle.estimation = c.estimation + ":" + std::to_string(c.iterations) + ":" +
                        std::to_string(c.blocks);
  } else {
    auto store = std::make_shared<const CountStore>(CountStore::Build(train, c.order, k));
    err << "states=" << store->node_count() << '\n';
    if (mode == Mode::kBasic) {
      bundle = MakeBasicBundle(std::move(loaded.alphabet), c.order, store);
    } else {
      bundle = MakeBackoffBundle(mode, std::move(loaded.alphabet), c.order, store,
                                 BackoffConfig{thresholds, c.discount});
      for (const auto& ctx : bundle.backoff->warnings()) {
        err << "warning: eta denominator vanished for a context of order " << ctx.size()
            << "; eta set to 0\n";
      }
    }
  }
  SaveModelFile(bundle, c.model_path);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "wrote " << c.model_path << " mode=" << ModeName(mode) << " order=" << c.order
      << " seconds=" << Fixed(seconds, 2) << '\n';
  return 0;
}

Corpus LoadTest(const EvalConfig& c, const Alphabet& alphabet) {
  Corpus test = EncodeFile(c.test, alphabet);
  if (c.split > 0.0) test = TrainTestSplit(test, c.split).second;
  return test;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot open '" + path + "' for writing");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

bool WantsPerplexity(const EvalConfig& c, const ModelBundle& b) {
  if (c.report.empty()) return b.alphabet.unit() == Unit::kWord;
  if (c.report == "perplexity") return true;
  if (c.report == "entropy") return false;
  throw UsageError("--report must be entropy or perplexity");
}

void CheckFormat(const EvalConfig& c) {
  if (c.format != "text" && c.format != "kv") throw UsageError("--format must be text or kv");
}

int Finish(const Report& r, std::ostream& err) {
  if (std::isinf(r.bits_per_symbol)) {
    err << "error: the model assigns zero probability to the test data\n";
    return static_cast<int>(ErrorKind::kNumeric);
  }
  return 0;
}

void PrintReport(std::ostream& out, const EvalConfig& c, const std::string& name,
                 const ModelBundle& b, const Report& r) {
  const bool ppl = WantsPerplexity(c, b);
  if (c.format == "kv") {
    out << "model=" << name << '\n'
        << "mode=" << ModeName(b.mode) << '\n'
        << "order=" << b.order << '\n'
        << "symbols=" << r.symbol_count << '\n'
        << "log2_prob=" << FormatDouble17(r.log2_prob) << '\n'
        << "bits_per_symbol=" << FormatDouble17(r.bits_per_symbol) << '\n'
        << "perplexity=" << FormatDouble17(r.perplexity) << '\n';
    return;
  }
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %-8s %5d %10zu  %s\n", ModeName(b.mode).data(),
                UnitName(b.alphabet.unit()).data(), b.order, r.symbol_count,
                ppl ? (Fixed(r.perplexity, 3) + " perplexity").c_str()
                    : (Fixed(r.bits_per_symbol, 4) + " bits/" +
                       std::string(UnitName(b.alphabet.unit())))
                          .c_str());
  out << name << '\n' << line;
}

int Eval(const EvalConfig& c, std::ostream& out, std::ostream& err) {
  CheckFormat(c);
  const ModelBundle b = LoadModelFile(c.models.at(0));
  const Corpus test = LoadTest(c, b.alphabet);
  const Report r = MessageEntropy(b.model(), test);
  Output o(c.out, out);
  PrintReport(o.get(), c, c.models[0], b, r);
  return Finish(r, err);
}

int Compare(const EvalConfig& c, std::ostream& out, std::ostream& err) {
  CheckFormat(c);
  if (c.models.size() != 2) throw UsageError("compare takes exactly two --model files");
  const ModelBundle a = LoadModelFile(c.models[0]);
  const ModelBundle b = LoadModelFile(c.models[1]);
  if (!(a.alphabet == b.alphabet)) throw DataError("the two models use different alphabets");
  const Corpus test = LoadTest(c, a.alphabet);
  const Report ra = MessageEntropy(a.model(), test);
  const Report rb = MessageEntropy(b.model(), test);
  Output o(c.out, out);
  std::ostream& s = o.get();
  if (c.format == "kv") {
    s << "model_a=" << c.models[0] << '\n'
      << "model_b=" << c.models[1] << '\n'
      << "symbols=" << ra.symbol_count << '\n'
      << "bits_per_symbol_a=" << FormatDouble17(ra.bits_per_symbol) << '\n'
      << "bits_per_symbol_b=" << FormatDouble17(rb.bits_per_symbol) << '\n'
      << "bits_per_symbol_diff=" << FormatDouble17(rb.bits_per_symbol - ra.bits_per_symbol)
      << '\n'
      << "perplexity_a=" << FormatDouble17(ra.perplexity) << '\n'
      << "perplexity_b=" << FormatDouble17(rb.perplexity) << '\n';
  } else {
    PrintReport(s, c, c.models[0], a, ra);
    PrintReport(s, c, c.models[1], b, rb);
    s << "difference (b - a): " << Fixed(rb.bits_per_symbol - ra.bits_per_symbol, 4)
      << " bits/symbol\n";
  }
  const int ea = Finish(ra, err);
  return ea != 0 ? ea : Finish(rb, err);
}

std::string Display(const Alphabet& alphabet, Symbol s) {
  if (s == alphabet.oov_id()) return "<unk>";
  const std::string& t = alphabet.token(s);
  if (t == " ") return "_";
  if (t == "\n") return "\\n";
  if (t == "\t") return "\\t";
  return t;
}

int Analyze(const EvalConfig& c, std::ostream& out, std::ostream& err) {
  CheckFormat(c);
  if (!c.occupancy) throw UsageError("analyze needs --occupancy");
  const ModelBundle b = LoadModelFile(c.models.at(0));
  if (!b.mixture) throw UsageError("occupancy needs an interpolated or nonemit model");
  const Corpus test = LoadTest(c, b.alphabet);
  const std::size_t to = c.to_set ? c.to : std::min(test.size(), c.from + 20);
  const Occupancy convention = ParseOccupancy(c.convention);
  const OccupancyTable table = ComputeOccupancy(*b.mixture, test.data, c.from, to, convention);
  const Report r = MessageEntropy(b.model(), test);
  Output o(c.out, out);
  std::ostream& s = o.get();
  const int n = table.order;
  if (c.format == "kv") {
    s << "convention=" << OccupancyName(convention) << '\n';
    for (std::size_t j = 0; j < table.cells.size(); ++j) {
      const std::size_t t = table.from + j;
      s << "position=" << t << " symbol=" << test.data[t]
        << " conditional=" << FormatDouble17(table.conditional[j]);
      for (int i = 0; i <= n; ++i) s << " p" << i << '=' << FormatDouble17(table.cells[j][i]);
      s << '\n';
    }
    s << "mean_order=" << FormatDouble17(table.mean_order) << '\n'
      << "bits_per_symbol=" << FormatDouble17(r.bits_per_symbol) << '\n';
    return Finish(r, err);
  }
  s << "occupancy (" << OccupancyName(convention) << ", the order that emits each symbol)\n";
  char cell[32];
  s << "order ";
  for (std::size_t j = 0; j < table.cells.size(); ++j) {
    std::snprintf(cell, sizeof(cell), "%7s", Display(b.alphabet, test.data[table.from + j]).c_str());
    s << cell;
  }
  s << '\n';
  for (int i = n; i >= 0; --i) {
    std::snprintf(cell, sizeof(cell), "%5d ", i);
    s << cell;
    for (const auto& col : table.cells) {
      std::snprintf(cell, sizeof(cell), "%7.3f", col[i]);
      s << cell;
    }
    s << '\n';
  }
  s << "p(x)  ";
  for (double p : table.conditional) {
    std::snprintf(cell, sizeof(cell), "%7.3f", p);
    s << cell;
  }
  s << "\nmean order " << Fixed(table.mean_order, 3) << ", " << Fixed(r.bits_per_symbol, 4)
    << " bits/symbol over " << r.symbol_count << " symbols\n";
  return Finish(r, err);
}

void AddEvalOptions(CLI::App* cmd, EvalConfig& c, bool two_models) {
  auto* model = cmd->add_option("--model", c.models, two_models ? "Two model files" : "Model file")
                    ->required();
  model->expected(two_models ? 2 : 1);
  cmd->add_option("--test", c.test, "Test text file")->required();
  cmd->add_option("--split", c.split,
                  "Evaluate only the part of the test file after this fraction");
  cmd->add_option("--format", c.format, "text or kv");
  cmd->add_option("--out", c.out, "Write results here instead of stdout");
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpolated, non-emitting and backoff Markov models"};
  app.require_subcommand(1);

  TrainConfig tc;
  auto* train = app.add_subcommand("train", "Estimate a model and write it to a file");
  train->add_option("--input", tc.input, "Training text")->required();
  train->add_option("--model", tc.model_path, "Output model file")->required();
  train->add_option("--mode", tc.mode, "basic|interpolated|nonemit|backoff|nonemit-backoff");
  train->add_option("--order", tc.order, "Model order n");
  train->add_option("--tying", tc.tying, "none|order|freq-div|freq-div-log|posterior[:levels]");
  train->add_option("--estimation", tc.estimation, "cross|forward");
  train->add_option("--iterations", tc.iterations, "EM iterations");
  train->add_option("--blocks", tc.blocks, "Number of training blocks");
  train->add_option("--unit", tc.unit, "char|word");
  train->add_option("--min-freq", tc.min_freq, "Word mode: rarer words map to <unk>");
  train->add_option("--train-fraction", tc.train_fraction,
                    "Train on this leading fraction of the input");
  train->add_option("--acc-floor", tc.acc_floor, "Initial value of the EM accumulators");
  train->add_option("--early-stop", tc.early_stop,
                    "Stop when the relative withheld gain falls below this (0 = off)");
  train->add_option("--discount", tc.discount, "Backoff absolute discount");
  train->add_option("--thresholds", tc.thresholds, "Backoff dictionary thresholds t0,t1,...");
  train->add_option("--threads", tc.threads, "Worker threads for cross-estimation");

  EvalConfig ec;
  auto* eval = app.add_subcommand("eval", "Test message entropy of a model");
  AddEvalOptions(eval, ec, false);
  eval->add_option("--report", ec.report, "entropy|perplexity");

  EvalConfig ac;
  auto* analyze = app.add_subcommand("analyze", "State-order occupancy over a test window");
  AddEvalOptions(analyze, ac, false);
  analyze->add_flag("--occupancy", ac.occupancy, "Print the occupancy table");
  analyze->add_option("--convention", ac.convention, "posterior|predictive");
  analyze->add_option("--from", ac.from, "First position (0-based)");
  auto* to_opt = analyze->add_option("--to", ac.to, "One past the last position");

  EvalConfig cc;
  auto* compare = app.add_subcommand("compare", "Evaluate two models on one test set");
  AddEvalOptions(compare, cc, true);
  compare->add_option("--report", cc.report, "entropy|perplexity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*train) return Train(tc, *train, err);
    if (*eval) return Eval(ec, out, err);
    if (*analyze) {
      ac.to_set = to_opt->count() > 0;
      return Analyze(ac, out, err);
    }
    if (*compare) return Compare(cc, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return static_cast<int>(ErrorKind::kNumeric);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace nelm
