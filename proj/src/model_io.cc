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

#include "nelm/model_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace nelm {
namespace {

constexpr std::string_view kHeader = "nelm-model 1";

std::string Hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 15]);
  }
  return out;
}

int HexDigit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string Join(std::span<const Symbol> ids) {
  std::string out;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (j) out.push_back(',');
    out += std::to_string(ids[j]);
  }
  return out;
}

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool Next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw DataError("model file line " + std::to_string(line_no_) + ": " + what);
  }

  std::uint64_t Uint(std::string_view s) const {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      Fail("expected an unsigned integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  double Real(std::string_view s) const {
    try {
      return ParseDouble(s);
    } catch (const Error&) {
      Fail("expected a real number, got '" + std::string(s) + "'");
    }
  }

  std::vector<Symbol> Ids(std::string_view s) const {
    std::vector<Symbol> ids;
    if (s.empty()) return ids;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = s.find(',', start);
      ids.push_back(static_cast<Symbol>(Uint(s.substr(start, comma - start))));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return ids;
  }

  std::string Unhex(std::string_view s) const {
    if (s.size() % 2 != 0) Fail("odd-length hex token");
    std::string out;
    for (std::size_t j = 0; j < s.size(); j += 2) {
      const int hi = HexDigit(s[j]), lo = HexDigit(s[j + 1]);
      if (hi < 0 || lo < 0) Fail("bad hex digit");
      out.push_back(static_cast<char>(hi * 16 + lo));
    }
    return out;
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

void WriteCountLine(std::ostream& out, std::span<const Symbol> s, std::uint64_t count) {
  out << s.size() - 1 << '\t' << Join(s.first(s.size() - 1)) << '\t' << s.back() << '\t'
      << count << '\n';
}

std::string JoinReals(std::span<const double> v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out.push_back(',');
    out += FormatDouble17(v[j]);
  }
  return out;
}

TyingScheme RebuildTying(const TyingSpec& spec, const CountStore& store,
                         const std::vector<std::pair<std::vector<Symbol>, ClassId>>& saved,
                         const Reader& reader) {
  if (spec.kind != TyingKind::kPosterior) {
    return MakeTyingScheme(spec, store, Corpus::FromSymbols({}));
  }
  std::vector<ClassId> class_of(store.node_count(), kNoClass);
  class_of[store.root()] = 0;
  ClassId max_class = 0;
  for (const auto& [ctx, c] : saved) {
    const NodeId node = store.Find(ctx);
    if (node == kNoNode) reader.Fail("tying context missing from the counts");
    class_of[node] = c;
    max_class = std::max(max_class, c);
  }
  return TyingScheme(spec, std::move(class_of), static_cast<std::size_t>(max_class) + 1);
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kBasic:
      return "basic";
    case Mode::kInterpolated:
      return "interpolated";
    case Mode::kNonEmitting:
      return "nonemit";
    case Mode::kBackoff:
      return "backoff";
    case Mode::kNonEmittingBackoff:
      return "nonemit-backoff";
  }
  return "basic";
}

Mode ParseMode(std::string_view name) {
  for (Mode m : {Mode::kBasic, Mode::kInterpolated, Mode::kNonEmitting, Mode::kBackoff,
                 Mode::kNonEmittingBackoff}) {
    if (ModeName(m) == name) return m;
  }
  throw UsageError("unknown mode '" + std::string(name) +
                   "' (expected basic|interpolated|nonemit|backoff|nonemit-backoff)");
}

bool IsMixtureMode(Mode mode) {
  return mode == Mode::kInterpolated || mode == Mode::kNonEmitting;
}

bool IsBackoffMode(Mode mode) {
  return mode == Mode::kBackoff || mode == Mode::kNonEmittingBackoff;
}

const SequenceModel& ModelBundle::model() const {
  if (mixture) return *mixture;
  if (backoff) return *backoff;
  if (basic) return *basic;
  throw UsageError("model bundle holds no model");
}

ModelBundle MakeBasicBundle(Alphabet alphabet, int order,
                            std::shared_ptr<const CountStore> store) {
  ModelBundle b;
  b.mode = Mode::kBasic;
  b.alphabet = std::move(alphabet);
  b.order = order;
  b.store = store;
  b.basic.emplace(order, std::make_shared<CountEmission>(std::move(store)));
  return b;
}

ModelBundle MakeBackoffBundle(Mode mode, Alphabet alphabet, int order,
                              std::shared_ptr<const CountStore> store, BackoffConfig config) {
  if (!IsBackoffMode(mode)) throw UsageError("not a backoff mode");
  ModelBundle b;
  b.mode = mode;
  b.alphabet = std::move(alphabet);
  b.order = order;
  b.store = store;
  b.backoff_config = std::move(config);
  const Dictionary dict =
      SelectDictionary(*store, order, b.backoff_config.thresholds, store->alphabet_size());
  b.backoff.emplace(mode == Mode::kBackoff ? BackoffSemantics::kBackoff
                                           : BackoffSemantics::kNonEmitting,
                    order, store->alphabet_size(),
                    EstimateBackoffDelta(*store, dict, b.backoff_config.discount));
  return b;
}

ModelBundle MakeMixtureBundle(Mode mode, Alphabet alphabet,
                              std::shared_ptr<const CountStore> store, MixtureModel model) {
  if (!IsMixtureMode(mode)) throw UsageError("not a mixture mode");
  ModelBundle b;
  b.mode = mode;
  b.alphabet = std::move(alphabet);
  b.order = model.order();
  b.store = std::move(store);
  b.tying = model.tying().spec();
  b.mixture.emplace(std::move(model));
  return b;
}

void SaveModel(const ModelBundle& b, std::ostream& out) {
  if (!b.store) throw UsageError("only count-based models can be saved");
  const CountStore& store = *b.store;
  out << kHeader << '\n';
  out << "[meta]\n";
  out << "mode=" << ModeName(b.mode) << '\n';
  if (b.mixture) {
    out << "semantics=" << SemanticsName(b.mixture->semantics()) << '\n';
    out << "hierarchy=" << HierarchyName(b.mixture->hierarchy()) << '\n';
    out << "tying=" << FormatTyingSpec(b.tying) << '\n';
  }
  out << "order=" << b.order << '\n';
  out << "count_order=" << store.order() << '\n';
  out << "unit=" << UnitName(b.alphabet.unit()) << '\n';
  out << "alphabet_size=" << b.alphabet.size() << '\n';
  if (!b.estimation.empty()) out << "estimation=" << b.estimation << '\n';

  out << "[alphabet]\n";
  for (Symbol s = 0; s + 1 < b.alphabet.size(); ++s) out << Hex(b.alphabet.token(s)) << '\n';

  out << "[counts]\n";
  store.ForEachEvent(
      [&](std::span<const Symbol> s, std::uint64_t count) { WriteCountLine(out, s, count); });

  if (b.mixture) {
    out << "[lambda]\n";
    auto lambdas = b.mixture->lambdas();
    for (std::size_t c = 0; c < lambdas.size(); ++c) {
      out << c << '\t' << FormatDouble17(std::log2(lambdas[c])) << '\t'
          << FormatDouble17(lambdas[c]) << '\n';
    }
    if (b.tying.kind == TyingKind::kPosterior) {
      out << "[tying]\n";
      const auto class_of = b.mixture->tying().class_of();
      const std::vector<std::uint32_t> rank = store.CanonicalRanks(store.order());
      std::vector<std::pair<std::uint32_t, NodeId>> states;
      for (NodeId n = 1; n < class_of.size(); ++n) {
        if (class_of[n] != kNoClass) states.emplace_back(rank[n], n);
      }
      std::sort(states.begin(), states.end());
      for (const auto& [r, n] : states) {
        const std::vector<Symbol> ctx = store.String(n);
        out << ctx.size() << '\t' << Join(ctx) << '\t' << class_of[n] << '\n';
      }
    }
  }

  if (b.backoff) {
    out << "[backoff]\n";
    out << "discount=" << FormatDouble17(b.backoff_config.discount) << '\n';
    out << "thresholds=" << JoinReals(b.backoff_config.thresholds) << '\n';
    std::vector<Symbol> s;
    for (const auto& [ctx, row] : b.backoff->delta()) {
      if (ctx.empty()) continue;
      for (const auto& [y, p] : row) {
        s.assign(ctx.begin(), ctx.end());
        s.push_back(y);
        WriteCountLine(out, s, store.Occurrences(s));
      }
    }
  }
  out << "[end]\n";
  if (!out) throw DataError("failed to write the model");
}

void SaveModelFile(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  SaveModel(bundle, out);
  out.close();
  if (!out) throw DataError("failed to write '" + path.string() + "'");
}

ModelBundle LoadModel(std::istream& in) {
  Reader reader(in);
  std::string line;
  if (!reader.Next(line) || line != kHeader) reader.Fail("missing 'nelm-model 1' header");

  std::map<std::string, std::string> meta;
  std::vector<std::string> tokens;
  std::vector<CountStore::Event> events;
  std::vector<std::pair<ClassId, double>> lambdas;
  std::vector<std::pair<std::vector<Symbol>, ClassId>> tying_lines;
  std::map<std::string, std::string> backoff_meta;
  Dictionary dictionary;
  bool has_backoff = false;
  bool ended = false;
  std::string section;

  auto key_value = [&](std::map<std::string, std::string>& into) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) reader.Fail("expected key=value");
    into[line.substr(0, eq)] = line.substr(eq + 1);
  };
  auto count_line = [&]() {
    auto f = SplitTabs(line);
    if (f.size() != 4) reader.Fail("count lines have four fields");
    std::vector<Symbol> s = reader.Ids(f[1]);
    if (s.size() != reader.Uint(f[0])) reader.Fail("context length mismatch");
    s.push_back(static_cast<Symbol>(reader.Uint(f[2])));
    return CountStore::Event(std::move(s), reader.Uint(f[3]));
  };

  while (reader.Next(line)) {
    if (!line.empty() && line.front() == '[') {
      section = line;
      if (section == "[end]") {
        ended = true;
        break;
      }
      if (section == "[backoff]") has_backoff = true;
      if (section != "[meta]" && section != "[alphabet]" && section != "[counts]" &&
          section != "[lambda]" && section != "[tying]" && section != "[backoff]") {
        reader.Fail("unknown section " + section);
      }
      continue;
    }
    if (section == "[meta]") {
      key_value(meta);
    } else if (section == "[alphabet]") {
      tokens.push_back(reader.Unhex(line));
    } else if (section == "[counts]") {
      events.push_back(count_line());
    } else if (section == "[lambda]") {
      auto f = SplitTabs(line);
      if (f.size() != 3) reader.Fail("lambda lines have three fields");
      lambdas.emplace_back(static_cast<ClassId>(reader.Uint(f[0])), reader.Real(f[2]));
    } else if (section == "[tying]") {
      auto f = SplitTabs(line);
      if (f.size() != 3) reader.Fail("tying lines have three fields");
      std::vector<Symbol> ctx = reader.Ids(f[1]);
      if (ctx.size() != reader.Uint(f[0])) reader.Fail("context length mismatch");
      tying_lines.emplace_back(std::move(ctx), static_cast<ClassId>(reader.Uint(f[2])));
    } else if (section == "[backoff]") {
      if (line.find('=') != std::string::npos) {
        key_value(backoff_meta);
      } else {
        auto [s, count] = count_line();
        const Symbol y = s.back();
        s.pop_back();
        dictionary[s].push_back(y);
      }
    } else {
      reader.Fail("content outside any section");
    }
  }
  if (!ended) reader.Fail("truncated model file (no [end])");

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) reader.Fail("missing meta key '" + key + "'");
    return it->second;
  };

  ModelBundle b;
  b.mode = ParseMode(need("mode"));
  b.order = static_cast<int>(reader.Uint(need("order")));
  const int count_order = static_cast<int>(reader.Uint(need("count_order")));
  if (b.order > count_order) reader.Fail("model order exceeds the count order");
  b.alphabet = Alphabet(tokens, ParseUnit(need("unit")));
  if (b.alphabet.size() != reader.Uint(need("alphabet_size"))) {
    reader.Fail("alphabet size does not match its token list");
  }
  if (auto it = meta.find("estimation"); it != meta.end()) b.estimation = it->second;
  auto store = std::make_shared<const CountStore>(
      CountStore::FromEvents(count_order, b.alphabet.size(), events));
  b.store = store;

  if (b.mode == Mode::kBasic) {
    b.basic.emplace(b.order, std::make_shared<CountEmission>(store));
  } else if (IsMixtureMode(b.mode)) {
    b.tying = ParseTyingSpec(need("tying"));
    const Semantics semantics = b.mode == Mode::kInterpolated ? Semantics::kInterpolated
                                                              : Semantics::kNonEmitting;
    TyingScheme scheme = RebuildTying(b.tying, *store, tying_lines, reader);
    if (scheme.class_count() != lambdas.size()) {
      reader.Fail("lambda count does not match the tying classes");
    }
    MixtureModel m(semantics, b.order, std::make_shared<CountEmission>(store),
                   std::move(scheme));
    for (std::size_t c = 0; c < lambdas.size(); ++c) {
      if (lambdas[c].first != c) reader.Fail("lambda classes out of order");
      if (c == 0) continue;
      m.set_lambda(static_cast<ClassId>(c), lambdas[c].second);
    }
    b.mixture.emplace(std::move(m));
  } else {
    if (!has_backoff) reader.Fail("backoff mode without a [backoff] section");
    auto it = backoff_meta.find("discount");
    if (it == backoff_meta.end()) reader.Fail("backoff section lacks the discount");
    b.backoff_config.discount = reader.Real(it->second);
    if (auto t = backoff_meta.find("thresholds"); t != backoff_meta.end() && !t->second.empty()) {
      std::string_view rest = t->second;
      while (true) {
        const std::size_t comma = rest.find(',');
        b.backoff_config.thresholds.push_back(reader.Real(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    }
    auto& root = dictionary[{}];
    root.clear();
    for (Symbol y = 0; y < b.alphabet.size(); ++y) root.push_back(y);
    for (auto& [ctx, symbols] : dictionary) std::sort(symbols.begin(), symbols.end());
    b.backoff.emplace(b.mode == Mode::kBackoff ? BackoffSemantics::kBackoff
                                               : BackoffSemantics::kNonEmitting,
                      b.order, b.alphabet.size(),
                      EstimateBackoffDelta(*store, dictionary, b.backoff_config.discount));
  }
  return b;
}

ModelBundle LoadModelFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  return LoadModel(in);
}

}  // namespace nelm
