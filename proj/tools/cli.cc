// Copyright 2026 The cbsdecode Authors. All Rights Reserved.
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
// =============================================================================

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cbs/beam_search.h"
#include "cbs/caption_model.h"
#include "cbs/constraints.h"
#include "cbs/embeddings.h"
#include "cbs/errors.h"
#include "cbs/eval.h"
#include "cbs/fsm.h"
#include "cbs/ngram.h"
#include "cbs/oracle.h"
#include "cbs/scorer.h"
#include "cbs/text.h"

namespace cbs::cli {
namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kCommands = {
    "compile", "decode", "train-ngram", "train-lm",
    "expand",  "eval-f1", "oracle",     "neighbors"};

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Leveled logging to stderr, configured by CBSDECODE_LOG.
class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err) {
    const char* env = std::getenv("CBSDECODE_LOG");
    const std::string level = env ? ToLower(env) : "warn";
    if (level == "error") level_ = LogLevel::kError;
    else if (level == "info") level_ = LogLevel::kInfo;
    else if (level == "debug") level_ = LogLevel::kDebug;
  }
  void Warn(const std::string& msg) const { Log(LogLevel::kWarn, "warn", msg); }
  void Info(const std::string& msg) const { Log(LogLevel::kInfo, "info", msg); }

 private:
  void Log(LogLevel level, const char* name, const std::string& msg) const {
    if (level <= level_) err_ << "[" << name << "] " << msg << "\n";
  }
  std::ostream& err_;
  LogLevel level_ = LogLevel::kWarn;
};

struct Options {
  // Search.
  std::size_t beam = 5;
  std::size_t max_len = 20;
  bool no_repeat = true;
  bool length_normalize = false;
  bool per_state = false;
  bool phrase_alternatives = false;
  // Inputs.
  std::string scorer = "ngram";
  std::string model;
  std::string vocab;
  std::string inputs;
  std::string constraints;
  std::string lemmas;
  std::string embeddings;
  std::size_t embedding_dim = kEmbeddingDim;
  std::string corpus;
  std::string conditioning;
  std::string manifest;
  std::string pairs;
  std::string mentions;
  std::string word;
  std::size_t k = 10;
  // Training.
  int order = 2;
  double alpha = 1.0;
  int hidden = 32;
  int epochs = 200;
  double lr = 0.1;
  double lr_decay = 1.0;
  std::size_t batch = 10;
  std::uint64_t seed = 0;
  std::string loss_out;
  // Output.
  std::size_t workers = 1;
  std::string out;
};

// The scorer selected by --scorer, with its vocabulary. `neural` stays
// mutable until decoding starts so constraint words can be expanded in.
struct ScorerBundle {
  Vocabulary vocab{std::vector<std::string>{}};
  std::shared_ptr<const Scorer> scorer;
  std::shared_ptr<nn::CaptionModelParams> neural;
};

struct Input {
  json id;
  std::vector<double> features;
  std::optional<ConstraintSpec> constraints;
};

void Emit(const Options& opts, std::ostream& out, const std::string& text) {
  if (opts.out.empty()) {
    out << text;
  } else {
    WriteFile(opts.out, text);
  }
}

Vocabulary ReadVocabFile(const std::string& path) {
  std::vector<std::string> words;
  for (const auto& line : ParseCorpus(ReadFile(path))) {
    for (const auto& w : line) {
      if (std::find(words.begin(), words.end(), w) == words.end()) {
        words.push_back(w);
      }
    }
  }
  return Vocabulary(std::move(words));
}

ScorerBundle LoadScorer(const Options& opts) {
  ScorerBundle b;
  if (opts.scorer == "ngram") {
    if (opts.model.empty()) throw ConfigError("--scorer ngram needs --model");
    auto model = std::make_shared<const NGramModel>(NGramModel::Load(opts.model));
    b.vocab = model->vocab();
    b.scorer = std::make_shared<NGramScorer>(model);
  } else if (opts.scorer == "neural") {
    if (opts.model.empty()) throw ConfigError("--scorer neural needs --model");
    b.neural = std::make_shared<nn::CaptionModelParams>(
        nn::LoadCheckpoint(opts.model));
    b.vocab = b.neural->vocab;
  } else if (opts.scorer == "uniform") {
    if (opts.vocab.empty()) throw ConfigError("--scorer uniform needs --vocab");
    b.vocab = ReadVocabFile(opts.vocab);
    b.scorer = std::make_shared<UniformScorer>(b.vocab.size());
  } else {
    throw ConfigError("unknown scorer kind \"" + opts.scorer + "\"");
  }
  return b;
}

void FinishScorer(ScorerBundle* b) {
  if (b->neural) {
    b->vocab = b->neural->vocab;
    b->scorer = std::make_shared<nn::CaptionModelScorer>(
        std::shared_ptr<const nn::CaptionModelParams>(b->neural));
  }
}

Vocabulary LoadVocabOnly(const Options& opts) {
  if (!opts.vocab.empty()) return ReadVocabFile(opts.vocab);
  if (opts.model.empty()) throw ConfigError("need --vocab or --model");
  if (opts.scorer == "neural") return nn::LoadCheckpoint(opts.model).vocab;
  return NGramModel::Load(opts.model).vocab();
}

std::vector<Input> ReadInputs(const Options& opts) {
  std::vector<Input> inputs;
  if (opts.inputs.empty()) {
    inputs.push_back({json(nullptr), {}, std::nullopt});
    return inputs;
  }
  std::istringstream lines(ReadFile(opts.inputs));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json in = json::parse(line);
      Input input;
      input.id = in.value("id", json(nullptr));
      if (in.contains("features")) {
        input.features = in.at("features").get<std::vector<double>>();
      }
      if (in.contains("disjunctions") || in.contains("phrases")) {
        input.constraints = ParseConstraintSpec(line);
      }
      inputs.push_back(std::move(input));
    } catch (const json::exception& e) {
      throw ParseError(std::string("inputs: ") + e.what(), line_no);
    }
  }
  return inputs;
}

SearchParams Params(const Options& opts) {
  SearchParams p;
  p.beam_size = opts.beam;
  p.max_len = opts.max_len;
  p.no_repeat = opts.no_repeat;
  p.length_normalize = opts.length_normalize;
  return p;
}

// Runs `fn(k)` for k in [0, n) on `workers` threads; the first exception is
// rethrown after all threads finish.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int RunCompile(const Options& opts, std::ostream& out) {
  const Vocabulary vocab = LoadVocabOnly(opts);
  const ConstraintSpec spec = LoadConstraintSpec(opts.constraints);
  std::optional<LemmaMap> lemmas;
  if (!opts.lemmas.empty()) lemmas = LemmaMap::Load(opts.lemmas);
  const LemmaMap* lm = lemmas ? &*lemmas : nullptr;
  if (opts.phrase_alternatives) {
    json all = json::array();
    for (const Fsm& fsm : CompilePhraseAlternatives(spec, vocab, lm)) {
      all.push_back(json::parse(DumpFsmJson(fsm, vocab)));
    }
    Emit(opts, out, all.dump(2) + "\n");
  } else {
    Emit(opts, out, DumpFsmJson(CompileConstraintSpec(spec, vocab, lm), vocab) + "\n");
  }
  return kExitOk;
}

int RunDecode(const Options& opts, bool exhaustive, const Logger& log,
              std::ostream& out) {
  ScorerBundle bundle = LoadScorer(opts);
  const std::vector<Input> inputs = ReadInputs(opts);
  ConstraintSpec global;
  if (!opts.constraints.empty()) global = LoadConstraintSpec(opts.constraints);
  std::optional<LemmaMap> lemmas;
  if (!opts.lemmas.empty()) lemmas = LemmaMap::Load(opts.lemmas);
  const LemmaMap* lm = lemmas ? &*lemmas : nullptr;

  if (bundle.neural && !opts.embeddings.empty()) {
    std::set<std::string> unknown;
    for (const auto& input : inputs) {
      const auto& spec = input.constraints ? *input.constraints : global;
      for (auto& w : UnknownWords(spec, bundle.neural->vocab, lm)) {
        unknown.insert(std::move(w));
      }
    }
    if (!unknown.empty()) {
      auto loaded = LoadEmbeddings(opts.embeddings, &unknown, opts.embedding_dim);
      if (!loaded.missing.empty()) {
        throw DataError("constraint words missing from embeddings: " +
                        Join(loaded.missing, ", "));
      }
      const std::vector<std::string> words(unknown.begin(), unknown.end());
      for (const auto& r : ApplyExpansions(bundle.neural.get(), words, loaded.table)) {
        log.Info("expanded vocabulary with \"" + r.word + "\" as id " +
                 std::to_string(r.id));
      }
    }
  }
  FinishScorer(&bundle);
  const SearchParams params = Params(opts);

  std::vector<std::string> lines(inputs.size());
  ParallelFor(inputs.size(), opts.workers, [&](std::size_t k) {
    const Input& input = inputs[k];
    const ConstraintSpec& spec = input.constraints ? *input.constraints : global;
    DecodeResult result;
    std::optional<std::size_t> phrase_index;
    if (exhaustive) {
      const Fsm fsm = CompileConstraintSpec(spec, bundle.vocab, lm);
      auto best = ExhaustiveDecode(*bundle.scorer, fsm, bundle.vocab, params,
                                   input.features);
      if (best) {
        result.satisfied_count = fsm.progress(best->fsm_state);
        result.status = DecodeStatus::kAccepted;
        result.best = std::move(best);
      }
    } else if (opts.phrase_alternatives && !spec.phrases.empty()) {
      const auto fsms = CompilePhraseAlternatives(spec, bundle.vocab, lm);
      auto multi = DecodeMultiPhrase(*bundle.scorer, fsms, bundle.vocab, params,
                                     input.features);
      result = std::move(multi.result);
      phrase_index = multi.selected;
    } else {
      const Fsm fsm = CompileConstraintSpec(spec, bundle.vocab, lm);
      result = ConstrainedBeamSearch(*bundle.scorer, fsm, bundle.vocab, params,
                                     input.features);
    }
    json record = json::parse(
        DecodeResultToJson(result, bundle.vocab, opts.per_state && !exhaustive));
    record["id"] = input.id;
    if (phrase_index) record["phrase_index"] = *phrase_index;
    if (result.status != DecodeStatus::kAccepted) {
      log.Warn("input " + input.id.dump() + ": no accepted output (" +
               StatusName(result.status) + ")");
    }
    lines[k] = record.dump() + "\n";
  });
  std::string text;
  for (const auto& l : lines) text += l;
  Emit(opts, out, text);
  return kExitOk;
}

std::vector<std::vector<TokenId>> EncodeCorpus(
    const std::vector<std::vector<std::string>>& sentences,
    const Vocabulary& vocab) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto ids = vocab.Encode(s);
    ids.push_back(vocab.eos());
    out.push_back(std::move(ids));
  }
  return out;
}

int RunTrainNGram(const Options& opts, std::ostream& out) {
  const auto sentences = ReadCorpus(opts.corpus);
  if (sentences.empty()) throw DataError("corpus " + opts.corpus + " is empty");
  Vocabulary vocab = Vocabulary::FromSentences(sentences);
  const auto corpus = EncodeCorpus(sentences, vocab);
  const NGramModel model =
      NGramModel::Train(corpus, std::move(vocab), opts.order, opts.alpha);
  Emit(opts, out, model.ToJson() + "\n");
  return kExitOk;
}

int RunTrainLm(const Options& opts, const Logger& log, std::ostream& out) {
  if (opts.out.empty()) throw ConfigError("train-lm needs --out <checkpoint>");
  const auto sentences = ReadCorpus(opts.corpus);
  if (sentences.empty()) throw DataError("corpus " + opts.corpus + " is empty");
  const Vocabulary vocab = Vocabulary::FromSentences(sentences);

  std::vector<std::vector<double>> features(sentences.size());
  if (!opts.conditioning.empty()) {
    std::istringstream lines(ReadFile(opts.conditioning));
    std::string line;
    std::size_t k = 0;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (k >= features.size()) {
        throw DataError("more conditioning vectors than corpus sentences");
      }
      try {
        features[k++] = json::parse(line).at("features").get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw ParseError(std::string("conditioning: ") + e.what(), k);
      }
    }
    if (k != features.size()) {
      throw DataError("got " + std::to_string(k) + " conditioning vectors for " +
                      std::to_string(features.size()) + " sentences");
    }
  }
  const std::size_t f = features.front().size();
  for (const auto& v : features) {
    if (v.size() != f) throw DataError("conditioning vectors differ in size");
  }

  std::set<std::string> needed(vocab.tokens().begin(), vocab.tokens().end());
  needed.erase(vocab.eos_string());
  auto loaded = LoadEmbeddings(opts.embeddings, &needed, opts.embedding_dim);
  if (!loaded.missing.empty()) {
    throw DataError("vocabulary words missing from embeddings: " +
                    Join(loaded.missing, ", "));
  }
  // One generator seeds everything: the end-marker vector (unless the file
  // has one), parameter init, and batch shuffling.
  std::mt19937_64 rng(opts.seed);
  if (!loaded.table.Find(vocab.eos_string())) {
    std::uniform_real_distribution<double> uniform(-0.1, 0.1);
    std::vector<double> v(loaded.table.dim);
    for (auto& x : v) x = uniform(rng);
    loaded.table.vectors.emplace(vocab.eos_string(), std::move(v));
  }
  const std::uint64_t init_seed = rng();
  const std::uint64_t shuffle_seed = rng();
  nn::CaptionModelParams model =
      nn::InitCaptionModel(vocab, EmbeddingMatrix(loaded.table, vocab),
                           opts.hidden, static_cast<int>(f), init_seed);
  const auto ids = EncodeCorpus(sentences, vocab);
  std::vector<nn::TrainingExample> corpus;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    corpus.push_back({ids[k], features[k]});
  }
  nn::TrainOptions train;
  train.epochs = opts.epochs;
  train.learning_rate = opts.lr;
  train.lr_decay = opts.lr_decay;
  train.batch_size = opts.batch;
  train.seed = shuffle_seed;
  auto result = nn::Train(std::move(model), corpus, train);
  nn::SaveCheckpoint(result.model, opts.out);
  log.Info("final loss " + std::to_string(result.epoch_losses.back()));

  const json report = {{"seed", opts.seed},
                       {"epochs", opts.epochs},
                       {"vocab_size", vocab.size()},
                       {"epoch_losses", result.epoch_losses}};
  if (opts.loss_out.empty()) {
    out << report.dump() << "\n";
  } else {
    WriteFile(opts.loss_out, report.dump() + "\n");
  }
  return kExitOk;
}

int RunExpand(const Options& opts, std::ostream& out) {
  if (opts.out.empty()) throw ConfigError("expand needs --out <checkpoint>");
  nn::CaptionModelParams model = nn::LoadCheckpoint(opts.model);
  const auto manifest = ParseExpansionManifest(ReadFile(opts.manifest));
  std::vector<std::string> words;
  std::set<std::string> needed;
  for (const auto& e : manifest) {
    words.push_back(e.word);
    needed.insert(e.word);
  }
  auto loaded = LoadEmbeddings(opts.embeddings, &needed, opts.embedding_dim);
  const auto records = ApplyExpansions(&model, words, loaded.table);
  nn::SaveCheckpoint(model, opts.out);
  json report = json::array();
  for (const auto& r : records) {
    report.push_back({{"word", r.word}, {"id", r.id}, {"order", r.order}});
  }
  out << report.dump() << "\n";
  return kExitOk;
}

int RunEvalF1(const Options& opts, std::ostream& out) {
  const auto specs = ParseMentionSpecs(ReadFile(opts.mentions));
  std::vector<EvalPair> pairs;
  std::istringstream lines(ReadFile(opts.pairs));
  std::string line;
  std::size_t line_no = 0;
  auto caption = [](const json& v) {
    if (v.is_string()) return Tokenize(v.get<std::string>());
    std::vector<std::string> words;
    for (const auto& w : v) words.push_back(ToLower(w.get<std::string>()));
    return words;
  };
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json in = json::parse(line);
      EvalPair pair;
      pair.generated = caption(in.at("generated"));
      for (const auto& r : in.at("references")) pair.references.push_back(caption(r));
      if (pair.references.empty()) {
        throw ParseError("pair without references", line_no);
      }
      pairs.push_back(std::move(pair));
    } catch (const json::exception& e) {
      throw ParseError(std::string("pairs: ") + e.what(), line_no);
    }
  }
  Emit(opts, out, F1ReportToJson(MacroF1(pairs, specs)) + "\n");
  return kExitOk;
}

int RunNeighbors(const Options& opts, std::ostream& out) {
  const auto loaded = LoadEmbeddings(opts.embeddings, nullptr, opts.embedding_dim);
  json report = json::array();
  for (const auto& n : NearestNeighbors(loaded.table, ToLower(opts.word), opts.k)) {
    report.push_back({{"word", n.word}, {"similarity", n.similarity}});
  }
  Emit(opts, out, report.dump() + "\n");
  return kExitOk;
}

void AddSearchFlags(CLI::App* cmd, Options* o) {
  cmd->add_option("--beam", o->beam, "Beam size per FSM state")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-len", o->max_len, "Maximum output length")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-repeat,!--allow-repeat", o->no_repeat,
                "Forbid the same token twice in a row (default on)");
  cmd->add_flag("--length-normalize", o->length_normalize,
                "Rank by mean per-token log probability");
}

void AddScorerFlags(CLI::App* cmd, Options* o) {
  cmd->add_option("--scorer", o->scorer, "ngram | neural | uniform")
      ->check(CLI::IsMember({"ngram", "neural", "uniform"}));
  cmd->add_option("--model", o->model, "N-gram JSON or model checkpoint")
      ->check(CLI::ExistingFile);
  cmd->add_option("--vocab", o->vocab, "Vocabulary file for --scorer uniform")
      ->check(CLI::ExistingFile);
}

void AddConstraintFlags(CLI::App* cmd, Options* o) {
  cmd->add_option("--constraints", o->constraints, "Constraint spec JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--lemmas", o->lemmas, "Tab-separated lemma groups")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--phrases-as-alternatives", o->phrase_alternatives,
                "Treat phrases as alternatives: one decode per phrase, keep "
                "the best");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  auto fail = [&](int code, const char* kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
  };
  if (args.empty() || (args[0].rfind("-", 0) != 0 &&
                       std::find(kCommands.begin(), kCommands.end(), args[0]) ==
                           kCommands.end())) {
    return fail(kExitUnknownCommand, "unknown_command",
                args.empty() ? "no command given"
                             : "unknown command \"" + args[0] + "\"");
  }

  Options o;
  CLI::App app{"Constrained beam search decoding toolkit", "cbsdecode"};
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--workers", o.workers, "Decode threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Output path (default stdout)");
  app.add_option("--embedding-dim", o.embedding_dim,
                 "Embedding width; 0 reads it from the file");

  auto* compile = app.add_subcommand("compile", "Constraints to an FSM dump");
  AddScorerFlags(compile, &o);
  AddConstraintFlags(compile, &o);
  compile->get_option("--constraints")->required();

  auto* decode = app.add_subcommand("decode", "Constrained beam search");
  auto* oracle = app.add_subcommand("oracle", "Exhaustive constrained argmax");
  for (auto* cmd : {decode, oracle}) {
    AddScorerFlags(cmd, &o);
    AddConstraintFlags(cmd, &o);
    AddSearchFlags(cmd, &o);
    cmd->add_option("--inputs", o.inputs, "JSONL inputs (id, features, "
                                          "optional constraints)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--embeddings", o.embeddings,
                    "Expand unknown constraint words from this file")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--per-state", o.per_state, "Include per_state_best");
    cmd->add_option("--embedding-dim", o.embedding_dim);
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--workers", o.workers)->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out);
  }

  auto* train_ngram = app.add_subcommand("train-ngram", "Fit an add-alpha n-gram");
  train_ngram->add_option("--corpus", o.corpus)->required()->check(CLI::ExistingFile);
  train_ngram->add_option("--order", o.order)->check(CLI::PositiveNumber);
  train_ngram->add_option("--alpha", o.alpha)->check(CLI::PositiveNumber);
  train_ngram->add_option("--out", o.out);

  auto* train_lm = app.add_subcommand("train-lm", "Train the two-layer LSTM");
  train_lm->add_option("--corpus", o.corpus)->required()->check(CLI::ExistingFile);
  train_lm->add_option("--embeddings", o.embeddings)
      ->required()
      ->check(CLI::ExistingFile);
  train_lm->add_option("--conditioning", o.conditioning,
                       "JSONL feature vectors, one per corpus line")
      ->check(CLI::ExistingFile);
  train_lm->add_option("--hidden", o.hidden)->check(CLI::PositiveNumber);
  train_lm->add_option("--epochs", o.epochs)->check(CLI::NonNegativeNumber);
  train_lm->add_option("--lr", o.lr)->check(CLI::NonNegativeNumber);
  train_lm->add_option("--lr-decay", o.lr_decay)->check(CLI::PositiveNumber);
  train_lm->add_option("--batch", o.batch)->check(CLI::PositiveNumber);
  train_lm->add_option("--loss-out", o.loss_out);
  train_lm->add_option("--seed", o.seed);
  train_lm->add_option("--out", o.out);
  train_lm->add_option("--embedding-dim", o.embedding_dim);

  auto* expand = app.add_subcommand("expand", "Add words to a checkpoint");
  expand->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  expand->add_option("--manifest", o.manifest)->required()->check(CLI::ExistingFile);
  expand->add_option("--embeddings", o.embeddings)
      ->required()
      ->check(CLI::ExistingFile);
  expand->add_option("--out", o.out);
  expand->add_option("--embedding-dim", o.embedding_dim);

  auto* eval_f1 = app.add_subcommand("eval-f1", "Object-mention F1");
  eval_f1->add_option("--pairs", o.pairs, "JSONL {generated, references}")
      ->required()
      ->check(CLI::ExistingFile);
  eval_f1->add_option("--mentions", o.mentions)->required()->check(CLI::ExistingFile);
  eval_f1->add_option("--out", o.out);

  auto* neighbors = app.add_subcommand("neighbors", "Nearest embedding neighbors");
  neighbors->add_option("--embeddings", o.embeddings)
      ->required()
      ->check(CLI::ExistingFile);
  neighbors->add_option("--word", o.word)->required();
  neighbors->add_option("-k", o.k);
  neighbors->add_option("--embedding-dim", o.embedding_dim);
  neighbors->add_option("--out", o.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(kExitBadConfig, "bad_config", e.what());
  }

  const Logger log(err);
  try {
    if (compile->parsed()) return RunCompile(o, out);
    if (decode->parsed()) return RunDecode(o, false, log, out);
    if (oracle->parsed()) return RunDecode(o, true, log, out);
    if (train_ngram->parsed()) return RunTrainNGram(o, out);
    if (train_lm->parsed()) return RunTrainLm(o, log, out);
    if (expand->parsed()) return RunExpand(o, out);
    if (eval_f1->parsed()) return RunEvalF1(o, out);
    if (neighbors->parsed()) return RunNeighbors(o, out);
    return fail(kExitUnknownCommand, "unknown_command", "no command given");
  } catch (const ConfigError& e) {
    return fail(kExitBadConfig, "bad_config", e.what());
  } catch (const NumericError& e) {
    return fail(kExitNumericError, "numeric_error", e.what());
  } catch (const Error& e) {
    return fail(kExitDataError, "data_error", e.what());
  } catch (const std::exception& e) {
    return fail(kExitDataError, "data_error", e.what());
  }
}

}  // namespace cbs::cli
