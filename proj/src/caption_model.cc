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

#include "cbs/caption_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "cbs/errors.h"
#include "cbs/ngram.h"

namespace cbs::nn {
namespace {

constexpr char kCheckpointMagic[8] = {'C', 'B', 'S', 'L', 'M', 'C', 'K', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr double kInitScale = 0.08;
constexpr double kForgetBiasInit = 1.0;

void RequireShape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ContractViolation(std::string(what) + " has shape " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void ValidateLayer(const LstmLayerParams& l, int n, int k, const char* name) {
  for (int g = 0; g < kNumGates; ++g) {
    RequireShape(l.input_weights[g], n, k, name);
    RequireShape(l.recurrent_weights[g], n, n, name);
    RequireShape(l.biases[g], n, 1, name);
  }
}

const Vector& InputEmbedding(const CaptionModelParams& model, TokenId previous,
                             Vector* scratch) {
  if (previous == kStartSymbol) return model.start_embedding;
  if (!model.vocab.Valid(previous)) {
    throw ContractViolation("token id out of range: " + std::to_string(previous));
  }
  *scratch = model.embeddings.col(previous);
  return *scratch;
}

// Forward pass over one teacher-forced sequence, caching every step.
double ForwardSequence(const CaptionModelParams& model,
                       std::span<const TokenId> tokens,
                       std::span<const double> conditioning,
                       std::vector<ForwardCache>* caches, double logit_shift) {
  if (tokens.empty()) throw ContractViolation("empty training sequence");
  ModelState state = InitialModelState(model);
  double total = 0.0;
  TokenId previous = kStartSymbol;
  if (caches) caches->resize(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    ModelState next;
    ForwardCache local;
    ForwardCache* cache = caches ? &(*caches)[t] : &local;
    ForwardStep(model, previous, state, conditioning, &next, cache, logit_shift);
    if (!model.vocab.Valid(tokens[t])) {
      throw ContractViolation("token id out of range: " +
                              std::to_string(tokens[t]));
    }
    total -= cache->log_probs[tokens[t]];
    state = std::move(next);
    previous = tokens[t];
  }
  return total / static_cast<double>(tokens.size());
}

// Adds the gradient of `scale` * (summed token losses) to `grad`.
void BackwardSequence(const CaptionModelParams& model,
                      std::span<const TokenId> tokens,
                      const std::vector<ForwardCache>& caches, double scale,
                      Gradients* grad) {
  const int n = model.hidden_size();
  LstmCellState d1 = LstmCellState::Zero(n);
  LstmCellState d2 = LstmCellState::Zero(n);
  for (std::size_t t = tokens.size(); t-- > 0;) {
    const ForwardCache& c = caches[t];
    Vector dlogits = c.log_probs.array().exp();
    dlogits[tokens[t]] -= 1.0;
    dlogits *= scale;
    const Vector dv = model.embeddings * dlogits;
    const Vector dz = dv.cwiseProduct(
        (1.0 - c.projected.array().square()).matrix());
    grad->projection.noalias() += dz * c.layer2.gates[kOutputGate]
                                           .cwiseProduct(c.layer2.tanh_c)
                                           .transpose();
    grad->projection_bias += dz;
    const Vector dh2 = model.projection.transpose() * dz + d2.h;

    Vector dx2;
    LstmCellState prev2;
    LstmStepBackward(model.layer2, c.layer2, dh2, d2.c, &grad->layer2, &dx2,
                     &prev2);
    d2 = std::move(prev2);

    const Vector dh1 = dx2.head(n) + d1.h;
    Vector dx1;
    LstmCellState prev1;
    LstmStepBackward(model.layer1, c.layer1, dh1, d1.c, &grad->layer1, &dx1,
                     &prev1);
    d1 = std::move(prev1);
  }
}

class ModelDecodeState : public DecodeState {
 public:
  ModelDecodeState(const Scorer* owner, std::size_t vocab_size, ModelState s,
                   std::shared_ptr<const std::vector<double>> conditioning)
      : DecodeState(owner, vocab_size),
        state(std::move(s)),
        conditioning(std::move(conditioning)) {}
  std::unique_ptr<DecodeState> Clone() const override {
    return std::make_unique<ModelDecodeState>(*this);
  }
  ModelState state;
  std::shared_ptr<const std::vector<double>> conditioning;
};

template <typename T>
void WritePod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("checkpoint truncated");
  return v;
}

void WriteString(std::ostream& out, const std::string& s) {
  WritePod(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string ReadString(std::istream& in) {
  const auto len = ReadPod<std::uint32_t>(in);
  if (len > (1u << 20)) throw ParseError("checkpoint string too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError("checkpoint truncated");
  return s;
}

void WriteTensor(std::ostream& out, const std::string& name, const Matrix& m) {
  WriteString(out, name);
  WritePod(out, static_cast<std::uint32_t>(m.rows()));
  WritePod(out, static_cast<std::uint32_t>(m.cols()));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix ReadTensor(std::istream& in, const std::string& expected_name) {
  const std::string name = ReadString(in);
  if (name != expected_name) {
    throw ParseError("checkpoint tensor \"" + name + "\", expected \"" +
                     expected_name + "\"");
  }
  const auto rows = ReadPod<std::uint32_t>(in);
  const auto cols = ReadPod<std::uint32_t>(in);
  if (static_cast<std::uint64_t>(rows) * cols > (std::uint64_t{1} << 32)) {
    throw ParseError("checkpoint tensor too large: " + name);
  }
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw ParseError("checkpoint truncated in tensor " + name);
  return m;
}

}  // namespace

void CaptionModelParams::Validate() const {
  const int d = embedding_dim();
  const int n = hidden_size();
  if (embeddings.cols() != static_cast<Eigen::Index>(vocab.size())) {
    throw ContractViolation("embedding matrix has " +
                            std::to_string(embeddings.cols()) +
                            " columns for a vocabulary of " +
                            std::to_string(vocab.size()));
  }
  RequireShape(start_embedding, d, 1, "start embedding");
  ValidateLayer(layer1, n, d, "layer1");
  if (layer2.hidden_size() != n || layer2.input_size() < n) {
    throw ContractViolation("layer2 must take layer1's output plus features");
  }
  ValidateLayer(layer2, n, layer2.input_size(), "layer2");
  RequireShape(projection, d, n, "projection");
  RequireShape(projection_bias, d, 1, "projection bias");
}

CaptionModelParams InitCaptionModel(Vocabulary vocab, Matrix embeddings,
                                    int hidden_size, int conditioning_dim,
                                    std::uint64_t seed) {
  if (hidden_size < 1 || conditioning_dim < 0) {
    throw ContractViolation("invalid model dimensions");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-kInitScale, kInitScale);
  auto fill = [&](auto& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform(rng);
  };
  CaptionModelParams model;
  model.vocab = std::move(vocab);
  const auto d = static_cast<int>(embeddings.rows());
  model.embeddings = std::move(embeddings);
  model.start_embedding = Vector(d);
  fill(model.start_embedding);
  model.layer1 = LstmLayerParams::Zero(hidden_size, d);
  model.layer2 = LstmLayerParams::Zero(hidden_size, hidden_size + conditioning_dim);
  for (auto* layer : {&model.layer1, &model.layer2}) {
    for (int g = 0; g < kNumGates; ++g) {
      fill(layer->input_weights[g]);
      fill(layer->recurrent_weights[g]);
    }
    layer->biases[kForgetGate].setConstant(kForgetBiasInit);
  }
  model.projection = Matrix(d, hidden_size);
  fill(model.projection);
  model.projection_bias = Vector::Zero(d);
  model.Validate();
  return model;
}

CaptionModelParams ZeroCaptionModel(Vocabulary vocab, int embedding_dim,
                                    int hidden_size, int conditioning_dim) {
  CaptionModelParams model;
  const auto v = static_cast<Eigen::Index>(vocab.size());
  model.vocab = std::move(vocab);
  model.embeddings = Matrix::Zero(embedding_dim, v);
  model.start_embedding = Vector::Zero(embedding_dim);
  model.layer1 = LstmLayerParams::Zero(hidden_size, embedding_dim);
  model.layer2 = LstmLayerParams::Zero(hidden_size, hidden_size + conditioning_dim);
  model.projection = Matrix::Zero(embedding_dim, hidden_size);
  model.projection_bias = Vector::Zero(embedding_dim);
  model.Validate();
  return model;
}

ModelState InitialModelState(const CaptionModelParams& model) {
  return {LstmCellState::Zero(model.hidden_size()),
          LstmCellState::Zero(model.hidden_size())};
}

Vector TiedLogits(const Matrix& embeddings, const Vector& projected) {
  Vector logits(embeddings.cols());
  for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
    logits[j] = embeddings.col(j).dot(projected);
  }
  return logits;
}

Vector LogSoftmax(const Vector& logits) {
  const double max = logits.maxCoeff();
  const double log_sum =
      std::log((logits.array() - max).exp().sum()) + max;
  return (logits.array() - log_sum).matrix();
}

Vector ForwardStep(const CaptionModelParams& model, TokenId previous,
                   const ModelState& state, std::span<const double> conditioning,
                   ModelState* next, ForwardCache* cache, double logit_shift) {
  const int n = model.hidden_size();
  const int f = model.conditioning_dim();
  if (static_cast<int>(conditioning.size()) != f) {
    throw ContractViolation("conditioning vector has " +
                            std::to_string(conditioning.size()) +
                            " entries, model expects " + std::to_string(f));
  }
  Vector scratch;
  const Vector& x1 = InputEmbedding(model, previous, &scratch);
  next->layer1 = LstmStep(model.layer1, x1, state.layer1,
                          cache ? &cache->layer1 : nullptr);
  Vector x2(n + f);
  x2.head(n) = next->layer1.h;
  for (int k = 0; k < f; ++k) x2[n + k] = conditioning[static_cast<std::size_t>(k)];
  next->layer2 = LstmStep(model.layer2, x2, state.layer2,
                          cache ? &cache->layer2 : nullptr);
  Vector projected =
      (model.projection * next->layer2.h + model.projection_bias).array().tanh();
  Vector logits = TiedLogits(model.embeddings, projected);
  if (logit_shift != 0.0) logits.array() += logit_shift;
  Vector log_probs = LogSoftmax(logits);
  if (!log_probs.allFinite()) throw NumericError("non-finite output distribution");
  if (cache) {
    cache->projected = std::move(projected);
    cache->log_probs = log_probs;
  }
  return log_probs;
}

double SequenceLoss(const CaptionModelParams& model,
                    std::span<const TokenId> tokens,
                    std::span<const double> conditioning, double logit_shift) {
  return ForwardSequence(model, tokens, conditioning, nullptr, logit_shift);
}

Gradients Gradients::ZeroLike(const CaptionModelParams& model) {
  Gradients g;
  g.layer1 = LstmLayerParams::Zero(model.hidden_size(), model.embedding_dim());
  g.layer2 = LstmLayerParams::Zero(model.hidden_size(), model.layer2.input_size());
  g.projection = Matrix::Zero(model.projection.rows(), model.projection.cols());
  g.projection_bias = Vector::Zero(model.projection_bias.size());
  return g;
}

namespace {

Gradients BatchGradients(const CaptionModelParams& model,
                         std::span<const TrainingExample> batch,
                         std::span<double> losses) {
  if (batch.empty()) throw ContractViolation("empty gradient batch");
  Gradients grad = Gradients::ZeroLike(model);
  std::vector<ForwardCache> caches;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& ex = batch[k];
    losses[k] = ForwardSequence(model, ex.tokens, ex.conditioning, &caches, 0.0);
    const double scale =
        1.0 / (static_cast<double>(ex.tokens.size()) *
               static_cast<double>(batch.size()));
    BackwardSequence(model, ex.tokens, caches, scale, &grad);
  }
  VisitTrainable(grad, [](const std::string& name, const auto& block) {
    if (!block.allFinite()) {
      throw NumericError("non-finite gradient in " + name);
    }
  });
  return grad;
}

}  // namespace

Gradients ComputeGradients(const CaptionModelParams& model,
                           std::span<const TrainingExample> batch,
                           double* loss) {
  std::vector<double> losses(batch.size());
  Gradients grad = BatchGradients(model, batch, losses);
  if (loss) {
    *loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
            static_cast<double>(losses.size());
  }
  return grad;
}

TrainResult Train(CaptionModelParams model,
                  std::span<const TrainingExample> corpus,
                  const TrainOptions& options) {
  if (corpus.empty()) throw DataError("empty training corpus");
  if (options.batch_size == 0) throw ContractViolation("batch size must be >= 1");
  model.Validate();
  TrainResult result;
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(corpus.size());
  std::vector<double> losses(corpus.size());
  std::vector<TrainingExample> batch;
  std::vector<double> batch_losses;
  double lr = options.learning_rate;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0, b = 0; begin < order.size();
         begin += options.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) batch.push_back(corpus[order[k]]);
      batch_losses.assign(batch.size(), 0.0);
      Gradients grad;
      try {
        grad = BatchGradients(model, batch, batch_losses);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(b) + ": " + e.what());
      }
      for (std::size_t k = begin; k < end; ++k) {
        const double l = batch_losses[k - begin];
        if (!std::isfinite(l)) {
          throw NumericError("training diverged at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(b) + ": non-finite loss");
        }
        losses[order[k]] = l;
      }
      auto step = [&](auto& param, const auto& g) { param.noalias() -= lr * g; };
      for (int gate = 0; gate < kNumGates; ++gate) {
        step(model.layer1.input_weights[gate], grad.layer1.input_weights[gate]);
        step(model.layer1.recurrent_weights[gate],
             grad.layer1.recurrent_weights[gate]);
        step(model.layer1.biases[gate], grad.layer1.biases[gate]);
        step(model.layer2.input_weights[gate], grad.layer2.input_weights[gate]);
        step(model.layer2.recurrent_weights[gate],
             grad.layer2.recurrent_weights[gate]);
        step(model.layer2.biases[gate], grad.layer2.biases[gate]);
      }
      step(model.projection, grad.projection);
      step(model.projection_bias, grad.projection_bias);
    }
    result.epoch_losses.push_back(
        std::accumulate(losses.begin(), losses.end(), 0.0) /
        static_cast<double>(losses.size()));
    lr *= options.lr_decay;
  }
  result.model = std::move(model);
  return result;
}

void SaveCheckpoint(const CaptionModelParams& model, const std::string& path) {
  model.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  WritePod(out, kCheckpointVersion);
  WritePod(out, std::uint8_t{1});  // embeddings frozen
  WritePod(out, static_cast<std::uint32_t>(model.vocab.size()));
  for (const auto& w : model.vocab.tokens()) WriteString(out, w);
  WritePod(out, static_cast<std::uint32_t>(model.vocab.eos()));
  WriteTensor(out, "embeddings", model.embeddings);
  WriteTensor(out, "start_embedding", model.start_embedding);
  VisitTrainable(model, [&](const std::string& name, const auto& block) {
    WriteTensor(out, name, block);
  });
  if (!out) throw DataError("write failed: " + path);
}

CaptionModelParams LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw ParseError(path + " is not a model checkpoint");
  }
  const auto version = ReadPod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  if (ReadPod<std::uint8_t>(in) != 1) {
    throw ParseError("checkpoint does not have frozen embeddings");
  }
  const auto vocab_size = ReadPod<std::uint32_t>(in);
  std::vector<std::string> words;
  words.reserve(vocab_size);
  for (std::uint32_t k = 0; k < vocab_size; ++k) words.push_back(ReadString(in));
  const auto eos = ReadPod<std::uint32_t>(in);
  if (eos >= vocab_size) throw ParseError("checkpoint end marker out of range");
  const std::string eos_word = words[eos];
  CaptionModelParams model;
  model.vocab = Vocabulary(std::move(words), eos_word);
  model.embeddings = ReadTensor(in, "embeddings");
  model.start_embedding = ReadTensor(in, "start_embedding");
  // Shapes come from the file; VisitTrainable gives the expected order.
  model.layer1 = LstmLayerParams::Zero(1, 1);
  model.layer2 = LstmLayerParams::Zero(1, 1);
  model.projection = Matrix::Zero(1, 1);
  model.projection_bias = Vector::Zero(1);
  VisitTrainable(model, [&](const std::string& name, auto& block) {
    Matrix m = ReadTensor(in, name);
    if constexpr (std::is_same_v<std::decay_t<decltype(block)>, Vector>) {
      if (m.cols() != 1) throw ParseError("checkpoint vector " + name + " is 2-D");
      block = m.col(0);
    } else {
      block = std::move(m);
    }
  });
  try {
    model.Validate();
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("inconsistent checkpoint: ") + e.what());
  }
  return model;
}

CaptionModelScorer::CaptionModelScorer(
    std::shared_ptr<const CaptionModelParams> model)
    : model_(std::move(model)) {
  if (!model_) throw ContractViolation("null caption model");
  model_->Validate();
}

ScoreStep CaptionModelScorer::Start(std::span<const double> conditioning) const {
  auto cond = std::make_shared<const std::vector<double>>(conditioning.begin(),
                                                          conditioning.end());
  ModelState next;
  Vector log_probs =
      ForwardStep(*model_, kStartSymbol, InitialModelState(*model_), *cond, &next);
  return {std::make_shared<ModelDecodeState>(this, vocab_size(), std::move(next),
                                             std::move(cond)),
          std::vector<double>(log_probs.data(), log_probs.data() + log_probs.size())};
}

ScoreStep CaptionModelScorer::Step(const DecodeState& state, TokenId token) const {
  const auto& s = CheckedState<ModelDecodeState>(state);
  CheckToken(token);
  ModelState next;
  Vector log_probs =
      ForwardStep(*model_, token, s.state, *s.conditioning, &next);
  return {std::make_shared<ModelDecodeState>(this, vocab_size(), std::move(next),
                                             s.conditioning),
          std::vector<double>(log_probs.data(), log_probs.data() + log_probs.size())};
}

}  // namespace cbs::nn
