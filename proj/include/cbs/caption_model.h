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

#ifndef CBS_CAPTION_MODEL_H_
#define CBS_CAPTION_MODEL_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbs/lstm.h"
#include "cbs/scorer.h"
#include "cbs/vocabulary.h"

namespace cbs::nn {

// Factored two-layer LSTM language model with a tied, frozen embedding
// matrix. The bottom layer reads the embedding of the previous word; the
// top layer reads the bottom layer's output concatenated with a fixed
// per-input conditioning vector. Output:
//   v = tanh(W_v h2 + b_v),  p = softmax(W_e^T v)
struct CaptionModelParams {
  Vocabulary vocab{std::vector<std::string>{}};
  // D x |V|, one column per word. Never trained.
  Matrix embeddings;
  // D, input embedding of the start-of-sequence position. Never trained.
  Vector start_embedding;
  LstmLayerParams layer1;  // K = D
  LstmLayerParams layer2;  // K = N + F
  Matrix projection;       // D x N
  Vector projection_bias;  // D

  int embedding_dim() const { return static_cast<int>(embeddings.rows()); }
  int hidden_size() const { return layer1.hidden_size(); }
  int conditioning_dim() const {
    return layer2.input_size() - layer1.hidden_size();
  }

  // Throws ContractViolation when shapes disagree.
  void Validate() const;
};

// Small-uniform weights in [-0.08, 0.08], forget-gate biases at 1.0, zero
// elsewhere. `embeddings` must have one column per vocabulary word; the
// start embedding is drawn from the same generator.
CaptionModelParams InitCaptionModel(Vocabulary vocab, Matrix embeddings,
                                    int hidden_size, int conditioning_dim,
                                    std::uint64_t seed);

// All parameters zero (embeddings included), for symmetry checks.
CaptionModelParams ZeroCaptionModel(Vocabulary vocab, int embedding_dim,
                                    int hidden_size, int conditioning_dim);

struct ModelState {
  LstmCellState layer1;
  LstmCellState layer2;
};

ModelState InitialModelState(const CaptionModelParams& model);

// Everything one forward step produced, for backpropagation.
struct ForwardCache {
  LstmStepCache layer1;
  LstmStepCache layer2;
  Vector projected;  // v
  Vector log_probs;
};

// `previous` is a vocabulary id, or kStartSymbol for the first step.
// Returns the log-softmax over V of W_e^T v. `logit_shift` is added to
// every logit before normalization (a test hook; the distribution does not
// change).
Vector ForwardStep(const CaptionModelParams& model, TokenId previous,
                   const ModelState& state, std::span<const double> conditioning,
                   ModelState* next, ForwardCache* cache = nullptr,
                   double logit_shift = 0.0);

// W_e^T v, one column dot product at a time so each logit is independent
// of how many columns the matrix has.
Vector TiedLogits(const Matrix& embeddings, const Vector& projected);
Vector LogSoftmax(const Vector& logits);

struct TrainingExample {
  std::vector<TokenId> tokens;  // ends with the end marker
  std::vector<double> conditioning;
};

// Teacher-forced mean over timesteps of -ln p(y_t | y_<t, cond).
double SequenceLoss(const CaptionModelParams& model,
                    std::span<const TokenId> tokens,
                    std::span<const double> conditioning,
                    double logit_shift = 0.0);

// Trainable parameters only. Embeddings have no gradient.
struct Gradients {
  LstmLayerParams layer1;
  LstmLayerParams layer2;
  Matrix projection;
  Vector projection_bias;

  static Gradients ZeroLike(const CaptionModelParams& model);
};

// Backpropagation through time of the batch-mean SequenceLoss. Writes the
// mean loss to `loss` when given. Throws NumericError naming the first
// parameter block with a non-finite entry.
Gradients ComputeGradients(const CaptionModelParams& model,
                           std::span<const TrainingExample> batch,
                           double* loss = nullptr);

// Calls fn(name, values) for every trainable block of `p`, in a fixed
// order. Works for CaptionModelParams and Gradients alike.
template <typename P, typename Fn>
void VisitTrainable(P& p, Fn&& fn) {
  auto layer = [&](auto& l, const std::string& prefix) {
    for (int g = 0; g < kNumGates; ++g) {
      const std::string gate = GateName(g);
      fn(prefix + ".input_weights." + gate, l.input_weights[g]);
      fn(prefix + ".recurrent_weights." + gate, l.recurrent_weights[g]);
      fn(prefix + ".bias." + gate, l.biases[g]);
    }
  };
  layer(p.layer1, "layer1");
  layer(p.layer2, "layer2");
  fn(std::string("projection"), p.projection);
  fn(std::string("projection_bias"), p.projection_bias);
}

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 0.1;
  // Multiplied into the learning rate after every epoch.
  double lr_decay = 1.0;
  std::size_t batch_size = 10;
  // Drives batch shuffling.
  std::uint64_t seed = 0;
};

struct TrainResult {
  CaptionModelParams model;
  // Mean training loss of each epoch, summed in corpus order.
  std::vector<double> epoch_losses;
};

// Minibatch SGD on ComputeGradients. Throws NumericError when the loss
// becomes non-finite, with the epoch and batch in the message.
TrainResult Train(CaptionModelParams model,
                  std::span<const TrainingExample> corpus,
                  const TrainOptions& options);

// Versioned binary checkpoint: vocabulary, shapes, every tensor, and the
// frozen-embedding flag.
void SaveCheckpoint(const CaptionModelParams& model, const std::string& path);
CaptionModelParams LoadCheckpoint(const std::string& path);

// Adapts a model to the decoders. The conditioning vector passed to Start
// must have conditioning_dim() entries.
class CaptionModelScorer : public Scorer {
 public:
  explicit CaptionModelScorer(std::shared_ptr<const CaptionModelParams> model);

  std::size_t vocab_size() const override { return model_->vocab.size(); }
  ScoreStep Start(std::span<const double> conditioning = {}) const override;
  ScoreStep Step(const DecodeState& state, TokenId token) const override;

  const CaptionModelParams& model() const { return *model_; }

 private:
  std::shared_ptr<const CaptionModelParams> model_;
};

}  // namespace cbs::nn

#endif  // CBS_CAPTION_MODEL_H_
