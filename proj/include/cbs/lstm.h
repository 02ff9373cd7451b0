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

#ifndef CBS_LSTM_H_
#define CBS_LSTM_H_

#include <array>

#include <Eigen/Dense>

namespace cbs::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum Gate : int { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };
inline constexpr int kNumGates = 4;

const char* GateName(int gate);

// Weights of one LSTM layer with N hidden units and K inputs. For each gate:
// an N x K input matrix, an N x N recurrent matrix and an N bias.
struct LstmLayerParams {
  std::array<Matrix, kNumGates> input_weights;
  std::array<Matrix, kNumGates> recurrent_weights;
  std::array<Vector, kNumGates> biases;

  static LstmLayerParams Zero(int hidden_size, int input_size);

  int hidden_size() const { return static_cast<int>(biases[0].size()); }
  int input_size() const { return static_cast<int>(input_weights[0].cols()); }
};

struct LstmCellState {
  Vector h;
  Vector c;

  static LstmCellState Zero(int hidden_size) {
    return {Vector::Zero(hidden_size), Vector::Zero(hidden_size)};
  }
};

// Activations kept from the forward step for backpropagation.
struct LstmStepCache {
  Vector x;
  LstmCellState prev;
  std::array<Vector, kNumGates> gates;  // post-activation i, f, o, g
  Vector c;
  Vector tanh_c;
};

//   i = σ(W_xi x + W_hi h + b_i)   f, o likewise
//   g = tanh(W_xc x + W_hc h + b_c)
//   c' = f ⊙ c + i ⊙ g,  h' = o ⊙ tanh(c')
// Throws ContractViolation on dimension mismatch and NumericError on
// non-finite inputs.
LstmCellState LstmStep(const LstmLayerParams& params, const Vector& x,
                       const LstmCellState& prev,
                       LstmStepCache* cache = nullptr);

// Backward through one step. `dh` and `dc` are the loss gradients flowing
// into h' and c'. Accumulates into `grad` and writes the gradients for x,
// h and c of the previous step.
void LstmStepBackward(const LstmLayerParams& params,
                      const LstmStepCache& cache, const Vector& dh,
                      const Vector& dc, LstmLayerParams* grad, Vector* dx,
                      LstmCellState* dprev);

}  // namespace cbs::nn

#endif  // CBS_LSTM_H_
