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

#include "cbs/lstm.h"

#include <cmath>

#include "cbs/errors.h"

namespace cbs::nn {
namespace {

Vector Sigmoid(const Vector& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

const char* GateName(int gate) {
  switch (gate) {
    case kInputGate:
      return "input_gate";
    case kForgetGate:
      return "forget_gate";
    case kOutputGate:
      return "output_gate";
    case kCellGate:
      return "cell_gate";
  }
  return "unknown";
}

LstmLayerParams LstmLayerParams::Zero(int hidden_size, int input_size) {
  LstmLayerParams p;
  for (int g = 0; g < kNumGates; ++g) {
    p.input_weights[g] = Matrix::Zero(hidden_size, input_size);
    p.recurrent_weights[g] = Matrix::Zero(hidden_size, hidden_size);
    p.biases[g] = Vector::Zero(hidden_size);
  }
  return p;
}

LstmCellState LstmStep(const LstmLayerParams& params, const Vector& x,
                       const LstmCellState& prev, LstmStepCache* cache) {
  const int n = params.hidden_size();
  if (x.size() != params.input_size() || prev.h.size() != n ||
      prev.c.size() != n) {
    throw ContractViolation("lstm step: dimension mismatch");
  }
  if (!x.allFinite() || !prev.h.allFinite() || !prev.c.allFinite()) {
    throw NumericError("lstm step: non-finite input");
  }
  std::array<Vector, kNumGates> gates;
  for (int g = 0; g < kNumGates; ++g) {
    Vector z = params.input_weights[g] * x +
               params.recurrent_weights[g] * prev.h + params.biases[g];
    gates[g] = g == kCellGate ? Vector(z.array().tanh()) : Sigmoid(z);
  }
  LstmCellState next;
  next.c = gates[kForgetGate].cwiseProduct(prev.c) +
           gates[kInputGate].cwiseProduct(gates[kCellGate]);
  Vector tanh_c = next.c.array().tanh();
  next.h = gates[kOutputGate].cwiseProduct(tanh_c);
  if (cache) {
    cache->x = x;
    cache->prev = prev;
    cache->gates = std::move(gates);
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

void LstmStepBackward(const LstmLayerParams& params,
                      const LstmStepCache& cache, const Vector& dh,
                      const Vector& dc, LstmLayerParams* grad, Vector* dx,
                      LstmCellState* dprev) {
  const auto& i = cache.gates[kInputGate];
  const auto& f = cache.gates[kForgetGate];
  const auto& o = cache.gates[kOutputGate];
  const auto& g = cache.gates[kCellGate];
  const Vector d_c =
      dc + dh.cwiseProduct(o).cwiseProduct(
               (1.0 - cache.tanh_c.array().square()).matrix());

  std::array<Vector, kNumGates> dz;
  dz[kInputGate] = d_c.cwiseProduct(g).cwiseProduct(
      i.cwiseProduct((1.0 - i.array()).matrix()));
  dz[kForgetGate] = d_c.cwiseProduct(cache.prev.c)
                        .cwiseProduct(f.cwiseProduct((1.0 - f.array()).matrix()));
  dz[kOutputGate] = dh.cwiseProduct(cache.tanh_c)
                        .cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
  dz[kCellGate] =
      d_c.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());

  *dx = Vector::Zero(params.input_size());
  dprev->h = Vector::Zero(params.hidden_size());
  dprev->c = d_c.cwiseProduct(f);
  for (int k = 0; k < kNumGates; ++k) {
    grad->input_weights[k].noalias() += dz[k] * cache.x.transpose();
    grad->recurrent_weights[k].noalias() += dz[k] * cache.prev.h.transpose();
    grad->biases[k] += dz[k];
    dx->noalias() += params.input_weights[k].transpose() * dz[k];
    dprev->h.noalias() += params.recurrent_weights[k].transpose() * dz[k];
  }
}

}  // namespace cbs::nn
