// Copyright 2026 The Tripsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tripsynth/autodiff.hpp"

#include <cmath>
#include <string>

#include "tripsynth/error.hpp"
#include "tripsynth/kernels.hpp"

namespace tripsynth::autodiff {
namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  const double m = x > 0.0 ? x : 0.0;
  return m + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

const Tape::Node& Tape::at(NodeId id) const {
  if (id >= nodes_.size()) {
    throw TapeError("node id " + std::to_string(id) + " out of range");
  }
  return nodes_[id];
}

NodeId Tape::input(Tensor value) {
  Node n;
  n.op = Op::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::param(std::size_t param_index, const Tensor& value) {
  auto it = param_nodes_.find(param_index);
  if (it != param_nodes_.end()) return it->second;
  Node n;
  n.op = Op::kParam;
  n.value = value;
  n.param_index = param_index;
  NodeId id = push(std::move(n));
  param_nodes_.emplace(param_index, id);
  if (!has_params_ || param_index > max_param_index_) {
    max_param_index_ = std::max(max_param_index_, param_index);
    has_params_ = true;
  }
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  if (ta.rank() != 2 || tb.rank() != 2 || ta.shape[1] != tb.shape[0]) {
    throw ShapeError("matmul: incompatible shapes: " + ta.shape_str() +
                     " vs " + tb.shape_str());
  }
  const std::size_t m = ta.shape[0], k = ta.shape[1], nn = tb.shape[1];
  Node n;
  n.op = Op::kMatmul;
  n.inputs = {a, b};
  n.value = Tensor({m, nn});
  kernels::table().matmul_nn(n.value.data.data(), ta.data.data(),
                             tb.data.data(), m, k, nn);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  require_same_shape(ta, tb, "add");
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a, b};
  n.value = Tensor(ta.shape);
  kernels::table().add(n.value.data.data(), ta.data.data(), tb.data.data(),
                       ta.size());
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  require_same_shape(ta, tb, "sub");
  Node n;
  n.op = Op::kSub;
  n.inputs = {a, b};
  n.value = Tensor(ta.shape);
  kernels::table().sub(n.value.data.data(), ta.data.data(), tb.data.data(),
                       ta.size());
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& ta = at(a).value;
  const Tensor& tb = at(b).value;
  require_same_shape(ta, tb, "mul");
  Node n;
  n.op = Op::kMul;
  n.inputs = {a, b};
  n.value = Tensor(ta.shape);
  kernels::table().mul(n.value.data.data(), ta.data.data(), tb.data.data(),
                       ta.size());
  return push(std::move(n));
}

NodeId Tape::add_rowvec(NodeId x, NodeId v) {
  const Tensor& tx = at(x).value;
  const Tensor& tv = at(v).value;
  if (tx.rank() != 2 || tv.rank() != 1 || tx.shape[1] != tv.shape[0]) {
    throw ShapeError("add_rowvec: incompatible shapes: " + tx.shape_str() +
                     " vs " + tv.shape_str());
  }
  Node n;
  n.op = Op::kAddRowvec;
  n.inputs = {x, v};
  n.value = Tensor(tx.shape);
  const std::size_t m = tx.shape[0], w = tx.shape[1];
  for (std::size_t i = 0; i < m; ++i) {
    kernels::table().add(n.value.data.data() + i * w, tx.data.data() + i * w,
                         tv.data.data(), w);
  }
  return push(std::move(n));
}

NodeId Tape::affine(NodeId x, double scale, double shift) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kAffine;
  n.inputs = {x};
  n.scale = scale;
  n.shift = shift;
  n.value = Tensor(tx.shape);
  kernels::table().affine(n.value.data.data(), tx.data.data(), scale, shift,
                          tx.size());
  return push(std::move(n));
}

NodeId Tape::relu(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kRelu;
  n.inputs = {x};
  n.value = Tensor(tx.shape);
  kernels::table().relu(n.value.data.data(), tx.data.data(), tx.size());
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kSigmoid;
  n.inputs = {x};
  n.value = Tensor(tx.shape);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    n.value.data[i] = stable_sigmoid(tx.data[i]);
  }
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kTanh;
  n.inputs = {x};
  n.value = Tensor(tx.shape);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    n.value.data[i] = std::tanh(tx.data[i]);
  }
  return push(std::move(n));
}

NodeId Tape::softplus(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kSoftplus;
  n.inputs = {x};
  n.value = Tensor(tx.shape);
  for (std::size_t i = 0; i < tx.size(); ++i) {
    n.value.data[i] = stable_softplus(tx.data[i]);
  }
  return push(std::move(n));
}

NodeId Tape::softmax(NodeId x) {
  const Tensor& tx = at(x).value;
  if (tx.rank() != 2) {
    throw ShapeError("softmax expects a 2-D tensor, got " + tx.shape_str());
  }
  Node n;
  n.op = Op::kSoftmax;
  n.inputs = {x};
  n.value = Tensor(tx.shape);
  const std::size_t m = tx.shape[0], w = tx.shape[1];
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = tx.data.data() + i * w;
    double* out = n.value.data.data() + i * w;
    double mx = row[0];
    for (std::size_t j = 1; j < w; ++j) mx = row[j] > mx ? row[j] : mx;
    double sum = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      out[j] = std::exp(row[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < w; ++j) out[j] /= sum;
  }
  return push(std::move(n));
}

NodeId Tape::concat_cols(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ValueError("concat_cols requires at least one input");
  const Tensor& head = at(xs[0]).value;
  if (head.rank() != 2) {
    throw ShapeError("concat_cols expects 2-D inputs, got " + head.shape_str());
  }
  const std::size_t m = head.shape[0];
  std::size_t total = 0;
  for (NodeId id : xs) {
    const Tensor& t = at(id).value;
    if (t.rank() != 2 || t.shape[0] != m) {
      throw ShapeError("concat_cols: incompatible shapes: " +
                       at(xs[0]).value.shape_str() + " vs " + t.shape_str());
    }
    total += t.shape[1];
  }
  Node n;
  n.op = Op::kConcatCols;
  n.inputs = xs;
  n.value = Tensor({m, total});
  std::size_t off = 0;
  for (NodeId id : xs) {
    const Tensor& t = at(id).value;
    const std::size_t w = t.shape[1];
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        n.value.data[i * total + off + j] = t.data[i * w + j];
      }
    }
    off += w;
  }
  return push(std::move(n));
}

NodeId Tape::slice_time(NodeId x, std::size_t t) {
  const Tensor& tx = at(x).value;
  if (tx.rank() != 3) {
    throw ShapeError("slice_time expects a 3-D tensor, got " + tx.shape_str());
  }
  if (t >= tx.shape[1]) {
    throw ShapeError("slice_time index " + std::to_string(t) +
                     " out of range for " + tx.shape_str());
  }
  const std::size_t m = tx.shape[0], T = tx.shape[1], d = tx.shape[2];
  Node n;
  n.op = Op::kSliceTime;
  n.inputs = {x};
  n.t_index = t;
  n.value = Tensor({m, d});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      n.value.data[i * d + j] = tx.data[(i * T + t) * d + j];
    }
  }
  return push(std::move(n));
}

NodeId Tape::stack_time(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw ValueError("stack_time requires at least one input");
  const Tensor& first = at(xs[0]).value;
  if (first.rank() != 2) {
    throw ShapeError("stack_time expects 2-D inputs, got " + first.shape_str());
  }
  for (NodeId id : xs) require_same_shape(first, at(id).value, "stack_time");
  const std::size_t m = first.shape[0], d = first.shape[1], T = xs.size();
  Node n;
  n.op = Op::kStackTime;
  n.inputs = xs;
  n.value = Tensor({m, T, d});
  for (std::size_t t = 0; t < T; ++t) {
    const Tensor& xt = at(xs[t]).value;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        n.value.data[(i * T + t) * d + j] = xt.data[i * d + j];
      }
    }
  }
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kSumAll;
  n.inputs = {x};
  n.value = Tensor({1});
  double s = 0.0;
  for (double v : tx.data) s += v;
  n.value.data[0] = s;
  return push(std::move(n));
}

NodeId Tape::mean_all(NodeId x) {
  const Tensor& tx = at(x).value;
  Node n;
  n.op = Op::kMeanAll;
  n.inputs = {x};
  n.value = Tensor({1});
  double s = 0.0;
  for (double v : tx.data) s += v;
  n.value.data[0] = s / static_cast<double>(tx.size());
  return push(std::move(n));
}

const Tensor& Tape::value(NodeId id) const { return at(id).value; }

std::vector<Tensor> Tape::backward(NodeId loss) {
  if (consumed_) {
    throw TapeError("backward already ran on this tape");
  }
  const Node& loss_node = at(loss);
  if (loss_node.value.size() != 1) {
    throw TapeError("backward requires a scalar loss node, got shape " +
                    loss_node.value.shape_str());
  }
  consumed_ = true;

  std::vector<Tensor> grads(nodes_.size());
  auto grad_of = [&](NodeId id) -> Tensor& {
    Tensor& g = grads[id];
    if (g.data.empty()) g = Tensor(nodes_[id].value.shape);
    return g;
  };
  grad_of(loss).data[0] = 1.0;

  const kernels::KernelTable& K = kernels::table();

  for (std::size_t idx = loss + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (grads[idx].data.empty()) continue;
    const Tensor& gy = grads[idx];
    switch (n.op) {
      case Op::kInput:
      case Op::kParam:
        break;
      case Op::kMatmul: {
        const Tensor& a = nodes_[n.inputs[0]].value;
        const Tensor& b = nodes_[n.inputs[1]].value;
        const std::size_t m = a.shape[0], k = a.shape[1], nn = b.shape[1];
        // dA += dY * B^T ; dB += A^T * dY
        K.matmul_nt(grad_of(n.inputs[0]).data.data(), gy.data.data(),
                    b.data.data(), m, nn, k);
        K.matmul_tn(grad_of(n.inputs[1]).data.data(), a.data.data(),
                    gy.data.data(), m, k, nn);
        break;
      }
      case Op::kAdd:
        K.axpy(grad_of(n.inputs[0]).data.data(), 1.0, gy.data.data(),
               gy.size());
        K.axpy(grad_of(n.inputs[1]).data.data(), 1.0, gy.data.data(),
               gy.size());
        break;
      case Op::kSub:
        K.axpy(grad_of(n.inputs[0]).data.data(), 1.0, gy.data.data(),
               gy.size());
        K.axpy(grad_of(n.inputs[1]).data.data(), -1.0, gy.data.data(),
               gy.size());
        break;
      case Op::kMul: {
        const Tensor& a = nodes_[n.inputs[0]].value;
        const Tensor& b = nodes_[n.inputs[1]].value;
        Tensor& ga = grad_of(n.inputs[0]);
        Tensor& gb = grad_of(n.inputs[1]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          ga.data[i] += gy.data[i] * b.data[i];
          gb.data[i] += gy.data[i] * a.data[i];
        }
        break;
      }
      case Op::kAddRowvec: {
        Tensor& gx = grad_of(n.inputs[0]);
        Tensor& gv = grad_of(n.inputs[1]);
        const std::size_t m = n.value.shape[0], w = n.value.shape[1];
        K.axpy(gx.data.data(), 1.0, gy.data.data(), gy.size());
        for (std::size_t i = 0; i < m; ++i) {
          K.axpy(gv.data.data(), 1.0, gy.data.data() + i * w, w);
        }
        break;
      }
      case Op::kAffine:
        K.axpy(grad_of(n.inputs[0]).data.data(), n.scale, gy.data.data(),
               gy.size());
        break;
      case Op::kRelu: {
        const Tensor& x = nodes_[n.inputs[0]].value;
        K.relu_grad(grad_of(n.inputs[0]).data.data(), x.data.data(),
                    gy.data.data(), gy.size());
        break;
      }
      case Op::kSigmoid: {
        Tensor& gx = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          const double y = n.value.data[i];
          gx.data[i] += gy.data[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::kTanh: {
        Tensor& gx = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          const double y = n.value.data[i];
          gx.data[i] += gy.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::kSoftplus: {
        const Tensor& x = nodes_[n.inputs[0]].value;
        Tensor& gx = grad_of(n.inputs[0]);
        for (std::size_t i = 0; i < gy.size(); ++i) {
          gx.data[i] += gy.data[i] * stable_sigmoid(x.data[i]);
        }
        break;
      }
      case Op::kSoftmax: {
        Tensor& gx = grad_of(n.inputs[0]);
        const std::size_t m = n.value.shape[0], w = n.value.shape[1];
        for (std::size_t i = 0; i < m; ++i) {
          const double* y = n.value.data.data() + i * w;
          const double* gyr = gy.data.data() + i * w;
          double dotv = 0.0;
          for (std::size_t j = 0; j < w; ++j) dotv += gyr[j] * y[j];
          double* gxr = gx.data.data() + i * w;
          for (std::size_t j = 0; j < w; ++j) {
            gxr[j] += (gyr[j] - dotv) * y[j];
          }
        }
        break;
      }
      case Op::kConcatCols: {
        const std::size_t m = n.value.shape[0], total = n.value.shape[1];
        std::size_t off = 0;
        for (NodeId src : n.inputs) {
          Tensor& gx = grad_of(src);
          const std::size_t w = gx.shape[1];
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
              gx.data[i * w + j] += gy.data[i * total + off + j];
            }
          }
          off += w;
        }
        break;
      }
      case Op::kSliceTime: {
        Tensor& gx = grad_of(n.inputs[0]);
        const std::size_t m = gx.shape[0], T = gx.shape[1], d = gx.shape[2];
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < d; ++j) {
            gx.data[(i * T + n.t_index) * d + j] += gy.data[i * d + j];
          }
        }
        break;
      }
      case Op::kStackTime: {
        const std::size_t T = n.inputs.size();
        const std::size_t m = n.value.shape[0], d = n.value.shape[2];
        for (std::size_t t = 0; t < T; ++t) {
          Tensor& gx = grad_of(n.inputs[t]);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
              gx.data[i * d + j] += gy.data[(i * T + t) * d + j];
            }
          }
        }
        break;
      }
      case Op::kSumAll: {
        Tensor& gx = grad_of(n.inputs[0]);
        const double g = gy.data[0];
        for (double& v : gx.data) v += g;
        break;
      }
      case Op::kMeanAll: {
        Tensor& gx = grad_of(n.inputs[0]);
        const double g = gy.data[0] / static_cast<double>(gx.size());
        for (double& v : gx.data) v += g;
        break;
      }
    }
  }

  std::vector<Tensor> out(has_params_ ? max_param_index_ + 1 : 0);
  for (const auto& [pidx, nid] : param_nodes_) {
    if (!grads[nid].data.empty()) {
      out[pidx] = std::move(grads[nid]);
    } else {
      out[pidx] = Tensor(nodes_[nid].value.shape);
    }
  }
  return out;
}

}  // namespace tripsynth::autodiff
