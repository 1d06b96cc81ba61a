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

#ifndef TRIPSYNTH_AUTODIFF_HPP_
#define TRIPSYNTH_AUTODIFF_HPP_

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "tripsynth/tensor.hpp"

namespace tripsynth::autodiff {

using NodeId = std::size_t;

// Define-by-run reverse-mode tape. Forward values are computed eagerly as
// ops are recorded; backward() runs one reverse sweep from a scalar loss and
// returns gradients for the registered parameter leaves. A tape is single
// use: a second backward() throws TapeError.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Constant leaf; receives no gradient.
  NodeId input(Tensor value);

  // Tracked leaf. param_index keys the gradient slot in backward()'s result;
  // repeated registration of the same index returns the original node.
  NodeId param(std::size_t param_index, const Tensor& value);

  NodeId matmul(NodeId a, NodeId b);        // [m,k] x [k,n] -> [m,n]
  NodeId add(NodeId a, NodeId b);           // same shape
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);           // elementwise
  NodeId add_rowvec(NodeId x, NodeId v);    // [m,n] + [n] broadcast over rows
  NodeId affine(NodeId x, double scale, double shift);
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId tanh(NodeId x);
  NodeId softplus(NodeId x);                // log(1 + e^x), stable
  NodeId softmax(NodeId x);                 // rows of a 2-D tensor
  NodeId concat_cols(const std::vector<NodeId>& xs);   // 2-D, same rows
  NodeId slice_time(NodeId x, std::size_t t);          // [m,T,d] -> [m,d]
  NodeId stack_time(const std::vector<NodeId>& xs);    // T x [m,d] -> [m,T,d]
  NodeId sum_all(NodeId x);                 // -> [1]
  NodeId mean_all(NodeId x);                // -> [1]

  const Tensor& value(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep. loss must be a single-element tensor. The result is
  // indexed by param_index; indices never registered map to empty tensors.
  std::vector<Tensor> backward(NodeId loss);

 private:
  enum class Op {
    kInput, kParam, kMatmul, kAdd, kSub, kMul, kAddRowvec, kAffine,
    kRelu, kSigmoid, kTanh, kSoftplus, kSoftmax, kConcatCols, kSliceTime,
    kStackTime, kSumAll, kMeanAll,
  };

  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value;
    std::size_t param_index = 0;
    double scale = 0.0, shift = 0.0;  // kAffine
    std::size_t t_index = 0;          // kSliceTime
  };

  NodeId push(Node n);
  const Node& at(NodeId id) const;

  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, NodeId> param_nodes_;
  std::size_t max_param_index_ = 0;
  bool has_params_ = false;
  bool consumed_ = false;
};

}  // namespace tripsynth::autodiff

#endif  // TRIPSYNTH_AUTODIFF_HPP_
