#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fdm/nn/tensor.hpp"

namespace fdm::nn {

// Reverse-mode autodiff over a dynamically recorded DAG. Ops allocate fresh
// nodes; parameters are long-lived leaves whose gradients accumulate across
// a forward/backward pass.
struct Node {
    Tensor val;
    Tensor grad;
    bool is_param = false;
    bool needs_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
};

using Value = std::shared_ptr<Node>;

Value constant(Tensor v);
Value parameter(Tensor v);

// Gradient of a scalar loss w.r.t. every reachable parameter; throws on a
// non-scalar loss. Gradients accumulate, call zero_grad between steps.
void backward(const Value& loss);
void zero_grad(std::span<const Value> params);

// elementwise and linear algebra
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);  // hadamard
Value scale(const Value& a, double c);
Value matmul(const Value& a, const Value& b);
Value sigmoid(const Value& a);
Value tanh_act(const Value& a);
Value relu(const Value& a);

// stable scalar sigmoid used by the activations
double sigmoid_scalar(double x);

// images: [H, W, C] row-major
Value conv2d(const Value& x, const Value& w, const Value& b, int pad);
Value maxpool2d(const Value& x, int size, int stride);
Value batchnorm2d(const Value& x, const Value& gamma, const Value& beta, double eps = 1e-5);
Value channel_mean(const Value& x);
Value channel_max(const Value& x);
Value concat_channels(const Value& a, const Value& b);
Value mul_channel_broadcast(const Value& x, const Value& m);  // m is [H, W, 1]
Value flatten(const Value& x);  // -> [N, 1]

// sequences: [T, C] row-major
Value conv1d(const Value& x, const Value& w, const Value& b, int pad);
Value depthwise_conv1d(const Value& x, const Value& w, const Value& b, int pad);
Value select_row(const Value& x, int t);              // -> [C, 1]
Value concat_vec(const Value& a, const Value& b);     // [m,1] + [n,1] -> [m+n,1]

// losses (scalar [1,1] outputs)
Value softmax_cross_entropy(const Value& logits, int label);
Value mse_loss(const Value& pred, const Tensor& target);

// forward-only softmax over a flat tensor
Tensor softmax(const Tensor& logits);

}  // namespace fdm::nn
