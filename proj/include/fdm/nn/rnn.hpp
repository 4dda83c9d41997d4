#pragma once

#include <random>
#include <string>
#include <vector>

#include "fdm/nn/autodiff.hpp"

namespace fdm::nn {

// Gated recurrent cell:
//   z = sigmoid(Wzy y + Wzh h + bz)    update gate
//   r = sigmoid(Wry y + Wrh h + br)    reset gate
//   hc = tanh(Why y + Whh (r.h) + bh)  candidate
//   h' = (1-z).h + z.hc
struct GruCell {
    int input_size = 0, hidden_size = 0;
    Value w_zy, w_zh, b_z;
    Value w_ry, w_rh, b_r;
    Value w_hy, w_hh, b_h;

    static GruCell create(int input_size, int hidden_size, std::mt19937_64& rng);
    Value step(const Value& y_t, const Value& h_prev) const;
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Value>>& out) const;
};

// LSTM cell:
//   i/f/o = sigmoid(W.y + W.h + b)
//   c' = f.c + i.tanh(Wcy y + Wch h + bc)
//   h' = o.tanh(c')
struct LstmCell {
    int input_size = 0, hidden_size = 0;
    Value w_iy, w_ih, b_i;
    Value w_fy, w_fh, b_f;
    Value w_oy, w_oh, b_o;
    Value w_cy, w_ch, b_c;

    static LstmCell create(int input_size, int hidden_size, std::mt19937_64& rng);
    std::pair<Value, Value> step(const Value& y_t, const Value& h_prev, const Value& c_prev) const;
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Value>>& out) const;
};

// Affine readout with optional sigmoid squashing.
struct OutputHead {
    enum class Activation { identity, sigmoid };
    Activation activation = Activation::identity;
    Value w, b;

    static OutputHead create(int hidden_size, int output_size, Activation act,
                             std::mt19937_64& rng);
    Value apply(const Value& h) const;
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Value>>& out) const;
};

// Conv -> batchnorm -> spatial attention block used by the classifier.
// Attention pools channels (mean and max), runs a single kernel over the two
// pooled maps, squashes with sigmoid, and multiplies the map into the input.
struct SpatialAttention {
    Value w, b;  // [k, k, 2, 1] kernel
    int kernel = 7;

    static SpatialAttention create(int kernel, std::mt19937_64& rng);
    Value apply(const Value& x) const;
    void collect_params(const std::string& prefix,
                        std::vector<std::pair<std::string, Value>>& out) const;
};

}  // namespace fdm::nn
