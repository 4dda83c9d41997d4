#include "fdm/nn/rnn.hpp"

namespace fdm::nn {

namespace {

Value ones_like(const Value& v) { return constant(Tensor(v->val.shape, 1.0)); }

Value gate(const Value& wy, const Value& y, const Value& wh, const Value& h, const Value& b) {
    return add(add(matmul(wy, y), matmul(wh, h)), b);
}

}  // namespace

GruCell GruCell::create(int input_size, int hidden_size, std::mt19937_64& rng) {
    GruCell c;
    c.input_size = input_size;
    c.hidden_size = hidden_size;
    auto wy = [&] { return parameter(Tensor::uniform_init({hidden_size, input_size}, input_size, rng)); };
    auto wh = [&] { return parameter(Tensor::uniform_init({hidden_size, hidden_size}, hidden_size, rng)); };
    auto bias = [&] { return parameter(Tensor({hidden_size, 1})); };
    c.w_zy = wy(); c.w_zh = wh(); c.b_z = bias();
    c.w_ry = wy(); c.w_rh = wh(); c.b_r = bias();
    c.w_hy = wy(); c.w_hh = wh(); c.b_h = bias();
    return c;
}

Value GruCell::step(const Value& y_t, const Value& h_prev) const {
    if (y_t->val.ndim() != 2 || y_t->val.dim(0) != input_size || y_t->val.dim(1) != 1 ||
        h_prev->val.ndim() != 2 || h_prev->val.dim(0) != hidden_size) {
        throw std::invalid_argument("GruCell::step: shape mismatch");
    }
    Value z = nn::sigmoid(gate(w_zy, y_t, w_zh, h_prev, b_z));
    Value r = nn::sigmoid(gate(w_ry, y_t, w_rh, h_prev, b_r));
    Value cand = tanh_act(add(add(matmul(w_hy, y_t), matmul(w_hh, mul(r, h_prev))), b_h));
    return add(mul(sub(ones_like(z), z), h_prev), mul(z, cand));
}

void GruCell::collect_params(const std::string& prefix,
                             std::vector<std::pair<std::string, Value>>& out) const {
    out.emplace_back(prefix + ".w_zy", w_zy);
    out.emplace_back(prefix + ".w_zh", w_zh);
    out.emplace_back(prefix + ".b_z", b_z);
    out.emplace_back(prefix + ".w_ry", w_ry);
    out.emplace_back(prefix + ".w_rh", w_rh);
    out.emplace_back(prefix + ".b_r", b_r);
    out.emplace_back(prefix + ".w_hy", w_hy);
    out.emplace_back(prefix + ".w_hh", w_hh);
    out.emplace_back(prefix + ".b_h", b_h);
}

LstmCell LstmCell::create(int input_size, int hidden_size, std::mt19937_64& rng) {
    LstmCell c;
    c.input_size = input_size;
    c.hidden_size = hidden_size;
    auto wy = [&] { return parameter(Tensor::uniform_init({hidden_size, input_size}, input_size, rng)); };
    auto wh = [&] { return parameter(Tensor::uniform_init({hidden_size, hidden_size}, hidden_size, rng)); };
    auto bias = [&] { return parameter(Tensor({hidden_size, 1})); };
    c.w_iy = wy(); c.w_ih = wh(); c.b_i = bias();
    c.w_fy = wy(); c.w_fh = wh(); c.b_f = bias();
    c.w_oy = wy(); c.w_oh = wh(); c.b_o = bias();
    c.w_cy = wy(); c.w_ch = wh(); c.b_c = bias();
    return c;
}

std::pair<Value, Value> LstmCell::step(const Value& y_t, const Value& h_prev,
                                       const Value& c_prev) const {
    if (y_t->val.ndim() != 2 || y_t->val.dim(0) != input_size || y_t->val.dim(1) != 1 ||
        h_prev->val.dim(0) != hidden_size || c_prev->val.dim(0) != hidden_size) {
        throw std::invalid_argument("LstmCell::step: shape mismatch");
    }
    Value i = nn::sigmoid(gate(w_iy, y_t, w_ih, h_prev, b_i));
    Value f = nn::sigmoid(gate(w_fy, y_t, w_fh, h_prev, b_f));
    Value o = nn::sigmoid(gate(w_oy, y_t, w_oh, h_prev, b_o));
    Value cand = tanh_act(gate(w_cy, y_t, w_ch, h_prev, b_c));
    Value c_next = add(mul(f, c_prev), mul(i, cand));
    Value h_next = mul(o, tanh_act(c_next));
    return {h_next, c_next};
}

void LstmCell::collect_params(const std::string& prefix,
                              std::vector<std::pair<std::string, Value>>& out) const {
    out.emplace_back(prefix + ".w_iy", w_iy);
    out.emplace_back(prefix + ".w_ih", w_ih);
    out.emplace_back(prefix + ".b_i", b_i);
    out.emplace_back(prefix + ".w_fy", w_fy);
    out.emplace_back(prefix + ".w_fh", w_fh);
    out.emplace_back(prefix + ".b_f", b_f);
    out.emplace_back(prefix + ".w_oy", w_oy);
    out.emplace_back(prefix + ".w_oh", w_oh);
    out.emplace_back(prefix + ".b_o", b_o);
    out.emplace_back(prefix + ".w_cy", w_cy);
    out.emplace_back(prefix + ".w_ch", w_ch);
    out.emplace_back(prefix + ".b_c", b_c);
}

OutputHead OutputHead::create(int hidden_size, int output_size, Activation act,
                              std::mt19937_64& rng) {
    OutputHead h;
    h.activation = act;
    h.w = parameter(Tensor::uniform_init({output_size, hidden_size}, hidden_size, rng));
    h.b = parameter(Tensor({output_size, 1}));
    return h;
}

Value OutputHead::apply(const Value& h) const {
    Value out = add(matmul(w, h), b);
    if (activation == Activation::sigmoid) out = nn::sigmoid(out);
    return out;
}

void OutputHead::collect_params(const std::string& prefix,
                                std::vector<std::pair<std::string, Value>>& out) const {
    out.emplace_back(prefix + ".w", w);
    out.emplace_back(prefix + ".b", b);
}

SpatialAttention SpatialAttention::create(int kernel, std::mt19937_64& rng) {
    SpatialAttention a;
    a.kernel = kernel;
    a.w = parameter(Tensor::uniform_init({kernel, kernel, 2, 1}, kernel * kernel * 2, rng));
    a.b = parameter(Tensor({1}));
    return a;
}

Value SpatialAttention::apply(const Value& x) const {
    Value pooled = concat_channels(channel_mean(x), channel_max(x));
    Value map = nn::sigmoid(conv2d(pooled, w, b, kernel / 2));
    return mul_channel_broadcast(x, map);
}

void SpatialAttention::collect_params(const std::string& prefix,
                                      std::vector<std::pair<std::string, Value>>& out) const {
    out.emplace_back(prefix + ".w", w);
    out.emplace_back(prefix + ".b", b);
}

}  // namespace fdm::nn
