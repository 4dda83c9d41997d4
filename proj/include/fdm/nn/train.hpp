#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fdm/nn/autodiff.hpp"

namespace fdm::nn {

struct OptimizerConfig {
    enum class Kind { sgd, adam };
    Kind kind = Kind::sgd;
    double lr = 0.01;
    double momentum = 0.9;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double clip_norm = 5.0;      // global gradient norm; <= 0 disables clipping
    double weight_decay = 0.0;   // decoupled decay applied at each step
};

class Optimizer {
public:
    Optimizer(std::vector<Value> params, OptimizerConfig cfg);

    void zero_grad();
    void step();
    const std::vector<Value>& params() const { return params_; }

private:
    std::vector<Value> params_;
    OptimizerConfig cfg_;
    std::vector<Tensor> m1_, m2_;  // momentum / adam moments
    long t_ = 0;
};

struct TrainConfig {
    int epochs = 10;
    int batch_size = 8;
    OptimizerConfig opt;
    std::uint64_t seed = 1;
    bool shuffle = true;
};

struct TrainResult {
    std::vector<double> epoch_loss;
    double final_loss = 0.0;
};

// Generic minibatch loop: example_loss builds the scalar loss graph for one
// example. Deterministic given the seed; aborts with a diagnostic on NaN loss.
// An optional epoch callback can stop training early (return false to stop).
TrainResult train(Optimizer& opt, long n_examples,
                  const std::function<Value(long)>& example_loss, const TrainConfig& cfg,
                  const std::function<bool(int, double)>& epoch_done = {});

}  // namespace fdm::nn
