#include "fdm/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace fdm::nn {

Optimizer::Optimizer(std::vector<Value> params, OptimizerConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
        if (!p->is_param) throw std::invalid_argument("Optimizer: non-parameter value");
        m1_.push_back(Tensor::zeros_like(p->val));
        if (cfg_.kind == OptimizerConfig::Kind::adam) m2_.push_back(Tensor::zeros_like(p->val));
    }
}

void Optimizer::zero_grad() { nn::zero_grad(params_); }

void Optimizer::step() {
    ++t_;
    // global-norm gradient clipping
    double scale = 1.0;
    if (cfg_.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& p : params_) {
            for (double g : p->grad.data) sq += g * g;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        if (cfg_.weight_decay > 0.0) {
            for (auto& v : p.val.data) v -= cfg_.lr * cfg_.weight_decay * v;
        }
        if (cfg_.kind == OptimizerConfig::Kind::sgd) {
            for (std::size_t j = 0; j < p.val.data.size(); ++j) {
                const double g = p.grad.data[j] * scale;
                m1_[i].data[j] = cfg_.momentum * m1_[i].data[j] + g;
                p.val.data[j] -= cfg_.lr * m1_[i].data[j];
            }
        } else {
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
            for (std::size_t j = 0; j < p.val.data.size(); ++j) {
                const double g = p.grad.data[j] * scale;
                m1_[i].data[j] = cfg_.beta1 * m1_[i].data[j] + (1.0 - cfg_.beta1) * g;
                m2_[i].data[j] = cfg_.beta2 * m2_[i].data[j] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m1_[i].data[j] / bc1;
                const double vhat = m2_[i].data[j] / bc2;
                p.val.data[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }
}

TrainResult train(Optimizer& opt, long n_examples,
                  const std::function<Value(long)>& example_loss, const TrainConfig& cfg,
                  const std::function<bool(int, double)>& epoch_done) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (n_examples < 1) throw std::invalid_argument("train: empty dataset");

    std::mt19937_64 rng(cfg.seed);
    std::vector<long> order(static_cast<std::size_t>(n_examples));
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        long done = 0;
        while (done < n_examples) {
            const long batch = std::min<long>(cfg.batch_size, n_examples - done);
            opt.zero_grad();
            double batch_sum = 0.0;
            for (long b = 0; b < batch; ++b) {
                Value loss = example_loss(order[static_cast<std::size_t>(done + b)]);
                const double v = loss->val.data[0];
                if (!std::isfinite(v)) {
                    throw std::runtime_error(
                        "train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                        ", example " + std::to_string(order[static_cast<std::size_t>(done + b)]));
                }
                batch_sum += v;
                // mean over the batch
                backward(scale(loss, 1.0 / static_cast<double>(batch)));
            }
            opt.step();
            epoch_sum += batch_sum;
            done += batch;
        }
        const double mean_loss = epoch_sum / static_cast<double>(n_examples);
        result.epoch_loss.push_back(mean_loss);
        if (epoch_done && !epoch_done(epoch, mean_loss)) break;
    }
    result.final_loss = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();
    return result;
}

}  // namespace fdm::nn
