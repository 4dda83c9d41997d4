#include "fdm/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fdm/nn/checkpoint.hpp"

namespace fdm::classifier {

using nn::Tensor;
using nn::Value;

ConfidenceVector normalize_confidence(const std::vector<double>& raw) {
    if (raw.empty()) throw std::invalid_argument("normalize_confidence: empty scores");
    double sum = 0.0;
    for (double v : raw) {
        if (v < 0.0) throw std::invalid_argument("normalize_confidence: negative raw score");
        sum += v;
    }
    ConfidenceVector c;
    c.raw = raw;
    c.normalized.resize(raw.size());
    if (sum <= 0.0) {
        std::fill(c.normalized.begin(), c.normalized.end(), 1.0 / static_cast<double>(raw.size()));
    } else {
        for (std::size_t i = 0; i < raw.size(); ++i) c.normalized[i] = raw[i] / sum;
    }
    return c;
}

int predict_level(const ConfidenceVector& c) {
    if (c.normalized.empty()) throw std::invalid_argument("predict_level: empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.normalized.size(); ++i) {
        if (c.normalized[i] > c.normalized[best]) best = i;
    }
    return static_cast<int>(best) + 1;
}

ComplexityClassifier::ComplexityClassifier(const ClassifierConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
    if (cfg_.classes < 2) throw std::invalid_argument("classifier: need at least two classes");
    if (cfg_.blocks.empty()) throw std::invalid_argument("classifier: need at least one block");
    std::mt19937_64 rng(seed);
    int side = cfg_.input_side;
    int channels = cfg_.channels;
    for (const auto& bc : cfg_.blocks) {
        Block b;
        b.conv_w = nn::parameter(Tensor::uniform_init({bc.kernel, bc.kernel, channels, bc.filters},
                                                      bc.kernel * bc.kernel * channels, rng));
        b.conv_b = nn::parameter(Tensor({bc.filters}));
        b.bn_gamma = nn::parameter(Tensor({bc.filters}, 1.0));
        b.bn_beta = nn::parameter(Tensor({bc.filters}));
        b.use_attention = bc.attention;
        b.attention = nn::SpatialAttention::create(cfg_.attention_kernel, rng);
        b.pool = bc.pool;
        blocks_.push_back(std::move(b));
        channels = bc.filters;
        if (bc.pool) side /= 2;
        if (side < 1) throw std::invalid_argument("classifier: too many pooling stages");
    }
    const int flat = side * side * channels;
    fc_w = nn::parameter(Tensor::uniform_init({cfg_.classes, flat}, flat, rng));
    fc_b = nn::parameter(Tensor({cfg_.classes, 1}));
}

Tensor ComplexityClassifier::to_input(const imaging::ScalogramStack& stack) const {
    if (stack.side != cfg_.input_side || stack.channels != cfg_.channels) {
        throw std::invalid_argument("classifier: stack shape mismatch, expected side " +
                                    std::to_string(cfg_.input_side) + " channels " +
                                    std::to_string(cfg_.channels));
    }
    Tensor img({cfg_.input_side, cfg_.input_side, cfg_.channels});
    // map [0,255] intensities to [0,1]
    for (std::size_t i = 0; i < stack.pixels.size(); ++i) img.data[i] = stack.pixels[i] / 255.0;
    return img;
}

Value ComplexityClassifier::forward(const Tensor& image) const {
    Value x = nn::constant(image);
    for (const auto& b : blocks_) {
        x = nn::relu(nn::conv2d(x, b.conv_w, b.conv_b, b.conv_w->val.dim(0) / 2));
        x = nn::batchnorm2d(x, b.bn_gamma, b.bn_beta);
        if (b.use_attention) x = b.attention.apply(x);
        if (b.pool) x = nn::maxpool2d(x, 2, 2);
    }
    return nn::add(nn::matmul(fc_w, nn::flatten(x)), fc_b);
}

std::vector<double> ComplexityClassifier::probabilities(const imaging::ScalogramStack& stack) const {
    const Tensor logits = forward(to_input(stack))->val;
    const Tensor probs = nn::softmax(logits);
    return probs.data;
}

ConfidenceVector ComplexityClassifier::classify(const imaging::ScalogramStack& stack) const {
    return normalize_confidence(probabilities(stack));
}

std::vector<std::pair<std::string, Value>> ComplexityClassifier::named_params() const {
    std::vector<std::pair<std::string, Value>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const std::string p = "block" + std::to_string(i);
        out.emplace_back(p + ".conv_w", blocks_[i].conv_w);
        out.emplace_back(p + ".conv_b", blocks_[i].conv_b);
        out.emplace_back(p + ".bn_gamma", blocks_[i].bn_gamma);
        out.emplace_back(p + ".bn_beta", blocks_[i].bn_beta);
        if (blocks_[i].use_attention) blocks_[i].attention.collect_params(p + ".attention", out);
    }
    out.emplace_back("fc.w", fc_w);
    out.emplace_back("fc.b", fc_b);
    return out;
}

std::vector<Value> ComplexityClassifier::params() const {
    std::vector<Value> out;
    for (auto& [n, v] : named_params()) out.push_back(v);
    return out;
}

void ComplexityClassifier::save(const std::filesystem::path& path) const {
    std::vector<std::pair<std::string, Tensor>> entries;
    for (const auto& [n, v] : named_params()) entries.emplace_back(n, v->val);
    nn::save_checkpoint(path, entries);
}

void ComplexityClassifier::load(const std::filesystem::path& path) {
    auto entries = nn::load_checkpoint(path);
    auto named = named_params();
    if (entries.size() != named.size()) {
        throw std::runtime_error("classifier: checkpoint manifest mismatch");
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        if (entries[i].first != named[i].first ||
            entries[i].second.shape != named[i].second->val.shape) {
            throw std::runtime_error("classifier: checkpoint entry mismatch at " +
                                     entries[i].first);
        }
        named[i].second->val = entries[i].second;
    }
}

TrainOutcome train_classifier(ComplexityClassifier& model,
                              const std::vector<imaging::ScalogramStack>& stacks,
                              const std::vector<int>& levels, const ClassifierTrainConfig& cfg) {
    if (stacks.size() != levels.size() || stacks.empty()) {
        throw std::invalid_argument("train_classifier: dataset shape mismatch or empty");
    }
    const int r = model.config().classes;
    // stratified split keeps every class present in both subsets
    std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1 || levels[i] > r) {
            throw std::invalid_argument("train_classifier: label out of range");
        }
        per_class[static_cast<std::size_t>(levels[i] - 1)].push_back(i);
    }
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> train_idx, val_idx;
    for (int c = 0; c < r; ++c) {
        auto& bucket = per_class[static_cast<std::size_t>(c)];
        if (bucket.empty()) {
            throw std::invalid_argument("train_classifier: class " + std::to_string(c + 1) +
                                        " missing from the training data");
        }
        std::shuffle(bucket.begin(), bucket.end(), rng);
        const std::size_t n_train =
            std::max<std::size_t>(1, static_cast<std::size_t>(
                                         cfg.train_fraction * static_cast<double>(bucket.size())));
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            (i < n_train ? train_idx : val_idx).push_back(bucket[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());

    // pre-convert inputs once
    std::vector<Tensor> inputs(stacks.size());
    for (std::size_t i = 0; i < stacks.size(); ++i) inputs[i] = model.to_input(stacks[i]);

    nn::OptimizerConfig oc;
    oc.kind = nn::OptimizerConfig::Kind::adam;
    oc.lr = cfg.lr;
    oc.weight_decay = cfg.weight_decay;
    nn::Optimizer opt(model.params(), oc);
    nn::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.opt = oc;
    tc.seed = cfg.seed + 1;

    auto evaluate = [&](const std::vector<std::size_t>& idx) {
        std::vector<int> preds, labs;
        for (std::size_t i : idx) {
            preds.push_back(predict_level(normalize_confidence(
                nn::softmax(model.forward(inputs[i])->val).data)));
            labs.push_back(levels[i]);
        }
        return metrics::classification_report(preds, labs, r);
    };

    TrainOutcome outcome;
    auto result = nn::train(
        opt, static_cast<long>(train_idx.size()),
        [&](long i) {
            const std::size_t idx = train_idx[static_cast<std::size_t>(i)];
            return nn::softmax_cross_entropy(model.forward(inputs[idx]), levels[idx] - 1);
        },
        tc,
        [&](int, double) {
            if (cfg.early_stop_val_accuracy <= 0.0) return true;
            return evaluate(val_idx).accuracy < cfg.early_stop_val_accuracy;
        });

    outcome.epoch_loss = result.epoch_loss;
    outcome.train_report = evaluate(train_idx);
    outcome.val_report = evaluate(val_idx);
    outcome.train_count = static_cast<long>(train_idx.size());
    outcome.val_count = static_cast<long>(val_idx.size());
    return outcome;
}

}  // namespace fdm::classifier
