#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fdm/imaging.hpp"
#include "fdm/metrics.hpp"
#include "fdm/nn/rnn.hpp"
#include "fdm/nn/train.hpp"

namespace fdm::classifier {

struct ConvBlockConfig {
    int filters = 16;
    int kernel = 3;
    bool attention = true;
    bool pool = true;
};

struct ClassifierConfig {
    int input_side = 64;   // zeta
    int channels = 4;      // c'
    int classes = 3;       // r
    int attention_kernel = 7;
    std::vector<ConvBlockConfig> blocks{{16, 3, true, true}, {32, 3, true, true},
                                        {64, 3, true, true}};
};

struct ConfidenceVector {
    std::vector<double> raw;         // classifier probabilities P^i
    std::vector<double> normalized;  // C_n^i = P^i / sum P^i
};

// Renormalization applied to raw scores; idempotent on softmax outputs.
ConfidenceVector normalize_confidence(const std::vector<double>& raw);

// argmax with ties broken toward the lowest class index; returns 1-based level
int predict_level(const ConfidenceVector& c);

class ComplexityClassifier {
public:
    ComplexityClassifier(const ClassifierConfig& cfg, std::uint64_t seed);

    const ClassifierConfig& config() const { return cfg_; }

    // Raw class probabilities (softmax) for one stack.
    std::vector<double> probabilities(const imaging::ScalogramStack& stack) const;
    ConfidenceVector classify(const imaging::ScalogramStack& stack) const;

    nn::Value forward(const nn::Tensor& image) const;  // logits [r, 1]
    nn::Tensor to_input(const imaging::ScalogramStack& stack) const;

    std::vector<std::pair<std::string, nn::Value>> named_params() const;
    std::vector<nn::Value> params() const;

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

private:
    ClassifierConfig cfg_;
    struct Block {
        nn::Value conv_w, conv_b;
        nn::Value bn_gamma, bn_beta;
        nn::SpatialAttention attention;
        bool use_attention = true;
        bool pool = true;
    };
    std::vector<Block> blocks_;
    nn::Value fc_w, fc_b;
};

struct TrainOutcome {
    metrics::ClassificationReport train_report;
    metrics::ClassificationReport val_report;
    std::vector<double> epoch_loss;
    long train_count = 0, val_count = 0;
};

struct ClassifierTrainConfig {
    double train_fraction = 0.7;
    int epochs = 12;
    int batch_size = 8;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double early_stop_val_accuracy = 97.5;  // percent; <=0 disables
    std::uint64_t seed = 1;
};

// Supervised training on (stack, level) pairs with a stratified 70/30 split.
// Labels are 1-based levels; every class must appear in the training split.
TrainOutcome train_classifier(ComplexityClassifier& model,
                              const std::vector<imaging::ScalogramStack>& stacks,
                              const std::vector<int>& levels, const ClassifierTrainConfig& cfg);

}  // namespace fdm::classifier
