#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdm/nn/rnn.hpp"
#include "fdm/nn/train.hpp"

namespace fdm::forecasters {

enum class Architecture {
    gru,             // single recurrent layer
    lstm,            // single LSTM layer
    conv_lstm,       // 1-D conv stack into an LSTM with a raw residual path
    deep_residual,   // residual conv stack into an LSTM
    deep_separable,  // separable-conv stack into an LSTM
};

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

// Design factors: (i) advanced recurrent structure, (ii) deeper stack,
// (iii) convolutional layers, (iv) residual connections.
struct DesignFactors {
    bool advanced_recurrent = false;
    bool deep_stack = false;
    bool conv_layers = false;
    bool residual = false;

    bool operator==(const DesignFactors&) const = default;
};

DesignFactors canonical_factors(Architecture a);

// How raw windows map into network coordinates. Global z-scores suit
// zero-mean oscillatory data; position-like channels with large offsets need
// window-relative coordinates (the net predicts the step from the window's
// last sample, so precision does not fight the absolute offset).
enum class Normalization { global_zscore, window_relative };

struct ForecastSpec {
    int lookback = 60;   // k
    int horizon = 1;     // q
    Architecture arch = Architecture::gru;
    DesignFactors factors = canonical_factors(Architecture::gru);
    int hidden = 16;     // recurrent width
    int conv_width = 8;  // feature channels of conv stacks
    Normalization norm = Normalization::global_zscore;

    void validate() const;  // residual only with conv layers; flags match arch
};

struct BenchmarkResult {
    double mean_seconds = 0.0;
    double stddev_seconds = 0.0;
    int trials = 0;
};

class BaseModel {
public:
    BaseModel() = default;

    const ForecastSpec& spec() const { return spec_; }
    double inference_time() const { return t_infer_; }
    void set_inference_time(double t) { t_infer_ = t; }
    double norm_mean() const { return mu_; }
    double norm_std() const { return sigma_; }
    void set_normalization(double mu, double sigma);

    // Scalar q-step-ahead prediction from the k most recent samples.
    double forecast(std::span<const double> window) const;

    std::vector<std::pair<std::string, nn::Value>> named_params() const;
    std::vector<nn::Value> params() const;

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

    friend BaseModel build_architecture(const ForecastSpec& spec, std::uint64_t seed);
    nn::Value forward_normalized(const nn::Tensor& window) const;

private:
    ForecastSpec spec_;
    double mu_ = 0.0, sigma_ = 1.0;
    double t_infer_ = 0.0;

    nn::GruCell gru_;
    nn::LstmCell lstm_;
    nn::OutputHead head_;
    struct Conv {
        nn::Value w, b;
    };
    std::vector<Conv> convs_;      // pointwise/full kernels
    std::vector<Conv> depthwise_;  // depthwise kernels of the separable stack
};

BaseModel build_architecture(const ForecastSpec& spec, std::uint64_t seed);

struct ForecastTrainConfig {
    int epochs = 6;
    int batch_size = 16;
    double lr = 3e-3;
    std::uint64_t seed = 1;
    // inverse-volatility loss weights: use when smooth and erratic regimes
    // share one training pool and the smooth ones need fine precision
    bool volatility_weighting = true;
};

struct ForecastTrainResult {
    double train_rmse = 0.0;
    std::vector<double> epoch_loss;
};

// Supervised q-step-ahead regression. Normalization statistics are frozen
// from the given training windows before the first update.
ForecastTrainResult train_forecaster(BaseModel& model,
                                     const std::vector<std::vector<double>>& windows,
                                     const std::vector<double>& targets,
                                     const ForecastTrainConfig& cfg);

// Mean wall-clock seconds per forecast over `trials` timed calls after a
// short warm-up; stores the mean on the model.
BenchmarkResult benchmark_inference(BaseModel& model, int trials);

double persistence_rmse(const std::vector<std::vector<double>>& windows,
                        const std::vector<double>& targets);
double model_rmse(const BaseModel& model, const std::vector<std::vector<double>>& windows,
                  const std::vector<double>& targets);

}  // namespace fdm::forecasters
