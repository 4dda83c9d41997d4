#include "fdm/forecasters.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fdm/metrics.hpp"
#include "fdm/nn/checkpoint.hpp"

namespace fdm::forecasters {

using nn::Tensor;
using nn::Value;

std::string architecture_name(Architecture a) {
    switch (a) {
        case Architecture::gru: return "gru";
        case Architecture::lstm: return "lstm";
        case Architecture::conv_lstm: return "conv_lstm";
        case Architecture::deep_residual: return "deep_residual";
        case Architecture::deep_separable: return "deep_separable";
    }
    throw std::invalid_argument("architecture_name: unknown architecture");
}

Architecture architecture_from_name(const std::string& name) {
    if (name == "gru") return Architecture::gru;
    if (name == "lstm") return Architecture::lstm;
    if (name == "conv_lstm") return Architecture::conv_lstm;
    if (name == "deep_residual") return Architecture::deep_residual;
    if (name == "deep_separable") return Architecture::deep_separable;
    throw std::invalid_argument("unknown architecture '" + name + "'");
}

DesignFactors canonical_factors(Architecture a) {
    switch (a) {
        case Architecture::gru: return {false, false, false, false};
        case Architecture::lstm: return {true, false, false, false};
        case Architecture::conv_lstm: return {true, false, true, true};
        case Architecture::deep_residual: return {true, true, true, true};
        case Architecture::deep_separable: return {true, true, true, true};
    }
    throw std::invalid_argument("canonical_factors: unknown architecture");
}

void ForecastSpec::validate() const {
    if (lookback < 1 || horizon < 1) {
        throw std::invalid_argument("ForecastSpec: lookback and horizon must be >= 1");
    }
    if (hidden < 1 || conv_width < 1) {
        throw std::invalid_argument("ForecastSpec: widths must be >= 1");
    }
    if (factors.residual && !factors.conv_layers) {
        throw std::invalid_argument("ForecastSpec: residual path requires convolutional layers");
    }
    if (!(factors == canonical_factors(arch))) {
        throw std::invalid_argument("ForecastSpec: design factors do not match architecture " +
                                    architecture_name(arch));
    }
}

void BaseModel::set_normalization(double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("BaseModel: sigma must be positive");
    mu_ = mu;
    sigma_ = sigma;
}

BaseModel build_architecture(const ForecastSpec& spec, std::uint64_t seed) {
    spec.validate();
    BaseModel m;
    m.spec_ = spec;
    std::mt19937_64 rng(seed);
    const int f = spec.conv_width;
    switch (spec.arch) {
        case Architecture::gru:
            m.gru_ = nn::GruCell::create(1, spec.hidden, rng);
            break;
        case Architecture::lstm:
            m.lstm_ = nn::LstmCell::create(1, spec.hidden, rng);
            break;
        case Architecture::conv_lstm:
            // two conv layers, then the LSTM sees [features ; raw sample]
            m.convs_.push_back({nn::parameter(Tensor::uniform_init({5, 1, f}, 5, rng)),
                                nn::parameter(Tensor({f}))});
            m.convs_.push_back({nn::parameter(Tensor::uniform_init({3, f, f}, 3 * f, rng)),
                                nn::parameter(Tensor({f}))});
            m.lstm_ = nn::LstmCell::create(f + 1, spec.hidden, rng);
            break;
        case Architecture::deep_residual:
            // entry conv + four residual pairs
            m.convs_.push_back({nn::parameter(Tensor::uniform_init({3, 1, f}, 3, rng)),
                                nn::parameter(Tensor({f}))});
            for (int b = 0; b < 8; ++b) {
                m.convs_.push_back({nn::parameter(Tensor::uniform_init({3, f, f}, 3 * f, rng)),
                                    nn::parameter(Tensor({f}))});
            }
            m.lstm_ = nn::LstmCell::create(f, spec.hidden, rng);
            break;
        case Architecture::deep_separable:
            // pointwise entry + three separable blocks with skip connections
            m.convs_.push_back({nn::parameter(Tensor::uniform_init({1, 1, f}, 1, rng)),
                                nn::parameter(Tensor({f}))});
            for (int b = 0; b < 3; ++b) {
                m.depthwise_.push_back({nn::parameter(Tensor::uniform_init({3, f}, 3, rng)),
                                        nn::parameter(Tensor({f}))});
                m.convs_.push_back({nn::parameter(Tensor::uniform_init({1, f, f}, f, rng)),
                                    nn::parameter(Tensor({f}))});
            }
            m.lstm_ = nn::LstmCell::create(f, spec.hidden, rng);
            break;
    }
    m.head_ = nn::OutputHead::create(spec.hidden, 1, nn::OutputHead::Activation::identity, rng);
    return m;
}

Value BaseModel::forward_normalized(const Tensor& window) const {
    const int k = spec_.lookback;
    Value raw = nn::constant(window);  // [k, 1]

    auto run_lstm = [&](const Value& seq) {
        Value h = nn::constant(Tensor({spec_.hidden, 1}));
        Value c = nn::constant(Tensor({spec_.hidden, 1}));
        for (int t = 0; t < k; ++t) {
            auto [h2, c2] = lstm_.step(nn::select_row(seq, t), h, c);
            h = h2;
            c = c2;
        }
        return h;
    };

    Value h_final;
    switch (spec_.arch) {
        case Architecture::gru: {
            Value h = nn::constant(Tensor({spec_.hidden, 1}));
            for (int t = 0; t < k; ++t) h = gru_.step(nn::select_row(raw, t), h);
            h_final = h;
            break;
        }
        case Architecture::lstm:
            h_final = run_lstm(raw);
            break;
        case Architecture::conv_lstm: {
            Value feat = nn::relu(nn::conv1d(raw, convs_[0].w, convs_[0].b, 2));
            feat = nn::relu(nn::conv1d(feat, convs_[1].w, convs_[1].b, 1));
            Value h = nn::constant(Tensor({spec_.hidden, 1}));
            Value c = nn::constant(Tensor({spec_.hidden, 1}));
            for (int t = 0; t < k; ++t) {
                // residual path: the raw sample rides along with the features
                Value in_t = nn::concat_vec(nn::select_row(feat, t), nn::select_row(raw, t));
                auto [h2, c2] = lstm_.step(in_t, h, c);
                h = h2;
                c = c2;
            }
            h_final = h;
            break;
        }
        case Architecture::deep_residual: {
            Value feat = nn::relu(nn::conv1d(raw, convs_[0].w, convs_[0].b, 1));
            for (std::size_t b = 1; b + 1 < convs_.size(); b += 2) {
                Value inner = nn::relu(nn::conv1d(feat, convs_[b].w, convs_[b].b, 1));
                inner = nn::conv1d(inner, convs_[b + 1].w, convs_[b + 1].b, 1);
                feat = nn::relu(nn::add(feat, inner));
            }
            h_final = run_lstm(feat);
            break;
        }
        case Architecture::deep_separable: {
            Value feat = nn::relu(nn::conv1d(raw, convs_[0].w, convs_[0].b, 0));
            for (std::size_t b = 0; b < depthwise_.size(); ++b) {
                Value inner = nn::depthwise_conv1d(feat, depthwise_[b].w, depthwise_[b].b, 1);
                inner = nn::conv1d(inner, convs_[b + 1].w, convs_[b + 1].b, 0);
                feat = nn::relu(nn::add(feat, inner));
            }
            h_final = run_lstm(feat);
            break;
        }
    }
    return head_.apply(h_final);
}

double BaseModel::forecast(std::span<const double> window) const {
    if (static_cast<int>(window.size()) != spec_.lookback) {
        throw std::invalid_argument("forecast: window length " + std::to_string(window.size()) +
                                    " != lookback " + std::to_string(spec_.lookback));
    }
    for (double v : window) {
        if (!std::isfinite(v)) throw std::invalid_argument("forecast: non-finite sample");
    }
    Tensor w({spec_.lookback, 1});
    const double anchor = spec_.norm == Normalization::window_relative ? window.back() : mu_;
    for (int i = 0; i < spec_.lookback; ++i) {
        w.data[static_cast<std::size_t>(i)] = (window[static_cast<std::size_t>(i)] - anchor) / sigma_;
    }
    return anchor + sigma_ * forward_normalized(w)->val.data[0];
}

std::vector<std::pair<std::string, Value>> BaseModel::named_params() const {
    std::vector<std::pair<std::string, Value>> out;
    switch (spec_.arch) {
        case Architecture::gru:
            gru_.collect_params("gru", out);
            break;
        case Architecture::lstm:
        case Architecture::conv_lstm:
        case Architecture::deep_residual:
        case Architecture::deep_separable:
            lstm_.collect_params("lstm", out);
            break;
    }
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        out.emplace_back("conv" + std::to_string(i) + ".w", convs_[i].w);
        out.emplace_back("conv" + std::to_string(i) + ".b", convs_[i].b);
    }
    for (std::size_t i = 0; i < depthwise_.size(); ++i) {
        out.emplace_back("dw" + std::to_string(i) + ".w", depthwise_[i].w);
        out.emplace_back("dw" + std::to_string(i) + ".b", depthwise_[i].b);
    }
    head_.collect_params("head", out);
    return out;
}

std::vector<Value> BaseModel::params() const {
    std::vector<Value> out;
    for (auto& [n, v] : named_params()) out.push_back(v);
    return out;
}

void BaseModel::save(const std::filesystem::path& path) const {
    std::vector<std::pair<std::string, Tensor>> entries;
    Tensor meta({5, 1});
    meta.data = {static_cast<double>(spec_.lookback), static_cast<double>(spec_.horizon), mu_,
                 sigma_, spec_.norm == Normalization::window_relative ? 1.0 : 0.0};
    entries.emplace_back("meta." + architecture_name(spec_.arch), meta);
    Tensor timing({1});
    timing.data[0] = t_infer_;
    entries.emplace_back("meta.t_infer", timing);
    for (const auto& [n, v] : named_params()) entries.emplace_back(n, v->val);
    nn::save_checkpoint(path, entries);
}

void BaseModel::load(const std::filesystem::path& path) {
    auto entries = nn::load_checkpoint(path);
    if (entries.size() < 2 || entries[0].first.rfind("meta.", 0) != 0) {
        throw std::runtime_error("forecaster checkpoint: missing meta entry");
    }
    const std::string arch = entries[0].first.substr(5);
    if (arch != architecture_name(spec_.arch)) {
        throw std::runtime_error("forecaster checkpoint: architecture mismatch, file has " + arch);
    }
    mu_ = entries[0].second.data[2];
    sigma_ = entries[0].second.data[3];
    if (entries[0].second.data.size() > 4) {
        spec_.norm = entries[0].second.data[4] != 0.0 ? Normalization::window_relative
                                                      : Normalization::global_zscore;
    }
    t_infer_ = entries[1].second.data[0];
    auto named = named_params();
    if (entries.size() != named.size() + 2) {
        throw std::runtime_error("forecaster checkpoint: manifest size mismatch");
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        auto& [name, tensor] = entries[i + 2];
        if (name != named[i].first || tensor.shape != named[i].second->val.shape) {
            throw std::runtime_error("forecaster checkpoint: entry mismatch at " + name);
        }
        named[i].second->val = tensor;
    }
}

ForecastTrainResult train_forecaster(BaseModel& model,
                                     const std::vector<std::vector<double>>& windows,
                                     const std::vector<double>& targets,
                                     const ForecastTrainConfig& cfg) {
    if (windows.size() != targets.size() || windows.empty()) {
        throw std::invalid_argument("train_forecaster: dataset shape mismatch or empty");
    }
    const int k = model.spec().lookback;
    const bool relative = model.spec().norm == Normalization::window_relative;
    // freeze normalization statistics from the training windows: global
    // z-scores, or the spread of anchor-relative values in relative mode
    double sum = 0.0, sq = 0.0;
    long n = 0;
    for (const auto& w : windows) {
        if (static_cast<int>(w.size()) != k) {
            throw std::invalid_argument("train_forecaster: window length mismatch");
        }
        const double anchor = relative ? w.back() : 0.0;
        for (double v : w) {
            const double x = v - anchor;
            sum += x;
            sq += x * x;
            ++n;
        }
    }
    const double mu = relative ? 0.0 : sum / static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - (relative ? 0.0 : mu * mu);
    model.set_normalization(mu, std::sqrt(std::max(var, 1e-12)));

    std::vector<Tensor> inputs(windows.size());
    std::vector<Tensor> norm_targets(windows.size());
    // inverse-volatility weights: smooth windows demand fine precision while
    // high-variance windows would otherwise dominate the squared loss
    std::vector<double> weights(windows.size(), 1.0);
    double diff_ref = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        Tensor w({k, 1});
        const double anchor = relative ? windows[i].back() : model.norm_mean();
        for (int j = 0; j < k; ++j) {
            w.data[static_cast<std::size_t>(j)] =
                (windows[i][static_cast<std::size_t>(j)] - anchor) / model.norm_std();
        }
        double dvar = 0.0;
        for (int j = 1; j < k; ++j) {
            const double d = w.data[static_cast<std::size_t>(j)] -
                             w.data[static_cast<std::size_t>(j - 1)];
            dvar += d * d;
        }
        dvar /= static_cast<double>(k - 1);
        diff_ref += dvar;
        weights[i] = dvar;
        inputs[i] = std::move(w);
        Tensor t({1, 1});
        t.data[0] = (targets[i] - anchor) / model.norm_std();
        norm_targets[i] = std::move(t);
    }
    diff_ref /= static_cast<double>(windows.size());
    if (cfg.volatility_weighting) {
        double weight_sum = 0.0;
        for (auto& w : weights) {
            w = 1.0 / (w + 0.02 * diff_ref);
            weight_sum += w;
        }
        for (auto& w : weights) w *= static_cast<double>(windows.size()) / weight_sum;
    } else {
        std::fill(weights.begin(), weights.end(), 1.0);
    }

    nn::OptimizerConfig oc;
    oc.kind = nn::OptimizerConfig::Kind::adam;
    oc.lr = cfg.lr;
    nn::Optimizer opt(model.params(), oc);
    nn::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.opt = oc;
    tc.seed = cfg.seed;

    auto result = nn::train(opt, static_cast<long>(windows.size()), [&](long i) {
        return nn::scale(
            nn::mse_loss(model.forward_normalized(inputs[static_cast<std::size_t>(i)]),
                         norm_targets[static_cast<std::size_t>(i)]),
            weights[static_cast<std::size_t>(i)]);
    }, tc);

    ForecastTrainResult out;
    out.epoch_loss = result.epoch_loss;
    out.train_rmse = model_rmse(model, windows, targets);
    return out;
}

BenchmarkResult benchmark_inference(BaseModel& model, int trials) {
    if (trials < 1) throw std::invalid_argument("benchmark_inference: trials must be >= 1");
    std::vector<double> window(static_cast<std::size_t>(model.spec().lookback), 0.5);
    for (int i = 0; i < 3; ++i) (void)model.forecast(window);  // warm-up
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        const double t0 = metrics::now_seconds();
        (void)model.forecast(window);
        times.push_back(metrics::now_seconds() - t0);
    }
    BenchmarkResult r;
    r.trials = trials;
    for (double t : times) r.mean_seconds += t;
    r.mean_seconds /= static_cast<double>(trials);
    double var = 0.0;
    for (double t : times) var += (t - r.mean_seconds) * (t - r.mean_seconds);
    r.stddev_seconds = std::sqrt(var / static_cast<double>(trials));
    model.set_inference_time(r.mean_seconds);
    return r;
}

double persistence_rmse(const std::vector<std::vector<double>>& windows,
                        const std::vector<double>& targets) {
    if (windows.size() != targets.size() || windows.empty()) {
        throw std::invalid_argument("persistence_rmse: dataset shape mismatch or empty");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const double d = windows[i].back() - targets[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(windows.size()));
}

double model_rmse(const BaseModel& model, const std::vector<std::vector<double>>& windows,
                  const std::vector<double>& targets) {
    if (windows.size() != targets.size() || windows.empty()) {
        throw std::invalid_argument("model_rmse: dataset shape mismatch or empty");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const double d = model.forecast(windows[i]) - targets[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(windows.size()));
}

}  // namespace fdm::forecasters
