#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fdm/forecasters.hpp"

using namespace fdm;
using forecasters::Architecture;

namespace {

std::pair<std::vector<std::vector<double>>, std::vector<double>> sine_windows(int k, int count,
                                                                              double freq,
                                                                              double fs,
                                                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;
    for (int i = 0; i < count; ++i) {
        const double p = phase(rng);
        std::vector<double> w(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            w[static_cast<std::size_t>(j)] = std::sin(2.0 * std::numbers::pi * freq * j / fs + p);
        }
        targets.push_back(std::sin(2.0 * std::numbers::pi * freq * k / fs + p));
        windows.push_back(std::move(w));
    }
    return {windows, targets};
}

forecasters::ForecastSpec spec_for(Architecture a, int k = 20) {
    forecasters::ForecastSpec s;
    s.arch = a;
    s.factors = forecasters::canonical_factors(a);
    s.lookback = k;
    s.hidden = 8;
    s.conv_width = 4;
    return s;
}

}  // namespace

TEST_CASE("design factors match the architecture ladder") {
    auto f = forecasters::canonical_factors(Architecture::gru);
    CHECK(f == forecasters::DesignFactors{false, false, false, false});
    f = forecasters::canonical_factors(Architecture::lstm);
    CHECK(f == forecasters::DesignFactors{true, false, false, false});
    f = forecasters::canonical_factors(Architecture::conv_lstm);
    CHECK(f == forecasters::DesignFactors{true, false, true, true});
    f = forecasters::canonical_factors(Architecture::deep_residual);
    CHECK(f == forecasters::DesignFactors{true, true, true, true});
    f = forecasters::canonical_factors(Architecture::deep_separable);
    CHECK(f == forecasters::DesignFactors{true, true, true, true});
}

TEST_CASE("inconsistent design factors are rejected") {
    auto s = spec_for(Architecture::gru);
    s.factors.residual = true;  // residual without conv layers
    CHECK_THROWS_AS(forecasters::build_architecture(s, 1), std::invalid_argument);

    auto s2 = spec_for(Architecture::lstm);
    s2.factors = forecasters::canonical_factors(Architecture::gru);
    CHECK_THROWS_AS(forecasters::build_architecture(s2, 1), std::invalid_argument);
}

TEST_CASE("zeroed parameters predict zero under identity normalization") {
    for (auto arch : {Architecture::gru, Architecture::lstm, Architecture::conv_lstm,
                      Architecture::deep_residual, Architecture::deep_separable}) {
        auto model = forecasters::build_architecture(spec_for(arch), 3);
        for (auto& p : model.params()) {
            for (auto& v : p->val.data) v = 0.0;
        }
        std::vector<double> window(20, 1.7);
        CHECK(model.forecast(window) == 0.0);
    }
}

TEST_CASE("forecast validates the window") {
    auto model = forecasters::build_architecture(spec_for(Architecture::gru), 3);
    std::vector<double> bad(7, 0.0);
    CHECK_THROWS_AS(model.forecast(bad), std::invalid_argument);
    std::vector<double> nan_window(20, 0.0);
    nan_window[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(model.forecast(nan_window), std::invalid_argument);
}

TEST_CASE("forecast is deterministic on a frozen model") {
    auto model = forecasters::build_architecture(spec_for(Architecture::conv_lstm), 5);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> window(20);
    for (auto& v : window) v = u(rng);
    CHECK(model.forecast(window) == model.forecast(window));
}

TEST_CASE("zeroing the conv stack reduces conv-lstm to an LSTM on raw windows") {
    auto model = forecasters::build_architecture(spec_for(Architecture::conv_lstm), 11);
    // zero every conv parameter: feature rows become relu(0) = 0, so the LSTM
    // effectively sees only the raw residual path
    auto named = model.named_params();
    for (auto& [name, v] : named) {
        if (name.rfind("conv", 0) == 0) {
            for (auto& x : v->val.data) x = 0.0;
        }
    }
    // build a plain LSTM whose input weights equal the raw-input column of the
    // conv-lstm's LSTM (features occupy columns 0..F-1, raw is column F)
    auto lstm = forecasters::build_architecture(spec_for(Architecture::lstm), 77);
    auto src = model.named_params();
    auto dst = lstm.named_params();
    const int f = model.spec().conv_width;
    for (std::size_t i = 0; i < dst.size(); ++i) {
        auto& [dname, dval] = dst[i];
        // match by suffix: lstm.* and head.*
        for (auto& [sname, sval] : src) {
            if (sname != dname) continue;
            if (dval->val.shape == sval->val.shape) {
                dval->val = sval->val;
            } else {
                // input weight matrices: take the raw-input column
                REQUIRE(dval->val.dim(1) == 1);
                REQUIRE(sval->val.dim(1) == f + 1);
                for (int r = 0; r < dval->val.dim(0); ++r) {
                    dval->val.at2(r, 0) = sval->val.at2(r, f);
                }
            }
        }
    }
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> window(20);
    for (auto& v : window) v = u(rng);
    CHECK(model.forecast(window) == doctest::Approx(lstm.forecast(window)).epsilon(1e-12));
}

TEST_CASE("each architecture beats persistence on a smooth tone") {
    auto [windows, targets] = sine_windows(20, 120, 1.0, 20.0, 5);
    const double base = forecasters::persistence_rmse(windows, targets);
    for (auto arch : {Architecture::gru, Architecture::lstm, Architecture::conv_lstm,
                      Architecture::deep_residual, Architecture::deep_separable}) {
        auto model = forecasters::build_architecture(spec_for(arch), 21);
        forecasters::ForecastTrainConfig tc;
        tc.epochs = 30;
        tc.batch_size = 16;
        tc.lr = 5e-3;
        tc.seed = 3;
        forecasters::train_forecaster(model, windows, targets, tc);
        const double r = forecasters::model_rmse(model, windows, targets);
        CAPTURE(forecasters::architecture_name(arch));
        CHECK(r < base);
    }
}

TEST_CASE("a trained model tracks constant series within its training error") {
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> level(-2.0, 2.0);
    for (int i = 0; i < 80; ++i) {
        const double c = level(rng);
        windows.emplace_back(20, c);
        targets.push_back(c);
    }
    auto model = forecasters::build_architecture(spec_for(Architecture::gru), 9);
    forecasters::ForecastTrainConfig tc;
    tc.epochs = 25;
    tc.lr = 5e-3;
    auto result = forecasters::train_forecaster(model, windows, targets, tc);
    std::vector<double> probe(20, 1.25);
    CHECK(std::abs(model.forecast(probe) - 1.25) <= std::max(result.train_rmse * 3.0, 0.05));
}

TEST_CASE("benchmark returns positive times with variance bookkeeping") {
    auto model = forecasters::build_architecture(spec_for(Architecture::gru), 3);
    auto one = forecasters::benchmark_inference(model, 1);
    CHECK(one.trials == 1);
    CHECK(one.mean_seconds > 0.0);
    auto many = forecasters::benchmark_inference(model, 8);
    CHECK(many.mean_seconds > 0.0);
    CHECK(many.stddev_seconds >= 0.0);
    CHECK(model.inference_time() == many.mean_seconds);
}

TEST_CASE("forecaster checkpoints restore predictions") {
    auto [windows, targets] = sine_windows(20, 40, 0.8, 20.0, 8);
    auto model = forecasters::build_architecture(spec_for(Architecture::deep_separable), 31);
    forecasters::ForecastTrainConfig tc;
    tc.epochs = 3;
    forecasters::train_forecaster(model, windows, targets, tc);
    auto path = std::filesystem::temp_directory_path() / "fdm_test_forecaster.ckpt";
    model.save(path);

    auto restored = forecasters::build_architecture(spec_for(Architecture::deep_separable), 99);
    restored.load(path);
    CHECK(restored.forecast(windows[0]) ==
          doctest::Approx(model.forecast(windows[0])).epsilon(1e-5));
    // architecture mismatch is detected
    auto wrong = forecasters::build_architecture(spec_for(Architecture::gru), 1);
    CHECK_THROWS_AS(wrong.load(path), std::runtime_error);
    std::filesystem::remove(path);
}
