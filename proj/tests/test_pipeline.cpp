#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "fdm/config.hpp"
#include "fdm/io/svg.hpp"
#include "fdm/pipeline.hpp"

using namespace fdm;

namespace {

signal::TimeSeries tone_series(std::size_t n, double freq, double fs) {
    signal::TimeSeries ts;
    ts.fs = fs;
    ts.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts.samples[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
    }
    return ts;
}

}  // namespace

TEST_CASE("batch stack building matches the expected counts and shapes") {
    pipeline::StageOneParams p;
    p.framing = signal::FrameConfig{60, 54};
    p.scales = 16;
    p.zeta = 32;
    p.c_prime = 4;
    p.fs = 100.0;
    auto ts = tone_series(600, 1.5, 100.0);
    auto stacks = pipeline::build_stacks(ts, p);
    const long frames = signal::frame_count(600, p.framing);
    REQUIRE(static_cast<long>(stacks.size()) == frames - p.c_prime + 1);
    CHECK(stacks[0].side == 32);
    CHECK(stacks[0].channels == 4);
    CHECK(stacks[0].first_frame_index == 1);
}

TEST_CASE("parallel stack building is bitwise identical to serial") {
    pipeline::StageOneParams p;
    p.framing = signal::FrameConfig{60, 54};
    p.scales = 12;
    p.zeta = 24;
    p.c_prime = 3;
    p.fs = 100.0;
    auto ts = tone_series(900, 0.9, 100.0);
    auto serial = pipeline::build_stacks(ts, p, 1);
    auto parallel = pipeline::build_stacks(ts, p, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        REQUIRE(serial[i].pixels == parallel[i].pixels);
    }
}

TEST_CASE("the streaming builder reproduces the batch stacks") {
    pipeline::StageOneParams p;
    p.framing = signal::FrameConfig{40, 34};
    p.scales = 10;
    p.zeta = 20;
    p.c_prime = 3;
    p.fs = 100.0;
    auto ts = tone_series(400, 1.2, 100.0);
    auto batch = pipeline::build_stacks(ts, p);

    pipeline::StreamingStackBuilder builder(p);
    std::vector<imaging::ScalogramStack> streamed;
    for (double v : ts.samples) {
        if (auto s = builder.push(v)) streamed.push_back(std::move(*s));
    }
    REQUIRE(streamed.size() == batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        REQUIRE(streamed[i].pixels == batch[i].pixels);
    }
}

TEST_CASE("a steady tone sits at the low end of the entropy scale") {
    pipeline::StageOneParams p;
    p.framing = signal::FrameConfig{60, 54};
    p.scales = 48;
    p.zeta = 64;
    p.c_prime = 4;
    p.fs = 100.0;
    auto ts = tone_series(600, 1.8, 100.0);
    auto stacks = pipeline::build_stacks(ts, p);
    pipeline::EntropyParams ep;  // desk defaults
    auto first = pipeline::stack_entropy(stacks[10], ep);
    CHECK(first.en <= 0.45);  // class means sit near 0.33 / 0.63 / 0.75
}

TEST_CASE("presets expose the study's values and hashes are stable") {
    auto paper = config::preset("paper");
    CHECK(paper.frame_len == 60);
    CHECK(paper.overlap == 54);
    CHECK(paper.scales == 92);
    CHECK(paper.zeta == 227);
    CHECK(paper.c_prime == 8);
    CHECK(paper.folds == 10);
    CHECK(paper.epsilon == 0.4);
    CHECK(paper.tau_c == 0.7);
    CHECK(paper.lookback == 60);
    CHECK(paper.horizon == 1);
    CHECK(paper.levels() == 3);

    auto desk = config::preset("desk");
    CHECK(desk.zeta == 64);
    CHECK(desk.c_prime == 4);
    CHECK(desk.scales == 48);

    CHECK(paper.hash() == config::preset("paper").hash());
    CHECK(paper.hash() != desk.hash());
    CHECK_THROWS_AS(config::preset("huge"), std::invalid_argument);
}

TEST_CASE("config files round-trip and reject unknown keys") {
    auto path = std::filesystem::temp_directory_path() / "fdm_test_config.cfg";
    auto cfg = config::preset("desk");
    cfg.seed = 42;
    cfg.epsilon = 0.25;
    config::save_config(path, cfg);
    auto loaded = config::load_config(path);
    CHECK(loaded.hash() == cfg.hash());
    CHECK(loaded.seed == 42);
    CHECK(loaded.epsilon == 0.25);

    config::apply_override(loaded, "zeta", "128");
    CHECK(loaded.zeta == 128);
    CHECK_THROWS_AS(config::apply_override(loaded, "bogus_key", "1"), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST_CASE("kappa and lambda resolve the channel count and frame length") {
    auto cfg = config::preset("paper");
    CHECK(imaging::channels_from_kappa(cfg.kappa, cfg.fs) == 8);
    auto fc = signal::FrameConfig::from_lambda(cfg.lambda, cfg.fs, cfg.overlap);
    CHECK(fc.frame_len == 60);
}

TEST_CASE("svg output is produced with one polyline per series") {
    auto path = std::filesystem::temp_directory_path() / "fdm_test_plot.svg";
    io::SvgSeries a{"reference", "#333333", {0, 1, 2}, {0, 1, 0}};
    io::SvgSeries b{"mitigated", "#cc3322", {0, 1, 2}, {0.1, 0.9, 0.1}};
    io::write_svg_lines(path, "trajectories", "x", "y", {a, b});
    std::ifstream in(path);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(std::count(body.begin(), body.end(), '\n') > 10);
    CHECK(body.find("polyline") != std::string::npos);
    CHECK(body.find("mitigated") != std::string::npos);
    std::filesystem::remove(path);
}
