#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fdm/signal.hpp"

using namespace fdm;

namespace {

signal::TimeSeries make_series(std::size_t n, double fs = 100.0) {
    signal::TimeSeries ts;
    ts.fs = fs;
    ts.samples.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) ts.samples[i] = std::sin(0.01 * static_cast<double>(i));
    return ts;
}

// independent oracle: enumerate valid frame starts on the hop grid
long brute_force_count(long n, int m, int l) {
    long count = 0;
    for (long start = 0;; start += m - l) {
        if (start + m > n) break;
        ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("frame_count matches the windowing formula on the paper's sizes") {
    signal::FrameConfig cfg{60, 54};
    CHECK(signal::frame_count_formula(15000, cfg) == 2492);
    CHECK(signal::frame_count(10500, cfg) == 1741);
    // exact fit: a series of exactly one frame realizes one frame, while the
    // raw formula admits a second, overrunning start
    signal::FrameConfig one{60, 10};
    CHECK(signal::frame_count(60, one) == 1);
    CHECK(signal::frame_count_formula(60, one) == 2);
}

TEST_CASE("frame_count equals brute-force enumeration of valid starts") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 4000; ++it) {
        const int m = 2 + static_cast<int>(rng() % 127);
        const int l = static_cast<int>(rng() % static_cast<unsigned>(m));
        const long n = m + static_cast<long>(rng() % 2000);
        signal::FrameConfig cfg{m, l};
        CAPTURE(n);
        CAPTURE(m);
        CAPTURE(l);
        REQUIRE(signal::frame_count(static_cast<std::size_t>(n), cfg) == brute_force_count(n, m, l));
    }
}

TEST_CASE("frame_count rejects series shorter than one frame") {
    signal::FrameConfig cfg{60, 54};
    CHECK_THROWS_WITH_AS(signal::frame_count(59, cfg),
                         "insufficient samples: series shorter than one frame",
                         std::invalid_argument);
}

TEST_CASE("split_frames drops overrunning trailing starts") {
    auto ts = make_series(100);
    signal::FrameConfig cfg{10, 5};
    auto frames = signal::split_frames(ts, cfg);
    // formula admits 20 starts but the last (95) overruns
    CHECK(signal::frame_count_formula(100, cfg) == 20);
    REQUIRE(frames.size() == 19);
    CHECK(frames[1].start == 5);
    CHECK(frames[1].index == 2);
    CHECK(frames.back().start == 90);
}

TEST_CASE("split_frames exact fit and near fit") {
    signal::FrameConfig cfg{60, 54};
    auto exact = signal::split_frames(make_series(60), cfg);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].start == 0);
    CHECK(exact[0].samples.size() == 60);

    auto two = signal::split_frames(make_series(66), cfg);
    REQUIRE(two.size() == 2);
    CHECK(two[1].start == 6);
}

TEST_CASE("apply_attack with kind none is the identity") {
    auto ts = make_series(50);
    auto out = signal::apply_attack(ts, signal::AttackSignal::none_attack());
    CHECK(out.samples == ts.samples);
}

TEST_CASE("bias attack shifts exactly inside the window") {
    auto ts = make_series(200, 100.0);
    auto atk = signal::AttackSignal::bias(2.5, 0.5, 1.0);
    auto out = signal::apply_attack(ts, atk);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts.time_at(i);
        if (t >= 0.5 && t <= 1.0) {
            CHECK(out.samples[i] == doctest::Approx(ts.samples[i] + 2.5).epsilon(1e-15));
        } else {
            CHECK(out.samples[i] == ts.samples[i]);
        }
    }
}

TEST_CASE("chirp attack sweeps the configured band and stays inside the window") {
    signal::TimeSeries ts;
    ts.fs = 100.0;
    ts.samples.assign(1500, 0.0);
    auto atk = signal::AttackSignal::chirp(4.0, 0.2, 2.0, 3.0, 10.0);
    auto out = signal::apply_attack(ts, atk);
    double peak = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = ts.time_at(i);
        if (t < 3.0 || t > 10.0) CHECK(out.samples[i] == 0.0);
        peak = std::max(peak, std::abs(out.samples[i]));
    }
    CHECK(peak <= 4.0);
    CHECK(peak > 3.9);  // a 7 s sweep hits the crest many times
    // phase starts at zero at the window start
    CHECK(atk.value_at(3.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("attacks are additive") {
    auto ts = make_series(300);
    auto a = signal::AttackSignal::chirp(1.5, 0.3, 1.0, 0.2, 2.0);
    auto b = signal::AttackSignal::bias(-0.7, 1.0, 2.5);
    auto seq = signal::apply_attack(signal::apply_attack(ts, a), b);

    signal::AttackSignal combined;
    combined.kind = signal::AttackSignal::Kind::custom;
    combined.t_start = 0.0;
    combined.t_end = 3.0;
    combined.custom = [&](double t) { return a.value_at(t) + b.value_at(t); };
    auto once = signal::apply_attack(ts, combined);
    REQUIRE(seq.samples.size() == once.samples.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq.samples[i] == doctest::Approx(once.samples[i]).epsilon(1e-15));
    }
}

TEST_CASE("generator partitions the dataset evenly with aligned labels") {
    signal::GeneratorConfig cfg;
    cfg.total_samples = 15000;
    cfg.seed = 11;
    auto data = signal::generate_complexity_dataset(cfg);
    REQUIRE(data.series.samples.size() == 15000);
    REQUIRE(data.labels.size() == 15000);
    for (std::size_t i = 0; i < 5000; ++i) CHECK(data.labels[i] == 1);
    for (std::size_t i = 5000; i < 10000; ++i) CHECK(data.labels[i] == 2);
    for (std::size_t i = 10000; i < 15000; ++i) CHECK(data.labels[i] == 3);
}

TEST_CASE("generator is deterministic under a fixed seed") {
    signal::GeneratorConfig cfg;
    cfg.total_samples = 900;
    cfg.seed = 42;
    auto a = signal::generate_complexity_dataset(cfg);
    auto b = signal::generate_complexity_dataset(cfg);
    CHECK(a.series.samples == b.series.samples);
    CHECK(a.labels == b.labels);
}

TEST_CASE("generator honors a collapsed amplitude range") {
    signal::GeneratorConfig cfg;
    cfg.total_samples = 6000;
    cfg.partitions = 3;
    cfg.components = 1;
    cfg.amp_min = cfg.amp_max = 1.0;
    cfg.seed = 3;
    auto data = signal::generate_complexity_dataset(cfg);
    double peak = 0.0;
    for (std::size_t i = 0; i < 2000; ++i) peak = std::max(peak, std::abs(data.series.samples[i]));
    CHECK(peak <= 1.0 + 1e-12);
    CHECK(peak > 0.999);
}

TEST_CASE("generator rejects invalid ranges") {
    signal::GeneratorConfig cfg;
    cfg.freq_min = 2.0;
    cfg.freq_max = 0.5;
    CHECK_THROWS_AS(signal::generate_complexity_dataset(cfg), std::invalid_argument);
}

TEST_CASE("series CSV round-trips samples exactly") {
    auto path = std::filesystem::temp_directory_path() / "fdm_test_series.csv";
    signal::GeneratorConfig cfg;
    cfg.total_samples = 300;
    cfg.seed = 5;
    auto data = signal::generate_complexity_dataset(cfg);
    signal::write_series_csv(path, data.series, &data.labels, {" config=deadbeef seed=5"});
    auto back = signal::read_series_csv(path);
    CHECK(back.series.samples == data.series.samples);
    CHECK(back.labels == data.labels);
    CHECK(back.series.fs == data.series.fs);
    std::filesystem::remove(path);
}
