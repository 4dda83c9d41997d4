#include <filesystem>
#include <random>

#include "doctest.h"
#include "fdm/imaging.hpp"

using namespace fdm;

namespace {

wavelet::Scalogram make_scalogram(int rows, int cols, double fill) {
    wavelet::Scalogram sc;
    sc.rows = rows;
    sc.cols = cols;
    sc.values.assign(static_cast<std::size_t>(rows) * cols, fill);
    return sc;
}

imaging::GrayFrame gray(int rows, int cols, double fill, int index) {
    imaging::GrayFrame g;
    g.frame_index = index;
    g.rows = rows;
    g.cols = cols;
    g.pixels.assign(static_cast<std::size_t>(rows) * cols, fill);
    return g;
}

}  // namespace

TEST_CASE("constant scalogram maps to the colormap low end everywhere") {
    auto img = imaging::colorize(make_scalogram(4, 6, 3.5));
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 6; ++c) {
            CHECK(img.at(r, c, 0) == 0.0);
            CHECK(img.at(r, c, 1) == 0.0);
            CHECK(img.at(r, c, 2) == 0.0);
        }
    }
}

TEST_CASE("scalogram max maps to the colormap top and scaling is invariant") {
    auto sc = make_scalogram(3, 3, 1.0);
    sc.at(1, 2) = 9.0;
    auto img = imaging::colorize(sc);
    CHECK(img.at(1, 2, 0) == 255.0);
    CHECK(img.at(1, 2, 1) == 255.0);
    CHECK(img.at(1, 2, 2) == 255.0);

    wavelet::Scalogram doubled = sc;
    for (auto& v : doubled.values) v *= 2.0;
    auto img2 = imaging::colorize(doubled);
    CHECK(img2.pixels == img.pixels);
}

TEST_CASE("grayscale conversion fixes white, black, and grays") {
    imaging::RgbFrame rgb;
    rgb.rows = 1;
    rgb.cols = 3;
    rgb.pixels = {255, 255, 255, 0, 0, 0, 100, 100, 100};
    auto g = imaging::to_grayscale(rgb);
    CHECK(g.at(0, 0) == doctest::Approx(255.0));
    CHECK(g.at(0, 1) == 0.0);
    CHECK(g.at(0, 2) == doctest::Approx(100.0));
}

TEST_CASE("grayscale stays within [0,255] and tracks luminosity order") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    imaging::RgbFrame rgb;
    rgb.rows = 8;
    rgb.cols = 8;
    rgb.pixels.resize(8 * 8 * 3);
    for (auto& p : rgb.pixels) p = u(rng);
    auto g = imaging::to_grayscale(rgb);
    for (double v : g.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }
}

TEST_CASE("stacking produces inputCount - cPrime + 1 windows in order") {
    std::vector<imaging::GrayFrame> frames;
    for (int i = 0; i < 10; ++i) frames.push_back(gray(4, 4, static_cast<double>(i), i + 1));
    auto stacks = imaging::stack_channels(frames, 8);
    REQUIRE(stacks.size() == 3);
    CHECK(stacks[0].first_frame_index == 1);
    CHECK(stacks[2].first_frame_index == 3);
    // channels ordered oldest -> newest
    CHECK(stacks[0].at(0, 0, 0) == 0.0);
    CHECK(stacks[0].at(0, 0, 7) == 7.0);

    auto identity = imaging::stack_channels(frames, 1);
    CHECK(identity.size() == 10);
    CHECK(identity[4].at(2, 2, 0) == 4.0);

    CHECK_THROWS_AS(imaging::stack_channels(std::vector<imaging::GrayFrame>(3, gray(2, 2, 0, 1)), 8),
                    std::invalid_argument);
}

TEST_CASE("resize at matching size is the identity and preserves constants") {
    imaging::MultiChannelImage img;
    img.rows = 5;
    img.cols = 5;
    img.channels = 2;
    img.pixels.resize(5 * 5 * 2);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (auto& p : img.pixels) p = u(rng);

    auto same = imaging::resize(img, 5);
    CHECK(same.pixels == img.pixels);

    imaging::MultiChannelImage flat;
    flat.rows = 7;
    flat.cols = 9;
    flat.channels = 3;
    flat.pixels.assign(7 * 9 * 3, 42.0);
    auto shrunk = imaging::resize(flat, 4);
    for (double v : shrunk.pixels) CHECK(v == 42.0);
}

TEST_CASE("resize reproduces the paper-scale stack shape") {
    imaging::MultiChannelImage img;
    img.rows = 92;
    img.cols = 60;
    img.channels = 8;
    img.pixels.assign(static_cast<std::size_t>(92) * 60 * 8, 1.0);
    auto s = imaging::resize(img, 227);
    CHECK(s.side == 227);
    CHECK(s.channels == 8);
    CHECK(s.pixels.size() == static_cast<std::size_t>(227) * 227 * 8);
}

TEST_CASE("channels_from_kappa rounds kappa*fs") {
    CHECK(imaging::channels_from_kappa(0.08, 100.0) == 8);
    CHECK(imaging::channels_from_kappa(0.04, 100.0) == 4);
    CHECK_THROWS_AS(imaging::channels_from_kappa(0.0001, 100.0), std::invalid_argument);
}

TEST_CASE("stack tensor file round-trips shapes and float32 payload") {
    std::vector<imaging::ScalogramStack> stacks(3);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int i = 0; i < 3; ++i) {
        stacks[static_cast<std::size_t>(i)].side = 6;
        stacks[static_cast<std::size_t>(i)].channels = 2;
        stacks[static_cast<std::size_t>(i)].first_frame_index = i + 1;
        stacks[static_cast<std::size_t>(i)].pixels.resize(6 * 6 * 2);
        for (auto& p : stacks[static_cast<std::size_t>(i)].pixels) {
            p = static_cast<double>(static_cast<float>(u(rng)));
        }
    }
    auto path = std::filesystem::temp_directory_path() / "fdm_test_stacks.bin";
    imaging::write_stack_file(path, stacks);
    auto back = imaging::read_stack_file(path);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back[static_cast<std::size_t>(i)].side == 6);
        CHECK(back[static_cast<std::size_t>(i)].channels == 2);
        CHECK(back[static_cast<std::size_t>(i)].pixels == stacks[static_cast<std::size_t>(i)].pixels);
    }
    std::filesystem::remove(path);
}

TEST_CASE("pipeline determinism: identical scalograms give byte-identical stacks") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    wavelet::Scalogram sc = make_scalogram(12, 16, 0.0);
    for (auto& v : sc.values) v = u(rng);

    auto run = [&]() {
        std::vector<imaging::GrayFrame> grays;
        for (int i = 0; i < 5; ++i) {
            auto g = imaging::to_grayscale(imaging::colorize(sc));
            g.frame_index = i + 1;
            grays.push_back(std::move(g));
        }
        auto stacked = imaging::stack_channels(grays, 4);
        return imaging::resize(stacked[0], 8);
    };
    auto a = run();
    auto b = run();
    CHECK(a.pixels == b.pixels);
}
