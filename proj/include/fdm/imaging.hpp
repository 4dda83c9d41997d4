#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdm/wavelet.hpp"

namespace fdm::imaging {

// Images are stored row-major as [row][col][channel] with intensities in
// [0, 255]. Rows carry the scale axis of the source scalogram, columns time.

struct RgbFrame {
    int frame_index = 0;
    int rows = 0, cols = 0;
    std::vector<double> pixels;  // rows*cols*3

    double at(int r, int c, int ch) const {
        return pixels[(static_cast<std::size_t>(r) * cols + c) * 3 + ch];
    }
};

struct GrayFrame {
    int frame_index = 0;
    int rows = 0, cols = 0;
    std::vector<double> pixels;  // rows*cols

    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
};

struct MultiChannelImage {
    int first_frame_index = 0;
    int rows = 0, cols = 0, channels = 0;
    std::vector<double> pixels;  // rows*cols*channels, channels oldest -> newest

    double at(int r, int c, int ch) const {
        return pixels[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
};

// Resized square multi-channel scalogram image frame, the classifier's input.
struct ScalogramStack {
    int first_frame_index = 0;
    int side = 0;      // zeta
    int channels = 0;  // c'
    std::vector<double> pixels;  // side*side*channels

    double at(int r, int c, int ch) const {
        return pixels[(static_cast<std::size_t>(r) * side + c) * channels + ch];
    }
    double& at(int r, int c, int ch) {
        return pixels[(static_cast<std::size_t>(r) * side + c) * channels + ch];
    }
};

// c' = round(kappa * fs)
int channels_from_kappa(double kappa, double fs);

// Min-max normalize and map through the built-in monotone-luminance colormap
// (black -> red -> yellow -> white). A constant scalogram maps to the low end.
RgbFrame colorize(const wavelet::Scalogram& sc);

// Luminosity method: 0.299 R + 0.587 G + 0.114 B.
GrayFrame to_grayscale(const RgbFrame& img);

// Sliding window of cPrime consecutive grayscale frames stacked channel-wise;
// produces inputCount - cPrime + 1 images, stride one frame.
std::vector<MultiChannelImage> stack_channels(const std::vector<GrayFrame>& frames, int c_prime);

// Nearest-neighbor resize: output pixel (px,py) reads input
// (floor(px*rows/zeta), floor(py*cols/zeta)), per channel.
ScalogramStack resize(const MultiChannelImage& img, int zeta);

// Flat binary tensor file: little-endian header (zeta:u32, zeta:u32, cPrime:u32)
// followed by row-major float32 intensities of every stack in order.
void write_stack_file(const std::filesystem::path& path, std::span<const ScalogramStack> stacks);
std::vector<ScalogramStack> read_stack_file(const std::filesystem::path& path);

// Index CSV: stackIndex, firstFrame, lastFrame, label.
struct StackIndexRow {
    int stack_index = 0;
    int first_frame = 0;
    int last_frame = 0;
    int label = 0;  // 0 = unlabeled/mixed
};
void write_stack_index(const std::filesystem::path& path, std::span<const StackIndexRow> rows,
                       const std::vector<std::string>& comments = {});
std::vector<StackIndexRow> read_stack_index(const std::filesystem::path& path);

}  // namespace fdm::imaging
