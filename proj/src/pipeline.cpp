#include "fdm/pipeline.hpp"

#include <stdexcept>
#include <thread>

namespace fdm::pipeline {

imaging::GrayFrame frame_to_gray(const signal::Frame& frame, const wavelet::ScaleGrid& grid,
                                 const wavelet::MorseParams& morse) {
    auto sc = wavelet::scalogram(wavelet::cwt_frame(frame, grid, morse));
    auto gray = imaging::to_grayscale(imaging::colorize(sc));
    gray.frame_index = frame.index;
    return gray;
}

std::vector<imaging::ScalogramStack> build_stacks(const signal::TimeSeries& series,
                                                  const StageOneParams& params, int jobs) {
    const auto grid =
        wavelet::build_scale_grid(params.fs, params.scales, params.morse, params.framing.frame_len);
    const auto frames = signal::split_frames(series, params.framing);
    if (frames.size() < static_cast<std::size_t>(params.c_prime)) {
        throw std::invalid_argument("build_stacks: fewer frames than channels");
    }
    std::vector<imaging::GrayFrame> grays(frames.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            grays[i] = frame_to_gray(frames[i], grid, params.morse);
        }
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (frames.size() + static_cast<std::size_t>(jobs) - 1) /
                            static_cast<std::size_t>(jobs);
        for (int j = 0; j < jobs; ++j) {
            const std::size_t begin = static_cast<std::size_t>(j) * chunk;
            const std::size_t end = std::min(frames.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                for (std::size_t i = begin; i < end; ++i) {
                    grays[i] = frame_to_gray(frames[i], grid, params.morse);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    auto stacked = imaging::stack_channels(grays, params.c_prime);
    std::vector<imaging::ScalogramStack> out;
    out.reserve(stacked.size());
    for (const auto& m : stacked) out.push_back(imaging::resize(m, params.zeta));
    return out;
}

StackEntropy stack_entropy(const imaging::ScalogramStack& stack, const EntropyParams& params) {
    const auto fused = entropy::binarize_and_fuse(stack);
    const auto sel =
        entropy::select_h(fused, params.dim, params.delay, params.h_min, params.h_max, params.folds);
    StackEntropy out;
    out.h_star = sel.h_star;
    out.en = entropy::entropy_of_series(fused.values, params.dim, params.delay, sel.h_star);
    return out;
}

StreamingStackBuilder::StreamingStackBuilder(const StageOneParams& params)
    : params_(params),
      grid_(wavelet::build_scale_grid(params.fs, params.scales, params.morse,
                                      params.framing.frame_len)) {}

std::optional<imaging::ScalogramStack> StreamingStackBuilder::push(double sample) {
    buffer_.push_back(sample);
    ++samples_seen_;
    const int m = params_.framing.frame_len;
    if (samples_seen_ - next_frame_start_ < m) return std::nullopt;

    // a frame just completed
    signal::Frame frame;
    frame.index = next_frame_index_++;
    frame.start = static_cast<std::size_t>(next_frame_start_);
    const std::size_t local_start = buffer_.size() - static_cast<std::size_t>(m);
    frame.samples.assign(buffer_.begin() + static_cast<long>(local_start), buffer_.end());
    next_frame_start_ += params_.framing.hop();
    // future frames only ever read the trailing frame_len samples
    if (buffer_.size() > static_cast<std::size_t>(2 * m)) {
        const std::size_t excess = buffer_.size() - static_cast<std::size_t>(m);
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<long>(excess));
    }

    gray_window_.push_back(frame_to_gray(frame, grid_, params_.morse));
    if (gray_window_.size() > static_cast<std::size_t>(params_.c_prime)) {
        gray_window_.erase(gray_window_.begin());
    }
    if (gray_window_.size() < static_cast<std::size_t>(params_.c_prime)) return std::nullopt;
    auto stacked = imaging::stack_channels(gray_window_, params_.c_prime);
    return imaging::resize(stacked.back(), params_.zeta);
}

}  // namespace fdm::pipeline
