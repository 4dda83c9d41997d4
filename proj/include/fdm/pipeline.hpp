#pragma once

#include <optional>
#include <vector>

#include "fdm/entropy.hpp"
#include "fdm/imaging.hpp"
#include "fdm/signal.hpp"
#include "fdm/wavelet.hpp"

namespace fdm::pipeline {

// Everything needed to turn raw samples into classifier-ready stacks.
struct StageOneParams {
    signal::FrameConfig framing{60, 54};
    wavelet::MorseParams morse = wavelet::MorseParams::standard();
    int scales = 48;
    int zeta = 64;
    int c_prime = 4;
    double fs = 100.0;

    int stack_span() const {  // samples covered by one stack
        return framing.frame_len + (c_prime - 1) * framing.hop();
    }
};

imaging::GrayFrame frame_to_gray(const signal::Frame& frame, const wavelet::ScaleGrid& grid,
                                 const wavelet::MorseParams& morse);

// Frames -> grayscale -> stacked -> resized, in frame order. jobs > 1 runs the
// per-frame transforms on a thread pool; results are placed by index, so the
// output is identical for any job count.
std::vector<imaging::ScalogramStack> build_stacks(const signal::TimeSeries& series,
                                                  const StageOneParams& params, int jobs = 1);

struct EntropyParams {
    int dim = 5;
    int delay = 1;
    int h_min = 2;
    int h_max = 2;
    int folds = 10;
};

struct StackEntropy {
    double en = 0.0;
    int h_star = 0;
};

StackEntropy stack_entropy(const imaging::ScalogramStack& stack, const EntropyParams& params);

// Incremental Stage-I: feed samples one at a time; a resized stack pops out
// whenever a new frame completes and c' frames are buffered.
class StreamingStackBuilder {
public:
    StreamingStackBuilder(const StageOneParams& params);

    std::optional<imaging::ScalogramStack> push(double sample);
    const StageOneParams& params() const { return params_; }

private:
    StageOneParams params_;
    wavelet::ScaleGrid grid_;
    std::vector<double> buffer_;
    std::vector<imaging::GrayFrame> gray_window_;
    long samples_seen_ = 0;
    long next_frame_start_ = 0;
    int next_frame_index_ = 1;
};

}  // namespace fdm::pipeline
