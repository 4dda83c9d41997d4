#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace fdm::signal {

// Uniformly sampled measurement sequence of a single sensor channel.
struct TimeSeries {
    std::vector<double> samples;
    double fs = 1.0;  // sampling frequency, Hz
    double t0 = 0.0;  // time of the first sample, s

    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / fs; }
    std::size_t size() const { return samples.size(); }
    void validate() const;  // nonempty, fs > 0, all samples finite
};

// Windowing parameters: frame length M and overlap L, in samples.
struct FrameConfig {
    int frame_len = 60;
    int overlap = 54;
    double lambda = 0.0;  // hardware scaling factor; 0 when set directly

    int hop() const { return frame_len - overlap; }
    void validate() const;  // 0 <= overlap < frame_len

    // M = round(lambda * fs)
    static FrameConfig from_lambda(double lambda, double fs, int overlap);
};

struct Frame {
    int index = 1;           // 1-based frame index
    std::size_t start = 0;   // absolute offset of the first sample
    std::vector<double> samples;
};

// Additive corruption of a sensor channel over a time window.
struct AttackSignal {
    enum class Kind { none, chirp, bias, custom };
    Kind kind = Kind::none;
    double amplitude = 0.0;
    double f0 = 0.0;       // chirp start frequency, Hz
    double f1 = 0.0;       // chirp end frequency, Hz
    double t_start = 0.0;  // window start, s
    double t_end = 0.0;    // window end, s
    std::function<double(double)> custom;  // used when kind == custom

    // Injected value a(t); zero outside [t_start, t_end].
    double value_at(double t) const;
    void validate() const;

    static AttackSignal none_attack() { return AttackSignal{}; }
    static AttackSignal chirp(double amplitude, double f0, double f1, double t_start, double t_end);
    static AttackSignal bias(double amplitude, double t_start, double t_end);
};

// Count of frames given by the windowing formula floor((N_y - L)/(M - L)) + 1.
// The formula can admit a final start offset that overruns the series; see
// frame_count for the realized count.
long frame_count_formula(std::size_t n_samples, const FrameConfig& cfg);

// Realized frame count: starts {0, M-L, 2(M-L), ...} with start + M <= N_y.
// At most one less than the formula value.
long frame_count(std::size_t n_samples, const FrameConfig& cfg);

std::vector<Frame> split_frames(const TimeSeries& ts, const FrameConfig& cfg);

// y~(t) = y(t) + a(t)
TimeSeries apply_attack(const TimeSeries& ts, const AttackSignal& atk);

// Synthetic three-class dataset: sinusoid sums, square-wave sums, white noise.
struct GeneratorConfig {
    std::size_t total_samples = 15000;
    double fs = 100.0;
    int partitions = 3;
    int components = 3;     // waves summed per partition draw
    double freq_min = 0.5;  // Hz
    double freq_max = 2.0;
    double amp_min = 0.5;   // m
    double amp_max = 10.0;
    std::uint64_t seed = 1;
};

struct LabeledSeries {
    TimeSeries series;
    std::vector<int> labels;  // complexity class per sample, 1-based
};

LabeledSeries generate_complexity_dataset(const GeneratorConfig& cfg);

// CSV persistence: header `t,value[,label]`, one row per sample, round-trip
// exact via shortest-representation decimals.
void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts,
                      const std::vector<int>* labels,
                      const std::vector<std::string>& comments = {});
LabeledSeries read_series_csv(const std::filesystem::path& path);

}  // namespace fdm::signal
