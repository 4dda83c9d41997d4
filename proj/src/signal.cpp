#include "fdm/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::signal {

void TimeSeries::validate() const {
    if (samples.empty()) throw std::invalid_argument("TimeSeries: samples empty");
    if (!(fs > 0.0)) throw std::invalid_argument("TimeSeries: fs must be positive");
    for (double v : samples) {
        if (!std::isfinite(v)) throw std::invalid_argument("TimeSeries: non-finite sample");
    }
}

void FrameConfig::validate() const {
    if (frame_len <= 0) throw std::invalid_argument("FrameConfig: frame length must be positive");
    if (overlap < 0 || overlap >= frame_len) {
        throw std::invalid_argument("FrameConfig: overlap must satisfy 0 <= L < M");
    }
}

FrameConfig FrameConfig::from_lambda(double lambda, double fs, int overlap) {
    if (!(lambda > 0.0) || !(fs > 0.0)) {
        throw std::invalid_argument("FrameConfig: lambda and fs must be positive");
    }
    FrameConfig cfg;
    cfg.frame_len = static_cast<int>(std::lround(lambda * fs));
    cfg.overlap = overlap;
    cfg.lambda = lambda;
    cfg.validate();
    return cfg;
}

double AttackSignal::value_at(double t) const {
    if (kind == Kind::none) return 0.0;
    if (t < t_start || t > t_end) return 0.0;
    switch (kind) {
        case Kind::bias:
            return amplitude;
        case Kind::chirp: {
            // Linear sweep f0 -> f1 over the attack window; phase is the
            // integral of the instantaneous frequency.
            const double span = t_end - t_start;
            const double u = t - t_start;
            double phase;
            if (span > 0.0) {
                phase = f0 * u + 0.5 * (f1 - f0) * u * u / span;
            } else {
                phase = f0 * u;
            }
            return amplitude * std::sin(2.0 * std::numbers::pi * phase);
        }
        case Kind::custom:
            return custom ? custom(t) : 0.0;
        default:
            return 0.0;
    }
}

void AttackSignal::validate() const {
    if (t_start > t_end) throw std::invalid_argument("AttackSignal: t_start > t_end");
    if (!std::isfinite(amplitude)) throw std::invalid_argument("AttackSignal: non-finite amplitude");
}

AttackSignal AttackSignal::chirp(double amplitude, double f0, double f1, double t_start,
                                 double t_end) {
    AttackSignal a;
    a.kind = Kind::chirp;
    a.amplitude = amplitude;
    a.f0 = f0;
    a.f1 = f1;
    a.t_start = t_start;
    a.t_end = t_end;
    a.validate();
    return a;
}

AttackSignal AttackSignal::bias(double amplitude, double t_start, double t_end) {
    AttackSignal a;
    a.kind = Kind::bias;
    a.amplitude = amplitude;
    a.t_start = t_start;
    a.t_end = t_end;
    a.validate();
    return a;
}

long frame_count_formula(std::size_t n_samples, const FrameConfig& cfg) {
    cfg.validate();
    if (n_samples < static_cast<std::size_t>(cfg.frame_len)) {
        throw std::invalid_argument("insufficient samples: series shorter than one frame");
    }
    const long n = static_cast<long>(n_samples);
    return (n - cfg.overlap) / cfg.hop() + 1;
}

long frame_count(std::size_t n_samples, const FrameConfig& cfg) {
    cfg.validate();
    if (n_samples < static_cast<std::size_t>(cfg.frame_len)) {
        throw std::invalid_argument("insufficient samples: series shorter than one frame");
    }
    // Largest start with start + M <= N_y, starts on the hop grid.
    const long n = static_cast<long>(n_samples);
    return (n - cfg.frame_len) / cfg.hop() + 1;
}

std::vector<Frame> split_frames(const TimeSeries& ts, const FrameConfig& cfg) {
    const long count = frame_count(ts.size(), cfg);
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        Frame f;
        f.index = static_cast<int>(i) + 1;
        f.start = static_cast<std::size_t>(i) * static_cast<std::size_t>(cfg.hop());
        f.samples.assign(ts.samples.begin() + static_cast<long>(f.start),
                         ts.samples.begin() + static_cast<long>(f.start) + cfg.frame_len);
        frames.push_back(std::move(f));
    }
    return frames;
}

TimeSeries apply_attack(const TimeSeries& ts, const AttackSignal& atk) {
    ts.validate();
    atk.validate();
    TimeSeries out = ts;
    if (atk.kind == AttackSignal::Kind::none) return out;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] += atk.value_at(ts.time_at(i));
    }
    return out;
}

namespace {

// One random draw of partition content. All randomness comes from `rng` in a
// fixed call order so a fixed seed reproduces the dataset byte-for-byte.
struct WaveSet {
    std::vector<double> freq, amp, phase;
};

WaveSet draw_waves(const GeneratorConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> freq(cfg.freq_min, cfg.freq_max);
    std::uniform_real_distribution<double> amp(cfg.amp_min, cfg.amp_max);
    std::uniform_real_distribution<double> phs(0.0, 2.0 * std::numbers::pi);
    WaveSet w;
    for (int c = 0; c < cfg.components; ++c) {
        w.freq.push_back(freq(rng));
        w.amp.push_back(amp(rng));
        w.phase.push_back(phs(rng));
    }
    return w;
}

}  // namespace

LabeledSeries generate_complexity_dataset(const GeneratorConfig& cfg) {
    if (cfg.partitions < 1) throw std::invalid_argument("generator: partitions must be >= 1");
    if (cfg.components < 1) throw std::invalid_argument("generator: components must be >= 1");
    if (!(cfg.freq_min > 0.0) || cfg.freq_max < cfg.freq_min) {
        throw std::invalid_argument("generator: invalid frequency range");
    }
    if (!(cfg.amp_min >= 0.0) || cfg.amp_max < cfg.amp_min) {
        throw std::invalid_argument("generator: invalid amplitude range");
    }
    if (!(cfg.fs > 0.0)) throw std::invalid_argument("generator: fs must be positive");
    const std::size_t per = cfg.total_samples / static_cast<std::size_t>(cfg.partitions);
    if (per == 0) throw std::invalid_argument("generator: too few samples per partition");

    std::mt19937_64 rng(cfg.seed);
    LabeledSeries out;
    out.series.fs = cfg.fs;
    out.series.t0 = 0.0;
    out.series.samples.reserve(per * static_cast<std::size_t>(cfg.partitions));
    out.labels.reserve(per * static_cast<std::size_t>(cfg.partitions));

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> amp(cfg.amp_min, cfg.amp_max);

    for (int p = 0; p < cfg.partitions; ++p) {
        const int label = p + 1;
        // class index cycles sinusoid / square / noise when partitions > 3
        const int cls = p % 3;
        if (cls == 2) {
            const double a = amp(rng);
            for (std::size_t i = 0; i < per; ++i) {
                out.series.samples.push_back(a * gauss(rng));
                out.labels.push_back(label);
            }
            continue;
        }
        const WaveSet w = draw_waves(cfg, rng);
        for (std::size_t i = 0; i < per; ++i) {
            const double t = static_cast<double>(out.series.samples.size()) / cfg.fs;
            double v = 0.0;
            for (int c = 0; c < cfg.components; ++c) {
                const double s =
                    std::sin(2.0 * std::numbers::pi * w.freq[c] * t + w.phase[c]);
                // square partition: 50% duty square wave per component
                v += (cls == 0) ? w.amp[c] * s
                                : w.amp[c] * (s >= 0.0 ? 1.0 : -1.0);
            }
            out.series.samples.push_back(v);
            out.labels.push_back(label);
        }
    }
    return out;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts,
                      const std::vector<int>* labels,
                      const std::vector<std::string>& comments) {
    if (labels && labels->size() != ts.samples.size()) {
        throw std::invalid_argument("write_series_csv: label count mismatch");
    }
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    w.comment(" fs=" + io::format_double(ts.fs) + " t0=" + io::format_double(ts.t0));
    w.row(labels ? std::vector<std::string>{"t", "value", "label"}
                 : std::vector<std::string>{"t", "value"});
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        std::vector<std::string> cells{io::format_double(ts.time_at(i)),
                                       io::format_double(ts.samples[i])};
        if (labels) cells.push_back(std::to_string((*labels)[i]));
        w.row(cells);
    }
}

LabeledSeries read_series_csv(const std::filesystem::path& path) {
    const io::CsvFile f = io::read_csv_file(path);
    if (f.header.size() < 2 || f.header[0] != "t" || f.header[1] != "value") {
        throw std::runtime_error("read_series_csv: unexpected header in " + path.string());
    }
    const bool has_labels = f.header.size() >= 3 && f.header[2] == "label";
    LabeledSeries out;
    double t_first = 0.0, t_second = 0.0;
    bool have_meta = false;
    for (const auto& c : f.comments) {
        auto fs_pos = c.find("fs=");
        auto t0_pos = c.find("t0=");
        if (fs_pos != std::string::npos && t0_pos != std::string::npos) {
            out.series.fs = io::parse_double(
                c.substr(fs_pos + 3, c.find(' ', fs_pos) - fs_pos - 3));
            out.series.t0 = io::parse_double(c.substr(t0_pos + 3));
            have_meta = true;
        }
    }
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& r = f.rows[i];
        if (r.size() < 2) throw std::runtime_error("read_series_csv: short row");
        const double t = io::parse_double(r[0]);
        if (i == 0) t_first = t;
        if (i == 1) t_second = t;
        out.series.samples.push_back(io::parse_double(r[1]));
        if (has_labels && r.size() >= 3) out.labels.push_back(static_cast<int>(io::parse_long(r[2])));
    }
    if (out.series.samples.empty()) throw std::runtime_error("read_series_csv: no samples");
    if (!have_meta) {
        out.series.t0 = t_first;
        out.series.fs = out.series.samples.size() > 1 ? 1.0 / (t_second - t_first) : 1.0;
    }
    return out;
}

}  // namespace fdm::signal
