#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdm::metrics {

// Confusion matrix with the paper-style margins: rows are predictions,
// columns are actuals; precision per predicted row, recall per actual column.
struct ClassificationReport {
    int classes = 0;
    std::vector<long> confusion;  // classes x classes, row-major [pred][actual]
    double accuracy = 0.0;        // percent
    std::vector<std::optional<double>> precision;  // percent; absent when a row is empty
    std::vector<std::optional<double>> recall;     // percent; absent when a column is empty

    long at(int pred, int actual) const {
        return confusion[static_cast<std::size_t>(pred) * classes + actual];
    }
};

// Labels are 1-based (complexity levels); out-of-range labels are an error.
ClassificationReport classification_report(std::span<const int> predictions,
                                           std::span<const int> labels, int classes);

void write_report_csv(const std::filesystem::path& path, const ClassificationReport& report,
                      const std::vector<std::string>& comments = {});

struct TimingSample {
    double t_frame = 0.0;     // stack generation seconds
    double t_classify = 0.0;  // complexity classification seconds
    double t_predict = 0.0;   // forecast seconds
};

struct TimingReport {
    double t_frame_mean = 0.0;
    double t_classify_mean = 0.0;
    double t_predict_mean = 0.0;
    double t_infer_mean = 0.0;  // per-sample inference time, seconds
    long segments = 0;
    int frame_len = 0, overlap = 0;
};

// Per-segment inference time (T_f + T_c + (M-L) T_p) / (M-L), averaged over
// segments.
TimingReport timing_report(std::span<const TimingSample> samples, int frame_len, int overlap);

// Monotonic-clock stopwatch with warm-up discards handled by callers.
double now_seconds();

}  // namespace fdm::metrics
