#include "fdm/metrics.hpp"

#include <chrono>
#include <stdexcept>

#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::metrics {

ClassificationReport classification_report(std::span<const int> predictions,
                                           std::span<const int> labels, int classes) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("classification_report: size mismatch");
    }
    if (classes < 1) throw std::invalid_argument("classification_report: need classes >= 1");
    ClassificationReport r;
    r.classes = classes;
    r.confusion.assign(static_cast<std::size_t>(classes) * classes, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], a = labels[i];
        if (p < 1 || p > classes || a < 1 || a > classes) {
            throw std::invalid_argument("classification_report: label out of range at row " +
                                        std::to_string(i));
        }
        ++r.confusion[static_cast<std::size_t>(p - 1) * classes + (a - 1)];
    }
    long correct = 0;
    for (int c = 0; c < classes; ++c) correct += r.at(c, c);
    const long total = static_cast<long>(predictions.size());
    r.accuracy = total > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    for (int c = 0; c < classes; ++c) {
        long row = 0, col = 0;
        for (int k = 0; k < classes; ++k) {
            row += r.at(c, k);
            col += r.at(k, c);
        }
        r.precision.push_back(row > 0 ? std::optional<double>(100.0 * r.at(c, c) / row)
                                      : std::nullopt);
        r.recall.push_back(col > 0 ? std::optional<double>(100.0 * r.at(c, c) / col)
                                   : std::nullopt);
    }
    return r;
}

void write_report_csv(const std::filesystem::path& path, const ClassificationReport& report,
                      const std::vector<std::string>& comments) {
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    std::vector<std::string> header{"pred"};
    for (int c = 1; c <= report.classes; ++c) header.push_back("actual" + std::to_string(c));
    header.push_back("precision");
    w.row(header);
    for (int p = 0; p < report.classes; ++p) {
        std::vector<std::string> row{std::to_string(p + 1)};
        for (int a = 0; a < report.classes; ++a) row.push_back(std::to_string(report.at(p, a)));
        row.push_back(report.precision[static_cast<std::size_t>(p)]
                          ? io::format_double(*report.precision[static_cast<std::size_t>(p)])
                          : "");
        w.row(row);
    }
    std::vector<std::string> rec{"recall"};
    for (int a = 0; a < report.classes; ++a) {
        rec.push_back(report.recall[static_cast<std::size_t>(a)]
                          ? io::format_double(*report.recall[static_cast<std::size_t>(a)])
                          : "");
    }
    rec.push_back(io::format_double(report.accuracy));
    w.row(rec);
}

TimingReport timing_report(std::span<const TimingSample> samples, int frame_len, int overlap) {
    if (frame_len <= overlap) throw std::invalid_argument("timing_report: need M > L");
    TimingReport r;
    r.frame_len = frame_len;
    r.overlap = overlap;
    r.segments = static_cast<long>(samples.size());
    if (samples.empty()) return r;
    const double hop = static_cast<double>(frame_len - overlap);
    double infer = 0.0;
    for (const auto& s : samples) {
        r.t_frame_mean += s.t_frame;
        r.t_classify_mean += s.t_classify;
        r.t_predict_mean += s.t_predict;
        infer += (s.t_frame + s.t_classify + hop * s.t_predict) / hop;
    }
    const double n = static_cast<double>(samples.size());
    r.t_frame_mean /= n;
    r.t_classify_mean /= n;
    r.t_predict_mean /= n;
    r.t_infer_mean = infer / n;
    return r;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace fdm::metrics
