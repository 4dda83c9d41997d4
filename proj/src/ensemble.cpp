#include "fdm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"

namespace fdm::ensemble {

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("rmse: length mismatch");
    if (a.empty()) throw std::invalid_argument("rmse: empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

const AssignmentEntry& AssignmentTable::entry(int level) const {
    for (const auto& e : per_level) {
        if (e.level == level) return e;
    }
    throw std::invalid_argument("AssignmentTable: no entry for level " + std::to_string(level));
}

AssignmentTable assign_models(std::span<const forecasters::BaseModel* const> models,
                              std::span<const LevelValidation> per_level, double epsilon,
                              double tau_c) {
    if (models.empty()) throw std::invalid_argument("assign_models: no models");
    if (epsilon < 0.0 || epsilon > 1.0) {
        throw std::invalid_argument("assign_models: epsilon must lie in [0,1]");
    }
    for (const auto* m : models) {
        if (m->inference_time() <= 0.0) {
            throw std::invalid_argument("assign_models: model '" +
                                        forecasters::architecture_name(m->spec().arch) +
                                        "' has no measured inference time");
        }
    }
    AssignmentTable table;
    table.epsilon = epsilon;

    // min-max normalize the timing term across candidates once
    std::vector<double> times;
    for (const auto* m : models) times.push_back(m->inference_time());
    const double t_lo = *std::min_element(times.begin(), times.end());
    const double t_hi = *std::max_element(times.begin(), times.end());
    auto norm_t = [&](double t) { return t_hi > t_lo ? (t - t_lo) / (t_hi - t_lo) : 0.0; };

    for (std::size_t lvl = 0; lvl < per_level.size(); ++lvl) {
        const auto& val = per_level[lvl];
        if (val.windows.empty()) {
            throw std::invalid_argument("assign_models: empty validation data for level " +
                                        std::to_string(lvl + 1));
        }
        std::vector<double> rmses;
        for (const auto* m : models) {
            rmses.push_back(forecasters::model_rmse(*m, val.windows, val.targets));
        }
        const double r_lo = *std::min_element(rmses.begin(), rmses.end());
        const double r_hi = *std::max_element(rmses.begin(), rmses.end());
        auto norm_r = [&](double r) { return r_hi > r_lo ? (r - r_lo) / (r_hi - r_lo) : 0.0; };

        int best = 0;
        double best_score = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < models.size(); ++i) {
            const double score = epsilon * norm_r(rmses[i]) + (1.0 - epsilon) * norm_t(times[i]);
            const bool better =
                score < best_score ||
                (score == best_score && times[i] < times[static_cast<std::size_t>(best)]);
            if (better) {
                best_score = score;
                best = static_cast<int>(i);
            }
        }
        AssignmentEntry e;
        e.level = static_cast<int>(lvl) + 1;
        e.model_id = best;
        e.val_rmse = rmses[static_cast<std::size_t>(best)];
        e.t_infer = times[static_cast<std::size_t>(best)];
        e.tau_c = tau_c;
        table.per_level.push_back(e);
    }
    return table;
}

Selection select_model(const imaging::ScalogramStack& stack,
                       const classifier::ComplexityClassifier& clf, const AssignmentTable& table) {
    const auto confidence = clf.classify(stack);
    const int level = classifier::predict_level(confidence);
    const auto& entry = table.entry(level);
    Selection s;
    s.level = level;
    s.confidence = confidence.normalized[static_cast<std::size_t>(level - 1)];
    if (s.confidence >= entry.tau_c) {
        s.average = false;
        s.model_id = entry.model_id;
    } else {
        s.average = true;
    }
    return s;
}

MitigationChannel::MitigationChannel(const pipeline::StageOneParams& stage1,
                                     ModelSelector& selector,
                                     std::span<const forecasters::BaseModel* const> models,
                                     int lookback, int horizon, double dead_band)
    : builder_(stage1),
      selector_(&selector),
      models_(models.begin(), models.end()),
      lookback_(lookback),
      horizon_(horizon),
      dead_band_(dead_band) {
    if (models_.empty()) throw std::invalid_argument("MitigationChannel: no models");
    if (lookback_ < 1 || horizon_ < 1) {
        throw std::invalid_argument("MitigationChannel: lookback and horizon must be >= 1");
    }
}

long MitigationChannel::warmup_samples() const {
    return std::max<long>(lookback_ + horizon_ - 1, builder_.params().stack_span());
}

double MitigationChannel::forecast_with(const Selection& sel,
                                        std::span<const double> window) const {
    if (!sel.average) {
        return models_[static_cast<std::size_t>(sel.model_id)]->forecast(window);
    }
    double acc = 0.0;
    for (const auto* m : models_) acc += m->forecast(window);
    return acc / static_cast<double>(models_.size());
}

MitigationRecord MitigationChannel::push(double t, double y_tilde) {
    MitigationRecord rec;
    rec.t = t;
    rec.y_tilde = y_tilde;

    const long have = static_cast<long>(history_.size());
    const long need = lookback_ + horizon_ - 1;
    if (selection_ && have >= need) {
        std::vector<double> window;
        window.reserve(static_cast<std::size_t>(lookback_));
        const long begin = have - need;
        for (long i = 0; i < lookback_; ++i) {
            window.push_back(history_[static_cast<std::size_t>(begin + i)]);
        }
        const double t0 = metrics::now_seconds();
        rec.y_hat = forecast_with(*selection_, window);
        predict_seconds_in_segment_ += metrics::now_seconds() - t0;
        ++predictions_in_segment_;
        rec.a_hat = y_tilde - rec.y_hat;
        const bool apply = dead_band_ <= 0.0 || std::abs(rec.a_hat) > dead_band_;
        rec.y_breve = apply ? y_tilde - rec.a_hat : y_tilde;
        rec.corrected = true;
        rec.level = selection_->level;
        rec.confidence = selection_->confidence;
        rec.model = selection_->average
                        ? "average"
                        : forecasters::architecture_name(
                              models_[static_cast<std::size_t>(selection_->model_id)]->spec().arch);
    } else {
        rec.y_hat = y_tilde;
        rec.a_hat = 0.0;
        rec.y_breve = y_tilde;
        rec.corrected = false;
        rec.model = "warmup";
    }

    history_.push_back(y_tilde);
    const long keep = need + 4;
    while (static_cast<long>(history_.size()) > keep) history_.pop_front();

    const double tf0 = metrics::now_seconds();
    auto stack = builder_.push(y_tilde);
    const double tf = metrics::now_seconds() - tf0;
    current_timing_.t_frame += tf;
    if (stack) {
        // close the previous segment's timing sample
        if (segment_open_) {
            current_timing_.t_predict =
                predictions_in_segment_ > 0
                    ? predict_seconds_in_segment_ / static_cast<double>(predictions_in_segment_)
                    : 0.0;
            timing_.push_back(current_timing_);
        }
        current_timing_ = metrics::TimingSample{};
        predict_seconds_in_segment_ = 0.0;
        predictions_in_segment_ = 0;
        segment_open_ = true;

        const double tc0 = metrics::now_seconds();
        selection_ = selector_->select(*stack);
        current_timing_.t_classify = metrics::now_seconds() - tc0;
    }
    return rec;
}

std::vector<MitigationRecord> mitigate_stream(const signal::TimeSeries& received,
                                              const MitigationPipeline& pipeline) {
    if (pipeline.models.empty()) {
        throw std::invalid_argument("mitigate_stream: pipeline is missing base models");
    }
    if (pipeline.clf == nullptr) {
        throw std::invalid_argument("mitigate_stream: pipeline is missing the classifier");
    }
    if (pipeline.table == nullptr) {
        throw std::invalid_argument("mitigate_stream: pipeline is missing the assignment table");
    }
    received.validate();
    StageOneSelector selector(*pipeline.clf, *pipeline.table);
    MitigationChannel channel(pipeline.stage1, selector, pipeline.models, pipeline.lookback,
                              pipeline.horizon, pipeline.dead_band);
    std::vector<MitigationRecord> records;
    records.reserve(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) {
        records.push_back(channel.push(received.time_at(i), received.samples[i]));
    }
    return records;
}

void write_mitigation_csv(const std::filesystem::path& path,
                          std::span<const MitigationRecord> records,
                          std::span<const double> y_true,
                          const std::vector<std::string>& comments) {
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    w.row({"t", "y_true", "y_tilde", "y_hat", "a_hat", "y_breve", "level", "confidence", "model"});
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        w.row({io::format_double(r.t),
               i < y_true.size() ? io::format_double(y_true[i]) : std::string{},
               io::format_double(r.y_tilde), io::format_double(r.y_hat),
               io::format_double(r.a_hat), io::format_double(r.y_breve), std::to_string(r.level),
               io::format_double(r.confidence), r.model});
    }
}

namespace {

// RMSE(a, a_hat) over the corrected region of a run
double attack_reconstruction_rmse(std::span<const MitigationRecord> records,
                                  std::span<const double> attack_truth) {
    std::vector<double> truth, est;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].corrected) continue;
        truth.push_back(attack_truth[i]);
        est.push_back(records[i].a_hat);
    }
    if (truth.empty()) throw std::invalid_argument("no corrected samples in the run");
    return rmse(truth, est);
}

std::vector<MitigationRecord> run_with_selector(const signal::TimeSeries& received,
                                                const MitigationPipeline& pipeline,
                                                ModelSelector& selector,
                                                std::span<const forecasters::BaseModel* const> models,
                                                std::vector<metrics::TimingSample>* timing_out) {
    MitigationChannel channel(pipeline.stage1, selector, models, pipeline.lookback,
                              pipeline.horizon, pipeline.dead_band);
    std::vector<MitigationRecord> records;
    records.reserve(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) {
        records.push_back(channel.push(received.time_at(i), received.samples[i]));
    }
    if (timing_out) *timing_out = channel.timing();
    return records;
}

}  // namespace

ComparisonReport compare_frameworks(const signal::TimeSeries& received,
                                    std::span<const double> attack_truth,
                                    const MitigationPipeline& pipeline) {
    if (attack_truth.size() != received.size()) {
        throw std::invalid_argument("compare_frameworks: attack truth length mismatch");
    }
    if (pipeline.clf == nullptr || pipeline.table == nullptr || pipeline.models.empty()) {
        throw std::invalid_argument("compare_frameworks: incomplete pipeline");
    }
    ComparisonReport report;

    StageOneSelector stacked_selector(*pipeline.clf, *pipeline.table);
    std::vector<metrics::TimingSample> timing;
    auto stacked_records =
        run_with_selector(received, pipeline, stacked_selector, pipeline.models, &timing);
    const double stacked_rmse = attack_reconstruction_rmse(stacked_records, attack_truth);
    report.stacked_timing = metrics::timing_report(timing, pipeline.stage1.framing.frame_len,
                                                   pipeline.stage1.framing.overlap);
    report.rows.push_back(
        {"stacked", stacked_rmse, 0.0, report.stacked_timing.t_infer_mean * 1e3});

    for (std::size_t i = 0; i < pipeline.models.size(); ++i) {
        FixedSelector fixed(static_cast<int>(i));
        std::vector<metrics::TimingSample> model_timing;
        auto records =
            run_with_selector(received, pipeline, fixed, pipeline.models, &model_timing);
        const double r = attack_reconstruction_rmse(records, attack_truth);
        const auto t = metrics::timing_report(model_timing, pipeline.stage1.framing.frame_len,
                                              pipeline.stage1.framing.overlap);
        ComparisonRow row;
        row.name = forecasters::architecture_name(pipeline.models[i]->spec().arch);
        row.rmse_attack = r;
        row.improvement = r > 0.0 ? std::abs(stacked_rmse - r) / r * 100.0 : 0.0;
        row.t_infer_ms = t.t_infer_mean * 1e3;
        report.rows.push_back(row);
    }
    return report;
}

AveragingResult averaging_baseline(const signal::TimeSeries& received,
                                   std::span<const double> attack_truth,
                                   const MitigationPipeline& pipeline,
                                   std::span<const int> model_subset) {
    if (model_subset.empty()) throw std::invalid_argument("averaging_baseline: empty subset");
    if (attack_truth.size() != received.size()) {
        throw std::invalid_argument("averaging_baseline: attack truth length mismatch");
    }
    std::vector<const forecasters::BaseModel*> subset;
    for (int id : model_subset) {
        subset.push_back(pipeline.models.at(static_cast<std::size_t>(id)));
    }
    // Stage I removed: every step averages all base forecasts directly. The
    // corrected region matches the stacked run's warm-up so RMSEs compare on
    // the same samples.
    const long warmup = std::max<long>(pipeline.lookback + pipeline.horizon - 1,
                                       pipeline.stage1.stack_span());
    const long need = pipeline.lookback + pipeline.horizon - 1;
    std::vector<double> truth, est;
    double predict_seconds = 0.0;
    long predictions = 0;
    for (std::size_t i = static_cast<std::size_t>(warmup); i < received.size(); ++i) {
        const std::size_t begin = i - static_cast<std::size_t>(need);
        std::span<const double> window(received.samples.data() + begin,
                                       static_cast<std::size_t>(pipeline.lookback));
        const double t0 = metrics::now_seconds();
        double acc = 0.0;
        for (const auto* m : subset) acc += m->forecast(window);
        predict_seconds += metrics::now_seconds() - t0;
        ++predictions;
        const double y_hat = acc / static_cast<double>(subset.size());
        truth.push_back(attack_truth[i]);
        est.push_back(received.samples[i] - y_hat);
    }
    if (truth.empty()) throw std::invalid_argument("averaging_baseline: stream shorter than warm-up");
    AveragingResult out;
    out.n_models = static_cast<int>(subset.size());
    out.rmse_attack = rmse(truth, est);
    out.t_infer_ms = predictions > 0 ? predict_seconds / static_cast<double>(predictions) * 1e3 : 0.0;
    return out;
}

void write_assignment_csv(const std::filesystem::path& path, const AssignmentTable& table,
                          std::span<const std::string> model_names,
                          const std::vector<std::string>& comments) {
    io::CsvWriter w(path);
    for (const auto& c : comments) w.comment(c);
    w.comment(" epsilon=" + io::format_double(table.epsilon));
    w.row({"level", "modelId", "architecture", "valRMSE", "T_l_seconds", "tau_c"});
    for (const auto& e : table.per_level) {
        w.row({std::to_string(e.level), std::to_string(e.model_id),
               model_names[static_cast<std::size_t>(e.model_id)], io::format_double(e.val_rmse),
               io::format_double(e.t_infer), io::format_double(e.tau_c)});
    }
}

AssignmentTable read_assignment_csv(const std::filesystem::path& path) {
    const auto f = io::read_csv_file(path);
    AssignmentTable table;
    for (const auto& c : f.comments) {
        const auto pos = c.find("epsilon=");
        if (pos != std::string::npos) table.epsilon = io::parse_double(c.substr(pos + 8));
    }
    for (const auto& r : f.rows) {
        AssignmentEntry e;
        e.level = static_cast<int>(io::parse_long(r.at(0)));
        e.model_id = static_cast<int>(io::parse_long(r.at(1)));
        e.val_rmse = io::parse_double(r.at(3));
        e.t_infer = io::parse_double(r.at(4));
        e.tau_c = io::parse_double(r.at(5));
        table.per_level.push_back(e);
    }
    if (table.per_level.empty()) throw std::runtime_error("assignment table empty: " + path.string());
    return table;
}

}  // namespace fdm::ensemble
