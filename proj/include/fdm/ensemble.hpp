#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdm/classifier.hpp"
#include "fdm/forecasters.hpp"
#include "fdm/metrics.hpp"
#include "fdm/pipeline.hpp"

namespace fdm::ensemble {

double rmse(std::span<const double> a, std::span<const double> b);

struct AssignmentEntry {
    int level = 0;       // 1-based complexity level
    int model_id = 0;    // index into the model set
    double val_rmse = 0.0;
    double t_infer = 0.0;
    double tau_c = 0.7;  // confidence threshold for this level
};

struct AssignmentTable {
    std::vector<AssignmentEntry> per_level;
    double epsilon = 0.4;

    const AssignmentEntry& entry(int level) const;
};

struct LevelValidation {
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;
};

// Offline model assignment: per level, argmin of
// epsilon * norm(RMSE) + (1-epsilon) * norm(T), with both terms min-max
// normalized across the candidate models and ties broken toward smaller T.
// Every model must carry a measured inference time.
AssignmentTable assign_models(std::span<const forecasters::BaseModel* const> models,
                              std::span<const LevelValidation> per_level, double epsilon,
                              double tau_c = 0.7);

struct Selection {
    bool average = false;  // low confidence: mean of all base forecasts
    int model_id = 0;
    int level = 0;
    double confidence = 0.0;
};

Selection select_model(const imaging::ScalogramStack& stack,
                       const classifier::ComplexityClassifier& clf, const AssignmentTable& table);

// Strategy hook so the online loop can run with the full Stage-I selector or
// with fixed/averaging stand-ins (tests, per-model baselines).
class ModelSelector {
public:
    virtual ~ModelSelector() = default;
    virtual Selection select(const imaging::ScalogramStack& stack) = 0;
};

class StageOneSelector : public ModelSelector {
public:
    StageOneSelector(const classifier::ComplexityClassifier& clf, AssignmentTable table)
        : clf_(&clf), table_(std::move(table)) {}
    Selection select(const imaging::ScalogramStack& stack) override {
        return select_model(stack, *clf_, table_);
    }
    const AssignmentTable& table() const { return table_; }

private:
    const classifier::ComplexityClassifier* clf_;
    AssignmentTable table_;
};

class FixedSelector : public ModelSelector {
public:
    explicit FixedSelector(int model_id) : model_id_(model_id) {}
    Selection select(const imaging::ScalogramStack&) override {
        return Selection{false, model_id_, 0, 1.0};
    }

private:
    int model_id_;
};

class AveragingSelector : public ModelSelector {
public:
    Selection select(const imaging::ScalogramStack&) override {
        return Selection{true, 0, 0, 0.0};
    }
};

struct MitigationRecord {
    double t = 0.0;
    double y_tilde = 0.0;  // received (possibly attacked) value
    double y_hat = 0.0;    // forecast
    double a_hat = 0.0;    // reconstructed injection: y_tilde - y_hat
    double y_breve = 0.0;  // corrected value: y_tilde - a_hat
    int level = 0;
    double confidence = 0.0;
    std::string model;     // "warmup", "average", or the architecture name
    bool corrected = false;
};

// Causal per-sample mitigation of one sensor channel. Model selection is
// refreshed whenever a new frame completes (every M-L samples); between
// refreshes the selection is held. Until both the forecast window and the
// first stack are available, samples pass through uncorrected.
class MitigationChannel {
public:
    MitigationChannel(const pipeline::StageOneParams& stage1, ModelSelector& selector,
                      std::span<const forecasters::BaseModel* const> models, int lookback,
                      int horizon, double dead_band = 0.0);

    MitigationRecord push(double t, double y_tilde);

    long warmup_samples() const;
    const std::vector<metrics::TimingSample>& timing() const { return timing_; }

private:
    double forecast_with(const Selection& sel, std::span<const double> window) const;

    pipeline::StreamingStackBuilder builder_;
    ModelSelector* selector_;
    std::vector<const forecasters::BaseModel*> models_;
    int lookback_, horizon_;
    double dead_band_ = 0.0;
    std::deque<double> history_;
    std::optional<Selection> selection_;
    std::vector<metrics::TimingSample> timing_;
    metrics::TimingSample current_timing_;
    long predictions_in_segment_ = 0;
    double predict_seconds_in_segment_ = 0.0;
    bool segment_open_ = false;
};

struct MitigationPipeline {
    pipeline::StageOneParams stage1;
    const classifier::ComplexityClassifier* clf = nullptr;
    const AssignmentTable* table = nullptr;
    std::vector<const forecasters::BaseModel*> models;
    int lookback = 60;
    int horizon = 1;
    // reconstructions at or below this magnitude are not applied (0 = always
    // correct, the default); keeps imperfect forecasts out of the loop when
    // the channel looks clean
    double dead_band = 0.0;
};

// Batch wrapper over MitigationChannel for a whole series. y_true, when
// given, is only copied into the log.
std::vector<MitigationRecord> mitigate_stream(const signal::TimeSeries& received,
                                              const MitigationPipeline& pipeline);

void write_mitigation_csv(const std::filesystem::path& path,
                          std::span<const MitigationRecord> records,
                          std::span<const double> y_true,
                          const std::vector<std::string>& comments = {});

struct ComparisonRow {
    std::string name;
    double rmse_attack = 0.0;  // RMSE(a, a_hat)
    double improvement = 0.0;  // percent vs this row, 0 for the stacked row
    double t_infer_ms = 0.0;   // mean per-sample inference, milliseconds
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;  // stacked first, then each base model
    metrics::TimingReport stacked_timing;
};

// Stage-II comparison on a test stream with a known injected signal: the
// stacked selection against every base model (eq-style improvement
// percentages) and the averaging baseline over a model subset.
ComparisonReport compare_frameworks(const signal::TimeSeries& received,
                                    std::span<const double> attack_truth,
                                    const MitigationPipeline& pipeline);

struct AveragingResult {
    int n_models = 0;
    double rmse_attack = 0.0;
    double t_infer_ms = 0.0;
};

AveragingResult averaging_baseline(const signal::TimeSeries& received,
                                   std::span<const double> attack_truth,
                                   const MitigationPipeline& pipeline,
                                   std::span<const int> model_subset);

void write_assignment_csv(const std::filesystem::path& path, const AssignmentTable& table,
                          std::span<const std::string> model_names,
                          const std::vector<std::string>& comments = {});
AssignmentTable read_assignment_csv(const std::filesystem::path& path);

}  // namespace fdm::ensemble
