#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fdm/classifier.hpp"
#include "fdm/config.hpp"
#include "fdm/ensemble.hpp"
#include "fdm/sim.hpp"

namespace fdm::workflows {

// ---- Stage I over the synthetic dataset -----------------------------------

struct LabelResult {
    std::vector<imaging::ScalogramStack> stacks;  // thinned by stack_stride
    std::vector<imaging::StackIndexRow> index;    // frame range + generator label (0 = mixed)
    std::vector<pipeline::StackEntropy> entropies;
    std::vector<int> levels;            // entropy levels under the fitted thresholds
    std::vector<double> thresholds;     // recomputed tau_e values
    long frames_formula = 0;            // windowing-formula count N_m
    long frames_realized = 0;           // valid-start frames actually produced
};

LabelResult label_dataset(const config::RunConfig& cfg, const signal::LabeledSeries& data);

struct ClassifierDataset {
    std::vector<imaging::ScalogramStack> stacks;
    std::vector<int> levels;
};

// Supervised set for the complexity classifier: stacks whose entropy clears
// every threshold by `margin` (quantized labels flip on near-threshold
// stacks, which caps the reachable validation accuracy otherwise).
ClassifierDataset make_classifier_dataset(const LabelResult& labeled, double margin);

// ---- Stage II training data ------------------------------------------------

struct WindowSet {
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;      // clean q-step-ahead values
    std::vector<bool> augmented;      // window carries an injected signal
    std::vector<int> levels;          // entropy level of the window's stack (0 = unknown)
    std::vector<long> starts;         // window offsets in the source series
};

// Sliding lookback windows with seeded injection augmentation: inputs may
// carry chirp/bias/burst corruption, targets stay clean.
struct AugmentConfig {
    double probability = 0.5;
    double amp_min = 0.5, amp_max = 5.0;
    double f_min = 0.15, f_max = 2.2;
};

WindowSet make_windows(const signal::TimeSeries& clean, int lookback, int horizon, int stride,
                       const AugmentConfig& augment, std::uint64_t seed);

// Entropy level of each window via the trailing stack of its own samples
// (requires the stack span to fit inside the window).
void tag_window_levels(WindowSet& set, const pipeline::StageOneParams& stage1,
                       const pipeline::EntropyParams& entropy_params,
                       std::span<const double> thresholds);

// Entropy level via the stack that ends where each window ends, drawn from
// the source series (for spans longer than the window).
void tag_window_levels_from_series(WindowSet& set, const signal::TimeSeries& series,
                                   const pipeline::StageOneParams& stage1,
                                   const pipeline::EntropyParams& entropy_params,
                                   std::span<const double> thresholds);

struct TrainedModels {
    std::vector<forecasters::BaseModel> models;
    std::vector<double> train_rmse;
    std::vector<double> val_rmse;

    std::vector<const forecasters::BaseModel*> pointers() const;
};

// The five-architecture stack at the configured widths; 70/30 split, seeded.
TrainedModels train_base_models(
    const config::RunConfig& cfg, const WindowSet& windows, std::uint64_t seed,
    bool volatility_weighting = true,
    forecasters::Normalization norm = forecasters::Normalization::global_zscore);

// Per-level validation windows for assignment (levels 1..r).
std::vector<ensemble::LevelValidation> split_validation_by_level(const WindowSet& set, int levels);

// ---- test stream mirroring the switching-complexity evaluation -------------

struct TestStream {
    signal::TimeSeries clean;
    signal::TimeSeries received;       // clean + attack
    std::vector<double> attack;        // injected values
    std::vector<int> class_labels;     // generator class per sample
};

// Segment schedule of the switching-complexity evaluation set, scaled to the
// configured sample count, with the Scenario-I chirp as the injected attack.
TestStream make_test_stream(const config::RunConfig& cfg, std::uint64_t seed);

// ---- robot-channel models for closed-loop mitigation -----------------------

struct SimChannelSetup {
    TrainedModels trained;
    ensemble::AssignmentTable table;
    WindowSet training_windows;
};

// Trains the base-model stack on attack-free leader-position streams with
// injection augmentation and assigns models per entropy level.
SimChannelSetup train_sim_channels(const config::RunConfig& cfg,
                                   std::span<const double> thresholds, std::uint64_t seed);

struct ScenarioOutcome {
    sim::FormationLog clean;
    sim::FormationLog attacked;     // no mitigation
    sim::FormationLog mitigated;    // with the pipeline attached
    double deviation_unmitigated = 0.0;  // attacked vs clean, target robot
    double deviation_mitigated = 0.0;    // mitigated vs clean, target robot
};

// Scenario I (sensor of robot 1) or II (link 1 -> 2) with the configured
// chirp; deviations are measured on the attacked/receiving robot.
ScenarioOutcome run_scenario(const config::RunConfig& cfg, int scenario,
                             const classifier::ComplexityClassifier& clf,
                             const SimChannelSetup& channels);

}  // namespace fdm::workflows
