#include "fdm/workflows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fdm::workflows {

LabelResult label_dataset(const config::RunConfig& cfg, const signal::LabeledSeries& data) {
    LabelResult out;
    const auto stage1 = cfg.stage1();
    out.frames_formula = signal::frame_count_formula(data.series.size(), stage1.framing);
    out.frames_realized = signal::frame_count(data.series.size(), stage1.framing);

    auto stacks = pipeline::build_stacks(data.series, stage1, cfg.jobs);
    const int span = stage1.stack_span();
    const int hop = stage1.framing.hop();
    const auto entropy_params = cfg.entropy_params();

    const int stride = std::max(1, cfg.stack_stride);
    for (std::size_t s = 0; s < stacks.size(); s += static_cast<std::size_t>(stride)) {
        const long start = static_cast<long>(s) * hop;
        int label = 0;
        if (!data.labels.empty()) {
            label = data.labels[static_cast<std::size_t>(start)];
            for (long i = start; i < start + span; ++i) {
                if (data.labels[static_cast<std::size_t>(i)] != label) {
                    label = 0;  // stack straddles a partition edge
                    break;
                }
            }
        }
        imaging::StackIndexRow row;
        row.stack_index = static_cast<int>(out.stacks.size());
        row.first_frame = stacks[s].first_frame_index;
        row.last_frame = stacks[s].first_frame_index + stage1.c_prime - 1;
        row.label = label;
        out.index.push_back(row);
        out.entropies.push_back(pipeline::stack_entropy(stacks[s], entropy_params));
        out.stacks.push_back(std::move(stacks[s]));
    }

    // thresholds from the generator-labeled stacks, then levels for everything
    std::vector<double> en;
    std::vector<int> labels;
    for (std::size_t i = 0; i < out.stacks.size(); ++i) {
        if (out.index[i].label > 0) {
            en.push_back(out.entropies[i].en);
            labels.push_back(out.index[i].label);
        }
    }
    if (en.empty()) throw std::runtime_error("label_dataset: no cleanly labeled stacks");
    out.thresholds = entropy::fit_thresholds(en, labels, cfg.levels());
    for (const auto& e : out.entropies) {
        out.levels.push_back(entropy::complexity_level(e.en, out.thresholds));
    }
    return out;
}

ClassifierDataset make_classifier_dataset(const LabelResult& labeled, double margin) {
    ClassifierDataset out;
    for (std::size_t i = 0; i < labeled.stacks.size(); ++i) {
        bool confident = true;
        for (double t : labeled.thresholds) {
            confident = confident && std::abs(labeled.entropies[i].en - t) >= margin;
        }
        if (!confident) continue;
        out.stacks.push_back(labeled.stacks[i]);
        out.levels.push_back(labeled.levels[i]);
    }
    if (out.stacks.empty()) {
        throw std::runtime_error("make_classifier_dataset: margin filtered out every stack");
    }
    return out;
}

namespace {

// One injected corruption, shaped like the online cases: an attack covering
// the whole window (ongoing), starting inside it (entry) or ending inside it
// (exit). The entry case stresses the prediction point the mitigation loop
// actually uses.
void inject_augmentation(std::vector<double>& window, double fs, const AugmentConfig& aug,
                         std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(aug.amp_min, aug.amp_max);
    std::uniform_real_distribution<double> freq(aug.f_min, aug.f_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = static_cast<int>(window.size());
    int a = 0, b = n;
    const double mode = unit(rng);
    if (mode > 0.5 && mode <= 0.75) {
        a = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 5));  // entry
    } else if (mode > 0.75) {
        b = 5 + static_cast<int>(rng() % static_cast<unsigned>(n - 5));  // exit
    }
    const double amplitude = amp(rng);
    const int kind = static_cast<int>(rng() % 4);
    const double f0 = freq(rng), f1 = freq(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = a; i < b && i < n; ++i) {
        const double u = static_cast<double>(i - a) / fs;
        const double span = static_cast<double>(b - a) / fs;
        double v = 0.0;
        switch (kind) {
            case 0:  // chirp
                v = amplitude *
                    std::sin(2.0 * std::numbers::pi * (f0 * u + 0.5 * (f1 - f0) * u * u / span) +
                             phase);
                break;
            case 1:  // bias
                v = amplitude;
                break;
            case 2:  // square burst
                v = amplitude *
                    (std::sin(2.0 * std::numbers::pi * f0 * u + phase) >= 0.0 ? 1.0 : -1.0);
                break;
            default:  // noise burst
                v = amplitude * 0.5 * gauss(rng);
                break;
        }
        window[static_cast<std::size_t>(i)] += v;
    }
}

}  // namespace

WindowSet make_windows(const signal::TimeSeries& clean, int lookback, int horizon, int stride,
                       const AugmentConfig& augment, std::uint64_t seed) {
    if (stride < 1) throw std::invalid_argument("make_windows: stride must be >= 1");
    const long n = static_cast<long>(clean.size());
    const long last_start = n - lookback - horizon;
    if (last_start < 0) throw std::invalid_argument("make_windows: series shorter than one window");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WindowSet out;
    for (long start = 0; start <= last_start; start += stride) {
        std::vector<double> w(clean.samples.begin() + start,
                              clean.samples.begin() + start + lookback);
        const bool corrupt = unit(rng) < augment.probability;
        if (corrupt) inject_augmentation(w, clean.fs, augment, rng);
        out.windows.push_back(std::move(w));
        out.targets.push_back(clean.samples[static_cast<std::size_t>(start + lookback + horizon - 1)]);
        out.augmented.push_back(corrupt);
        out.levels.push_back(0);
        out.starts.push_back(start);
    }
    return out;
}

void tag_window_levels_from_series(WindowSet& set, const signal::TimeSeries& series,
                                   const pipeline::StageOneParams& stage1,
                                   const pipeline::EntropyParams& entropy_params,
                                   std::span<const double> thresholds) {
    const int span = stage1.stack_span();
    if (set.starts.size() != set.windows.size()) {
        throw std::invalid_argument("tag_window_levels_from_series: window starts missing");
    }
    for (std::size_t i = 0; i < set.windows.size(); ++i) {
        const long window_end = set.starts[i] + static_cast<long>(set.windows[i].size());
        const long span_begin = window_end - span;
        if (span_begin < 0) {
            set.levels[i] = 0;
            continue;
        }
        signal::TimeSeries tail;
        tail.fs = stage1.fs;
        tail.samples.assign(series.samples.begin() + span_begin,
                            series.samples.begin() + window_end);
        auto stacks = pipeline::build_stacks(tail, stage1);
        const auto e = pipeline::stack_entropy(stacks.back(), entropy_params);
        set.levels[i] = entropy::complexity_level(e.en, thresholds);
    }
}

void tag_window_levels(WindowSet& set, const pipeline::StageOneParams& stage1,
                       const pipeline::EntropyParams& entropy_params,
                       std::span<const double> thresholds) {
    const int span = stage1.stack_span();
    for (std::size_t i = 0; i < set.windows.size(); ++i) {
        const auto& w = set.windows[i];
        if (static_cast<int>(w.size()) < span) {
            throw std::invalid_argument("tag_window_levels: window shorter than the stack span");
        }
        signal::TimeSeries tail;
        tail.fs = stage1.fs;
        tail.samples.assign(w.end() - span, w.end());
        auto stacks = pipeline::build_stacks(tail, stage1);
        const auto e = pipeline::stack_entropy(stacks.back(), entropy_params);
        set.levels[i] = entropy::complexity_level(e.en, thresholds);
    }
}

std::vector<const forecasters::BaseModel*> TrainedModels::pointers() const {
    std::vector<const forecasters::BaseModel*> out;
    for (const auto& m : models) out.push_back(&m);
    return out;
}

TrainedModels train_base_models(const config::RunConfig& cfg, const WindowSet& set,
                                std::uint64_t seed, bool volatility_weighting,
                                forecasters::Normalization norm) {
    if (set.windows.empty()) throw std::invalid_argument("train_base_models: no windows");
    using forecasters::Architecture;
    const Architecture archs[5] = {Architecture::gru, Architecture::lstm,
                                   Architecture::conv_lstm, Architecture::deep_residual,
                                   Architecture::deep_separable};
    // seeded 70/30 split shared by all models
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(set.windows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = std::max<std::size_t>(1, order.size() * 7 / 10);
    std::vector<std::vector<double>> train_w, val_w;
    std::vector<double> train_t, val_t;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto idx = order[i];
        if (i < n_train) {
            train_w.push_back(set.windows[idx]);
            train_t.push_back(set.targets[idx]);
        } else {
            val_w.push_back(set.windows[idx]);
            val_t.push_back(set.targets[idx]);
        }
    }
    if (val_w.empty()) {
        val_w = train_w;
        val_t = train_t;
    }

    TrainedModels out;
    for (int i = 0; i < cfg.n_models && i < 5; ++i) {
        forecasters::ForecastSpec spec;
        spec.arch = archs[i];
        spec.factors = forecasters::canonical_factors(archs[i]);
        spec.lookback = cfg.lookback;
        spec.horizon = cfg.horizon;
        spec.hidden = cfg.hidden;
        spec.conv_width = cfg.conv_width;
        spec.norm = norm;
        auto model = forecasters::build_architecture(spec, seed + static_cast<std::uint64_t>(i) * 101);
        forecasters::ForecastTrainConfig tc;
        tc.epochs = cfg.forecaster_epochs;
        tc.batch_size = 16;
        tc.lr = 3e-3;
        tc.seed = seed + static_cast<std::uint64_t>(i) * 7 + 1;
        tc.volatility_weighting = volatility_weighting;
        auto result = forecasters::train_forecaster(model, train_w, train_t, tc);
        out.train_rmse.push_back(result.train_rmse);
        out.val_rmse.push_back(forecasters::model_rmse(model, val_w, val_t));
        forecasters::benchmark_inference(model, 25);
        out.models.push_back(std::move(model));
    }
    return out;
}

std::vector<ensemble::LevelValidation> split_validation_by_level(const WindowSet& set,
                                                                 int levels) {
    std::vector<ensemble::LevelValidation> out(static_cast<std::size_t>(levels));
    for (std::size_t i = 0; i < set.windows.size(); ++i) {
        const int lvl = set.levels[i];
        if (lvl < 1 || lvl > levels) continue;
        out[static_cast<std::size_t>(lvl - 1)].windows.push_back(set.windows[i]);
        out[static_cast<std::size_t>(lvl - 1)].targets.push_back(set.targets[i]);
    }
    return out;
}

TestStream make_test_stream(const config::RunConfig& cfg, std::uint64_t seed) {
    // segment schedule (class per span) of the switching-complexity test set,
    // expressed in fractions of the stream length
    struct Segment {
        double begin, end;
        int cls;
    };
    static const Segment schedule[] = {
        {0.000, 0.133, 3}, {0.133, 0.200, 1}, {0.200, 0.267, 3}, {0.267, 0.333, 2},
        {0.333, 0.467, 1}, {0.467, 0.533, 2}, {0.533, 0.667, 3}, {0.667, 0.733, 1},
        {0.733, 0.867, 3}, {0.867, 0.933, 2}, {0.933, 1.000, 3},
    };
    const std::size_t n = cfg.samples / 10;  // a tenth of the training-series length
    TestStream out;
    out.clean.fs = cfg.fs;
    out.received.fs = cfg.fs;
    out.clean.samples.reserve(n);

    std::mt19937_64 rng(seed * 77 + 5);
    std::uniform_real_distribution<double> freq(cfg.freq_min, cfg.freq_max);
    std::uniform_real_distribution<double> amp(cfg.amp_min, cfg.amp_max);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (const auto& seg : schedule) {
        const std::size_t begin = static_cast<std::size_t>(seg.begin * static_cast<double>(n));
        const std::size_t end = static_cast<std::size_t>(seg.end * static_cast<double>(n));
        std::vector<double> f, a, p;
        for (int c = 0; c < cfg.components; ++c) {
            f.push_back(freq(rng));
            a.push_back(amp(rng));
            p.push_back(phase(rng));
        }
        const double noise_amp = amp(rng);
        for (std::size_t i = begin; i < end; ++i) {
            const double t = static_cast<double>(i) / cfg.fs;
            double v = 0.0;
            if (seg.cls == 3) {
                v = noise_amp * gauss(rng);
            } else {
                for (int c = 0; c < cfg.components; ++c) {
                    const double s =
                        std::sin(2.0 * std::numbers::pi * f[static_cast<std::size_t>(c)] * t +
                                 p[static_cast<std::size_t>(c)]);
                    v += seg.cls == 1 ? a[static_cast<std::size_t>(c)] * s
                                      : a[static_cast<std::size_t>(c)] * (s >= 0.0 ? 1.0 : -1.0);
                }
            }
            out.clean.samples.push_back(v);
            out.class_labels.push_back(seg.cls);
        }
    }

    const double duration = static_cast<double>(out.clean.size()) / cfg.fs;
    auto atk = signal::AttackSignal::chirp(cfg.attack_amplitude, cfg.attack_f0, cfg.attack_f1,
                                           std::min(cfg.attack_start, duration * 0.2),
                                           std::min(cfg.attack_end, duration * 0.8));
    out.received = signal::apply_attack(out.clean, atk);
    out.attack.resize(out.clean.size());
    for (std::size_t i = 0; i < out.clean.size(); ++i) {
        out.attack[i] = out.received.samples[i] - out.clean.samples[i];
    }
    return out;
}

SimChannelSetup train_sim_channels(const config::RunConfig& cfg,
                                   std::span<const double> thresholds, std::uint64_t seed) {
    // attack-free run long enough for the leader to finish its mission
    sim::ScenarioConfig scenario = sim::ScenarioConfig::paper_default();
    scenario.robot.ts = cfg.sim_ts;
    scenario.robot.wheel_radius = cfg.wheel_radius;
    scenario.robot.wheelbase = cfg.wheelbase;
    scenario.robot.k_v = cfg.k_v;
    scenario.robot.k_omega = cfg.k_omega;
    scenario.destination = {cfg.dest_x, cfg.dest_y};
    scenario.duration = 45.0;
    auto log = sim::run_formation(scenario);

    const double sim_fs = 1.0 / cfg.sim_ts;
    AugmentConfig aug;
    aug.probability = 0.6;
    aug.amp_min = 0.5;
    aug.amp_max = cfg.attack_amplitude * 1.3;
    aug.f_min = std::min(cfg.attack_f0, cfg.attack_f1) * 0.8;
    aug.f_max = std::max(cfg.attack_f0, cfg.attack_f1) * 1.2;

    SimChannelSetup setup;
    auto append = [&](const WindowSet& ws) {
        setup.training_windows.windows.insert(setup.training_windows.windows.end(),
                                              ws.windows.begin(), ws.windows.end());
        setup.training_windows.targets.insert(setup.training_windows.targets.end(),
                                              ws.targets.begin(), ws.targets.end());
        setup.training_windows.augmented.insert(setup.training_windows.augmented.end(),
                                                ws.augmented.begin(), ws.augmented.end());
        setup.training_windows.levels.insert(setup.training_windows.levels.end(),
                                             ws.levels.begin(), ws.levels.end());
        setup.training_windows.starts.insert(setup.training_windows.starts.end(),
                                             ws.starts.begin(), ws.starts.end());
    };
    for (int axis = 0; axis < 2; ++axis) {
        signal::TimeSeries channel;
        channel.fs = sim_fs;
        channel.samples = log.channel(0, axis);
        append(make_windows(channel, cfg.lookback, cfg.horizon, 2, aug,
                            seed + static_cast<std::uint64_t>(axis) * 13));
    }
    // a synthetic near-linear family covering the channel's offset and rate
    // ranges; position channels are locally linear, which is exactly the
    // prior the reconstruction needs
    {
        std::mt19937_64 rng(seed + 555);
        std::uniform_real_distribution<double> offset(2.0, 50.0);
        std::uniform_real_distribution<double> rate(-2.0, 2.0);
        std::uniform_real_distribution<double> curv(-0.05, 0.05);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const int count = 2200;
        WindowSet synth;
        std::vector<double> w(static_cast<std::size_t>(cfg.lookback));
        for (int i = 0; i < count; ++i) {
            const double a0 = offset(rng), b = rate(rng), c = curv(rng);
            for (int j = 0; j < cfg.lookback; ++j) {
                const double t = static_cast<double>(j) / sim_fs;
                w[static_cast<std::size_t>(j)] = a0 + b * t + c * t * t;
            }
            const double t_target =
                static_cast<double>(cfg.lookback + cfg.horizon - 1) / sim_fs;
            const double target = a0 + b * t_target + c * t_target * t_target;
            std::vector<double> window = w;
            const bool corrupt = unit(rng) < aug.probability;
            if (corrupt) inject_augmentation(window, sim_fs, aug, rng);
            synth.windows.push_back(std::move(window));
            synth.targets.push_back(target);
            synth.augmented.push_back(corrupt);
            synth.levels.push_back(0);
            synth.starts.push_back(-1);
        }
        append(synth);
    }

    // volatility weighting would mute the corrupted windows that teach
    // injection rejection, so the channel models train unweighted
    config::RunConfig sim_cfg = cfg;
    sim_cfg.forecaster_epochs = cfg.forecaster_epochs + 6;
    setup.trained = train_base_models(sim_cfg, setup.training_windows, seed + 991, false,
                                      forecasters::Normalization::window_relative);

    // validation windows tagged by the entropy level of their own trailing
    // stack, then per-level assignment
    WindowSet validation;
    std::mt19937_64 rng(seed + 4242);
    std::vector<std::size_t> order(setup.training_windows.windows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_val = std::min<std::size_t>(order.size(), 150);
    for (std::size_t i = 0; i < n_val; ++i) {
        validation.windows.push_back(setup.training_windows.windows[order[i]]);
        validation.targets.push_back(setup.training_windows.targets[order[i]]);
        validation.augmented.push_back(setup.training_windows.augmented[order[i]]);
        validation.levels.push_back(0);
        validation.starts.push_back(setup.training_windows.starts[order[i]]);
    }
    tag_window_levels(validation, cfg.sim_stage1(), cfg.entropy_params(), thresholds);
    auto per_level = split_validation_by_level(validation, cfg.levels());
    // a quiet channel may never reach the top levels on clean data alone;
    // backfill empty levels with the nearest populated one so assignment has
    // a defined answer for every class the classifier can emit
    for (std::size_t lvl = 0; lvl < per_level.size(); ++lvl) {
        if (!per_level[lvl].windows.empty()) continue;
        for (std::size_t d = 1; d < per_level.size(); ++d) {
            const std::size_t lo = lvl >= d ? lvl - d : per_level.size();
            const std::size_t hi = lvl + d;
            if (lo < per_level.size() && !per_level[lo].windows.empty()) {
                per_level[lvl] = per_level[lo];
                break;
            }
            if (hi < per_level.size() && !per_level[hi].windows.empty()) {
                per_level[lvl] = per_level[hi];
                break;
            }
        }
    }
    setup.table =
        ensemble::assign_models(setup.trained.pointers(), per_level, cfg.epsilon, cfg.tau_c);
    return setup;
}

ScenarioOutcome run_scenario(const config::RunConfig& cfg, int scenario_id,
                             const classifier::ComplexityClassifier& clf,
                             const SimChannelSetup& channels) {
    if (scenario_id != 1 && scenario_id != 2) {
        throw std::invalid_argument("run_scenario: scenario must be 1 or 2");
    }
    sim::ScenarioConfig base = sim::ScenarioConfig::paper_default();
    base.robot.ts = cfg.sim_ts;
    base.robot.wheel_radius = cfg.wheel_radius;
    base.robot.wheelbase = cfg.wheelbase;
    base.robot.k_v = cfg.k_v;
    base.robot.k_omega = cfg.k_omega;
    base.destination = {cfg.dest_x, cfg.dest_y};
    base.duration = cfg.sim_duration;

    ScenarioOutcome out;
    out.clean = sim::run_formation(base);

    sim::ScenarioConfig attacked = base;
    attacked.attack = signal::AttackSignal::chirp(cfg.attack_amplitude, cfg.attack_f0,
                                                  cfg.attack_f1, cfg.attack_start, cfg.attack_end);
    attacked.attack_link = scenario_id == 1 ? sim::LinkTarget::sensor(0) : sim::LinkTarget::link(0, 1);
    out.attacked = sim::run_formation(attacked);

    ensemble::MitigationPipeline pipeline;
    pipeline.stage1 = cfg.sim_stage1();
    pipeline.clf = &clf;
    pipeline.table = &channels.table;
    pipeline.models = channels.trained.pointers();
    pipeline.lookback = cfg.lookback;
    pipeline.horizon = cfg.horizon;
    pipeline.dead_band = cfg.sim_dead_band;

    sim::ScenarioConfig mitigated = attacked;
    mitigated.mitigation = &pipeline;
    out.mitigated = sim::run_formation(mitigated);

    const int target = scenario_id == 1 ? 0 : 1;
    out.deviation_unmitigated = sim::trajectory_deviation_rmse(out.attacked, out.clean, target);
    out.deviation_mitigated = sim::trajectory_deviation_rmse(out.mitigated, out.clean, target);
    return out;
}

}  // namespace fdm::workflows
