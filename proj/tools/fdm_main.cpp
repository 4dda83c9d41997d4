#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdm/io/csv.hpp"
#include "fdm/io/num.hpp"
#include "fdm/io/svg.hpp"
#include "fdm/workflows.hpp"

namespace fs = std::filesystem;
using namespace fdm;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Paths {
    fs::path workdir;
    fs::path dataset() const { return workdir / "dataset.csv"; }
    fs::path stacks() const { return workdir / "stacks.bin"; }
    fs::path stack_index() const { return workdir / "stacks_index.csv"; }
    fs::path entropy() const { return workdir / "entropy.csv"; }
    fs::path thresholds() const { return workdir / "thresholds.csv"; }
    fs::path classifier() const { return workdir / "classifier.ckpt"; }
    fs::path classifier_report(const std::string& split) const {
        return workdir / ("classifier_" + split + "_report.csv");
    }
    fs::path model(const std::string& arch) const { return workdir / ("model_" + arch + ".ckpt"); }
    fs::path manifest() const { return workdir / "forecasters_manifest.csv"; }
    fs::path assignment() const { return workdir / "assignment.csv"; }
    fs::path compare() const { return workdir / "compare.csv"; }
    fs::path ablate() const { return workdir / "ablate_stage1.csv"; }
    fs::path sweep() const { return workdir / "overlap_sweep.csv"; }
    fs::path summary() const { return workdir / "run_summary.txt"; }
};

void require(bool ok, const std::string& what, const std::string& prior_command) {
    if (!ok) {
        throw CliError(what + " is missing; run `fdm " + prior_command + "` first");
    }
}

signal::GeneratorConfig generator_config(const config::RunConfig& cfg) {
    signal::GeneratorConfig gc;
    gc.total_samples = cfg.samples;
    gc.fs = cfg.fs;
    gc.partitions = cfg.partitions;
    gc.components = cfg.components;
    gc.freq_min = cfg.freq_min;
    gc.freq_max = cfg.freq_max;
    gc.amp_min = cfg.amp_min;
    gc.amp_max = cfg.amp_max;
    gc.seed = cfg.seed;
    return gc;
}

std::vector<std::string> model_archs() {
    return {"gru", "lstm", "conv_lstm", "deep_residual", "deep_separable"};
}

// ---- artifact io ------------------------------------------------------------

void write_thresholds(const Paths& paths, const config::RunConfig& cfg,
                      std::span<const double> thresholds) {
    io::CsvWriter w(paths.thresholds());
    for (const auto& c : cfg.stamp()) w.comment(c);
    w.row({"k", "tau_e"});
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        w.row({std::to_string(i + 1), io::format_double(thresholds[i])});
    }
}

std::vector<double> read_thresholds(const Paths& paths) {
    auto f = io::read_csv_file(paths.thresholds());
    std::vector<double> out;
    for (const auto& r : f.rows) out.push_back(io::parse_double(r.at(1)));
    return out;
}



classifier::ClassifierConfig classifier_config(const config::RunConfig& cfg) {
    classifier::ClassifierConfig cc;
    cc.input_side = cfg.zeta;
    cc.channels = cfg.c_prime;
    cc.classes = cfg.levels();
    return cc;
}

classifier::ComplexityClassifier load_classifier(const Paths& paths,
                                                 const config::RunConfig& cfg) {
    require(fs::exists(paths.classifier()), "classifier checkpoint", "train-classifier");
    classifier::ComplexityClassifier clf(classifier_config(cfg), 0);
    clf.load(paths.classifier());
    return clf;
}

workflows::TrainedModels load_models(const Paths& paths, const config::RunConfig& cfg) {
    workflows::TrainedModels out;
    const auto archs = model_archs();
    for (int i = 0; i < cfg.n_models && i < static_cast<int>(archs.size()); ++i) {
        const auto path = paths.model(archs[static_cast<std::size_t>(i)]);
        require(fs::exists(path), "forecaster checkpoint " + archs[static_cast<std::size_t>(i)],
                "train-forecasters");
        forecasters::ForecastSpec spec;
        spec.arch = forecasters::architecture_from_name(archs[static_cast<std::size_t>(i)]);
        spec.factors = forecasters::canonical_factors(spec.arch);
        spec.lookback = cfg.lookback;
        spec.horizon = cfg.horizon;
        spec.hidden = cfg.hidden;
        spec.conv_width = cfg.conv_width;
        auto model = forecasters::build_architecture(spec, 0);
        model.load(path);
        out.models.push_back(std::move(model));
    }
    return out;
}

signal::LabeledSeries load_dataset(const Paths& paths) {
    require(fs::exists(paths.dataset()), "dataset", "gen-data");
    return signal::read_series_csv(paths.dataset());
}

workflows::WindowSet dataset_windows(const config::RunConfig& cfg,
                                     const signal::LabeledSeries& data, bool augmented) {
    workflows::AugmentConfig aug;
    aug.probability = augmented ? 0.5 : 0.0;
    aug.amp_max = cfg.attack_amplitude * 1.3;
    return workflows::make_windows(data.series, cfg.lookback, cfg.horizon,
                                   std::max(1, cfg.stack_stride * 2), aug, cfg.seed + 311);
}

ensemble::MitigationPipeline dataset_pipeline(const config::RunConfig& cfg,
                                              const classifier::ComplexityClassifier& clf,
                                              const ensemble::AssignmentTable& table,
                                              const workflows::TrainedModels& models) {
    ensemble::MitigationPipeline p;
    p.stage1 = cfg.stage1();
    p.clf = &clf;
    p.table = &table;
    p.models = models.pointers();
    p.lookback = cfg.lookback;
    p.horizon = cfg.horizon;
    return p;
}

// ---- subcommands ------------------------------------------------------------

int cmd_gen_data(const config::RunConfig& cfg, const Paths& paths) {
    auto data = signal::generate_complexity_dataset(generator_config(cfg));
    signal::write_series_csv(paths.dataset(), data.series, &data.labels, cfg.stamp());
    std::cout << "wrote " << paths.dataset().string() << " (" << data.series.size()
              << " samples, " << cfg.partitions << " partitions)\n";
    return 0;
}

int cmd_label(const config::RunConfig& cfg, const Paths& paths) {
    auto data = load_dataset(paths);
    auto result = workflows::label_dataset(cfg, data);
    imaging::write_stack_file(paths.stacks(), result.stacks);
    imaging::write_stack_index(paths.stack_index(), result.index, cfg.stamp());
    {
        io::CsvWriter w(paths.entropy());
        for (const auto& c : cfg.stamp()) w.comment(c);
        w.row({"stackIndex", "En", "Hstar", "level"});
        for (std::size_t i = 0; i < result.stacks.size(); ++i) {
            w.row({std::to_string(i), io::format_double(result.entropies[i].en),
                   std::to_string(result.entropies[i].h_star), std::to_string(result.levels[i])});
        }
    }
    write_thresholds(paths, cfg, result.thresholds);
    std::cout << "frames: N_m=" << result.frames_formula
              << " (windowing formula), realized=" << result.frames_realized << "\n";
    std::cout << "stacks labeled: " << result.stacks.size() << " (stride " << cfg.stack_stride
              << "), thresholds:";
    for (double t : result.thresholds) std::cout << ' ' << io::format_double(t);
    std::cout << '\n';
    return 0;
}

int cmd_train_classifier(const config::RunConfig& cfg, const Paths& paths) {
    require(fs::exists(paths.stacks()), "stack file", "label");
    auto stacks = imaging::read_stack_file(paths.stacks());
    auto entropy_rows = io::read_csv_file(paths.entropy());
    std::vector<int> levels;
    for (const auto& r : entropy_rows.rows) levels.push_back(static_cast<int>(io::parse_long(r.at(3))));
    if (levels.size() != stacks.size()) throw CliError("entropy report does not match the stacks");

    // rebuild entropies for the margin filter from the report
    workflows::LabelResult labeled;
    labeled.stacks = std::move(stacks);
    for (const auto& r : entropy_rows.rows) {
        labeled.entropies.push_back({io::parse_double(r.at(1)),
                                     static_cast<int>(io::parse_long(r.at(2)))});
    }
    labeled.levels = levels;
    labeled.thresholds = read_thresholds(paths);
    auto supervised = workflows::make_classifier_dataset(labeled, cfg.entropy_margin);

    classifier::ComplexityClassifier clf(classifier_config(cfg), cfg.seed + 17);
    classifier::ClassifierTrainConfig tc;
    tc.epochs = cfg.classifier_epochs;
    tc.seed = cfg.seed + 29;
    auto outcome = classifier::train_classifier(clf, supervised.stacks, supervised.levels, tc);
    clf.save(paths.classifier());
    metrics::write_report_csv(paths.classifier_report("train"), outcome.train_report, cfg.stamp());
    metrics::write_report_csv(paths.classifier_report("val"), outcome.val_report, cfg.stamp());
    std::cout << "classifier: train acc " << outcome.train_report.accuracy << "%, val acc "
              << outcome.val_report.accuracy << "% (" << outcome.train_count << "/"
              << outcome.val_count << " split)\n";
    return 0;
}

int cmd_train_forecasters(const config::RunConfig& cfg, const Paths& paths) {
    auto data = load_dataset(paths);
    auto windows = dataset_windows(cfg, data, true);
    auto trained = workflows::train_base_models(cfg, windows, cfg.seed + 47);
    const auto archs = model_archs();
    io::CsvWriter w(paths.manifest());
    for (const auto& c : cfg.stamp()) w.comment(c);
    w.row({"modelId", "architecture", "trainRMSE", "valRMSE", "T_l_seconds"});
    for (std::size_t i = 0; i < trained.models.size(); ++i) {
        trained.models[i].save(paths.model(archs[i]));
        w.row({std::to_string(i), archs[i], io::format_double(trained.train_rmse[i]),
               io::format_double(trained.val_rmse[i]),
               io::format_double(trained.models[i].inference_time())});
        std::cout << archs[i] << ": train RMSE " << trained.train_rmse[i] << ", val RMSE "
                  << trained.val_rmse[i] << ", T " << trained.models[i].inference_time() * 1e3
                  << " ms\n";
    }
    return 0;
}

int cmd_assign(const config::RunConfig& cfg, const Paths& paths) {
    require(fs::exists(paths.thresholds()), "threshold table", "label");
    auto data = load_dataset(paths);
    auto models = load_models(paths, cfg);
    auto thresholds = read_thresholds(paths);

    auto windows = dataset_windows(cfg, data, false);
    workflows::tag_window_levels_from_series(windows, data.series, cfg.stage1(),
                                             cfg.entropy_params(), thresholds);
    auto per_level = workflows::split_validation_by_level(windows, cfg.levels());
    auto table = ensemble::assign_models(models.pointers(), per_level, cfg.epsilon, cfg.tau_c);
    ensemble::write_assignment_csv(paths.assignment(), table, model_archs(), cfg.stamp());
    for (const auto& e : table.per_level) {
        std::cout << "level " << e.level << " -> "
                  << model_archs()[static_cast<std::size_t>(e.model_id)] << " (val RMSE "
                  << e.val_rmse << ", T " << e.t_infer * 1e3 << " ms)\n";
    }
    return 0;
}

int cmd_compare(const config::RunConfig& cfg, const Paths& paths) {
    auto clf = load_classifier(paths, cfg);
    auto models = load_models(paths, cfg);
    require(fs::exists(paths.assignment()), "assignment table", "assign");
    auto table = ensemble::read_assignment_csv(paths.assignment());
    auto stream = workflows::make_test_stream(cfg, cfg.seed + 5);
    auto pipeline = dataset_pipeline(cfg, clf, table, models);
    auto report = ensemble::compare_frameworks(stream.received, stream.attack, pipeline);

    io::CsvWriter w(paths.compare());
    for (const auto& c : cfg.stamp()) w.comment(c);
    w.row({"model", "RMSE_m", "Imp_percent", "T_infr_ms"});
    for (const auto& row : report.rows) {
        w.row({row.name, io::format_double(row.rmse_attack), io::format_double(row.improvement),
               io::format_double(row.t_infer_ms)});
        std::cout << row.name << ": RMSE " << row.rmse_attack << " m, Imp " << row.improvement
                  << "%, T_infr " << row.t_infer_ms << " ms\n";
    }
    return 0;
}

int cmd_ablate(const config::RunConfig& cfg, const Paths& paths) {
    auto clf = load_classifier(paths, cfg);
    auto models = load_models(paths, cfg);
    require(fs::exists(paths.assignment()), "assignment table", "assign");
    auto table = ensemble::read_assignment_csv(paths.assignment());
    auto stream = workflows::make_test_stream(cfg, cfg.seed + 5);
    auto pipeline = dataset_pipeline(cfg, clf, table, models);

    auto report = ensemble::compare_frameworks(stream.received, stream.attack, pipeline);
    const double stacked = report.rows.front().rmse_attack;
    // the three-model subset keeps the endpoints of the capacity ladder
    const std::vector<int> subset3{0, 2, 4};
    std::vector<int> subset5;
    for (std::size_t i = 0; i < models.models.size(); ++i) subset5.push_back(static_cast<int>(i));
    auto avg3 = ensemble::averaging_baseline(stream.received, stream.attack, pipeline, subset3);
    auto avg5 = ensemble::averaging_baseline(stream.received, stream.attack, pipeline, subset5);

    io::CsvWriter w(paths.ablate());
    for (const auto& c : cfg.stamp()) w.comment(c);
    w.row({"framework", "n", "RMSE_m", "T_infr_ms"});
    w.row({"averaging", "3", io::format_double(avg3.rmse_attack), io::format_double(avg3.t_infer_ms)});
    w.row({"averaging", "5", io::format_double(avg5.rmse_attack), io::format_double(avg5.t_infer_ms)});
    w.row({"stacked", std::to_string(models.models.size()), io::format_double(stacked),
           io::format_double(report.rows.front().t_infer_ms)});
    std::cout << "averaging n=3: " << avg3.rmse_attack << " m | averaging n=5: "
              << avg5.rmse_attack << " m | stacked: " << stacked << " m\n";
    return 0;
}

int cmd_sweep_overlap(const config::RunConfig& cfg, const Paths& paths) {
    auto clf = load_classifier(paths, cfg);
    auto models = load_models(paths, cfg);
    require(fs::exists(paths.assignment()), "assignment table", "assign");
    auto table = ensemble::read_assignment_csv(paths.assignment());
    auto stream = workflows::make_test_stream(cfg, cfg.seed + 5);

    io::CsvWriter w(paths.sweep());
    for (const auto& c : cfg.stamp()) w.comment(c);
    w.row({"L", "N_I", "RMSE_m", "T_infr_ms"});
    for (int overlap : {15, 30, 45, 54, 59}) {
        config::RunConfig swept = cfg;
        swept.overlap = overlap;
        auto pipeline = dataset_pipeline(swept, clf, table, models);
        auto report = ensemble::compare_frameworks(stream.received, stream.attack, pipeline);
        w.row({std::to_string(overlap), std::to_string(report.stacked_timing.segments),
               io::format_double(report.rows.front().rmse_attack),
               io::format_double(report.rows.front().t_infer_ms)});
        std::cout << "L=" << overlap << ": N_I=" << report.stacked_timing.segments << ", RMSE "
                  << report.rows.front().rmse_attack << " m, T_infr "
                  << report.rows.front().t_infer_ms << " ms\n";
    }
    return 0;
}

int cmd_mitigate(const config::RunConfig& cfg, const Paths& paths, int scenario) {
    auto clf = load_classifier(paths, cfg);
    require(fs::exists(paths.thresholds()), "threshold table", "label");
    auto thresholds = read_thresholds(paths);
    auto channels = workflows::train_sim_channels(cfg, thresholds, cfg.seed + 1009);
    auto outcome = workflows::run_scenario(cfg, scenario, clf, channels);

    const std::string tag = "scenario" + std::to_string(scenario);
    const auto link = scenario == 1 ? sim::LinkTarget::sensor(0) : sim::LinkTarget::link(0, 1);
    sim::write_trajectory_csv(paths.workdir / (tag + "_clean.csv"), outcome.clean,
                              sim::LinkTarget::none_link(), false, cfg.stamp());
    sim::write_trajectory_csv(paths.workdir / (tag + "_attacked.csv"), outcome.attacked, link,
                              false, cfg.stamp());
    sim::write_trajectory_csv(paths.workdir / (tag + "_mitigated.csv"), outcome.mitigated, link,
                              true, cfg.stamp());
    ensemble::write_mitigation_csv(paths.workdir / (tag + "_records_x.csv"),
                                   outcome.mitigated.mitigation_x, {}, cfg.stamp());

    const int target = scenario == 1 ? 0 : 1;
    io::SvgSeries ref{"reference", "#444444", {}, {}};
    io::SvgSeries atk{"uncompensated", "#cc3322", {}, {}};
    io::SvgSeries mit{"mitigated", "#2277cc", {}, {}};
    for (std::size_t i = 0; i < outcome.clean.times.size(); ++i) {
        ref.x.push_back(outcome.clean.trajectories[static_cast<std::size_t>(target)][i].x1);
        ref.y.push_back(outcome.clean.trajectories[static_cast<std::size_t>(target)][i].x2);
        atk.x.push_back(outcome.attacked.trajectories[static_cast<std::size_t>(target)][i].x1);
        atk.y.push_back(outcome.attacked.trajectories[static_cast<std::size_t>(target)][i].x2);
        mit.x.push_back(outcome.mitigated.trajectories[static_cast<std::size_t>(target)][i].x1);
        mit.y.push_back(outcome.mitigated.trajectories[static_cast<std::size_t>(target)][i].x2);
    }
    io::write_svg_lines(paths.workdir / (tag + "_trajectory.svg"),
                        "robot " + std::to_string(target + 1) + " trajectory", "x1 (m)", "x2 (m)",
                        {ref, atk, mit});

    std::ofstream summary(paths.summary(), std::ios::app);
    summary << tag << ": unmitigated deviation RMSE " << outcome.deviation_unmitigated
            << " m, mitigated " << outcome.deviation_mitigated << " m\n";
    std::cout << tag << ": unmitigated deviation RMSE " << outcome.deviation_unmitigated
              << " m, mitigated " << outcome.deviation_mitigated << " m\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage scalogram/entropy pipeline for online mitigation of injected sensor faults"};
    app.require_subcommand(1);

    std::string workdir = "fdm_work";
    std::string preset_name = "desk";
    std::string config_file;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool have_seed = false;
    int jobs = 0;

    app.add_option("--workdir", workdir, "directory for all inputs and outputs");
    app.add_option("--preset", preset_name, "configuration preset: desk or paper");
    app.add_option("--config", config_file, "key=value config file (overrides the preset)");
    app.add_option("--set", overrides, "config override key=value (repeatable)")->take_all();
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--jobs", jobs, "worker threads for frame processing (default 1)");

    auto* gen = app.add_subcommand("gen-data", "generate the three-class training series");
    auto* label = app.add_subcommand("label", "build stacks and entropy-based complexity labels");
    auto* trainc = app.add_subcommand("train-classifier", "train the complexity classifier");
    auto* trainf = app.add_subcommand("train-forecasters", "train the base forecasting models");
    auto* assign = app.add_subcommand("assign", "assign base models to complexity levels");
    auto* compare = app.add_subcommand("compare", "stacked selection vs individual base models");
    auto* ablate = app.add_subcommand("ablate-stage1", "averaging baseline without model selection");
    auto* sweep = app.add_subcommand("sweep-overlap", "overlap sweep of accuracy and inference time");
    auto* mitigate = app.add_subcommand("mitigate", "closed-loop formation run with mitigation");
    int scenario = 1;
    mitigate->add_option("--scenario", scenario, "1 = own sensor, 2 = inter-robot link")
        ->check(CLI::Range(1, 2));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        config::RunConfig cfg = config_file.empty() ? config::preset(preset_name)
                                                    : config::load_config(config_file);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CliError("--set expects key=value, got " + kv);
            config::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (*seed_opt) {
            have_seed = true;
            cfg.seed = seed;
        }
        (void)have_seed;
        if (jobs > 0) cfg.jobs = jobs;

        Paths paths{fs::path(workdir)};
        fs::create_directories(paths.workdir);
        config::save_config(paths.workdir / "config.used.cfg", cfg);

        if (*gen) return cmd_gen_data(cfg, paths);
        if (*label) return cmd_label(cfg, paths);
        if (*trainc) return cmd_train_classifier(cfg, paths);
        if (*trainf) return cmd_train_forecasters(cfg, paths);
        if (*assign) return cmd_assign(cfg, paths);
        if (*compare) return cmd_compare(cfg, paths);
        if (*ablate) return cmd_ablate(cfg, paths);
        if (*sweep) return cmd_sweep_overlap(cfg, paths);
        if (*mitigate) return cmd_mitigate(cfg, paths, scenario);
        throw CliError("no subcommand");
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
}
