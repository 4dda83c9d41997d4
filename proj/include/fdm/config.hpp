#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fdm/pipeline.hpp"

namespace fdm::config {

// One flat bundle of every knob the front-end exposes. Defaults follow the
// desk preset; `paper` restores the full-scale study values.
struct RunConfig {
    std::string preset = "desk";
    std::uint64_t seed = 1;
    int jobs = 1;

    // dataset generation
    std::size_t samples = 15000;
    double fs = 100.0;
    int partitions = 3;
    int components = 3;
    double freq_min = 0.5, freq_max = 2.0;
    double amp_min = 0.5, amp_max = 10.0;

    // framing
    int frame_len = 60;   // M
    int overlap = 54;     // L
    double lambda = 0.6;  // M = round(lambda fs)

    // wavelet
    int scales = 48;      // S
    double beta = 20.0, gamma = 3.0;

    // imaging
    int zeta = 64;
    double kappa = 0.04;  // c' = round(kappa fs)
    int c_prime = 4;

    // entropy
    int dim = 5;          // D
    int delay = 1;        // tau
    int h_min = 2, h_max = 2;
    int folds = 10;       // K
    double rho = 0.6;     // r = floor(rho n)
    // stacks whose entropy sits closer than this to a threshold are dropped
    // from the classifier's supervised set (quantization-noise guard)
    double entropy_margin = 0.05;

    // stage II / ensemble
    double epsilon = 0.4;
    double tau_c = 0.7;
    int lookback = 60;    // k
    int horizon = 1;      // q
    int n_models = 5;
    int hidden = 16;
    int conv_width = 8;
    int stack_stride = 3;      // training-set thinning of highly overlapped stacks
    int classifier_epochs = 14;
    int forecaster_epochs = 6;

    // simulation (mobile-robot study)
    double sim_ts = 0.05;
    double sim_duration = 15.0;
    double wheel_radius = 0.10;
    double wheelbase = 0.50;
    double k_v = 1.0;
    double k_omega = 2.0;
    double dest_x = 4.0, dest_y = 7.0;
    int sim_frame_len = 42;   // mitigation-channel framing at the robot rate
    int sim_overlap = 36;
    double sim_dead_band = 0.25;  // correction dead band on robot channels, m
    double attack_amplitude = 4.0;
    double attack_f0 = 0.2, attack_f1 = 2.0;
    double attack_start = 3.0, attack_end = 10.0;

    int levels() const;  // r = floor(rho * n_models)
    pipeline::StageOneParams stage1() const;
    pipeline::StageOneParams sim_stage1() const;
    pipeline::EntropyParams entropy_params() const;

    std::string canonical_string() const;
    std::string hash() const;  // hex fnv-1a of the canonical string
    // header comments for generated files: config hash + seed
    std::vector<std::string> stamp() const;
};

RunConfig preset(const std::string& name);  // "paper" or "desk"

// key=value file; unknown keys are an error, omitted keys keep preset values
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

// apply a single key=value override (CLI flags reuse the file keys)
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace fdm::config
