#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fdm/imaging.hpp"

namespace fdm::entropy {

// Per-time-column binarized activity counts of a stack, fused across channels
// by elementwise product. Length equals the stack side.
struct FusedSeries {
    std::vector<double> values;
    double threshold = 0.0;  // binarization threshold used

    std::size_t size() const { return values.size(); }
};

struct EmbeddingSpace {
    int dim = 0;    // D
    int delay = 0;  // tau
    int rows = 0;   // N_D = len - (D-1)*tau
    std::vector<double> data;  // rows x dim, row-major

    double at(int j, int k) const { return data[static_cast<std::size_t>(j) * dim + k]; }
};

struct SymbolicSpace {
    int levels = 0;    // H
    double delta = 0;  // bin width (y_max - y_min)/H
    double y_min = 0;
    int rows = 0, dim = 0;
    std::vector<long long> data;  // rows x dim

    long long at(int j, int k) const { return data[static_cast<std::size_t>(j) * dim + k]; }
};

struct EntropyReport {
    double en = 0.0;    // normalized entropy in [0,1]
    int h_star = 0;     // selected quantization levels
    std::vector<std::pair<int, double>> err_curve;  // (H, Err(H))
    int level = 0;      // complexity level in 1..r
};

// Threshold is half-way between the stack's min and max; binarization keeps
// strict inequality, so a constant stack binarizes to all zeros. Per channel,
// each time column's above-threshold pixels are counted along the scale axis,
// then the count series are fused by product across channels.
FusedSeries binarize_and_fuse(const imaging::ScalogramStack& stack);

EmbeddingSpace embed(const FusedSeries& series, int dim, int delay);

// Uniform quantization of the first column over the embedding's value range;
// later columns are offset by floor((E(j,k) - E(j,1)) / delta) and may fall
// outside [0, H-1] (pattern identity is what matters). A degenerate range
// maps every symbol to 0.
SymbolicSpace symbolize(const EmbeddingSpace& e, int levels);

// -sum p ln p / ln(H^D) over observed pattern frequencies, clamped to [0,1].
double normalized_entropy(const SymbolicSpace& q);

double entropy_of_series(std::span<const double> values, int dim, int delay, int levels);

struct HSelection {
    int h_star = 0;
    std::vector<std::pair<int, double>> err_curve;
};

// K-fold cross-validation over contiguous folds: Err(H) is the mean
// |En(train) - En(val)|; ties break toward smaller H. Each subset is
// symbolized with its own bounds. The seed is accepted for config parity but
// fold layout is deterministic.
HSelection select_h(const FusedSeries& series, int dim, int delay, int h_min, int h_max,
                    int folds, std::uint64_t seed = 0);

// Level 1 below the first threshold, level r at or above the last;
// intermediate bins are left-closed above.
int complexity_level(double en, std::span<const double> thresholds);

// Decision-stump thresholds between adjacent classes, fitted on labeled
// entropy values (labels 1..r). Maximizes per-pair separation accuracy.
std::vector<double> fit_thresholds(std::span<const double> entropies, std::span<const int> labels,
                                   int classes);

}  // namespace fdm::entropy
