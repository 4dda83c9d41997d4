#include "fdm/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace fdm::entropy {

FusedSeries binarize_and_fuse(const imaging::ScalogramStack& stack) {
    if (stack.side < 1 || stack.channels < 1 || stack.pixels.empty()) {
        throw std::invalid_argument("binarize_and_fuse: empty stack");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : stack.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double tau = lo + (hi - lo) / 2.0;

    // Linear scan: per time column, count above-threshold pixels across the
    // scale axis, then fuse the per-channel count series by product.
    FusedSeries out;
    out.threshold = tau;
    out.values.assign(static_cast<std::size_t>(stack.side), 1.0);
    for (int ch = 0; ch < stack.channels; ++ch) {
        for (int c = 0; c < stack.side; ++c) {
            double count = 0.0;
            for (int r = 0; r < stack.side; ++r) {
                if (stack.at(r, c, ch) > tau) count += 1.0;
            }
            out.values[static_cast<std::size_t>(c)] *= count;
        }
    }
    return out;
}

EmbeddingSpace embed(const FusedSeries& series, int dim, int delay) {
    if (dim < 1) throw std::invalid_argument("embed: dimension must be >= 1");
    if (delay < 1) throw std::invalid_argument("embed: delay must be >= 1");
    const long n = static_cast<long>(series.size());
    const long rows = n - static_cast<long>(dim - 1) * delay;
    if (rows < 1) {
        throw std::invalid_argument("embed: series too short for (D-1)*tau + 1 samples");
    }
    EmbeddingSpace e;
    e.dim = dim;
    e.delay = delay;
    e.rows = static_cast<int>(rows);
    e.data.resize(static_cast<std::size_t>(rows) * dim);
    for (long j = 0; j < rows; ++j) {
        for (int k = 0; k < dim; ++k) {
            e.data[static_cast<std::size_t>(j) * dim + k] =
                series.values[static_cast<std::size_t>(j + static_cast<long>(k) * delay)];
        }
    }
    return e;
}

SymbolicSpace symbolize(const EmbeddingSpace& e, int levels) {
    if (levels < 2) throw std::invalid_argument("symbolize: H must be >= 2");
    if (e.rows < 1) throw std::invalid_argument("symbolize: empty embedding");

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : e.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    SymbolicSpace q;
    q.levels = levels;
    q.y_min = lo;
    q.delta = (hi - lo) / static_cast<double>(levels);
    q.rows = e.rows;
    q.dim = e.dim;
    q.data.assign(static_cast<std::size_t>(e.rows) * e.dim, 0);
    if (q.delta <= 0.0) return q;  // degenerate constant input: every symbol 0

    for (int j = 0; j < e.rows; ++j) {
        const double first = e.at(j, 0);
        long long s0 = static_cast<long long>(std::floor((first - lo) / q.delta));
        s0 = std::clamp<long long>(s0, 0, levels - 1);  // closed top bin
        q.data[static_cast<std::size_t>(j) * e.dim] = s0;
        for (int k = 1; k < e.dim; ++k) {
            const long long off =
                static_cast<long long>(std::floor((e.at(j, k) - first) / q.delta));
            q.data[static_cast<std::size_t>(j) * e.dim + k] = s0 + off;
        }
    }
    return q;
}

double normalized_entropy(const SymbolicSpace& q) {
    if (q.rows < 1) throw std::invalid_argument("normalized_entropy: empty symbolic space");
    // count unique rows; map keeps the reduction order deterministic
    std::map<std::vector<long long>, long> counts;
    std::vector<long long> row(static_cast<std::size_t>(q.dim));
    for (int j = 0; j < q.rows; ++j) {
        for (int k = 0; k < q.dim; ++k) row[static_cast<std::size_t>(k)] = q.at(j, k);
        ++counts[row];
    }
    const double n = static_cast<double>(q.rows);
    double h = 0.0;
    for (const auto& [pattern, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    const double h_max = static_cast<double>(q.dim) * std::log(static_cast<double>(q.levels));
    double en = h / h_max;
    if (en > 1.0 || en < 0.0) {
        std::clog << "normalized_entropy: clamping value " << en << " into [0,1]\n";
        en = std::clamp(en, 0.0, 1.0);
    }
    return en;
}

double entropy_of_series(std::span<const double> values, int dim, int delay, int levels) {
    FusedSeries s;
    s.values.assign(values.begin(), values.end());
    return normalized_entropy(symbolize(embed(s, dim, delay), levels));
}

HSelection select_h(const FusedSeries& series, int dim, int delay, int h_min, int h_max,
                    int folds, std::uint64_t /*seed*/) {
    if (h_min < 2 || h_max < h_min) throw std::invalid_argument("select_h: need Hmax >= Hmin >= 2");
    if (folds < 2) throw std::invalid_argument("select_h: need K >= 2");
    const long n = static_cast<long>(series.size());
    const long min_len = static_cast<long>(dim - 1) * delay + 1;

    // contiguous fold boundaries; fold i gets the remainder spread first
    std::vector<std::pair<long, long>> bounds;  // [begin, end)
    {
        const long base = n / folds;
        const long rem = n % folds;
        long pos = 0;
        for (int i = 0; i < folds; ++i) {
            const long len = base + (i < rem ? 1 : 0);
            bounds.emplace_back(pos, pos + len);
            pos += len;
        }
    }
    for (int i = 0; i < folds; ++i) {
        if (bounds[static_cast<std::size_t>(i)].second - bounds[static_cast<std::size_t>(i)].first <
            min_len) {
            throw std::invalid_argument("select_h: fold " + std::to_string(i + 1) +
                                        " too short to embed");
        }
    }

    HSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (int h = h_min; h <= h_max; ++h) {
        double err = 0.0;
        for (int i = 0; i < folds; ++i) {
            const auto [vb, ve] = bounds[static_cast<std::size_t>(i)];
            std::vector<double> val(series.values.begin() + vb, series.values.begin() + ve);
            std::vector<double> train;
            train.reserve(static_cast<std::size_t>(n - (ve - vb)));
            train.insert(train.end(), series.values.begin(), series.values.begin() + vb);
            train.insert(train.end(), series.values.begin() + ve, series.values.end());
            const double en_tr = entropy_of_series(train, dim, delay, h);
            const double en_vl = entropy_of_series(val, dim, delay, h);
            err += std::abs(en_tr - en_vl);
        }
        err /= static_cast<double>(folds);
        sel.err_curve.emplace_back(h, err);
        if (err < best) {
            best = err;
            sel.h_star = h;
        }
    }
    return sel;
}

int complexity_level(double en, std::span<const double> thresholds) {
    for (std::size_t i = 0; i + 1 < thresholds.size(); ++i) {
        if (!(thresholds[i] < thresholds[i + 1])) {
            throw std::invalid_argument("complexity_level: thresholds must be strictly increasing");
        }
    }
    int level = 1;
    for (double t : thresholds) {
        if (en >= t) ++level;
    }
    return level;
}

std::vector<double> fit_thresholds(std::span<const double> entropies, std::span<const int> labels,
                                   int classes) {
    if (entropies.size() != labels.size()) {
        throw std::invalid_argument("fit_thresholds: size mismatch");
    }
    if (classes < 2) throw std::invalid_argument("fit_thresholds: need at least two classes");

    std::vector<double> thresholds;
    double floor_t = 0.0;
    for (int k = 1; k < classes; ++k) {
        // separate class k (below) from class k+1 (at-or-above)
        std::vector<double> lo_vals, hi_vals;
        for (std::size_t i = 0; i < entropies.size(); ++i) {
            if (labels[i] == k) lo_vals.push_back(entropies[i]);
            if (labels[i] == k + 1) hi_vals.push_back(entropies[i]);
        }
        if (lo_vals.empty() || hi_vals.empty()) {
            throw std::invalid_argument("fit_thresholds: class " + std::to_string(k) + " or " +
                                        std::to_string(k + 1) + " has no samples");
        }
        std::vector<double> pool;
        pool.insert(pool.end(), lo_vals.begin(), lo_vals.end());
        pool.insert(pool.end(), hi_vals.begin(), hi_vals.end());
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

        double best_t = pool.front();
        long best_score = -1;
        auto score_of = [&](double t) {
            long s = 0;
            for (double v : lo_vals) s += (v < t) ? 1 : 0;
            for (double v : hi_vals) s += (v >= t) ? 1 : 0;
            return s;
        };
        for (std::size_t i = 0; i + 1 < pool.size(); ++i) {
            const double t = 0.5 * (pool[i] + pool[i + 1]);
            const long s = score_of(t);
            if (s > best_score) {
                best_score = s;
                best_t = t;
            }
        }
        if (pool.size() == 1) best_t = pool.front();
        // keep the sequence strictly increasing even on degenerate data
        if (!thresholds.empty() && best_t <= floor_t) {
            best_t = std::nextafter(floor_t, 1.0);
        }
        thresholds.push_back(best_t);
        floor_t = best_t;
    }
    return thresholds;
}

}  // namespace fdm::entropy
