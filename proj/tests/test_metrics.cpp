#include <vector>

#include "doctest.h"
#include "fdm/metrics.hpp"

using namespace fdm;

TEST_CASE("all-correct predictions give accuracy 100 and a diagonal matrix") {
    std::vector<int> labels{1, 2, 3, 1, 2, 3};
    auto r = metrics::classification_report(labels, labels, 3);
    CHECK(r.accuracy == 100.0);
    for (int p = 0; p < 3; ++p) {
        for (int a = 0; a < 3; ++a) {
            CHECK(r.at(p, a) == (p == a ? 2 : 0));
        }
    }
}

TEST_CASE("the study's confusion matrix margins are reproduced") {
    // rows (pred) x columns (actual): {76,7,1},{0,57,0},{0,0,100}
    std::vector<int> preds, labels;
    auto add = [&](int pred, int actual, int count) {
        for (int i = 0; i < count; ++i) {
            preds.push_back(pred);
            labels.push_back(actual);
        }
    };
    add(1, 1, 76);
    add(1, 2, 7);
    add(1, 3, 1);
    add(2, 2, 57);
    add(3, 3, 100);
    auto r = metrics::classification_report(preds, labels, 3);
    CHECK(r.at(0, 0) == 76);
    CHECK(r.at(1, 1) == 57);
    REQUIRE(r.precision[1].has_value());
    CHECK(*r.precision[1] == 100.0);
    REQUIRE(r.recall[1].has_value());
    CHECK(*r.recall[1] == doctest::Approx(100.0 * 57.0 / 64.0));  // 89.06
    CHECK(r.accuracy == doctest::Approx(100.0 * 233.0 / 241.0));
}

TEST_CASE("degenerate single-class data reports absent precision, not zero") {
    std::vector<int> preds{1, 1, 1};
    std::vector<int> labels{1, 1, 1};
    auto r = metrics::classification_report(preds, labels, 2);
    CHECK(r.precision[0].has_value());
    CHECK_FALSE(r.precision[1].has_value());
    CHECK_FALSE(r.recall[1].has_value());
}

TEST_CASE("out-of-range labels are rejected") {
    std::vector<int> preds{1, 4};
    std::vector<int> labels{1, 2};
    CHECK_THROWS_AS(metrics::classification_report(preds, labels, 3), std::invalid_argument);
}

TEST_CASE("percentages recompute from raw counts") {
    std::vector<int> preds{1, 2, 1, 3, 2, 2, 3, 1};
    std::vector<int> labels{1, 2, 2, 3, 2, 1, 3, 1};
    auto r = metrics::classification_report(preds, labels, 3);
    long correct = 0, total = 0;
    for (int p = 0; p < 3; ++p) {
        for (int a = 0; a < 3; ++a) {
            total += r.at(p, a);
            if (p == a) correct += r.at(p, a);
        }
    }
    CHECK(r.accuracy == doctest::Approx(100.0 * correct / total).epsilon(1e-9));
}

TEST_CASE("timing formula limits") {
    // T_f = T_c = 0: per-sample inference is the mean forecast time
    std::vector<metrics::TimingSample> samples{{0.0, 0.0, 0.002}, {0.0, 0.0, 0.004}};
    auto r = metrics::timing_report(samples, 60, 54);
    CHECK(r.t_infer_mean == doctest::Approx(0.003).epsilon(1e-12));

    // M-L = 6, T_f = 6a, T_c = 0, T_p = b -> a + b per sample
    const double a = 0.012, b = 0.001;
    std::vector<metrics::TimingSample> s2{{6 * a, 0.0, b}};
    auto r2 = metrics::timing_report(s2, 60, 54);
    CHECK(r2.t_infer_mean == doctest::Approx(a + b).epsilon(1e-12));

    CHECK_THROWS_AS(metrics::timing_report(s2, 60, 60), std::invalid_argument);
}
