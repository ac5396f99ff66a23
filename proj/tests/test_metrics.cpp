#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "dsmt/errors.hpp"
#include "dsmt/metrics.hpp"
#include "dsmt/rng.hpp"

using namespace dsmt;
using namespace dsmt::metrics;

namespace {

// Direct definition: count positive-negative pairs.
double auroc_pairwise(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0, pairs = 0;
    for (size_t i = 0; i < s.size(); ++i)
        for (size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1;
            if (s[i] > s[j])
                num += 1;
            else if (s[i] == s[j])
                num += 0.5;
        }
    return num / pairs;
}

// Exhaustive sweep oracle: evaluate (fpr, tpr) at every distinct cutoff by
// direct counting, then apply the same keep-below-target + segment
// interpolation rule on the raw point list.
double sens_at_spec_sweep(const std::vector<double>& s, const std::vector<int>& y, double spec) {
    std::set<double> cuts(s.begin(), s.end());
    double pos = 0, neg = 0;
    for (int l : y) (l ? pos : neg) += 1;
    std::vector<std::pair<double, double>> pts = {{0.0, 0.0}};
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
        double tp = 0, fp = 0;
        for (size_t i = 0; i < s.size(); ++i)
            if (s[i] >= *it) (y[i] ? tp : fp) += 1;
        pts.push_back({fp / neg, tp / pos});
    }
    const double target = 1.0 - spec;
    double best = 0;
    for (auto& [fpr, tpr] : pts)
        if (fpr <= target) best = std::max(best, tpr);
    for (size_t i = 1; i < pts.size(); ++i) {
        auto [f0, t0] = pts[i - 1];
        auto [f1, t1] = pts[i];
        if (f0 < target && target < f1)
            best = std::max(best, t0 + (t1 - t0) * (target - f0) / (f1 - f0));
    }
    return best;
}

std::pair<std::vector<double>, std::vector<int>> random_case(SplitRng& rng, int n, bool ties) {
    std::vector<double> s(static_cast<size_t>(n));
    std::vector<int> y(static_cast<size_t>(n));
    while (true) {
        for (int i = 0; i < n; ++i) {
            double v = rng.uniform01();
            if (ties) v = std::round(v * 8) / 8; // coarse grid forces ties
            s[static_cast<size_t>(i)] = v;
            y[static_cast<size_t>(i)] = rng.bernoulli(0.4) ? 1 : 0;
        }
        int pos = 0;
        for (int l : y) pos += l;
        if (pos > 0 && pos < n) return {s, y};
    }
}

} // namespace

TEST_CASE("auroc hand examples") {
    CHECK(auroc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    CHECK(auroc({0.8, 0.4, 0.6, 0.2}, {1, 0, 0, 1}) == doctest::Approx(0.5));
    CHECK(auroc({0.1, 0.2, 0.9}, {0, 1, 0}) == doctest::Approx(0.5));
}

TEST_CASE("auroc input validation") {
    try {
        auroc({0.1, 0.2}, {1, 1});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Data);
    }
    CHECK_THROWS_AS(auroc({0.1, 0.2}, {1, 2}), Error);
    CHECK_THROWS_AS(auroc({}, {}), Error);
    try {
        auroc({std::nan(""), 0.2}, {1, 0});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::Numeric);
        CHECK(e.exit_code() == 4);
    }
}

TEST_CASE("auroc equals pairwise counting on random cases") {
    SplitRng rng(501);
    for (int c = 0; c < 100; ++c) {
        auto [s, y] = random_case(rng, 2 + static_cast<int>(rng.uniform_int(58)), c % 2 == 0);
        CHECK(auroc(s, y) == doctest::Approx(auroc_pairwise(s, y)).epsilon(1e-13));
    }
}

TEST_CASE("auroc invariances") {
    SplitRng rng(502);
    for (int c = 0; c < 20; ++c) {
        auto [s, y] = random_case(rng, 30, true);
        const double base = auroc(s, y);
        std::vector<double> exp_s = s, affine = s;
        for (double& v : exp_s) v = std::exp(3 * v);
        for (double& v : affine) v = 2.5 * v + 7;
        CHECK(auroc(exp_s, y) == doctest::Approx(base).epsilon(1e-13));
        CHECK(auroc(affine, y) == doctest::Approx(base).epsilon(1e-13));
    }
    // complement rule needs distinct scores
    for (int c = 0; c < 20; ++c) {
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 25; ++i) {
            s.push_back(i * 0.04 + rng.uniform01() * 0.001);
            y.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
        y[0] = 1;
        y[1] = 0;
        std::vector<double> neg = s;
        for (double& v : neg) v = -v;
        CHECK(auroc(s, y) + auroc(neg, y) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("roc curve structure and area") {
    SplitRng rng(503);
    for (int c = 0; c < 40; ++c) {
        auto [s, y] = random_case(rng, 3 + static_cast<int>(rng.uniform_int(40)), c % 2 == 0);
        RocCurve curve = roc_curve(s, y);
        const std::set<double> distinct(s.begin(), s.end());
        CHECK(curve.points.size() == distinct.size() + 2);
        CHECK(curve.points.front().fpr == 0.0);
        CHECK(curve.points.front().tpr == 0.0);
        CHECK(curve.points.back().fpr == 1.0);
        CHECK(curve.points.back().tpr == 1.0);
        for (size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
            CHECK(curve.points[i].threshold <= curve.points[i - 1].threshold);
        }
        CHECK(trapezoid_area(curve) == doctest::Approx(auroc(s, y)).epsilon(1e-13));
    }
}

TEST_CASE("sensitivity at fixed specificity") {
    // perfect classifier
    CHECK(sensitivity_at_specificity({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}, 0.95) ==
          doctest::Approx(1.0));
    CHECK(sensitivity_at_specificity({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}, 0.5) ==
          doctest::Approx(1.0));
    // anti-perfect classifier
    CHECK(sensitivity_at_specificity({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}, 0.95) ==
          doctest::Approx(0.0));
    // specificity 0 admits every threshold
    SplitRng rng(504);
    for (int c = 0; c < 10; ++c) {
        auto [s, y] = random_case(rng, 15, false);
        CHECK(sensitivity_at_specificity(s, y, 0.0) == doctest::Approx(1.0));
    }
    // matches the exhaustive sweep oracle
    for (int c = 0; c < 60; ++c) {
        auto [s, y] = random_case(rng, 20, c % 2 == 0);
        for (double spec : {0.95, 0.9, 0.75, 0.5}) {
            CHECK(sensitivity_at_specificity(s, y, spec) ==
                  doctest::Approx(sens_at_spec_sweep(s, y, spec)).epsilon(1e-12));
        }
    }
}

TEST_CASE("roc csv round trip and svg export") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dsmt_metrics_test";
    fs::create_directories(dir);

    SplitRng rng(505);
    auto [s, y] = random_case(rng, 37, true);
    RocCurve curve = roc_curve(s, y);
    const std::string csv = (dir / "roc.csv").string();
    write_roc_csv(curve, csv);

    // row count: header + distinct thresholds + 2 endpoints
    std::ifstream f(csv);
    int rows = 0;
    std::string line;
    while (std::getline(f, line))
        if (!line.empty()) ++rows;
    const std::set<double> distinct(s.begin(), s.end());
    CHECK(rows == static_cast<int>(distinct.size()) + 3);

    RocCurve back = read_roc_csv(csv);
    REQUIRE(back.points.size() == curve.points.size());
    CHECK(trapezoid_area(back) == doctest::Approx(auroc(s, y)).epsilon(1e-13));

    const std::string svg = (dir / "roc.svg").string();
    write_roc_svg(curve, svg, "test curve");
    std::ifstream sf(svg);
    std::string content((std::istreambuf_iterator<char>(sf)), std::istreambuf_iterator<char>());
    CHECK(content.rfind("<?xml", 0) == 0);
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("</svg>") != std::string::npos);
    CHECK(content.find("<polyline") != std::string::npos);
    // every opened tag family is closed or self-closed
    CHECK(std::count(content.begin(), content.end(), '<') ==
          std::count(content.begin(), content.end(), '>'));

    fs::remove_all(dir);
}

TEST_CASE("results table export") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dsmt_metrics_table";
    fs::create_directories(dir);
    ResultsTable t;
    t.label_counts = {25, 50};
    t.variants = {"dsmt-12", "dsmt-0"};
    t.cells["dsmt-12"][25] = 0.871234;
    t.cells["dsmt-12"][50] = 0.9;
    t.cells["dsmt-0"][25] = 0.75;
    // dsmt-0 at 50 left infeasible -> empty cell
    const std::string path = (dir / "table.csv").string();
    write_results_csv(t, path);
    std::ifstream f(path);
    std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(all == "variant,25,50\ndsmt-12,0.871234,0.900000\ndsmt-0,0.750000,\n");
    fs::remove_all(dir);
}
