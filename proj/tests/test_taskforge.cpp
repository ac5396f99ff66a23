#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "dsmt/errors.hpp"
#include "dsmt/features.hpp"
#include "dsmt/fft.hpp"
#include "dsmt/generate.hpp"
#include "dsmt/ranking.hpp"
#include "dsmt/rng.hpp"

using namespace dsmt;
using namespace dsmt::tasks;
using cd = std::complex<double>;

namespace {

// quadratic-time reference transform
std::vector<cd> dft_reference(const std::vector<cd>& x, bool inverse) {
    const size_t n = x.size();
    std::vector<cd> out(n);
    const double sign = inverse ? 2.0 : -2.0;
    for (size_t k = 0; k < n; ++k) {
        cd acc(0, 0);
        for (size_t j = 0; j < n; ++j) {
            const double ang = sign * std::numbers::pi * static_cast<double>(j * k) /
                               static_cast<double>(n);
            acc += x[j] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

// quadratic-time Kendall tau-b by explicit pair enumeration
double tau_b_pairs(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0 && dy == 0) continue;
            if (dx == 0)
                tie_x += 1;
            else if (dy == 0)
                tie_y += 1;
            else if (dx * dy > 0)
                concordant += 1;
            else
                discordant += 1;
        }
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1) / 2;
    double nx = 0, ny = 0; // pairs tied in x / in y (including joint ties)
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            nx += x[i] == x[j];
            ny += y[i] == y[j];
        }
    const double den = std::sqrt((n0 - nx) * (n0 - ny));
    return den > 0 ? (concordant - discordant) / den : 0.0;
}

// direct-formula reimplementation of the per-stream feature set, sharing only
// the catalog conventions with the production code
std::vector<double> features_reference(const std::vector<double>& x) {
    const size_t n = x.size();
    const double dn = static_cast<double>(n);
    std::vector<double> out;
    double mean = 0;
    for (double v : x) mean += v / dn;
    auto central = [&](int p) {
        double acc = 0;
        for (double v : x) acc += std::pow(v - mean, p) / dn;
        return acc;
    };
    const double var = central(2);
    const double sd = std::sqrt(var);
    out.push_back(mean);
    out.push_back(var);
    out.push_back(sd);
    out.push_back(var > 0 ? central(3) / std::pow(sd, 3) : 0.0);
    out.push_back(var > 0 ? central(4) / (var * var) - 3.0 : 0.0);
    out.push_back(*std::min_element(x.begin(), x.end()));
    out.push_back(*std::max_element(x.begin(), x.end()));
    std::vector<double> s(x);
    std::sort(s.begin(), s.end());
    out.push_back(n % 2 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2);
    double energy = 0;
    for (double v : x) energy += v * v;
    out.push_back(energy);
    double ll = 0;
    for (size_t i = 1; i < n; ++i) ll += std::abs(x[i] - x[i - 1]);
    out.push_back(n > 1 ? ll / (dn - 1) : 0.0);
    double above = 0, below = 0;
    for (double v : x) {
        above += v > mean;
        below += v < mean;
    }
    out.push_back(above);
    out.push_back(below);
    double zc = 0;
    for (size_t i = 1; i < n; ++i) zc += (x[i - 1] - mean) * (x[i] - mean) < 0;
    out.push_back(zc);
    double best = 0, run = 0;
    for (double v : x) {
        run = v > mean ? run + 1 : 0;
        best = std::max(best, run);
    }
    out.push_back(best);
    out.push_back(ll);
    for (int lag : {1, 2, 4, 8, 16, 32}) {
        if (static_cast<size_t>(lag) >= n) {
            out.push_back(0); // masked upstream; placeholder keeps alignment
            continue;
        }
        double num = 0, den = 0;
        for (size_t t = 0; t < n; ++t) den += (x[t] - mean) * (x[t] - mean);
        for (size_t t = 0; t + static_cast<size_t>(lag) < n; ++t)
            num += (x[t] - mean) * (x[t + static_cast<size_t>(lag)] - mean);
        out.push_back(den > 0 ? num / den : 0.0);
    }
    // periodogram through the quadratic reference transform
    std::vector<cd> c(n);
    for (size_t i = 0; i < n; ++i) c[i] = cd(x[i] - mean, 0);
    const std::vector<cd> X = dft_reference(c, false);
    const size_t top = n / 2;
    std::vector<double> P(top + 1);
    for (size_t k = 0; k <= top; ++k) P[k] = std::norm(X[k]) / dn;
    std::vector<size_t> edges(9, 1);
    for (int j = 0; j <= 8; ++j)
        edges[static_cast<size_t>(j)] = std::max<size_t>(
            1, static_cast<size_t>(std::llround(
                   std::pow(static_cast<double>(std::max<size_t>(top, 1)), j / 8.0))));
    edges[8] = top + 1;
    for (int j = 0; j < 8; ++j) {
        double p = 0;
        for (size_t k = edges[static_cast<size_t>(j)]; k < edges[static_cast<size_t>(j) + 1]; ++k)
            p += P[k];
        out.push_back(p);
    }
    double pt = 0, pw = 0;
    for (size_t k = 1; k <= top; ++k) {
        pt += P[k];
        pw += P[k] * static_cast<double>(k) / dn;
    }
    out.push_back(pt > 0 ? pw / pt : 0.0);
    return out;
}

} // namespace

TEST_CASE("fft matches the quadratic reference transform") {
    SplitRng rng(21);
    for (size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 12u, 16u, 17u, 31u, 32u, 100u, 250u, 500u}) {
        std::vector<cd> x(n);
        for (cd& v : x) v = cd(rng.normal(), rng.normal());
        std::vector<cd> got = x;
        fftx::fft(got);
        const std::vector<cd> want = dft_reference(x, false);
        double err = 0, scale = 0;
        for (size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(got[k] - want[k]));
            scale = std::max(scale, std::abs(want[k]));
        }
        CAPTURE(n);
        CHECK(err <= 1e-10 * std::max(1.0, scale));
        // inverse round trip
        fftx::fft(got, true);
        double rt = 0;
        for (size_t k = 0; k < n; ++k) rt = std::max(rt, std::abs(got[k] - x[k]));
        CHECK(rt < 1e-10);
    }
}

TEST_CASE("periodogram satisfies parseval and kills the mean") {
    SplitRng rng(22);
    std::vector<double> x(250);
    for (double& v : x) v = rng.normal() * 2 + 5;
    const std::vector<double> p = fftx::periodogram(x);
    REQUIRE(p.size() == 126);
    CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-12)); // mean removed
    // two-sided total power equals centered energy (Parseval); interior
    // one-sided bins carry half of it each
    double mean = 0;
    for (double v : x) mean += v / 250;
    double cent = 0;
    for (double v : x) cent += (v - mean) * (v - mean);
    double total = p[0] + p[125];
    for (size_t k = 1; k < 125; ++k) total += 2 * p[k];
    CHECK(total == doctest::Approx(cent).epsilon(1e-9));
}

TEST_CASE("per-stream features match a direct-formula reimplementation") {
    SplitRng rng(23);
    const std::vector<FeatureDescriptor> cat = stream_feature_catalog("ART");
    REQUIRE(cat.size() == 30);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t n = trial % 3 == 0 ? 250 : (trial % 3 == 1 ? 500 : 40 + trial);
        std::vector<double> x(n);
        SplitRng wr = rng.split(static_cast<uint64_t>(trial));
        for (double& v : x) v = wr.normal();
        const std::vector<FeatureValue> got = extract_stream_features(x);
        const std::vector<double> want = features_reference(x);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            if (got[i].masked) continue;
            CAPTURE(trial);
            CAPTURE(cat[i].label());
            CHECK(got[i].value ==
                  doctest::Approx(want[i]).epsilon(1e-8).scale(std::abs(want[i]) + 1.0));
        }
    }
}

TEST_CASE("feature edge cases") {
    // constant window
    const std::vector<FeatureValue> flat = extract_stream_features(std::vector<double>(64, 3.5));
    const std::vector<FeatureDescriptor> cat = stream_feature_catalog("X");
    auto find = [&](const std::string& name, int param = -1) -> const FeatureValue& {
        for (size_t i = 0; i < cat.size(); ++i)
            if (cat[i].feature == name && cat[i].param == param) return flat[i];
        throw std::runtime_error("bad name");
    };
    CHECK(find("variance").value == 0.0);
    CHECK(find("zero_crossings").value == 0.0);
    CHECK(find("autocorr", 1).value == 0.0);
    CHECK(find("autocorr", 32).value == 0.0);
    CHECK(find("spectral_centroid").value == 0.0);
    CHECK(find("skewness").value == 0.0);

    // alternating signal crosses its mean between every pair of samples
    std::vector<double> alt(41);
    for (size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
    const std::vector<FeatureValue> av = extract_stream_features(alt);
    for (size_t i = 0; i < cat.size(); ++i)
        if (cat[i].feature == "zero_crossings") CHECK(av[i].value == 40.0);

    // autocorrelation at lag 2 of 1..6 against the brute-force formula
    const std::vector<double> ramp = {1, 2, 3, 4, 5, 6};
    const std::vector<FeatureValue> rv = extract_stream_features(ramp);
    double num = 0, den = 0;
    const double m = 3.5;
    for (size_t t = 0; t < 6; ++t) den += (ramp[t] - m) * (ramp[t] - m);
    for (size_t t = 0; t + 2 < 6; ++t) num += (ramp[t] - m) * (ramp[t + 2] - m);
    for (size_t i = 0; i < cat.size(); ++i)
        if (cat[i].feature == "autocorr" && cat[i].param == 2)
            CHECK(rv[i].value == doctest::Approx(num / den).epsilon(1e-12));

    // lags beyond the window length are masked, not errors
    const std::vector<FeatureValue> tiny = extract_stream_features({1, 5, 2, 8, 3});
    for (size_t i = 0; i < cat.size(); ++i) {
        if (cat[i].feature != "autocorr") continue;
        if (cat[i].param >= 5)
            CHECK(tiny[i].masked);
        else
            CHECK_FALSE(tiny[i].masked);
    }

    CHECK_THROWS_AS(extract_stream_features({}), Error);
}

TEST_CASE("full catalog covers every stream with unique descriptors") {
    const std::vector<FeatureDescriptor> cat = feature_catalog();
    CHECK(cat.size() == 120); // 30 per stream
    std::set<std::string> seen;
    for (const FeatureDescriptor& d : cat) seen.insert(d.label());
    CHECK(seen.size() == cat.size());
}

TEST_CASE("kendall tau matches exhaustive pair counting") {
    SplitRng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        SplitRng tr = rng.split(static_cast<uint64_t>(trial));
        const size_t n = 5 + static_cast<size_t>(tr.uniform_int(60));
        std::vector<double> x(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            // heavy ties in two thirds of the trials
            x[i] = trial % 3 ? std::round(tr.normal() * 2) / 2 : tr.normal();
            y[i] = trial % 2 ? static_cast<double>(tr.bernoulli(0.5)) : tr.normal();
        }
        const double want = tau_b_pairs(x, y);
        if (want == 0.0) continue; // possible all-tied degenerate draw
        const TauResult got = kendall_tau(x, y);
        CAPTURE(trial);
        CHECK(got.tau == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("kendall tau reproduces published reference values") {
    // references computed with an independent statistics package
    // (asymptotic two-sided p, tie-corrected tau-b)
    TauResult r = kendall_tau({1, 2, 3}, {1, 2, 3});
    CHECK(r.tau == doctest::Approx(1.0));
    CHECK(r.p == doctest::Approx(0.11718508719813801).epsilon(1e-10));
    r = kendall_tau({1, 2, 3}, {3, 2, 1});
    CHECK(r.tau == doctest::Approx(-1.0));
    CHECK(r.p == doctest::Approx(0.11718508719813801).epsilon(1e-10));
    r = kendall_tau({1, 2, 2, 3}, {1, 3, 2, 2});
    CHECK(r.tau == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.44421673013860674).epsilon(1e-10));

    const std::vector<double> x30 = {
        0.3129029184347004,   -0.13081169022343989, 1.2699831204679328,  -0.09296245773328372,
        -0.06615088900166237, -1.1082144670930707,  0.1359568505505236,  1.3470777642972676,
        0.061144020976008406, 0.07091460028470935,  0.4336545370528692,  0.277483659870901,
        0.5302523866401211,   0.5367209691186955,   0.618350014800829,   -0.7950174561466702,
        0.3000309462866171,   -1.6027015921637315,  0.2667988297433962,  -1.2616237817213791,
        -0.07127080619178035, 0.4740497302500454,   -0.4148537610713306, 0.09771650001494636,
        -1.6404178369858733,  -0.8572588238845005,  0.6882817881370419,  -1.1545295832450446,
        0.6504523890909877,   -1.3883599526797445};
    const std::vector<double> y30 = {0, 1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1,
                                     0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0};
    r = kendall_tau(x30, y30);
    CHECK(r.tau == doctest::Approx(0.2626910126831506).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.08830777741392899).epsilon(1e-9));

    const std::vector<double> x50 = {0,    -2, 0,   1,    -0.5, -2,   0,    1,   0,    -0.5,
                                     2,    2,  0,   1,    0.5,  1,    1.5,  1,   0,    -0.5,
                                     -1,   0,  1,   0.5,  0,    0.5,  0,    0.5, -1,   -2,
                                     -0.5, -1, 1.5, 0,    -0.5, -1.5, 0.5,  -0.5, 1,   1,
                                     -1,   0.5, -2.5, -0.5, 1,    1,    0,    0,   -1.5, -1.5};
    const std::vector<double> y50 = {0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0,
                                     0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0,
                                     1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 1, 0, 1};
    r = kendall_tau(x50, y50);
    CHECK(r.tau == doctest::Approx(0.06995387020061118).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.5747659477251288).epsilon(1e-9));
}

TEST_CASE("kendall tau invariances and degenerate cases") {
    SplitRng rng(33);
    std::vector<double> x(40), y(40);
    for (size_t i = 0; i < 40; ++i) {
        x[i] = std::round(rng.normal() * 3) / 3;
        y[i] = rng.normal();
    }
    const TauResult xy = kendall_tau(x, y);
    const TauResult yx = kendall_tau(y, x);
    CHECK(xy.tau == doctest::Approx(yx.tau).epsilon(1e-12));
    CHECK(xy.p == doctest::Approx(yx.p).epsilon(1e-12));

    // strictly increasing transform leaves tau and p untouched
    std::vector<double> xt(40);
    for (size_t i = 0; i < 40; ++i) xt[i] = std::exp(2 * x[i]) + 1;
    const TauResult t = kendall_tau(xt, y);
    CHECK(t.tau == doctest::Approx(xy.tau).epsilon(1e-12));
    CHECK(t.p == doctest::Approx(xy.p).epsilon(1e-12));

    const TauResult deg = kendall_tau({1, 1, 1, 1}, {1, 2, 3, 4});
    CHECK(deg.degenerate);
    CHECK(deg.tau == 0.0);
    CHECK(deg.p == 1.0);

    CHECK_THROWS_AS(kendall_tau({1, 2}, {1}), Error);
    CHECK_THROWS_AS(kendall_tau({1}, {1}), Error);
    CHECK_THROWS_AS(kendall_tau({1, std::nan("")}, {1, 2}), Error);
}

TEST_CASE("benjamini-yekutieli adjustment matches reference values") {
    const std::vector<double> adj = by_adjust({0.001, 0.02, 0.04, 0.5});
    REQUIRE(adj.size() == 4);
    CHECK(adj[0] == doctest::Approx(0.008333333333333331).epsilon(1e-12));
    CHECK(adj[1] == doctest::Approx(0.08333333333333331).epsilon(1e-12));
    CHECK(adj[2] == doctest::Approx(0.1111111111111111).epsilon(1e-12));
    CHECK(adj[3] == doctest::Approx(1.0));

    const std::vector<double> p2 = {0.004, 0.009, 0.006, 0.9, 0.02, 0.051, 0.045, 0.0001};
    const std::vector<double> adj2 = by_adjust(p2);
    const std::vector<double> want2 = {0.0434857143, 0.0489214286, 0.0434857143, 1.0,
                                       0.0869714286, 0.1584122449, 0.1584122449, 0.0021742857};
    for (size_t i = 0; i < p2.size(); ++i)
        CHECK(adj2[i] == doctest::Approx(want2[i]).epsilon(1e-8));

    // adjustment never decreases a p-value and preserves its ordering
    for (size_t i = 0; i < p2.size(); ++i) {
        CHECK(adj2[i] >= p2[i]);
        CHECK(adj2[i] <= 1.0);
        for (size_t j = 0; j < p2.size(); ++j)
            if (p2[i] < p2[j]) CHECK(adj2[i] <= adj2[j]);
    }
}

namespace {

// table with explicitly controlled columns; col 0 = label copy, the rest noise
FeatureTable toy_table(size_t rows, size_t cols, uint64_t seed,
                       const std::vector<int>& labels) {
    FeatureTable t;
    for (size_t c = 0; c < cols; ++c)
        t.columns.push_back({"S", "f" + std::to_string(c), -1});
    SplitRng rng(seed);
    t.values.assign(rows * cols, 0);
    t.masked.assign(rows * cols, 0);
    for (size_t r = 0; r < rows; ++r) {
        t.row_ids.push_back("r" + std::to_string(r));
        for (size_t c = 0; c < cols; ++c)
            t.values[r * cols + c] =
                c == 0 ? static_cast<double>(labels[r]) : rng.normal();
    }
    return t;
}

} // namespace

TEST_CASE("ranking puts a label-copy feature first and flags it relevant") {
    const size_t rows = 60;
    std::vector<int> labels(rows);
    SplitRng rng(55);
    for (int& l : labels) l = rng.bernoulli(0.5);
    FeatureTable t = toy_table(rows, 8, 56, labels);
    std::map<std::string, int> lm;
    for (size_t r = 0; r < rows; ++r) lm[t.row_ids[r]] = labels[r];

    const RankedFeatureList ranked = rank_features(t, lm, 0.05);
    REQUIRE(!ranked.entries.empty());
    CHECK(ranked.entries[0].desc.feature == "f0");
    // a feature identical to the label agrees with it perfectly
    CHECK(ranked.entries[0].tau == doctest::Approx(1.0));
    CHECK(ranked.entries[0].relevant);
    CHECK(ranked.entries[0].p_adj < 0.05);
    CHECK(ranked.labelled_rows == 60);
    // |tau| is non-increasing down the list
    for (size_t i = 1; i < ranked.entries.size(); ++i)
        CHECK(std::abs(ranked.entries[i - 1].tau) >= std::abs(ranked.entries[i].tau));
}

TEST_CASE("noise features pass the relevance gate at most at the nominal rate") {
    // 200 independent label permutations; a pure-noise feature must come out
    // relevant in at most ~alpha of them
    SplitRng rng(77);
    int false_hits = 0;
    const size_t rows = 80;
    for (int trial = 0; trial < 200; ++trial) {
        SplitRng tr = rng.split(static_cast<uint64_t>(trial));
        std::vector<int> labels(rows);
        for (int& l : labels) l = tr.bernoulli(0.5);
        FeatureTable t;
        t.columns.push_back({"S", "noise", -1});
        t.values.assign(rows, 0);
        t.masked.assign(rows, 0);
        std::map<std::string, int> lm;
        for (size_t r = 0; r < rows; ++r) {
            t.row_ids.push_back("r" + std::to_string(r));
            t.values[r] = tr.normal();
            lm[t.row_ids[r]] = labels[r];
        }
        const RankedFeatureList ranked = rank_features(t, lm, 0.05);
        false_hits += ranked.entries.at(0).relevant;
    }
    CHECK(false_hits <= 25); // nominal 10 of 200, generous margin
}

TEST_CASE("ranking ignores rows without labels") {
    const size_t rows = 40;
    std::vector<int> labels(rows);
    SplitRng rng(91);
    for (int& l : labels) l = rng.bernoulli(0.5);
    FeatureTable t = toy_table(rows, 5, 92, labels);
    std::map<std::string, int> lm;
    for (size_t r = 0; r < 25; ++r) lm[t.row_ids[r]] = labels[r]; // first 25 labelled

    const RankedFeatureList before = rank_features(t, lm, 0.05);
    // scramble every unlabelled row hard
    for (size_t r = 25; r < rows; ++r)
        for (size_t c = 0; c < t.cols(); ++c) t.values[r * t.cols() + c] = 1e6 * rng.normal();
    const RankedFeatureList after = rank_features(t, lm, 0.05);
    REQUIRE(before.entries.size() == after.entries.size());
    for (size_t i = 0; i < before.entries.size(); ++i) {
        CHECK(before.entries[i].column == after.entries[i].column);
        CHECK(before.entries[i].tau == after.entries[i].tau);
        CHECK(before.entries[i].p_adj == after.entries[i].p_adj);
    }
    CHECK(before.labelled_rows == 25);
}

TEST_CASE("ranking exclusion and error rules") {
    const size_t rows = 40;
    std::vector<int> labels(rows);
    SplitRng rng(94);
    for (int& l : labels) l = rng.bernoulli(0.5);
    FeatureTable t = toy_table(rows, 3, 95, labels);
    std::map<std::string, int> lm;
    for (size_t r = 0; r < rows; ++r) lm[t.row_ids[r]] = labels[r];

    // mask exactly half of the labelled rows of column 1 -> excluded
    for (size_t r = 0; r < rows / 2; ++r) t.masked[r * t.cols() + 1] = 1;
    // mask just under half of column 2 -> stays in
    for (size_t r = 0; r < rows / 2 - 1; ++r) t.masked[r * t.cols() + 2] = 1;
    const RankedFeatureList ranked = rank_features(t, lm, 0.05);
    CHECK(ranked.entries.size() == 2);
    CHECK(ranked.excluded_columns == 1);
    for (const RankedFeature& e : ranked.entries) CHECK(e.column != 1);

    std::map<std::string, int> four;
    for (size_t r = 0; r < 4; ++r) four[t.row_ids[r]] = labels[r];
    CHECK_THROWS_AS(rank_features(t, four, 0.05), Error);
    CHECK_THROWS_AS(rank_features(t, lm, 0.0), Error);
    CHECK_THROWS_AS(rank_features(t, lm, 1.0), Error);
}

TEST_CASE("task selection strategies, determinism, and normalization") {
    const size_t rows = 120;
    std::vector<int> labels(rows);
    SplitRng rng(101);
    for (int& l : labels) l = rng.bernoulli(0.5);
    // several informative columns with decaying signal plus noise columns
    FeatureTable t;
    const size_t cols = 14;
    for (size_t c = 0; c < cols; ++c) t.columns.push_back({"S", "f" + std::to_string(c), -1});
    t.values.assign(rows * cols, 0);
    t.masked.assign(rows * cols, 0);
    for (size_t r = 0; r < rows; ++r) {
        t.row_ids.push_back("r" + std::to_string(r));
        for (size_t c = 0; c < cols; ++c) {
            const double signal = c < 8 ? (1.5 - 0.15 * static_cast<double>(c)) : 0.0;
            t.values[r * cols + c] = signal * labels[r] + rng.normal();
        }
    }
    // sprinkle masked cells into one informative column
    for (size_t r = 0; r < rows; r += 7) t.masked[r * cols + 3] = 1;
    std::map<std::string, int> lm;
    for (size_t r = 0; r < rows; ++r) lm[t.row_ids[r]] = labels[r];

    const RankedFeatureList ranked = rank_features(t, lm, 0.05);
    const int64_t nrel = ranked.relevant_count();
    REQUIRE(nrel >= 6);

    std::vector<std::string> train_ids(t.row_ids.begin(), t.row_ids.begin() + 100);

    const AuxiliaryTaskSet top = select_tasks(t, ranked, train_ids, 6, SelectStrategy::Importance, 1);
    REQUIRE(top.k() == 6);
    // importance = the 6 largest-|tau| relevant entries, in ranked order
    size_t seen = 0;
    for (const RankedFeature& e : ranked.entries) {
        if (!e.relevant || seen == 6) break;
        CHECK(top.tasks[seen].column == e.column);
        ++seen;
    }
    CHECK(seen == 6);

    // z-scoring over unmasked training rows: mean ~0, population std ~1
    for (size_t j = 0; j < top.k(); ++j) {
        double mean = 0, m2 = 0;
        int64_t cnt = 0;
        for (size_t i = 0; i < top.rows(); ++i) {
            if (top.masked[i * top.k() + j]) continue;
            mean += top.targets[i * top.k() + j];
            ++cnt;
        }
        REQUIRE(cnt > 0);
        mean /= static_cast<double>(cnt);
        for (size_t i = 0; i < top.rows(); ++i) {
            if (top.masked[i * top.k() + j]) continue;
            const double d = top.targets[i * top.k() + j] - mean;
            m2 += d * d;
        }
        const double sd = std::sqrt(m2 / static_cast<double>(cnt));
        CHECK(std::abs(mean) < 1e-6);
        CHECK(sd > 0.999);
        CHECK(sd < 1.001);
    }

    // masked cells carry through
    bool any_masked = false;
    for (size_t i = 0; i < top.rows(); ++i)
        for (size_t j = 0; j < top.k(); ++j)
            if (top.tasks[j].column == 3 && top.masked[i * top.k() + j]) any_masked = true;
    bool col3_selected = false;
    for (const AuxiliaryTask& task : top.tasks) col3_selected |= task.column == 3;
    if (col3_selected) CHECK(any_masked);

    const AuxiliaryTaskSet ra = select_tasks(t, ranked, train_ids, 6, SelectStrategy::Random, 7);
    const AuxiliaryTaskSet rb = select_tasks(t, ranked, train_ids, 6, SelectStrategy::Random, 7);
    REQUIRE(ra.k() == rb.k());
    std::set<size_t> sa, sb;
    for (size_t j = 0; j < ra.k(); ++j) {
        CHECK(ra.tasks[j].column == rb.tasks[j].column); // seeded determinism
        sa.insert(ra.tasks[j].column);
    }
    CHECK(sa.size() == 6); // without replacement
    // random picks only relevant features
    std::set<size_t> relcols;
    for (const RankedFeature& e : ranked.entries)
        if (e.relevant) relcols.insert(e.column);
    for (size_t c : sa) CHECK(relcols.count(c) == 1);

    // k equal to the relevant count: both strategies choose the same set
    const AuxiliaryTaskSet all_imp =
        select_tasks(t, ranked, train_ids, nrel, SelectStrategy::Importance, 1);
    const AuxiliaryTaskSet all_rnd =
        select_tasks(t, ranked, train_ids, nrel, SelectStrategy::Random, 99);
    std::set<size_t> ci, cr;
    for (const AuxiliaryTask& task : all_imp.tasks) ci.insert(task.column);
    for (const AuxiliaryTask& task : all_rnd.tasks) cr.insert(task.column);
    CHECK(ci == cr);

    // k above the relevant count names the available count in the error
    try {
        select_tasks(t, ranked, train_ids, nrel + 1, SelectStrategy::Importance, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(std::to_string(nrel)) != std::string::npos);
    }
    CHECK_THROWS_AS(select_tasks(t, ranked, {"nope"}, 2, SelectStrategy::Importance, 1), Error);
}

TEST_CASE("feature extraction over a generated dataset with csv export") {
    data::GenConfig cfg;
    cfg.n_alarms = 220;
    cfg.n_labelled = 200;
    data::GenSummary summary;
    const data::Dataset ds = data::generate_in_memory(cfg, 6, &summary);
    const FeatureTable t = extract_features(ds);
    CHECK(t.rows() == 220);
    CHECK(t.cols() == 120);
    // unmasked cells are finite
    int64_t masked_cells = 0;
    for (size_t r = 0; r < t.rows(); ++r)
        for (size_t c = 0; c < t.cols(); ++c) {
            if (t.is_masked(r, c)) {
                ++masked_cells;
                continue;
            }
            CHECK(std::isfinite(t.at(r, c)));
        }
    CHECK(masked_cells > 0); // missing streams mask whole blocks

    std::map<std::string, int> lm;
    for (const data::Alarm& a : ds.alarms)
        if (a.label) lm[a.id] = *a.label == data::Label::Artefact ? 1 : 0;
    const RankedFeatureList ranked = rank_features(t, lm, 0.05);
    CHECK(ranked.relevant_count() >= 12); // plenty of signal in the simulator

    std::vector<std::string> train_ids;
    for (const data::Alarm& a : ds.alarms) train_ids.push_back(a.id);
    const AuxiliaryTaskSet set =
        select_tasks(t, ranked, train_ids, 12, SelectStrategy::Importance, 3);
    CHECK(set.k() == 12);
    CHECK(set.rows() == 220);

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dsmt_taskforge_csv";
    fs::create_directories(dir);
    write_feature_csv(t, (dir / "features.csv").string());
    write_ranking_csv(ranked, (dir / "ranking.csv").string());
    std::ifstream fin(dir / "features.csv");
    std::string line;
    std::getline(fin, line);
    CHECK(line == "alarm_id,stream,feature,params,value,masked");
    size_t rows = 0;
    while (std::getline(fin, line)) ++rows;
    CHECK(rows == t.rows() * t.cols());
    std::ifstream rin(dir / "ranking.csv");
    std::getline(rin, line);
    CHECK(line == "rank,stream,feature,params,tau,p,p_adj,relevant");
    rows = 0;
    while (std::getline(rin, line)) ++rows;
    CHECK(rows == ranked.entries.size());
    fs::remove_all(dir);
}
