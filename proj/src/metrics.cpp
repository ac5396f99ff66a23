#include "dsmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dsmt/errors.hpp"

namespace dsmt::metrics {

namespace {

void validate(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error::config("metrics: scores and labels must be non-empty and equal length");
    int64_t pos = 0, neg = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw Error::numeric("metrics: non-finite score");
        if (labels[i] == 1)
            ++pos;
        else if (labels[i] == 0)
            ++neg;
        else
            throw Error::data("metrics: label outside {0,1}");
    }
    if (pos == 0 || neg == 0) throw Error::data("metrics: both classes must be present");
}

} // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    validate(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // rank-sum with midranks for tied groups
    double pos_rank_sum = 0;
    int64_t pos = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // 1-based average
        for (size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) {
                pos_rank_sum += midrank;
                ++pos;
            }
        i = j;
    }
    const int64_t neg = static_cast<int64_t>(n) - pos;
    const double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    validate(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    double pos = 0, neg = 0;
    for (int l : labels) (l == 1 ? pos : neg) += 1;

    RocCurve c;
    c.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    double tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (size_t k = i; k < j; ++k) (labels[order[k]] == 1 ? tp : fp) += 1;
        c.points.push_back({fp / neg, tp / pos, scores[order[i]]});
        i = j;
    }
    c.points.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
    return c;
}

double trapezoid_area(const RocCurve& curve) {
    double area = 0;
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    return area;
}

double sensitivity_at_specificity(const RocCurve& curve, double specificity) {
    if (specificity < 0 || specificity > 1)
        throw Error::config("metrics: specificity must be in [0,1]");
    const double target = 1.0 - specificity;
    double best_at_or_below = 0.0;
    for (const RocPoint& p : curve.points)
        if (p.fpr <= target) best_at_or_below = std::max(best_at_or_below, p.tpr);
    // partial credit along the segment that crosses the target rate
    double interp = 0.0;
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        if (a.fpr < target && target < b.fpr && b.fpr > a.fpr) {
            const double t = (target - a.fpr) / (b.fpr - a.fpr);
            interp = std::max(interp, a.tpr + t * (b.tpr - a.tpr));
        }
    }
    return std::max(best_at_or_below, interp);
}

double sensitivity_at_specificity(const std::vector<double>& scores,
                                  const std::vector<int>& labels, double specificity) {
    return sensitivity_at_specificity(roc_curve(scores, labels), specificity);
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error::data("metrics: cannot write '" + path + "'");
    f << "fpr,tpr,threshold\n";
    f.precision(17);
    for (const RocPoint& p : curve.points)
        f << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
    if (!f) throw Error::data("metrics: write to '" + path + "' failed");
}

RocCurve read_roc_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error::data("metrics: cannot read '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != "fpr,tpr,threshold")
        throw Error::data("metrics: '" + path + "' is not a roc csv");
    RocCurve c;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, t;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, t))
            throw Error::data("metrics: malformed row in '" + path + "'");
        RocPoint p;
        p.fpr = std::strtod(a.c_str(), nullptr);
        p.tpr = std::strtod(b.c_str(), nullptr);
        p.threshold = std::strtod(t.c_str(), nullptr);
        c.points.push_back(p);
    }
    if (c.points.size() < 2) throw Error::data("metrics: '" + path + "' has too few points");
    return c;
}

void write_roc_svg(const RocCurve& curve, const std::string& path, const std::string& title) {
    const double W = 640, H = 560, ml = 70, mr = 30, mt = 50, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double fpr) { return ml + fpr * pw; };
    auto Y = [&](double tpr) { return mt + (1.0 - tpr) * ph; };

    std::ofstream f(path);
    if (!f) throw Error::data("metrics: cannot write '" + path + "'");
    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    if (!title.empty())
        f << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
          << " font-size=\"16\">" << title << "</text>\n";
    // axes
    f << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i * 0.25;
        f << "<text x=\"" << X(v) << "\" y=\"" << mt + ph + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << v
          << "</text>\n";
        f << "<text x=\"" << ml - 8 << "\" y=\"" << Y(v) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << v
          << "</text>\n";
        f << "<line x1=\"" << X(v) << "\" y1=\"" << mt + ph << "\" x2=\"" << X(v) << "\" y2=\""
          << mt + ph + 4 << "\" stroke=\"black\"/>\n";
        f << "<line x1=\"" << ml - 4 << "\" y1=\"" << Y(v) << "\" x2=\"" << ml << "\" y2=\"" << Y(v)
          << "\" stroke=\"black\"/>\n";
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">False positive "
         "rate</text>\n";
    f << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 "
         "18 "
      << mt + ph / 2 << ")\">True positive rate</text>\n";
    // chance diagonal
    f << "<line x1=\"" << X(0) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(1) << "\" y2=\"" << Y(1)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    f << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const RocPoint& p : curve.points) f << X(p.fpr) << ',' << Y(p.tpr) << ' ';
    f << "\"/>\n</svg>\n";
    if (!f) throw Error::data("metrics: write to '" + path + "' failed");
}

void write_results_csv(const ResultsTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error::data("metrics: cannot write '" + path + "'");
    f << "variant";
    for (int64_t c : table.label_counts) f << ',' << c;
    f << '\n';
    f.precision(6);
    f << std::fixed;
    for (const std::string& v : table.variants) {
        f << v;
        auto row = table.cells.find(v);
        for (int64_t c : table.label_counts) {
            f << ',';
            if (row != table.cells.end()) {
                auto cell = row->second.find(c);
                if (cell != row->second.end()) f << cell->second;
            }
        }
        f << '\n';
    }
    if (!f) throw Error::data("metrics: write to '" + path + "' failed");
}

} // namespace dsmt::metrics
