#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dsmt::metrics {

struct RocPoint {
    double fpr = 0;
    double tpr = 0;
    double threshold = 0;
};

// One point per distinct threshold plus the (0,0) and (1,1) endpoints.
// FPR and TPR are non-decreasing along the curve.
struct RocCurve {
    std::vector<RocPoint> points;
};

// Probability that a random positive outranks a random negative; tied scores
// get half credit. Throws if labels are single-class or scores non-finite.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

// Area under the polyline by trapezoids; equals auroc() for curves built by
// roc_curve().
double trapezoid_area(const RocCurve& curve);

// Highest true-positive rate reachable while the false-positive rate stays at
// or below 1 - specificity, with linear interpolation between curve points
// when no threshold attains that rate exactly.
double sensitivity_at_specificity(const std::vector<double>& scores,
                                  const std::vector<int>& labels, double specificity = 0.95);
double sensitivity_at_specificity(const RocCurve& curve, double specificity = 0.95);

void write_roc_csv(const RocCurve& curve, const std::string& path);
RocCurve read_roc_csv(const std::string& path);
void write_roc_svg(const RocCurve& curve, const std::string& path,
                   const std::string& title = "");

// Results grid: rows are model variants, columns are label counts, cells are
// test AUROC (empty when a cell was infeasible).
struct ResultsTable {
    std::vector<int64_t> label_counts;
    std::vector<std::string> variants;
    // variant -> label count -> auroc
    std::map<std::string, std::map<int64_t, double>> cells;
};

void write_results_csv(const ResultsTable& table, const std::string& path);

} // namespace dsmt::metrics
