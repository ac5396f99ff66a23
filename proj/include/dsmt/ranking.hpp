#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsmt/features.hpp"

namespace dsmt::tasks {

struct TauResult {
    double tau = 0;
    double p = 1;
    bool degenerate = false; // all-tied input: tau undefined, reported as (0,1)
};

// Kendall's tau-b with tie correction; two-sided p-value from the normal
// approximation with tie-adjusted variance. O(n log n).
TauResult kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

// Benjamini-Yekutieli step-up adjusted p-values (valid under arbitrary
// dependence between the tests).
std::vector<double> by_adjust(const std::vector<double>& p);

struct RankedFeature {
    FeatureDescriptor desc;
    size_t column = 0; // column index in the source table
    double tau = 0;
    double p = 1;
    double p_adj = 1;
    bool relevant = false;
    bool degenerate = false;
};

struct RankedFeatureList {
    std::vector<RankedFeature> entries; // sorted by |tau| desc, catalog order on ties
    double alpha = 0.05;
    int64_t labelled_rows = 0;
    int64_t excluded_columns = 0; // dropped for >=50% masked labelled rows

    int64_t relevant_count() const;
};

// Rank every usable column by |tau| against the labels and flag relevance at
// FDR level alpha. `labels` maps alarm id -> {0,1} and must cover labelled
// *training* rows only; rows absent from the map are ignored.
RankedFeatureList rank_features(const FeatureTable& table,
                                const std::map<std::string, int>& labels, double alpha = 0.05);

enum class SelectStrategy { Importance, Random };

struct AuxiliaryTask {
    FeatureDescriptor desc;
    size_t column = 0;
    double mean = 0, stdev = 1; // training-row normalization statistics
};

// k auxiliary regression targets for the training rows, z-scored with
// statistics computed over those same rows (labelled and unlabelled alike)
struct AuxiliaryTaskSet {
    std::vector<AuxiliaryTask> tasks;
    std::vector<std::string> row_ids; // training rows, in the given order
    std::vector<float> targets;       // [rows x k]
    std::vector<uint8_t> masked;      // [rows x k], 1 = source stream missing

    size_t k() const { return tasks.size(); }
    size_t rows() const { return row_ids.size(); }
};

AuxiliaryTaskSet select_tasks(const FeatureTable& table, const RankedFeatureList& ranked,
                              const std::vector<std::string>& train_ids, int64_t k,
                              SelectStrategy strategy, uint64_t seed);

// CSV export: rank,stream,feature,params,tau,p,p_adj,relevant
void write_ranking_csv(const RankedFeatureList& ranked, const std::string& path);

} // namespace dsmt::tasks
