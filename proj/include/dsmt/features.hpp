#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsmt/dataset.hpp"

namespace dsmt::tasks {

// One column of the feature table. `param` is the lag for autocorrelation,
// the band index for band power, and -1 for everything else.
struct FeatureDescriptor {
    std::string stream;
    std::string feature;
    int param = -1;

    bool operator==(const FeatureDescriptor& o) const = default;
    std::string label() const; // "ART/autocorr[8]" style display name
};

struct FeatureValue {
    double value = 0;
    bool masked = false;
};

// The per-stream feature set, in catalog order:
//   mean, variance, std, skewness, kurtosis, min, max, median,
//   abs_energy, mean_abs_change, count_above_mean, count_below_mean,
//   zero_crossings, longest_run_above_mean, line_length,
//   autocorr[1,2,4,8,16,32], band_power[0..7], spectral_centroid
// 30 features per stream.
std::vector<FeatureDescriptor> stream_feature_catalog(const std::string& stream);

// full catalog across the monitored streams, stream-major
std::vector<FeatureDescriptor> feature_catalog();

// Extract the per-stream features from one prepared (decimated, scaled)
// window. Values align with stream_feature_catalog order. Autocorrelation at
// a lag the window cannot support is masked, not an error.
std::vector<FeatureValue> extract_stream_features(const std::vector<double>& window);

// row-major matrix of features over a set of alarms; a missing stream masks
// that stream's whole feature block for the row
struct FeatureTable {
    std::vector<FeatureDescriptor> columns;
    std::vector<std::string> row_ids;
    std::vector<double> values; // [rows x columns], masked cells hold 0
    std::vector<uint8_t> masked;

    size_t rows() const { return row_ids.size(); }
    size_t cols() const { return columns.size(); }
    double at(size_t r, size_t c) const { return values[r * columns.size() + c]; }
    bool is_masked(size_t r, size_t c) const { return masked[r * columns.size() + c] != 0; }
    size_t row_of(const std::string& id) const; // throws on unknown id
};

FeatureTable extract_features(const data::Dataset& ds);

// long-format CSV: alarm_id,stream,feature,params,value,masked
void write_feature_csv(const FeatureTable& table, const std::string& path);

} // namespace dsmt::tasks
