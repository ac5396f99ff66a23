#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dsmt/dataset.hpp"

namespace dsmt::data {

struct GenConfig {
    int64_t n_alarms = 2000;
    int64_t n_labelled = 1777; // remainder stays unannotated
    double artefact_rate = 1.0; // scales artefact-episode frequency; 0 disables
    double missing_prob = 0.1;  // per (alarm, non-trigger stream)
    double target_artefact_prior = 0.45;
    double hr_lo_bpm = 50.0;
    double hr_hi_bpm = 120.0;
    double patient_duration_s = 420.0;
    // artefact episode mode mix
    double w_noise = 0.66;
    double w_clip = 0.16;
    double w_step = 0.13;
    double w_flatline = 0.05;
    double detector_hz = 10.0;
    double refractory_s = 45.0;
    // scales the magnitude of injected artefacts relative to clean signal
    double artefact_severity = 1.0;
};

struct GenSummary {
    int64_t n_alarms = 0;
    int64_t n_labelled = 0;
    double artefact_prior = 0;
    int64_t n_padded = 0;
    std::map<std::string, int64_t> trigger_counts;
    std::map<std::string, double> missing_rate;
};

Dataset generate_in_memory(const GenConfig& cfg, uint64_t seed, GenSummary* summary = nullptr);

// Generates and writes the dataset directory; returns the summary.
GenSummary generate_dataset(const GenConfig& cfg, uint64_t seed, const std::string& out_dir);

} // namespace dsmt::data
