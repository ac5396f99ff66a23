#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dsmt/signal.hpp"

namespace dsmt::data {

// Artefact is the positive class throughout.
enum class Label : int { True = 0, Artefact = 1 };

const std::vector<std::string>& stream_names(); // ECG, ART, PPG, ICP
double stream_rate_hz(const std::string& name);
int64_t raw_window_len(const std::string& name);      // 40 s at native rate
int64_t prepared_window_len(const std::string& name); // after decimation by 16

struct StreamData {
    double age_s = 0;   // seconds since the stream's last real sample at alarm time
    bool padded = false; // window started before the recording did
    std::vector<float> raw; // fixed-length native-rate pre-alarm slice; empty if never recorded
};

struct Alarm {
    std::string id;
    std::string trigger; // stream whose detector fired
    std::optional<Label> label; // nullopt = never annotated
    std::map<std::string, StreamData> streams;
};

struct Dataset {
    std::vector<Alarm> alarms;

    const Alarm& alarm(const std::string& id) const;
    int64_t count_labelled() const;
    double artefact_prior() const; // among labelled alarms

private:
    mutable std::map<std::string, size_t> index_; // rebuilt when alarms change size
};

struct DatasetSplit {
    std::vector<std::string> train_ids; // labelled train + all unlabelled
    std::vector<std::string> test_ids;  // labelled only
};

// Model-ready view of one alarm: per-stream decimated and scaled series plus
// presence flags (stale or absent streams are not present).
struct PreparedAlarm {
    std::string id;
    std::string trigger;
    std::optional<Label> label;
    std::map<std::string, signal::PreparedSeries> streams;
};

PreparedAlarm prepare_alarm(const Alarm& a);

// Directory format: manifest.jsonl (header record, then one record per alarm)
// plus streams/<id>.<stream>.f32le payloads.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// Label-stratified split of the annotated alarms; unlabelled alarms all join
// the train side. Per-class counts land within one alarm of the exact ratio.
DatasetSplit split_stratified(const Dataset& ds, double train_ratio, uint64_t seed);

// Uniform unstratified choice of n labelled train alarms to reveal.
std::vector<std::string> subsample_labels(const Dataset& ds, const DatasetSplit& split, int64_t n,
                                          uint64_t seed);

// Label access is gated: training code may only see labels of revealed train
// alarms; asking for a test alarm's label through the training gate throws.
int label_for_training(const Dataset& ds, const DatasetSplit& split, const std::string& id);
int label_for_evaluation(const Dataset& ds, const std::string& id);

} // namespace dsmt::data
