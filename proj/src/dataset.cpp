#include "dsmt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dsmt/errors.hpp"
#include "dsmt/rng.hpp"

namespace dsmt::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kMagic = "dsmt-dataset";
constexpr int kVersion = 1;
} // namespace

const std::vector<std::string>& stream_names() {
    static const std::vector<std::string> names = {"ECG", "ART", "PPG", "ICP"};
    return names;
}

double stream_rate_hz(const std::string& name) {
    if (name == "ECG") return 200.0;
    if (name == "ART" || name == "PPG" || name == "ICP") return 100.0;
    throw Error::config("unknown stream '" + name + "'");
}

int64_t raw_window_len(const std::string& name) {
    return static_cast<int64_t>(signal::kWindowSeconds * stream_rate_hz(name));
}

int64_t prepared_window_len(const std::string& name) {
    return raw_window_len(name) / signal::kDecimation;
}

const Alarm& Dataset::alarm(const std::string& id) const {
    if (index_.size() != alarms.size()) {
        index_.clear();
        for (size_t i = 0; i < alarms.size(); ++i) index_[alarms[i].id] = i;
    }
    auto it = index_.find(id);
    if (it == index_.end()) throw Error::data("dataset: unknown alarm id '" + id + "'");
    return alarms[it->second];
}

int64_t Dataset::count_labelled() const {
    int64_t n = 0;
    for (const Alarm& a : alarms) n += a.label.has_value();
    return n;
}

double Dataset::artefact_prior() const {
    int64_t labelled = 0, artefact = 0;
    for (const Alarm& a : alarms) {
        if (!a.label) continue;
        ++labelled;
        artefact += *a.label == Label::Artefact;
    }
    if (labelled == 0) throw Error::data("dataset: no labelled alarms");
    return static_cast<double>(artefact) / static_cast<double>(labelled);
}

PreparedAlarm prepare_alarm(const Alarm& a) {
    PreparedAlarm out;
    out.id = a.id;
    out.trigger = a.trigger;
    out.label = a.label;
    for (const std::string& s : stream_names()) {
        auto it = a.streams.find(s);
        if (it == a.streams.end()) {
            out.streams[s] = {};
            continue;
        }
        out.streams[s] = signal::prepare_window(it->second.raw, stream_rate_hz(s), it->second.age_s);
        if (out.streams[s].present &&
            static_cast<int64_t>(out.streams[s].values.size()) != prepared_window_len(s))
            throw Error::data("dataset: stream '" + s + "' of alarm '" + a.id +
                              "' has unexpected length");
    }
    return out;
}

void write_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "streams");
    std::ofstream mf(fs::path(dir) / "manifest.jsonl");
    if (!mf) throw Error::data("dataset: cannot write manifest in '" + dir + "'");

    json header;
    header["magic"] = kMagic;
    header["version"] = kVersion;
    header["n_alarms"] = ds.alarms.size();
    json streams;
    for (const std::string& s : stream_names()) streams[s] = stream_rate_hz(s);
    header["streams"] = streams;
    header["window_s"] = signal::kWindowSeconds;
    mf << header.dump() << '\n';

    for (const Alarm& a : ds.alarms) {
        json rec;
        rec["id"] = a.id;
        rec["trigger"] = a.trigger;
        if (a.label)
            rec["label"] = *a.label == Label::Artefact ? "artefact" : "true";
        else
            rec["label"] = nullptr;
        json jstreams;
        for (const std::string& s : stream_names()) {
            auto it = a.streams.find(s);
            json js;
            if (it == a.streams.end() || it->second.raw.empty()) {
                js["age_s"] = it == a.streams.end() ? 1e9 : it->second.age_s;
                js["padded"] = false;
                js["path"] = nullptr;
            } else {
                const StreamData& sd = it->second;
                if (static_cast<int64_t>(sd.raw.size()) != raw_window_len(s))
                    throw Error::data("dataset: alarm '" + a.id + "' stream '" + s +
                                      "' has wrong raw length");
                js["age_s"] = sd.age_s;
                js["padded"] = sd.padded;
                const std::string rel = "streams/" + a.id + "." + s + ".f32le";
                js["path"] = rel;
                std::ofstream sf(fs::path(dir) / rel, std::ios::binary);
                if (!sf) throw Error::data("dataset: cannot write '" + rel + "'");
                sf.write(reinterpret_cast<const char*>(sd.raw.data()),
                         static_cast<std::streamsize>(sd.raw.size() * 4));
                if (!sf) throw Error::data("dataset: write to '" + rel + "' failed");
            }
            jstreams[s] = js;
        }
        rec["streams"] = jstreams;
        mf << rec.dump() << '\n';
    }
    if (!mf) throw Error::data("dataset: manifest write failed in '" + dir + "'");
}

Dataset read_dataset(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.jsonl");
    if (!mf) throw Error::data("dataset: cannot open manifest in '" + dir + "'");
    std::string line;
    if (!std::getline(mf, line)) throw Error::data("dataset: empty manifest in '" + dir + "'");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw Error::data(std::string("dataset: malformed manifest header: ") + e.what());
    }
    if (!header.contains("magic") || header["magic"] != kMagic)
        throw Error::data("dataset: '" + dir + "' is not a dataset directory (bad magic)");
    if (!header.contains("version") || header["version"] != kVersion)
        throw Error::data("dataset: unsupported format version in '" + dir + "'");

    Dataset ds;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error::data(std::string("dataset: malformed manifest record: ") + e.what());
        }
        Alarm a;
        a.id = rec.at("id").get<std::string>();
        a.trigger = rec.at("trigger").get<std::string>();
        if (!rec.at("label").is_null()) {
            const std::string l = rec["label"].get<std::string>();
            if (l == "artefact")
                a.label = Label::Artefact;
            else if (l == "true")
                a.label = Label::True;
            else
                throw Error::data("dataset: alarm '" + a.id + "' has unknown label '" + l + "'");
        }
        for (const std::string& s : stream_names()) {
            const json& js = rec.at("streams").at(s);
            StreamData sd;
            sd.age_s = js.at("age_s").get<double>();
            sd.padded = js.at("padded").get<bool>();
            if (!js.at("path").is_null()) {
                const std::string rel = js["path"].get<std::string>();
                const fs::path p = fs::path(dir) / rel;
                std::ifstream sf(p, std::ios::binary);
                if (!sf)
                    throw Error::data("dataset: manifest references missing stream file '" + rel +
                                      "'");
                sf.seekg(0, std::ios::end);
                const int64_t bytes = static_cast<int64_t>(sf.tellg());
                const int64_t expect = raw_window_len(s) * 4;
                if (bytes != expect)
                    throw Error::data("dataset: stream file '" + rel + "' is truncated or oversized (" +
                                      std::to_string(bytes) + " bytes, expected " +
                                      std::to_string(expect) + ")");
                sf.seekg(0);
                sd.raw.resize(static_cast<size_t>(raw_window_len(s)));
                sf.read(reinterpret_cast<char*>(sd.raw.data()), expect);
                if (!sf) throw Error::data("dataset: failed reading '" + rel + "'");
            }
            a.streams[s] = std::move(sd);
        }
        ds.alarms.push_back(std::move(a));
    }
    if (header.contains("n_alarms") &&
        header["n_alarms"].get<size_t>() != ds.alarms.size())
        throw Error::data("dataset: manifest header count disagrees with record count");
    return ds;
}

DatasetSplit split_stratified(const Dataset& ds, double train_ratio, uint64_t seed) {
    if (train_ratio <= 0 || train_ratio >= 1)
        throw Error::config("split: train ratio must be in (0,1)");
    std::vector<std::string> artefact, truealarm, unlabelled;
    for (const Alarm& a : ds.alarms) {
        if (!a.label)
            unlabelled.push_back(a.id);
        else if (*a.label == Label::Artefact)
            artefact.push_back(a.id);
        else
            truealarm.push_back(a.id);
    }
    if (artefact.size() < 2 || truealarm.size() < 2)
        throw Error::data("split: each class needs at least 2 labelled alarms");

    const int64_t n_labelled = static_cast<int64_t>(artefact.size() + truealarm.size());
    const int64_t train_total =
        static_cast<int64_t>(std::llround(train_ratio * static_cast<double>(n_labelled)));

    struct Cls {
        std::vector<std::string>* ids;
        int64_t take = 0;
        double frac = 0;
    };
    std::vector<Cls> classes = {{&artefact}, {&truealarm}};
    int64_t assigned = 0;
    for (Cls& c : classes) {
        const double exact = train_ratio * static_cast<double>(c.ids->size());
        c.take = static_cast<int64_t>(std::floor(exact));
        c.frac = exact - std::floor(exact);
        assigned += c.take;
    }
    // distribute the remainder by largest fraction (ties: larger class first)
    std::vector<size_t> order = {0, 1};
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (classes[a].frac != classes[b].frac) return classes[a].frac > classes[b].frac;
        return classes[a].ids->size() > classes[b].ids->size();
    });
    for (size_t i = 0; assigned < train_total; ++i, ++assigned) ++classes[order[i % 2]].take;

    SplitRng rng = SplitRng(seed).split("stratified-split");
    DatasetSplit out;
    int label_salt = 0;
    for (Cls& c : classes) {
        std::vector<std::string>& ids = *c.ids;
        std::sort(ids.begin(), ids.end());
        SplitRng r = rng.split(static_cast<uint64_t>(label_salt++));
        for (size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[r.uniform_int(i)]);
        for (size_t i = 0; i < ids.size(); ++i)
            (static_cast<int64_t>(i) < c.take ? out.train_ids : out.test_ids).push_back(ids[i]);
    }
    out.train_ids.insert(out.train_ids.end(), unlabelled.begin(), unlabelled.end());
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    return out;
}

std::vector<std::string> subsample_labels(const Dataset& ds, const DatasetSplit& split, int64_t n,
                                          uint64_t seed) {
    std::vector<std::string> labelled;
    for (const std::string& id : split.train_ids)
        if (ds.alarm(id).label) labelled.push_back(id);
    std::sort(labelled.begin(), labelled.end());
    if (n <= 0) throw Error::config("subsample: label count must be positive");
    if (n > static_cast<int64_t>(labelled.size()))
        throw Error::config("subsample: requested " + std::to_string(n) + " labels but only " +
                            std::to_string(labelled.size()) + " are available");
    SplitRng r = SplitRng(seed).split("label-subsample");
    for (size_t i = labelled.size(); i > 1; --i)
        std::swap(labelled[i - 1], labelled[r.uniform_int(i)]);
    labelled.resize(static_cast<size_t>(n));
    std::sort(labelled.begin(), labelled.end());
    return labelled;
}

int label_for_training(const Dataset& ds, const DatasetSplit& split, const std::string& id) {
    if (std::binary_search(split.test_ids.begin(), split.test_ids.end(), id))
        throw Error::config("label leakage: training code asked for test alarm '" + id + "'");
    const Alarm& a = ds.alarm(id);
    if (!a.label) throw Error::data("alarm '" + id + "' is unlabelled");
    return static_cast<int>(*a.label);
}

int label_for_evaluation(const Dataset& ds, const std::string& id) {
    const Alarm& a = ds.alarm(id);
    if (!a.label) throw Error::data("alarm '" + id + "' is unlabelled");
    return static_cast<int>(*a.label);
}

} // namespace dsmt::data
