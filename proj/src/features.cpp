#include "dsmt/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsmt/errors.hpp"
#include "dsmt/fft.hpp"

namespace dsmt::tasks {

namespace {

const std::vector<int> kAutocorrLags = {1, 2, 4, 8, 16, 32};
constexpr int kBands = 8;

double median_of(std::vector<double> v) {
    const size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return (v[n / 2 - 1] + hi) / 2.0;
}

} // namespace

std::string FeatureDescriptor::label() const {
    std::string s = stream + "/" + feature;
    if (param >= 0) s += "[" + std::to_string(param) + "]";
    return s;
}

std::vector<FeatureDescriptor> stream_feature_catalog(const std::string& stream) {
    std::vector<FeatureDescriptor> out;
    for (const char* name : {"mean", "variance", "std", "skewness", "kurtosis", "min", "max",
                             "median", "abs_energy", "mean_abs_change", "count_above_mean",
                             "count_below_mean", "zero_crossings", "longest_run_above_mean",
                             "line_length"})
        out.push_back({stream, name, -1});
    for (int lag : kAutocorrLags) out.push_back({stream, "autocorr", lag});
    for (int b = 0; b < kBands; ++b) out.push_back({stream, "band_power", b});
    out.push_back({stream, "spectral_centroid", -1});
    return out;
}

std::vector<FeatureDescriptor> feature_catalog() {
    std::vector<FeatureDescriptor> out;
    for (const std::string& s : data::stream_names()) {
        std::vector<FeatureDescriptor> part = stream_feature_catalog(s);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<FeatureValue> extract_stream_features(const std::vector<double>& x) {
    const size_t n = x.size();
    if (n == 0) throw Error::config("features: empty window");
    const double dn = static_cast<double>(n);
    std::vector<FeatureValue> out;
    out.reserve(30);

    double mean = 0;
    for (double v : x) mean += v;
    mean /= dn;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    const double variance = m2;
    const double sd = std::sqrt(variance);
    // third/fourth standardized moments; 0 for constant windows by convention
    const double skew = m2 > 0 ? m3 / (m2 * sd) : 0.0;
    const double kurt = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());

    double abs_energy = 0;
    for (double v : x) abs_energy += v * v;

    double line_length = 0;
    for (size_t i = 0; i + 1 < n; ++i) line_length += std::abs(x[i + 1] - x[i]);
    const double mean_abs_change = n > 1 ? line_length / (dn - 1.0) : 0.0;

    double above = 0, below = 0;
    for (double v : x) {
        above += v > mean;
        below += v < mean;
    }

    double crossings = 0;
    for (size_t i = 0; i + 1 < n; ++i)
        crossings += (x[i] - mean) * (x[i + 1] - mean) < 0;

    double longest_run = 0, run = 0;
    for (double v : x) {
        run = v > mean ? run + 1 : 0;
        longest_run = std::max(longest_run, run);
    }

    out.push_back({mean});
    out.push_back({variance});
    out.push_back({sd});
    out.push_back({skew});
    out.push_back({kurt});
    out.push_back({*mn_it});
    out.push_back({*mx_it});
    out.push_back({median_of(x)});
    out.push_back({abs_energy});
    out.push_back({mean_abs_change});
    out.push_back({above});
    out.push_back({below});
    out.push_back({crossings});
    out.push_back({longest_run});
    out.push_back({line_length});

    // autocorrelation: whole-window mean, normalized by total centered energy
    const double denom = m2 * dn;
    for (int lag : kAutocorrLags) {
        if (static_cast<size_t>(lag) >= n) {
            out.push_back({0.0, true}); // window too short for this lag
            continue;
        }
        if (denom <= 0) {
            out.push_back({0.0}); // constant window
            continue;
        }
        double acc = 0;
        for (size_t t = 0; t + static_cast<size_t>(lag) < n; ++t)
            acc += (x[t] - mean) * (x[t + static_cast<size_t>(lag)] - mean);
        out.push_back({acc / denom});
    }

    // band power over 8 geometrically spaced bands of the one-sided
    // periodogram (bins 1..n/2; the DC bin is ~0 after mean removal)
    const std::vector<double> pgram = fftx::periodogram(x);
    const size_t top = pgram.empty() ? 0 : pgram.size() - 1; // n/2
    std::vector<size_t> edges(kBands + 1, 1);
    for (int j = 0; j <= kBands; ++j) {
        const double e = std::pow(static_cast<double>(std::max<size_t>(top, 1)),
                                  static_cast<double>(j) / kBands);
        edges[static_cast<size_t>(j)] = std::max<size_t>(1, static_cast<size_t>(std::llround(e)));
    }
    edges[kBands] = top + 1;
    for (int j = 0; j < kBands; ++j) {
        double p = 0;
        for (size_t k = edges[static_cast<size_t>(j)];
             k < edges[static_cast<size_t>(j) + 1] && k <= top; ++k)
            p += pgram[k];
        out.push_back({p});
    }

    double ptotal = 0, pweighted = 0;
    for (size_t k = 1; k <= top && k < pgram.size(); ++k) {
        ptotal += pgram[k];
        pweighted += pgram[k] * (static_cast<double>(k) / dn); // cycles/sample
    }
    out.push_back({ptotal > 0 ? pweighted / ptotal : 0.0});

    return out;
}

size_t FeatureTable::row_of(const std::string& id) const {
    for (size_t r = 0; r < row_ids.size(); ++r)
        if (row_ids[r] == id) return r;
    throw Error::config("feature table: unknown row id '" + id + "'");
}

FeatureTable extract_features(const data::Dataset& ds) {
    FeatureTable t;
    t.columns = feature_catalog();
    t.row_ids.reserve(ds.alarms.size());
    t.values.assign(ds.alarms.size() * t.columns.size(), 0.0);
    t.masked.assign(ds.alarms.size() * t.columns.size(), 0);

    const std::vector<std::string>& streams = data::stream_names();
    const size_t per_stream = t.columns.size() / streams.size();
    for (size_t r = 0; r < ds.alarms.size(); ++r) {
        const data::Alarm& a = ds.alarms[r];
        t.row_ids.push_back(a.id);
        const data::PreparedAlarm prep = data::prepare_alarm(a);
        for (size_t si = 0; si < streams.size(); ++si) {
            const size_t base = r * t.columns.size() + si * per_stream;
            const auto it = prep.streams.find(streams[si]);
            if (it == prep.streams.end() || !it->second.present) {
                std::fill_n(t.masked.begin() + static_cast<ptrdiff_t>(base), per_stream,
                            uint8_t{1});
                continue;
            }
            const std::vector<float>& w = it->second.values;
            const std::vector<FeatureValue> fv =
                extract_stream_features(std::vector<double>(w.begin(), w.end()));
            for (size_t j = 0; j < per_stream; ++j) {
                t.values[base + j] = fv[j].value;
                t.masked[base + j] = fv[j].masked ? 1 : 0;
            }
        }
    }
    return t;
}

void write_feature_csv(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error::data("feature csv: cannot open '" + path + "' for writing");
    out << "alarm_id,stream,feature,params,value,masked\n";
    char buf[64];
    for (size_t r = 0; r < table.rows(); ++r) {
        for (size_t c = 0; c < table.cols(); ++c) {
            const FeatureDescriptor& d = table.columns[c];
            std::snprintf(buf, sizeof buf, "%.17g", table.at(r, c));
            out << table.row_ids[r] << ',' << d.stream << ',' << d.feature << ','
                << (d.param >= 0 ? std::to_string(d.param) : "") << ',' << buf << ','
                << (table.is_masked(r, c) ? 1 : 0) << '\n';
        }
    }
    if (!out) throw Error::data("feature csv: write failed for '" + path + "'");
}

} // namespace dsmt::tasks
