#include "dsmt/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsmt/errors.hpp"
#include "dsmt/rng.hpp"

namespace dsmt::data {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBaselineFrom = 5.0, kBaselineTo = 25.0;
constexpr double kEarliestEvent = 24.0;
constexpr double kStatWindow = 5.0;
// a detector condition must hold this long before the alarm fires (debounce),
// so the pre-alarm window captures a solid stretch of the triggering pattern
constexpr double kPersistSeconds = 20.0;

enum class ArtMode { Noise, Clip, Step, Flatline };
enum class EventType { Hypotension, Hypertension, Desaturation, IcpRise, HeartRate };

struct Episode {
    double t0 = 0, t1 = 0;
    ArtMode mode = ArtMode::Noise;
    std::vector<std::string> targets;
    double severity = 1.0;
};

struct PhysioEvent {
    double t0 = 0, ramp = 10, hold = 20;
    EventType type = EventType::Hypotension;
    double magnitude = 0; // signed excursion of the underlying vital
};

struct Hit {
    double t = 0;
    std::string stream;
};

// trapezoidal excursion profile: 0 -> 1 over ramp, hold, back over ramp
double excursion(const PhysioEvent& e, double t) {
    const double dt = t - e.t0;
    if (dt < 0) return 0;
    if (dt < e.ramp) return dt / e.ramp;
    if (dt < e.ramp + e.hold) return 1.0;
    if (dt < 2 * e.ramp + e.hold) return (2 * e.ramp + e.hold - dt) / e.ramp;
    return 0;
}

struct PatientResult {
    std::vector<Alarm> alarms;
    int64_t n_candidate_artefact = 0; // label counts before annotation masking
    int64_t n_candidate_true = 0;
};

class PatientSim {
public:
    PatientSim(const GenConfig& cfg, SplitRng rng, double artefact_bias)
        : cfg_(cfg), rng_(rng), art_bias_(artefact_bias) {}

    PatientResult run() {
        draw_baselines();
        schedule();
        synthesize();
        inject_artefacts();
        const std::vector<Hit> hits = detect();
        return package(hits);
    }

private:
    const GenConfig& cfg_;
    SplitRng rng_;
    double art_bias_;
    double dur_ = 0;

    double hr_base_ = 80, art_base_ = 85, art_pp_ = 40, icp_base_ = 12;
    double ph1_ = 0, ph2_ = 0;

    std::vector<PhysioEvent> events_;
    std::vector<Episode> episodes_;
    std::map<std::string, std::vector<double>> sig_;
    std::vector<double> hr_state_; // at ECG rate

    void draw_baselines() {
        dur_ = cfg_.patient_duration_s;
        hr_base_ = cfg_.hr_lo_bpm + 10 + rng_.uniform01() * (cfg_.hr_hi_bpm - cfg_.hr_lo_bpm - 30);
        art_base_ = 65 + rng_.uniform01() * 40;
        art_pp_ = 30 + rng_.uniform01() * 20;
        icp_base_ = 5 + rng_.uniform01() * 13;
        ph1_ = rng_.uniform01() * 2 * kPi;
        ph2_ = rng_.uniform01() * 2 * kPi;
    }

    void schedule() {
        const double lam_phys = 3.0;
        const double lam_art = 4.0 * cfg_.artefact_rate * art_bias_;
        const int n_phys = count_from(lam_phys, rng_.split("nphys"));
        const int n_art = count_from(lam_art, rng_.split("nart"));

        SplitRng er = rng_.split("events");
        for (int i = 0; i < n_phys; ++i) {
            PhysioEvent e;
            e.t0 = kEarliestEvent + er.uniform01() * (dur_ - kEarliestEvent - 40);
            e.ramp = 8 + er.uniform01() * 12;
            e.hold = 12 + er.uniform01() * 20;
            const double pick = er.uniform01();
            if (pick < 0.25) {
                e.type = EventType::Hypotension;
                e.magnitude = -(25 + er.uniform01() * 20);
            } else if (pick < 0.45) {
                e.type = EventType::Hypertension;
                e.magnitude = 28 + er.uniform01() * 22;
            } else if (pick < 0.75) {
                e.type = EventType::Desaturation;
                e.magnitude = -(0.55 + er.uniform01() * 0.25); // amplitude decay fraction
            } else if (pick < 0.90) {
                e.type = EventType::IcpRise;
                e.magnitude = 12 + er.uniform01() * 13;
            } else {
                e.type = EventType::HeartRate;
                e.magnitude = (er.bernoulli(0.6) ? 1 : -1) * (38 + er.uniform01() * 14);
            }
            events_.push_back(e);
        }

        // Episodes steer clear of physio events (and the alarms those events
        // will raise) so that every alarm window traces back to one cause.
        // An event's alarm can fire anywhere inside the event's excursion,
        // and its window looks back 40 s, hence the wide exclusion zone.
        auto near_event = [&](double t0, double t1) {
            for (const PhysioEvent& e : events_) {
                const double lo = e.t0 - 30.0;
                const double hi = e.t0 + 2 * e.ramp + e.hold + 15.0;
                if (t0 < hi && t1 > lo) return true;
            }
            return false;
        };
        SplitRng ar = rng_.split("episodes");
        for (int i = 0; i < n_art; ++i) {
            Episode ep;
            bool placed = false;
            for (int tries = 0; tries < 200 && !placed; ++tries) {
                ep.t0 = kEarliestEvent + ar.uniform01() * (dur_ - kEarliestEvent - 60);
                ep.t1 = ep.t0 + 26 + ar.uniform01() * 30;
                placed = !near_event(ep.t0, ep.t1);
            }
            if (!placed) continue;
            const double m = ar.uniform01() * (cfg_.w_noise + cfg_.w_clip + cfg_.w_step +
                                               cfg_.w_flatline);
            if (m < cfg_.w_noise)
                ep.mode = ArtMode::Noise;
            else if (m < cfg_.w_noise + cfg_.w_clip)
                ep.mode = ArtMode::Clip;
            else if (m < cfg_.w_noise + cfg_.w_clip + cfg_.w_step)
                ep.mode = ArtMode::Step;
            else
                ep.mode = ArtMode::Flatline;
            ep.severity = cfg_.artefact_severity * (1.2 + ar.uniform01() * 0.8);
            // primary target skewed toward pressure/pleth sensors; movement
            // and probe trouble disturb the whole rig, so all streams suffer
            const double s = ar.uniform01();
            std::string primary = s < 0.45 ? "ART" : s < 0.78 ? "PPG" : s < 0.90 ? "ICP" : "ECG";
            ep.targets.push_back(primary);
            for (const std::string& other : stream_names())
                if (other != primary) ep.targets.push_back(other);
            episodes_.push_back(ep);
        }
    }

    static int count_from(double lam, SplitRng r) {
        const int base = static_cast<int>(std::floor(lam));
        return base + (r.bernoulli(lam - std::floor(lam)) ? 1 : 0);
    }

    double hr_at(double t) const {
        double hr = hr_base_ + 0.04 * hr_base_ * std::sin(2 * kPi * 0.23 * t + ph1_) +
                    1.5 * std::sin(2 * kPi * 0.011 * t + ph2_);
        for (const PhysioEvent& e : events_)
            if (e.type == EventType::HeartRate) hr += e.magnitude * excursion(e, t);
        return std::clamp(hr, 25.0, 210.0);
    }

    void synthesize() {
        const double ecg_rate = stream_rate_hz("ECG");
        const int64_t n_ecg = static_cast<int64_t>(dur_ * ecg_rate);
        std::vector<double> phase(static_cast<size_t>(n_ecg));
        hr_state_.resize(static_cast<size_t>(n_ecg));
        double ph = rng_.uniform01() * 2 * kPi;
        for (int64_t i = 0; i < n_ecg; ++i) {
            const double t = static_cast<double>(i) / ecg_rate;
            const double hr = hr_at(t);
            hr_state_[static_cast<size_t>(i)] = hr;
            ph += 2 * kPi * (hr / 60.0) / ecg_rate;
            phase[static_cast<size_t>(i)] = ph;
        }

        SplitRng nr = rng_.split("noise");
        SplitRng n_ecgr = nr.split("ECG"), n_art = nr.split("ART"), n_ppg = nr.split("PPG"),
                 n_icp = nr.split("ICP");

        // ECG: Gaussian bumps on the cardiac phase
        std::vector<double>& ecg = sig_["ECG"];
        ecg.resize(static_cast<size_t>(n_ecg));
        static const struct {
            double c, w, a;
        } bumps[] = {{-2.0, 0.25, 0.15}, {-0.18, 0.05, -0.12}, {0.0, 0.07, 1.0},
                     {0.18, 0.05, -0.20}, {1.30, 0.35, 0.30}};
        for (int64_t i = 0; i < n_ecg; ++i) {
            const double t = static_cast<double>(i) / ecg_rate;
            double p = std::fmod(phase[static_cast<size_t>(i)], 2 * kPi);
            if (p > kPi) p -= 2 * kPi;
            double v = 0.05 * std::sin(2 * kPi * 0.29 * t + ph2_);
            for (const auto& b : bumps) {
                const double d = p - b.c;
                v += b.a * std::exp(-d * d / (2 * b.w * b.w));
            }
            ecg[static_cast<size_t>(i)] = v + 0.02 * n_ecgr.normal();
        }

        // pressure-like streams at 100 Hz use every other phase sample
        const int64_t n_low = n_ecg / 2;
        std::vector<double>& art = sig_["ART"];
        std::vector<double>& ppg = sig_["PPG"];
        std::vector<double>& icp = sig_["ICP"];
        art.resize(static_cast<size_t>(n_low));
        ppg.resize(static_cast<size_t>(n_low));
        icp.resize(static_cast<size_t>(n_low));
        for (int64_t i = 0; i < n_low; ++i) {
            const double t = static_cast<double>(i) / 100.0;
            const double p = phase[static_cast<size_t>(2 * i)];
            double art_mean = art_base_, ppg_amp = 1.0, icp_mean = icp_base_;
            for (const PhysioEvent& e : events_) {
                const double x = excursion(e, t);
                if (x == 0) continue;
                if (e.type == EventType::Hypotension || e.type == EventType::Hypertension)
                    art_mean += e.magnitude * x;
                else if (e.type == EventType::Desaturation)
                    ppg_amp *= 1.0 + e.magnitude * x;
                else if (e.type == EventType::IcpRise)
                    icp_mean += e.magnitude * x;
            }
            const double beat = 0.5 + 0.5 * std::sin(p - kPi / 2);
            art[static_cast<size_t>(i)] = art_mean + art_pp_ * (beat * beat) +
                                          0.15 * art_pp_ * std::sin(2 * p - 0.8) +
                                          0.5 * n_art.normal();
            ppg[static_cast<size_t>(i)] = ppg_amp * (0.6 * std::sin(p - kPi / 2) +
                                                     0.25 * std::sin(2 * p - 1.2) + 0.6) +
                                          0.015 * n_ppg.normal();
            icp[static_cast<size_t>(i)] =
                icp_mean + 2.0 * std::sin(p) + 1.0 * std::sin(2 * p + 0.8) +
                0.5 * std::sin(3 * p + 1.5) + 1.2 * std::sin(2 * kPi * 0.25 * t + ph1_) +
                0.2 * n_icp.normal();
        }
    }

    // typical beat-to-beat amplitude per stream, for scaling artefacts
    double pulse_amp(const std::string& s) const {
        if (s == "ECG") return 1.0;
        if (s == "ART") return art_pp_;
        if (s == "PPG") return 1.0;
        return 4.0; // ICP
    }

    void inject_artefacts() {
        SplitRng ar = rng_.split("inject");
        for (const Episode& ep : episodes_) {
            for (const std::string& s : ep.targets) {
                std::vector<double>& x = sig_[s];
                const double rate = stream_rate_hz(s);
                const int64_t i0 = std::clamp<int64_t>(static_cast<int64_t>(ep.t0 * rate), 0,
                                                       static_cast<int64_t>(x.size()));
                const int64_t i1 = std::clamp<int64_t>(static_cast<int64_t>(ep.t1 * rate), 0,
                                                       static_cast<int64_t>(x.size()));
                if (i0 >= i1) continue;
                const double amp = pulse_amp(s) * ep.severity;
                SplitRng er = ar.split(s).split(static_cast<uint64_t>(i0));
                // burst noise: the reading jumps between spurious contact
                // levels every few hundred milliseconds; slow enough to ride
                // through the decimation filter, unlike pure white noise
                auto telegraph = [&](double mag, double dwell_s) {
                    const double p_flip = 1.0 / (dwell_s * rate);
                    double level = (2 * er.uniform01() - 1) * mag;
                    for (int64_t i = i0; i < i1; ++i) {
                        if (er.uniform01() < p_flip) level = (2 * er.uniform01() - 1) * mag;
                        x[static_cast<size_t>(i)] += level;
                    }
                };
                switch (ep.mode) {
                    case ArtMode::Noise: {
                        telegraph(2.0 * amp, 0.3);
                        const double sigma = 1.0 * amp;
                        for (int64_t i = i0; i < i1; ++i)
                            x[static_cast<size_t>(i)] += sigma * er.normal();
                        break;
                    }
                    case ArtMode::Clip: {
                        // one-sided clamp squashes the pulse from above; a
                        // partially seated sensor also rattles, so the whole
                        // span picks up a noise floor plus connect/disconnect
                        // transients at the edges
                        double mean = 0;
                        for (int64_t i = i0; i < i1; ++i) mean += x[static_cast<size_t>(i)];
                        mean /= static_cast<double>(i1 - i0);
                        const double ceiling = mean - 0.15 * amp;
                        for (int64_t i = i0; i < i1; ++i) {
                            x[static_cast<size_t>(i)] =
                                std::min(x[static_cast<size_t>(i)], ceiling) +
                                0.4 * amp * er.normal();
                        }
                        telegraph(0.6 * amp, 0.25);
                        const int64_t edge = std::max<int64_t>(1, static_cast<int64_t>(0.4 * rate));
                        for (int64_t i = i0; i < std::min(i0 + edge, i1); ++i)
                            x[static_cast<size_t>(i)] += 1.5 * amp * er.normal();
                        for (int64_t i = std::max(i0, i1 - edge); i < i1; ++i)
                            x[static_cast<size_t>(i)] += 1.5 * amp * er.normal();
                        break;
                    }
                    case ArtMode::Step: {
                        // baseline jump plus the rattle of a badly seated probe
                        const double offset = (er.bernoulli(0.5) ? 1 : -1) * 2.2 * amp;
                        for (int64_t i = i0; i < i1; ++i)
                            x[static_cast<size_t>(i)] += offset + 0.6 * amp * er.normal();
                        telegraph(0.7 * amp, 0.4);
                        break;
                    }
                    case ArtMode::Flatline: {
                        // disconnected transducer: the reading collapses onto a
                        // held level that drifts slowly with residual noise
                        const double held = x[static_cast<size_t>(i0)];
                        const double walk_step = 0.01 * amp * std::sqrt(100.0 / rate);
                        double drift = 0;
                        for (int64_t i = i0; i < i1; ++i) {
                            drift += walk_step * er.normal();
                            x[static_cast<size_t>(i)] = held + drift + 0.02 * amp * er.normal();
                        }
                        break;
                    }
                }
            }
        }
    }

    std::vector<Hit> detect() {
        std::vector<Hit> hits;
        const double tick = 1.0 / cfg_.detector_hz;
        // one alarm silences the whole monitor for a while, matching bedside
        // practice and keeping each alarm's window attributable to one cause
        double refractory_until = -1.0;

        // prefix sums per stream for O(1) trailing-window statistics
        std::map<std::string, std::vector<double>> ps, ps2;
        for (const std::string& s : stream_names()) {
            const std::vector<double>& x = sig_[s];
            std::vector<double>& p = ps[s];
            std::vector<double>& p2 = ps2[s];
            p.assign(x.size() + 1, 0);
            p2.assign(x.size() + 1, 0);
            for (size_t i = 0; i < x.size(); ++i) {
                p[i + 1] = p[i] + x[i];
                p2[i + 1] = p2[i] + x[i] * x[i];
            }
        }
        auto window_stats = [&](const std::string& s, double t, double& mean, double& rms) {
            const double rate = stream_rate_hz(s);
            const auto& p = ps[s];
            const auto& p2 = ps2[s];
            int64_t i1 = std::min<int64_t>(static_cast<int64_t>(t * rate),
                                           static_cast<int64_t>(p.size()) - 1);
            int64_t i0 = std::max<int64_t>(0, i1 - static_cast<int64_t>(kStatWindow * rate));
            const double n = static_cast<double>(i1 - i0);
            mean = (p[static_cast<size_t>(i1)] - p[static_cast<size_t>(i0)]) / n;
            const double m2 = (p2[static_cast<size_t>(i1)] - p2[static_cast<size_t>(i0)]) / n;
            rms = std::sqrt(std::max(0.0, m2 - mean * mean));
        };

        // per-stream baselines from the quiet opening period
        std::map<std::string, double> base_mean, base_rms;
        for (const std::string& s : stream_names()) {
            double am = 0, ar = 0;
            int n = 0;
            for (double t = kBaselineFrom + kStatWindow; t <= kBaselineTo; t += tick, ++n) {
                double m, r;
                window_stats(s, t, m, r);
                am += m;
                ar += r;
            }
            base_mean[s] = am / n;
            base_rms[s] = ar / n;
        }
        const std::map<std::string, double> mean_band = {
            {"ECG", 0.5}, {"ART", 18.0}, {"PPG", 0.8}, {"ICP", 6.0}};

        std::map<std::string, double> crossing_since; // -1 = not crossing
        for (const std::string& s : stream_names()) crossing_since[s] = -1.0;
        for (double t = 30.0; t < dur_; t += tick) {
            for (const std::string& s : stream_names()) {
                if (t < refractory_until) {
                    crossing_since[s] = -1.0;
                    continue;
                }
                double m, r;
                window_stats(s, t, m, r);
                bool crossing = std::abs(m - base_mean[s]) > mean_band.at(s) ||
                                r > 2.2 * base_rms[s] || r < 0.35 * base_rms[s];
                if (s == "ECG" && !crossing) {
                    const double hr =
                        hr_state_[std::min(hr_state_.size() - 1,
                                           static_cast<size_t>(t * stream_rate_hz("ECG")))];
                    crossing = hr > 115.0 || hr < 48.0;
                }
                if (!crossing) {
                    crossing_since[s] = -1.0;
                    continue;
                }
                if (crossing_since[s] < 0) crossing_since[s] = t;
                if (t - crossing_since[s] >= kPersistSeconds) {
                    hits.push_back({t, s});
                    refractory_until = t + cfg_.refractory_s;
                    crossing_since[s] = -1.0;
                }
            }
        }
        return hits;
    }

    PatientResult package(const std::vector<Hit>& hits) {
        PatientResult res;
        SplitRng mr = rng_.split("missing");
        for (const Hit& h : hits) {
            Alarm a;
            a.trigger = h.stream;
            // artefact label: any injected episode on the triggering stream
            // overlapping the 40 s pre-alarm window
            bool artefact = false;
            for (const Episode& ep : episodes_) {
                if (ep.t1 < h.t - signal::kWindowSeconds || ep.t0 > h.t) continue;
                for (const std::string& s : ep.targets)
                    if (s == h.stream) artefact = true;
            }
            a.label = artefact ? Label::Artefact : Label::True;
            (artefact ? res.n_candidate_artefact : res.n_candidate_true) += 1;

            for (const std::string& s : stream_names()) {
                StreamData sd;
                const double rate = stream_rate_hz(s);
                const std::vector<double>& x = sig_[s];
                const int64_t len = raw_window_len(s);
                int64_t i1 = static_cast<int64_t>(h.t * rate);
                int64_t i0 = i1 - len;
                sd.padded = i0 < 0;
                sd.raw.resize(static_cast<size_t>(len));
                for (int64_t i = i0; i < i1; ++i) {
                    const int64_t j = std::clamp<int64_t>(i, 0, static_cast<int64_t>(x.size()) - 1);
                    sd.raw[static_cast<size_t>(i - i0)] = static_cast<float>(x[static_cast<size_t>(j)]);
                }
                if (s != h.stream && mr.bernoulli(cfg_.missing_prob)) {
                    // sensor went stale before the alarm: freeze the tail
                    sd.age_s = 10.5 + mr.uniform01() * 27.5;
                    const int64_t cut = len - static_cast<int64_t>(sd.age_s * rate);
                    if (cut > 0) {
                        const float held = sd.raw[static_cast<size_t>(cut - 1)];
                        for (int64_t i = cut; i < len; ++i) sd.raw[static_cast<size_t>(i)] = held;
                    }
                }
                a.streams[s] = std::move(sd);
            }
            res.alarms.push_back(std::move(a));
        }
        return res;
    }
};

} // namespace

Dataset generate_in_memory(const GenConfig& cfg, uint64_t seed, GenSummary* summary) {
    if (cfg.n_alarms <= 0) throw Error::config("generator: n_alarms must be positive");
    if (cfg.n_labelled < 0 || cfg.n_labelled > cfg.n_alarms)
        throw Error::config("generator: n_labelled must be in [0, n_alarms]");
    if (cfg.missing_prob < 0 || cfg.missing_prob >= 1)
        throw Error::config("generator: missing_prob must be in [0,1)");
    if (cfg.patient_duration_s < 120)
        throw Error::config("generator: patient_duration_s must be at least 120");

    SplitRng root(seed);
    Dataset ds;
    int64_t artefact_so_far = 0, labelled_so_far = 0;
    const int64_t max_patients = 40 + 4 * cfg.n_alarms; // generous safety bound
    int64_t patient = 0;
    // multiplicative steering of the artefact-episode rate toward the target
    // class prior; persists across patients so it can keep compounding until
    // the running prior enters the band
    double bias = 1.0;
    while (static_cast<int64_t>(ds.alarms.size()) < cfg.n_alarms && patient < max_patients) {
        if (labelled_so_far >= 50 && cfg.artefact_rate > 0) {
            const double prior =
                static_cast<double>(artefact_so_far) / static_cast<double>(labelled_so_far);
            if (prior < cfg.target_artefact_prior - 0.01)
                bias = std::min(8.0, bias * 1.12);
            else if (prior > cfg.target_artefact_prior + 0.01)
                bias = std::max(0.10, bias * 0.88);
        }
        PatientSim sim(cfg, root.split("patient").split(static_cast<uint64_t>(patient)), bias);
        PatientResult res = sim.run();
        for (Alarm& a : res.alarms) {
            if (static_cast<int64_t>(ds.alarms.size()) >= cfg.n_alarms) break;
            char idbuf[16];
            std::snprintf(idbuf, sizeof idbuf, "a%06zu", ds.alarms.size());
            a.id = idbuf;
            artefact_so_far += *a.label == Label::Artefact;
            ++labelled_so_far;
            ds.alarms.push_back(std::move(a));
        }
        ++patient;
    }
    if (ds.alarms.empty()) throw Error::config("generator: configuration produced no alarms");
    if (static_cast<int64_t>(ds.alarms.size()) < cfg.n_alarms)
        throw Error::config("generator: could not reach requested alarm count (got " +
                            std::to_string(ds.alarms.size()) + ")");

    // annotation budget: keep labels for a random subset, blank the rest
    if (cfg.n_labelled < cfg.n_alarms) {
        std::vector<size_t> order(ds.alarms.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        SplitRng ar = root.split("annotation");
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[ar.uniform_int(i)]);
        for (size_t i = static_cast<size_t>(cfg.n_labelled); i < order.size(); ++i)
            ds.alarms[order[i]].label.reset();
    }

    if (summary) {
        GenSummary s;
        s.n_alarms = static_cast<int64_t>(ds.alarms.size());
        s.n_labelled = ds.count_labelled();
        s.artefact_prior = ds.artefact_prior();
        for (const std::string& name : stream_names()) s.missing_rate[name] = 0;
        for (const Alarm& a : ds.alarms) {
            s.trigger_counts[a.trigger] += 1;
            for (const auto& [name, sd] : a.streams) {
                if (sd.age_s > signal::kStaleSeconds || sd.raw.empty())
                    s.missing_rate[name] += 1;
            }
            bool padded = false;
            for (const auto& [name, sd] : a.streams) padded = padded || sd.padded;
            s.n_padded += padded;
        }
        for (auto& [name, v] : s.missing_rate) v /= static_cast<double>(ds.alarms.size());
        *summary = s;
    }
    return ds;
}

GenSummary generate_dataset(const GenConfig& cfg, uint64_t seed, const std::string& out_dir) {
    GenSummary summary;
    Dataset ds = generate_in_memory(cfg, seed, &summary);
    write_dataset(ds, out_dir);
    return summary;
}

} // namespace dsmt::data
