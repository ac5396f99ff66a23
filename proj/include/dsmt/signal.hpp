#pragma once

#include <cstdint>
#include <vector>

namespace dsmt::signal {

// One second-order IIR section in direct form II transposed.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;

    double step(double x) {
        const double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
    void reset() { z1 = z2 = 0; }

    // set the delay line to the steady state for constant input x0 and return
    // the corresponding steady output
    double prime(double x0) {
        const double y0 = (b0 + b1 + b2) / (1.0 + a1 + a2) * x0;
        z1 = (b1 + b2) * x0 - (a1 + a2) * y0;
        z2 = b2 * x0 - a2 * y0;
        return y0;
    }
};

// Butterworth low-pass of even order as a cascade of biquads (bilinear
// transform with frequency prewarping).
class ButterworthLowPass {
public:
    ButterworthLowPass(int order, double cutoff_hz, double sample_rate_hz);
    double step(double x);
    void reset();
    void prime(double x0); // start from steady state instead of a zero warm-up
    std::vector<double> apply(const std::vector<double>& x);

private:
    std::vector<Biquad> sections_;
};

// Anti-aliased decimation: low-pass at 0.8 of the post-decimation Nyquist
// (8th-order Butterworth), then keep every factor-th sample.
std::vector<double> decimate(const std::vector<double>& x, int factor, double sample_rate_hz);

// Per-window min-max scaling to [-1,1]; constant windows map to all zeros.
std::vector<double> minmax_scale(const std::vector<double>& x);

// 40 s pre-alarm stream window -> fixed-length model input: staleness check,
// decimation by 16, min-max scaling. `age_s` is the time since the stream's
// last real sample at the alarm instant; streams older than 10 s are absent.
struct PreparedSeries {
    bool present = false;
    std::vector<float> values; // length raw.size()/16 when present
};

PreparedSeries prepare_window(const std::vector<float>& raw, double sample_rate_hz, double age_s);

constexpr double kWindowSeconds = 40.0;
constexpr double kStaleSeconds = 10.0;
constexpr int kDecimation = 16;

} // namespace dsmt::signal
