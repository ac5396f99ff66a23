#include "dsmt/signal.hpp"

#include <cmath>
#include <numbers>

#include "dsmt/errors.hpp"

namespace dsmt::signal {

ButterworthLowPass::ButterworthLowPass(int order, double cutoff_hz, double sample_rate_hz) {
    if (order < 2 || order % 2 != 0)
        throw Error::config("butterworth: order must be even and >= 2");
    if (cutoff_hz <= 0 || cutoff_hz >= sample_rate_hz / 2)
        throw Error::config("butterworth: cutoff must lie inside (0, nyquist)");
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz;
    const double cw = std::cos(w0), sw = std::sin(w0);
    const int pairs = order / 2;
    for (int k = 1; k <= pairs; ++k) {
        // pole-pair quality factors of the analog prototype
        const double theta = (2.0 * k - 1.0) * std::numbers::pi / (2.0 * order);
        const double q = 1.0 / (2.0 * std::sin(theta));
        const double alpha = sw / (2.0 * q);
        const double a0 = 1.0 + alpha;
        Biquad s;
        s.b0 = (1.0 - cw) / 2.0 / a0;
        s.b1 = (1.0 - cw) / a0;
        s.b2 = s.b0;
        s.a1 = -2.0 * cw / a0;
        s.a2 = (1.0 - alpha) / a0;
        sections_.push_back(s);
    }
}

double ButterworthLowPass::step(double x) {
    for (Biquad& s : sections_) x = s.step(x);
    return x;
}

void ButterworthLowPass::reset() {
    for (Biquad& s : sections_) s.reset();
}

void ButterworthLowPass::prime(double x0) {
    for (Biquad& s : sections_) x0 = s.prime(x0);
}

std::vector<double> ButterworthLowPass::apply(const std::vector<double>& x) {
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = step(x[i]);
    return y;
}

std::vector<double> decimate(const std::vector<double>& x, int factor, double sample_rate_hz) {
    if (factor < 1) throw Error::config("decimate: factor must be >= 1");
    if (factor == 1) return x;
    const double new_nyquist = sample_rate_hz / factor / 2.0;
    ButterworthLowPass lp(8, 0.8 * new_nyquist, sample_rate_hz);
    lp.prime(x[0]); // no warm-up transient at the window start
    std::vector<double> out;
    out.reserve(x.size() / static_cast<size_t>(factor) + 1);
    for (size_t i = 0; i < x.size(); ++i) {
        const double y = lp.step(x[i]);
        if (i % static_cast<size_t>(factor) == 0) out.push_back(y);
    }
    return out;
}

std::vector<double> minmax_scale(const std::vector<double>& x) {
    if (x.empty()) return {};
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> y(x.size());
    if (hi == lo) return y; // constant window -> zeros
    const double span = hi - lo;
    for (size_t i = 0; i < x.size(); ++i) y[i] = 2.0 * (x[i] - lo) / span - 1.0;
    return y;
}

PreparedSeries prepare_window(const std::vector<float>& raw, double sample_rate_hz, double age_s) {
    PreparedSeries out;
    if (age_s > kStaleSeconds || raw.empty()) return out; // stays absent
    std::vector<double> x(raw.begin(), raw.end());
    std::vector<double> dec = decimate(x, kDecimation, sample_rate_hz);
    std::vector<double> scaled = minmax_scale(dec);
    out.present = true;
    out.values.assign(scaled.begin(), scaled.end());
    return out;
}

} // namespace dsmt::signal
