// Rough throughput probe for the convolution kernels at the shapes the
// perception blocks actually use. Prints achieved GFLOP/s so batch and epoch
// budgets can be chosen with numbers instead of guesses.
#include <chrono>
#include <cstdio>

#include "dsmt/rng.hpp"
#include "dsmt/tape.hpp"

using namespace dsmt;
using namespace dsmt::ad;

namespace {

template <class T>
double bench(int64_t N, int64_t C, int64_t L, int64_t Co, int64_t K, int reps, bool grad) {
    SplitRng rng(1);
    Tensor<T> x = Tensor<T>::zeros({N, C, L});
    Tensor<T> w = Tensor<T>::zeros({Co, C, K});
    Tensor<T> b = Tensor<T>::zeros({Co});
    for (auto& v : x.data) v = static_cast<T>(rng.normal());
    for (auto& v : w.data) v = static_cast<T>(rng.normal() * 0.1);

    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0;
    for (int r = 0; r < reps; ++r) {
        Tape<T> tape;
        NodeId xi = grad ? tape.param(x) : tape.input(x);
        NodeId wi = tape.param(w);
        NodeId bi = tape.param(b);
        NodeId y = tape.conv1d(xi, wi, bi, 1, PadMode::Same);
        NodeId l = tape.mean(y);
        if (grad) tape.backward(l);
        sink += static_cast<double>(tape.value(l).data[0]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    // forward MACs; backward roughly doubles-to-triples this
    const double macs = static_cast<double>(N) * Co * C * L * K * reps;
    const double factor = grad ? 3.0 : 1.0;
    std::printf("N=%2lld C=%2lld L=%4lld Co=%2lld K=%lld %s: %7.1f ms/rep  %6.2f GFLOP/s (sink %g)\n",
                (long long)N, (long long)C, (long long)L, (long long)Co, (long long)K,
                grad ? "fwd+bwd" : "fwd    ", secs * 1000 / reps,
                2.0 * macs * factor / secs / 1e9, sink);
    return secs / reps;
}

} // namespace

int main() {
    std::puts("f32:");
    // stem over a raw stream window, then the residual stack shapes
    bench<float>(32, 1, 500, 16, 7, 20, false);
    bench<float>(32, 16, 250, 16, 7, 20, false);
    bench<float>(32, 16, 125, 16, 7, 20, false);
    bench<float>(32, 1, 500, 16, 7, 10, true);
    const double per_batch = bench<float>(32, 16, 250, 16, 7, 10, true);
    std::puts("f64:");
    bench<double>(32, 16, 250, 16, 7, 5, true);

    // one training step runs roughly: 4 streams x (stem + ~4 stacked convs)
    const double step_estimate = per_batch * 4 * 5;
    std::printf("\n~%.0f ms per 32-window training step (conv-dominated estimate)\n",
                step_estimate * 1000);
    return 0;
}
