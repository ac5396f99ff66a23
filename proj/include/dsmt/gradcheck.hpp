#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsmt/adam.hpp"
#include "dsmt/paramstore.hpp"
#include "dsmt/rng.hpp"
#include "dsmt/tape.hpp"

namespace dsmt::ad {

struct GradCheckOptions {
    double eps = 1e-5;
    // With a positive cap, at most this many elements per parameter array are
    // compared (a deterministic sample that always includes the ends); 0
    // checks every element.
    int64_t max_elems_per_array = 0;
    uint64_t sample_seed = 1;
};

struct GradCheckReport {
    double max_rel = 0.0;
    int64_t elements_checked = 0;
    std::string worst_param;
    int64_t worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    bool ok(double tol) const { return max_rel <= tol; }
};

inline double rel_difference(double a, double b) {
    return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

// Central-difference check of every gradient the forward function produces.
// `forward` must rebuild the graph from the store's current values onto the
// given tape, fill `bindings` with the parameters it bound, and return the
// scalar loss node. It must be deterministic across calls (fixed dropout
// draws, batch-norm in a mode that does not depend on running statistics).
template <class T, class F>
GradCheckReport check_gradients(ParamStore<T>& store, F&& forward,
                                const GradCheckOptions& opt = {}) {
    static_assert(std::is_floating_point_v<T>);
    GradCheckReport rep;

    Tape<T> tape;
    std::vector<Binding<T>> bindings;
    const NodeId loss = forward(tape, bindings);
    tape.backward(loss);
    std::map<std::string, std::vector<T>> analytic;
    for (const Binding<T>& b : bindings) analytic[b.name] = tape.grad(b.node).data;

    SplitRng sampler(opt.sample_seed);
    for (const Binding<T>& b : bindings) {
        auto& entry = store.get(b.name);
        const int64_t n = entry.numel();
        std::vector<int64_t> picks;
        if (opt.max_elems_per_array <= 0 || n <= opt.max_elems_per_array) {
            picks.resize(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) picks[static_cast<size_t>(i)] = i;
        } else {
            std::set<int64_t> chosen = {0, n - 1};
            SplitRng r = sampler.split(b.name);
            while (static_cast<int64_t>(chosen.size()) < opt.max_elems_per_array)
                chosen.insert(static_cast<int64_t>(r.uniform_int(static_cast<uint64_t>(n))));
            picks.assign(chosen.begin(), chosen.end());
        }
        const std::vector<T>& g = analytic.at(b.name);
        for (int64_t i : picks) {
            const T saved = entry.data[static_cast<size_t>(i)];
            entry.data[static_cast<size_t>(i)] = static_cast<T>(saved + opt.eps);
            const double fp = eval_loss(store, forward);
            entry.data[static_cast<size_t>(i)] = static_cast<T>(saved - opt.eps);
            const double fm = eval_loss(store, forward);
            entry.data[static_cast<size_t>(i)] = saved;
            const double numeric = (fp - fm) / (2.0 * opt.eps);
            const double analytic_i = static_cast<double>(g[static_cast<size_t>(i)]);
            const double rel = rel_difference(analytic_i, numeric);
            ++rep.elements_checked;
            if (rel > rep.max_rel) {
                rep.max_rel = rel;
                rep.worst_param = b.name;
                rep.worst_index = i;
                rep.worst_analytic = analytic_i;
                rep.worst_numeric = numeric;
            }
        }
    }
    return rep;
}

template <class T, class F>
double eval_loss(ParamStore<T>& store, F&& forward) {
    (void)store; // forward reads the store it captured
    Tape<T> tape;
    std::vector<Binding<T>> bindings;
    const NodeId loss = forward(tape, bindings);
    return static_cast<double>(tape.value(loss).data[0]);
}

} // namespace dsmt::ad
