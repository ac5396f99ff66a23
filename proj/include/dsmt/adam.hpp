#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dsmt/errors.hpp"
#include "dsmt/paramstore.hpp"
#include "dsmt/tape.hpp"

namespace dsmt::ad {

template <class T>
struct Binding {
    std::string name;
    NodeId node;
};

// Adam with bias correction. Moment buffers are keyed by parameter name so
// the same optimizer instance can be shared across passes that bind the
// parameters onto fresh tapes.
template <class T>
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    Adam() = default;
    Adam(double b1, double b2, double e) : beta1(b1), beta2(b2), eps(e) {}

    int64_t steps() const { return t_; }

    // One update over every bound parameter, using the gradients currently on
    // the tape. Must be called after tape.backward(). Parameters the backward
    // pass never reached are skipped entirely — moments and per-parameter step
    // counts stay frozen, matching the convention of mainstream frameworks for
    // absent gradients — so alternating passes that optimize disjoint
    // parameter subsets do not leak momentum into each other's off-steps.
    void apply(ParamStore<T>& store, Tape<T>& tape, const std::vector<Binding<T>>& bindings,
               double lr) {
        ++t_;
        for (const Binding<T>& b : bindings) {
            if (!tape.reached(b.node)) continue;
            auto& val = store.get(b.name);
            const Tensor<T>& grad = tape.grad(b.node);
            if (!val.same_shape(grad))
                throw Error::config("adam: gradient shape mismatch for '" + b.name + "'");
            Slot& s = state_[b.name];
            if (s.m.empty()) {
                s.m.assign(val.data.size(), T(0));
                s.v.assign(val.data.size(), T(0));
            }
            ++s.t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
            for (size_t i = 0; i < val.data.size(); ++i) {
                const double gi = static_cast<double>(grad.data[i]);
                const double m = beta1 * static_cast<double>(s.m[i]) + (1.0 - beta1) * gi;
                const double v = beta2 * static_cast<double>(s.v[i]) + (1.0 - beta2) * gi * gi;
                s.m[i] = static_cast<T>(m);
                s.v[i] = static_cast<T>(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                val.data[i] =
                    static_cast<T>(static_cast<double>(val.data[i]) - lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }

    void reset() {
        t_ = 0;
        state_.clear();
    }

private:
    struct Slot {
        std::vector<T> m, v;
    };
    int64_t t_ = 0;
    std::map<std::string, Slot> state_;
};

} // namespace dsmt::ad
