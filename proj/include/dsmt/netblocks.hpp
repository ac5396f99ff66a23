#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsmt/adam.hpp"
#include "dsmt/dataset.hpp"
#include "dsmt/errors.hpp"
#include "dsmt/paramstore.hpp"
#include "dsmt/ranking.hpp"
#include "dsmt/rng.hpp"
#include "dsmt/tape.hpp"
#include "dsmt/tensor.hpp"

namespace dsmt::net {

// Hyperparameters of one network block (perception / multitask / head).
struct BlockSpec {
    int depth = 2;        // hidden layers (residual units or highway layers)
    int width = 16;       // channels / units per layer
    double dropout = 0.5; // rate applied after each hidden layer (not in perception)
};

enum class Variant {
    Dsmt,           // k parallel multitask blocks between perception and head
    Dsmt0,          // no multitask blocks at all (requires k = 0)
    NaiveMultitask, // auxiliary heads bolted onto the head block's last hidden layer
    DsmtDepth,      // one deep highway column hosting all k tasks round-robin
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelSpec {
    Variant variant = Variant::Dsmt;
    std::vector<std::string> streams = data::stream_names();
    int k = 12; // auxiliary task count
    tasks::SelectStrategy strategy = tasks::SelectStrategy::Importance;
    BlockSpec perception;
    BlockSpec multitask; // one width for every parallel block
    BlockSpec head;

    // Throws Error::config on out-of-range fields or variant/k mismatch.
    void validate() const;

    int joint_dim() const {
        return static_cast<int>(streams.size()) * (perception.width + 1);
    }
};

// For the deep variant: which column layer hosts auxiliary task j.
inline int depth_layer_of_task(int j, int column_depth) { return j % column_depth; }

// One mini-batch, stream-major. Rows for which a stream is absent carry no
// samples at all; the network sees only a presence flag for them.
template <class T>
struct StreamBatch {
    std::vector<int32_t> rows;  // batch rows where the stream is present (ascending)
    ad::Tensor<T> x;            // [rows.size(), 1, L]; unused when rows is empty
    ad::Tensor<T> missing;      // [B, 1]: 1 = absent, 0 = present
};

template <class T>
struct Batch {
    int64_t size = 0;
    std::vector<std::string> ids;          // row -> alarm id
    std::vector<StreamBatch<T>> streams;   // aligned with ModelSpec::streams
};

// Assemble a batch from prepared alarms. Enforces per-stream window lengths
// and drops the payload of absent streams so their raw contents can never
// reach the graph.
template <class T>
Batch<T> make_batch(const std::vector<const data::PreparedAlarm*>& alarms,
                    const std::vector<std::string>& streams = data::stream_names()) {
    if (alarms.empty()) throw Error::data("make_batch: empty batch");
    Batch<T> b;
    b.size = static_cast<int64_t>(alarms.size());
    b.ids.reserve(alarms.size());
    for (const data::PreparedAlarm* a : alarms) b.ids.push_back(a->id);
    b.streams.resize(streams.size());
    for (size_t si = 0; si < streams.size(); ++si) {
        const std::string& name = streams[si];
        const int64_t want = data::prepared_window_len(name);
        StreamBatch<T>& sb = b.streams[si];
        sb.missing = ad::Tensor<T>::zeros({b.size, 1});
        std::vector<T> vals;
        for (int64_t r = 0; r < b.size; ++r) {
            auto it = alarms[static_cast<size_t>(r)]->streams.find(name);
            const bool present = it != alarms[static_cast<size_t>(r)]->streams.end() &&
                                 it->second.present;
            if (!present) {
                sb.missing.data[static_cast<size_t>(r)] = T(1);
                continue;
            }
            if (static_cast<int64_t>(it->second.values.size()) != want)
                throw Error::data("make_batch: stream " + name + " of alarm '" +
                                  alarms[static_cast<size_t>(r)]->id + "' has " +
                                  std::to_string(it->second.values.size()) +
                                  " samples, expected " + std::to_string(want));
            sb.rows.push_back(static_cast<int32_t>(r));
            for (float v : it->second.values) vals.push_back(static_cast<T>(v));
        }
        if (!sb.rows.empty()) {
            sb.x = ad::Tensor<T>({static_cast<int64_t>(sb.rows.size()), 1, want},
                                 std::move(vals));
        }
    }
    return b;
}

// Graph-construction mode. Train uses batch statistics and updates the running
// ones; Frozen uses batch statistics without touching the running ones (for
// gradient checks); Eval uses the stored running statistics. Dropout is active
// in Train and Frozen, off in Eval.
enum class Mode { Train, Frozen, Eval };

// Everything the forward pass exposes. All ids live on the tape passed in.
struct ForwardOutputs {
    ad::NodeId y{};                   // [B, 1] main-task probability
    std::vector<ad::NodeId> aux;      // k of [B, 1] auxiliary regressions
    std::vector<ad::NodeId> h_p;      // per-stream perception vectors [B, w]
    ad::NodeId pc{};                  // joint representation [B, n*(w+1)]
    std::vector<ad::NodeId> h_m;      // per-task hidden representation [B, w]
    ad::NodeId head_hidden{};         // head block's last hidden layer [B, w]
};

template <class T>
class Model {
public:
    Model(ModelSpec spec, uint64_t seed) : spec_(std::move(spec)) {
        spec_.validate();
        init(seed);
    }

    const ModelSpec& spec() const { return spec_; }
    ad::ParamStore<T>& params() { return store_; }
    const ad::ParamStore<T>& params() const { return store_; }

    // Builds the forward graph for one batch. Appends one Binding per distinct
    // parameter touched (suitable for Adam or gradient checking). drop_rng
    // drives the dropout masks; pass an identically seeded generator to
    // reproduce a graph exactly.
    ForwardOutputs forward(ad::Tape<T>& tape, const Batch<T>& batch, Mode mode,
                           SplitRng& drop_rng,
                           std::vector<ad::Binding<T>>* bindings = nullptr) {
        if (static_cast<size_t>(batch.streams.size()) != spec_.streams.size())
            throw Error::data("forward: batch has " + std::to_string(batch.streams.size()) +
                              " streams, model expects " + std::to_string(spec_.streams.size()));
        Ctx c{tape, mode, drop_rng, bindings, {}};
        ForwardOutputs out;

        // Perception: one block per stream, then zero-filled rows for absent
        // streams so the joint layout is positionally stable.
        std::vector<ad::NodeId> parts;
        for (size_t si = 0; si < spec_.streams.size(); ++si) {
            const StreamBatch<T>& sb = batch.streams[si];
            ad::NodeId h;
            if (sb.rows.empty()) {
                h = tape.input(ad::Tensor<T>::zeros({batch.size, spec_.perception.width}));
            } else {
                ad::NodeId hp = perception(c, spec_.streams[si], tape.input(sb.x));
                h = tape.scatter_rows(hp, sb.rows, batch.size);
            }
            out.h_p.push_back(h);
            parts.push_back(h);
            parts.push_back(tape.input(sb.missing));
        }
        out.pc = tape.concat(parts);

        // Middle: variant-specific multitask stage feeding the combinator.
        std::vector<ad::NodeId> combine_in{out.pc};
        if (spec_.variant == Variant::Dsmt) {
            for (int j = 0; j < spec_.k; ++j) {
                ad::NodeId z = linear(c, key("mt", j, ".proj"), out.pc,
                                      spec_.multitask.width);
                z = batch_norm(c, key("mt", j, ".bn"), z);
                for (int l = 0; l < spec_.multitask.depth; ++l) {
                    z = highway(c, key("mt", j, ".hw", l), z);
                    z = drop(c, z, spec_.multitask.dropout);
                }
                out.h_m.push_back(z);
                out.aux.push_back(linear(c, key("mt", j, ".aux"), z, 1));
                combine_in.push_back(z);
            }
        } else if (spec_.variant == Variant::DsmtDepth) {
            ad::NodeId z = linear(c, "col.proj", out.pc, spec_.multitask.width);
            z = batch_norm(c, "col.bn", z);
            std::vector<ad::NodeId> layer_out;
            for (int l = 0; l < spec_.multitask.depth; ++l) {
                z = highway(c, key("col", -1, ".hw", l), z);
                z = drop(c, z, spec_.multitask.dropout);
                layer_out.push_back(z);
            }
            for (int j = 0; j < spec_.k; ++j) {
                ad::NodeId host = layer_out[static_cast<size_t>(
                    depth_layer_of_task(j, spec_.multitask.depth))];
                out.h_m.push_back(host);
                out.aux.push_back(linear(c, key("col", -1, ".aux", j), host, 1));
            }
            combine_in.push_back(z); // only the column's top enters the combinator
        }
        // Dsmt0 and NaiveMultitask pass the joint vector through unchanged.

        // Combinator: single hidden layer, no normalisation or dropout (it is
        // a funnel between blocks, not a block itself).
        ad::NodeId cat = combine_in.size() == 1 ? combine_in[0] : tape.concat(combine_in);
        ad::NodeId mixed = tape.relu(linear(c, "comb", cat, 2 * spec_.head.width));

        // Head: projection, highway stack, zero-initialised sigmoid unit.
        ad::NodeId z = linear(c, "head.proj", mixed, spec_.head.width);
        z = batch_norm(c, "head.bn", z);
        for (int l = 0; l < spec_.head.depth; ++l) {
            z = highway(c, key("head", -1, ".hw", l), z);
            z = drop(c, z, spec_.head.dropout);
        }
        out.head_hidden = z;
        if (spec_.variant == Variant::NaiveMultitask) {
            for (int j = 0; j < spec_.k; ++j)
                out.aux.push_back(linear(c, key("head", -1, ".aux", j), z, 1));
        }
        out.y = tape.sigmoid(linear(c, "head.out", z, 1));
        return out;
    }

private:
    struct Ctx {
        ad::Tape<T>& tape;
        Mode mode;
        SplitRng& drop_rng;
        std::vector<ad::Binding<T>>* bindings;
        std::map<std::string, ad::NodeId> bound;
    };

    static std::string key(const char* stem, int block, const char* part, int idx = -1) {
        std::string s(stem);
        if (block >= 0) s += std::to_string(block);
        s += part;
        if (idx >= 0) s += std::to_string(idx);
        return s;
    }

    ad::NodeId param(Ctx& c, const std::string& name) {
        auto it = c.bound.find(name);
        if (it != c.bound.end()) return it->second;
        ad::NodeId id = c.tape.param(store_.get(name));
        c.bound.emplace(name, id);
        if (c.bindings) c.bindings->push_back({name, id});
        return id;
    }

    // y = x W + b for rank-2 x.
    ad::NodeId linear(Ctx& c, const std::string& name, ad::NodeId x, int out_dim) {
        (void)out_dim; // dimensions live in the stored tensors
        ad::NodeId w = param(c, name + ".w");
        ad::NodeId b = param(c, name + ".b");
        return c.tape.add(c.tape.matmul(x, w), b);
    }

    ad::NodeId batch_norm(Ctx& c, const std::string& name, ad::NodeId x) {
        ad::NodeId gamma = param(c, name + ".gamma");
        ad::NodeId beta = param(c, name + ".beta");
        ad::Tensor<T>& rm = store_.get(name + ".running_mean");
        ad::Tensor<T>& rv = store_.get(name + ".running_var");
        ad::BnMode bn = c.mode == Mode::Train    ? ad::BnMode::Train
                        : c.mode == Mode::Frozen ? ad::BnMode::FrozenStats
                                                 : ad::BnMode::Eval;
        return c.tape.batch_norm(x, gamma, beta, bn, kBnMomentum, rm.data.data(),
                                 rv.data.data());
    }

    // out = t * relu(Wh x + bh) + (1 - t) * x with t = sigmoid(Wt x + bt).
    // bt starts negative so fresh layers mostly carry their input through.
    ad::NodeId highway(Ctx& c, const std::string& name, ad::NodeId x) {
        ad::NodeId t = c.tape.sigmoid(linear(c, name + ".t", x, 0));
        ad::NodeId h = c.tape.relu(linear(c, name + ".h", x, 0));
        ad::NodeId one_minus_t = c.tape.add(c.tape.scale(t, -1.0),
                                            c.tape.input(ad::Tensor<T>::scalar(T(1))));
        return c.tape.add(c.tape.mul(t, h), c.tape.mul(one_minus_t, x));
    }

    ad::NodeId drop(Ctx& c, ad::NodeId x, double rate) {
        return c.tape.dropout(x, rate, c.mode != Mode::Eval, c.drop_rng);
    }

    // conv -> batch-norm -> relu, shared shape throughout. No conv bias: the
    // normalisation would cancel it, so beta is the only shift that matters.
    ad::NodeId conv_bn_relu(Ctx& c, const std::string& name, ad::NodeId x) {
        ad::NodeId w = param(c, name + ".w");
        const int64_t co = store_.get(name + ".w").shape[0];
        ad::NodeId b = c.tape.input(ad::Tensor<T>::zeros({co}));
        ad::NodeId y = c.tape.conv1d(x, w, b, 1, ad::PadMode::Same);
        return c.tape.relu(batch_norm(c, name + ".bn", y));
    }

    // Stem lifts the raw channel to full width and halves the length; each
    // residual unit refines at constant width with pooling in between.
    ad::NodeId perception(Ctx& c, const std::string& stream, ad::NodeId x) {
        const std::string base = "perception." + stream;
        ad::NodeId z = conv_bn_relu(c, base + ".stem", x);
        z = c.tape.max_pool1d(z, 2, 2);
        for (int u = 0; u < spec_.perception.depth; ++u) {
            if (u > 0) z = c.tape.max_pool1d(z, 2, 2);
            ad::NodeId r = conv_bn_relu(c, key(base.c_str(), -1, ".res", u), z);
            z = c.tape.add(z, r);
        }
        return c.tape.global_avg_pool(z);
    }

    void init(uint64_t seed);

    static constexpr double kBnMomentum = 0.99;

    ModelSpec spec_;
    ad::ParamStore<T> store_;
};

// --- parameter initialisation -----------------------------------------------

namespace detail {

// Uniform in (-sqrt(3/fan_in), +sqrt(3/fan_in)); keeps activations near unit
// variance at any width.
template <class T>
ad::Tensor<T> fan_in_uniform(std::vector<int64_t> shape, int64_t fan_in, SplitRng rng) {
    ad::Tensor<T> t(std::move(shape));
    const double lim = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (T& v : t.data) v = static_cast<T>(rng.uniform(-lim, lim));
    return t;
}

} // namespace detail

template <class T>
void Model<T>::init(uint64_t seed) {
    SplitRng root(seed);
    auto uni = [&](const std::string& name, std::vector<int64_t> shape, int64_t fan_in) {
        store_.add(name, detail::fan_in_uniform<T>(std::move(shape), fan_in, root.split(name)));
    };
    auto vec = [&](const std::string& name, int64_t n, T v) {
        store_.add(name, ad::Tensor<T>::full({n}, v));
    };
    auto bn = [&](const std::string& name, int64_t n) {
        vec(name + ".gamma", n, T(1));
        vec(name + ".beta", n, T(0));
        store_.add(name + ".running_mean", ad::Tensor<T>::zeros({n}), false);
        store_.add(name + ".running_var", ad::Tensor<T>::full({n}, T(1)), false);
    };
    auto lin = [&](const std::string& name, int64_t in, int64_t out) {
        uni(name + ".w", {in, out}, in);
        vec(name + ".b", out, T(0));
    };
    auto highway_layer = [&](const std::string& name, int64_t w) {
        uni(name + ".t.w", {w, w}, w);
        vec(name + ".t.b", w, T(-1)); // bias the gate towards carrying the input
        uni(name + ".h.w", {w, w}, w);
        vec(name + ".h.b", w, T(0));
    };

    const int64_t pw = spec_.perception.width;
    for (const std::string& s : spec_.streams) {
        const std::string base = "perception." + s;
        uni(base + ".stem.w", {pw, 1, 7}, 7);
        bn(base + ".stem.bn", pw);
        for (int u = 0; u < spec_.perception.depth; ++u) {
            const std::string r = base + ".res" + std::to_string(u);
            uni(r + ".w", {pw, pw, 7}, pw * 7);
            bn(r + ".bn", pw);
        }
    }

    const int64_t joint = spec_.joint_dim();
    const int64_t mw = spec_.multitask.width;
    int64_t combine_in = joint;
    if (spec_.variant == Variant::Dsmt) {
        for (int j = 0; j < spec_.k; ++j) {
            const std::string base = "mt" + std::to_string(j);
            lin(base + ".proj", joint, mw);
            bn(base + ".bn", mw);
            for (int l = 0; l < spec_.multitask.depth; ++l)
                highway_layer(base + ".hw" + std::to_string(l), mw);
            lin(base + ".aux", mw, 1);
        }
        combine_in += static_cast<int64_t>(spec_.k) * mw;
    } else if (spec_.variant == Variant::DsmtDepth) {
        lin("col.proj", joint, mw);
        bn("col.bn", mw);
        for (int l = 0; l < spec_.multitask.depth; ++l)
            highway_layer("col.hw" + std::to_string(l), mw);
        for (int j = 0; j < spec_.k; ++j) lin("col.aux" + std::to_string(j), mw, 1);
        combine_in += mw;
    }

    const int64_t hw = spec_.head.width;
    lin("comb", combine_in, 2 * hw);
    lin("head.proj", 2 * hw, hw);
    bn("head.bn", hw);
    for (int l = 0; l < spec_.head.depth; ++l)
        highway_layer("head.hw" + std::to_string(l), hw);
    if (spec_.variant == Variant::NaiveMultitask)
        for (int j = 0; j < spec_.k; ++j) lin("head.aux" + std::to_string(j), hw, 1);
    // Zero so a freshly built network outputs exactly 0.5.
    store_.add("head.out.w", ad::Tensor<T>::zeros({hw, 1}));
    vec("head.out.b", 1, T(0));
}

} // namespace dsmt::net
