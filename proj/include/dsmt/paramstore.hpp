#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dsmt/errors.hpp"
#include "dsmt/tensor.hpp"

namespace dsmt::ad {

// Flat named storage for every array a model owns: trainable weights plus
// batch-norm running statistics. Keys are ordered so iteration (and the
// serialized layout) is deterministic.
template <class T>
class ParamStore {
public:
    struct Entry {
        Tensor<T> value;
        bool trainable = true;
    };

    static constexpr char kMagic[8] = {'D', 'S', 'M', 'T', 'P', 'R', 'M', '\0'};
    static constexpr uint32_t kVersion = 1;

    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    Tensor<T>& add(const std::string& name, Tensor<T> v, bool trainable = true) {
        auto [it, fresh] = entries_.emplace(name, Entry{std::move(v), trainable});
        if (!fresh) throw Error::config("param store: duplicate entry '" + name + "'");
        return it->second.value;
    }

    Tensor<T>& get(const std::string& name) {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw Error::config("param store: missing entry '" + name + "'");
        return it->second.value;
    }
    const Tensor<T>& get(const std::string& name) const {
        return const_cast<ParamStore*>(this)->get(name);
    }
    bool trainable(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw Error::config("param store: missing entry '" + name + "'");
        return it->second.trainable;
    }

    std::map<std::string, Entry>& entries() { return entries_; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    int64_t total_scalars() const {
        int64_t n = 0;
        for (const auto& [k, e] : entries_) n += e.value.numel();
        return n;
    }
    int64_t trainable_scalars() const {
        int64_t n = 0;
        for (const auto& [k, e] : entries_)
            if (e.trainable) n += e.value.numel();
        return n;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error::data("param store: cannot open '" + path + "' for writing");
        f.write(kMagic, 8);
        write_u32(f, kVersion);
        write_u32(f, static_cast<uint32_t>(entries_.size()));
        for (const auto& [name, e] : entries_) {
            write_u32(f, static_cast<uint32_t>(name.size()));
            f.write(name.data(), static_cast<std::streamsize>(name.size()));
            write_u32(f, static_cast<uint32_t>(e.value.rank()));
            for (int64_t d : e.value.shape) {
                write_u64(f, static_cast<uint64_t>(d));
            }
            for (const T& v : e.value.data) {
                const float x = static_cast<float>(v);
                uint32_t bits;
                std::memcpy(&bits, &x, 4);
                write_u32(f, bits);
            }
        }
        if (!f) throw Error::data("param store: write to '" + path + "' failed");
    }

    static ParamStore load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error::data("param store: cannot open '" + path + "'");
        char magic[8];
        f.read(magic, 8);
        if (!f || std::memcmp(magic, kMagic, 8) != 0)
            throw Error::data("param store: '" + path + "' has wrong magic");
        const uint32_t version = read_u32(f, path);
        if (version != kVersion)
            throw Error::data("param store: '" + path + "' has unsupported version " +
                              std::to_string(version));
        const uint32_t count = read_u32(f, path);
        ParamStore out;
        for (uint32_t i = 0; i < count; ++i) {
            const uint32_t name_len = read_u32(f, path);
            if (name_len > 4096) throw Error::data("param store: '" + path + "' corrupt name length");
            std::string name(name_len, '\0');
            f.read(name.data(), name_len);
            const uint32_t rank = read_u32(f, path);
            if (rank > 8) throw Error::data("param store: '" + path + "' corrupt rank");
            std::vector<int64_t> shape(rank);
            for (uint32_t d = 0; d < rank; ++d)
                shape[d] = static_cast<int64_t>(read_u64(f, path));
            int64_t n = 1;
            for (int64_t d : shape) n *= d;
            if (n < 0 || n > (int64_t(1) << 31))
                throw Error::data("param store: '" + path + "' corrupt extents");
            std::vector<T> data(static_cast<size_t>(n));
            for (int64_t j = 0; j < n; ++j) {
                const uint32_t bits = read_u32(f, path);
                float x;
                std::memcpy(&x, &bits, 4);
                data[static_cast<size_t>(j)] = static_cast<T>(x);
            }
            if (!f) throw Error::data("param store: '" + path + "' truncated");
            const bool run_stat = name.ends_with(".running_mean") || name.ends_with(".running_var");
            out.add(name, Tensor<T>(shape, std::move(data)), !run_stat);
        }
        return out;
    }

    bool operator==(const ParamStore& o) const {
        if (entries_.size() != o.entries_.size()) return false;
        auto a = entries_.begin();
        auto b = o.entries_.begin();
        for (; a != entries_.end(); ++a, ++b) {
            if (a->first != b->first || a->second.value.shape != b->second.value.shape ||
                a->second.value.data != b->second.value.data)
                return false;
        }
        return true;
    }

private:
    std::map<std::string, Entry> entries_;

    static void write_u32(std::ofstream& f, uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        f.write(reinterpret_cast<char*>(b), 4);
    }
    static void write_u64(std::ofstream& f, uint64_t v) {
        write_u32(f, static_cast<uint32_t>(v));
        write_u32(f, static_cast<uint32_t>(v >> 32));
    }
    static uint32_t read_u32(std::ifstream& f, const std::string& path) {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        if (!f) throw Error::data("param store: '" + path + "' truncated");
        return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
               (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    }
    static uint64_t read_u64(std::ifstream& f, const std::string& path) {
        const uint64_t lo = read_u32(f, path);
        const uint64_t hi = read_u32(f, path);
        return lo | (hi << 32);
    }
};

} // namespace dsmt::ad
