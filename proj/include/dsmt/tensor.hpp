#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dsmt/errors.hpp"

namespace dsmt::ad {

// Dense row-major tensor. Plain value type; shape extents are positive and
// data.size() always equals the product of the extents.
template <class T>
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<T> data;

    Tensor() = default;

    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(check_shape(shape)), T(0));
    }

    Tensor(std::vector<int64_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (check_shape(shape) != static_cast<int64_t>(data.size()))
            throw Error::config("tensor: data length does not match shape " + shape_str());
    }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<int64_t> s, T v) {
        Tensor t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }

    T& at(int64_t i) { return data[static_cast<size_t>(i)]; }
    const T& at(int64_t i) const { return data[static_cast<size_t>(i)]; }

    // Rank-2 [rows, cols] accessor.
    T& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
    const T& at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }

    // Rank-3 [n, c, l] accessor.
    T& at(int64_t n, int64_t c, int64_t l) {
        return data[static_cast<size_t>((n * shape[1] + c) * shape[2] + l)];
    }
    const T& at(int64_t n, int64_t c, int64_t l) const {
        return data[static_cast<size_t>((n * shape[1] + c) * shape[2] + l)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ']';
        return os.str();
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }

private:
    static int64_t check_shape(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t e : s) {
            if (e <= 0) throw Error::config("tensor: non-positive extent in shape");
            n *= e;
        }
        return n;
    }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

} // namespace dsmt::ad
