#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "spikebench/errors.hpp"

namespace spikebench {

// Dense row-major tensor. Runtime code uses the float instantiation; the
// double one exists so the BPTT gradient check can run at full precision.
template <typename S>
struct TensorT {
    std::vector<size_t> shape;
    std::vector<S> data;

    TensorT() = default;

    explicit TensorT(std::vector<size_t> shape_) : shape(std::move(shape_)), data(numel_of(shape), S(0)) {}

    TensorT(std::vector<size_t> shape_, std::vector<S> data_) : shape(std::move(shape_)), data(std::move(data_)) {
        if (numel_of(shape) != data.size())
            throw ShapeError("tensor data size " + std::to_string(data.size()) + " does not match shape (numel " +
                             std::to_string(numel_of(shape)) + ")");
    }

    static size_t numel_of(const std::vector<size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), size_t{1}, std::multiplies<size_t>());
    }

    size_t numel() const { return data.size(); }
    size_t dim(size_t i) const { return shape.at(i); }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](size_t i) { return data[i]; }
    const S& operator[](size_t i) const { return data[i]; }

    S& at(size_t i, size_t j) { return data[i * shape[1] + j]; }
    const S& at(size_t i, size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
        return s + "]";
    }

    template <typename T2>
    TensorT<T2> cast() const {
        TensorT<T2> out(shape);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T2>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;

template <typename S>
void check_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace spikebench
