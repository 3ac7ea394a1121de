#pragma once

#include <cmath>
#include <cstdint>

#include "spikebench/tensor.hpp"

namespace spikebench {

// Bias-corrected Adam, one state per parameter tensor.
template <typename S>
struct AdamT {
    S lr = S(0.001);
    S beta1 = S(0.9);
    S beta2 = S(0.999);
    S eps = S(1e-8);
    TensorT<S> m;
    TensorT<S> v;
    int64_t t = 0;

    AdamT() = default;
    explicit AdamT(const std::vector<size_t>& param_shape, S lr_ = S(0.001)) : lr(lr_), m(param_shape), v(param_shape) {}

    void step(TensorT<S>& params, const TensorT<S>& grads) {
        check_same_shape(params, grads, "adam_step params/grads");
        check_same_shape(params, m, "adam_step params/m");
        ++t;
        const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), static_cast<double>(t)));
        const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), static_cast<double>(t)));
        for (size_t i = 0; i < params.numel(); ++i) {
            const S g = grads.data[i];
            m.data[i] = beta1 * m.data[i] + (S(1) - beta1) * g;
            v.data[i] = beta2 * v.data[i] + (S(1) - beta2) * g * g;
            const S mhat = m.data[i] / bc1;
            const S vhat = v.data[i] / bc2;
            params.data[i] -= lr * mhat / (static_cast<S>(std::sqrt(static_cast<double>(vhat))) + eps);
        }
    }
};

using Adam = AdamT<float>;

}  // namespace spikebench
