#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spikebench/errors.hpp"
#include "spikebench/tensor.hpp"

namespace spikebench {

template <typename S>
struct LifParamsT {
    S beta = S(0.95);          // membrane decay per step
    S threshold = S(1);        // firing threshold
    bool subtract_reset = true;  // false: clamp the membrane to zero after a spike
    S surrogate_width = S(2);  // slope parameter of the surrogate derivative
    bool detach_reset = true;  // cut the gradient path through the reset term
    bool smooth = false;       // smooth spike gate instead of a hard threshold
                               // (forward becomes differentiable for gradient checks)

    void validate() const {
        if (!(beta > S(0) && beta < S(1))) throw ConfigError("lif beta must lie in (0,1)");
        if (!(threshold > S(0))) throw ConfigError("lif threshold must be > 0");
        if (!(surrogate_width > S(0))) throw ConfigError("lif surrogate_width must be > 0");
    }
};

using LifParams = LifParamsT<float>;

// Surrogate derivative of the spike nonlinearity at pre-reset membrane u:
// 1 / (1 + (pi * width * (u - threshold))^2).
template <typename S>
inline S surrogate_grad(S u, const LifParamsT<S>& p) {
    const S z = S(M_PI) * p.surrogate_width * (u - p.threshold);
    return S(1) / (S(1) + z * z);
}

// Smooth spike gate whose exact derivative is surrogate_grad; ranges over
// 0.5 +- 1/(2*width) and crosses 0.5 at the threshold.
template <typename S>
inline S smooth_gate(S u, const LifParamsT<S>& p) {
    const S a = S(M_PI) * p.surrogate_width;
    return std::atan(a * (u - p.threshold)) / a + S(0.5);
}

template <typename S>
inline S spike_gate(S u, const LifParamsT<S>& p) {
    if (p.smooth) return smooth_gate(u, p);
    return u >= p.threshold ? S(1) : S(0);
}

// One membrane update: decay, integrate, compare, reset (in that order).
// `membrane` holds the post-reset value across calls; the returned pre-reset
// value is what the loss and the attack features read.
template <typename S>
struct LifStep {
    S pre;    // membrane after decay + integration, before reset
    S spike;  // emitted spike (0/1, or the gate value in smooth mode)
    S post;   // membrane carried to the next step
};

template <typename S>
inline LifStep<S> lif_step_scalar(S membrane_prev, S input_current, const LifParamsT<S>& p) {
    LifStep<S> r;
    r.pre = p.beta * membrane_prev + input_current;
    r.spike = spike_gate(r.pre, p);
    r.post = p.subtract_reset ? r.pre - r.spike * p.threshold : r.pre * (S(1) - r.spike);
    return r;
}

// Elementwise LIF state for a layer of n neurons.
template <typename S>
struct LifStateT {
    TensorT<S> membrane;  // post-reset potentials
    TensorT<S> spikes;    // last emitted spikes

    explicit LifStateT(size_t n = 0) : membrane({n}), spikes({n}) {}
};

template <typename S>
void lif_step(LifStateT<S>& state, const TensorT<S>& input_current, const LifParamsT<S>& p) {
    check_same_shape(state.membrane, input_current, "lif_step");
    for (size_t i = 0; i < input_current.numel(); ++i) {
        const LifStep<S> r = lif_step_scalar(state.membrane.data[i], input_current.data[i], p);
        state.membrane.data[i] = r.post;
        state.spikes.data[i] = r.spike;
    }
}

// Time-unrolled LIF layer over one sample. Keeps the pre-reset membranes and
// spikes of every step, which the backward pass and the attack features need.
template <typename S>
struct LifSeqT {
    TensorT<S> u;  // [T, n] pre-reset membranes
    TensorT<S> s;  // [T, n] emitted spikes

    void forward(const TensorT<S>& currents, const LifParamsT<S>& p) {
        const size_t steps = currents.shape[0], n = currents.shape[1];
        if (!u.same_shape(currents)) {
            u = TensorT<S>({steps, n});
            s = TensorT<S>({steps, n});
        }
        std::vector<S> post(n, S(0));
        for (size_t t = 0; t < steps; ++t) {
            const S* a = currents.ptr() + t * n;
            S* ut = u.ptr() + t * n;
            S* st = s.ptr() + t * n;
            for (size_t i = 0; i < n; ++i) {
                const LifStep<S> r = lif_step_scalar(post[i], a[i], p);
                ut[i] = r.pre;
                st[i] = r.spike;
                post[i] = r.post;
            }
        }
        for (size_t i = 0; i < n; ++i)
            if (!std::isfinite(static_cast<double>(post[i])))
                throw NumericalError("non-finite membrane potential in LIF layer of width " +
                                     std::to_string(n));
    }

    // BPTT through the stored sequence. g_spike is dL/dS per step (from the
    // next layer), g_direct is dL/dU per step (loss on the output membrane);
    // either may be null. Returns dL/dI, shaped like the input currents.
    //
    // Per step: U_t = beta*P_{t-1} + I_t, S_t = gate(U_t),
    //           P_t = U_t - S_t*theta (subtract) or U_t*(1 - S_t) (zero).
    // With carry_t = beta * dL/dU_{t+1} (the path through P_t):
    //   dL/dU_t = direct_t + carry_t * dP/dU|_S + (g_spike_t + carry_t * dP/dS) * gate'(U_t)
    // where dP/dS is dropped when the reset is detached.
    TensorT<S> backward(const TensorT<S>* g_spike, const TensorT<S>* g_direct,
                        const LifParamsT<S>& p) const {
        const size_t steps = u.shape[0], n = u.shape[1];
        TensorT<S> d_in({steps, n});
        std::vector<S> carry(n, S(0));
        for (size_t t = steps; t-- > 0;) {
            const S* ut = u.ptr() + t * n;
            const S* st = s.ptr() + t * n;
            const S* gs = g_spike ? g_spike->ptr() + t * n : nullptr;
            const S* gd = g_direct ? g_direct->ptr() + t * n : nullptr;
            S* out = d_in.ptr() + t * n;
            for (size_t i = 0; i < n; ++i) {
                const S fp = surrogate_grad(ut[i], p);
                S via_post, via_spike;
                if (p.subtract_reset) {
                    via_post = carry[i];
                    via_spike = p.detach_reset ? S(0) : -p.threshold * carry[i];
                } else {
                    via_post = carry[i] * (S(1) - st[i]);
                    via_spike = p.detach_reset ? S(0) : -ut[i] * carry[i];
                }
                const S gu = (gd ? gd[i] : S(0)) + via_post +
                             ((gs ? gs[i] : S(0)) + via_spike) * fp;
                out[i] = gu;  // dU/dI = 1
                carry[i] = p.beta * gu;
            }
        }
        return d_in;
    }
};

}  // namespace spikebench
