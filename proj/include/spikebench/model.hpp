#pragma once

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "spikebench/lif.hpp"
#include "spikebench/ops.hpp"
#include "spikebench/rng.hpp"
#include "spikebench/tensor.hpp"

namespace spikebench {

enum class ArchKind { kConvNet, kFcNet };

inline std::string arch_name(ArchKind a) {
    return a == ArchKind::kConvNet ? "convnet" : "fcnet";
}
inline ArchKind arch_from_name(const std::string& s) {
    if (s == "convnet") return ArchKind::kConvNet;
    if (s == "fcnet") return ArchKind::kFcNet;
    throw ConfigError("unknown architecture '" + s + "'");
}

// Fan-in-scaled uniform init over (-1/sqrt(fan_in), 1/sqrt(fan_in)). Draws
// use the 53-bit path so float and double models see identical streams.
template <typename S>
void init_uniform_fanin(TensorT<S>& w, size_t fan_in, RngStream& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : w.data) v = static_cast<S>(bound * (2.0 * rng.next_double() - 1.0));
}

// Fully connected layer. Weights are stored [out, in]; a cached transpose
// makes the [T, in] x [in, out] forward a single blocked matmul. Callers must
// refresh_wt() after touching w.
template <typename S>
struct LinearT {
    TensorT<S> w;   // [out, in]
    TensorT<S> b;   // [out]
    TensorT<S> wt;  // [in, out]
    TensorT<S> gw;  // gradient accumulators, same shapes as w / b
    TensorT<S> gb;
    bool frozen = false;

    void init(size_t out, size_t in, RngStream& rng) {
        w = TensorT<S>({out, in});
        b = TensorT<S>({out});
        init_uniform_fanin(w, in, rng);
        init_uniform_fanin(b, in, rng);
        gw = TensorT<S>({out, in});
        gb = TensorT<S>({out});
        refresh_wt();
    }

    void refresh_wt() { wt = transpose2d(w); }

    size_t out_features() const { return b.numel(); }
    size_t in_features() const { return w.shape[1]; }

    // y[t,:] = x[t,:] * wt + b
    TensorT<S> forward(const TensorT<S>& x) const {
        const size_t steps = x.shape[0], out = out_features();
        TensorT<S> y({steps, out});
        for (size_t t = 0; t < steps; ++t)
            std::memcpy(y.ptr() + t * out, b.ptr(), out * sizeof(S));
        matmul_acc(y, x, wt);
        return y;
    }

    // Accumulates gw/gb from (x, dy) unless frozen; returns dx when asked.
    TensorT<S> backward(const TensorT<S>& x, const TensorT<S>& dy, bool want_dx) {
        const size_t steps = x.shape[0], out = out_features();
        if (!frozen) {
            TensorT<S> dyt = transpose2d(dy);  // [out, T]
            matmul_acc(gw, dyt, x);
            for (size_t t = 0; t < steps; ++t) {
                const S* row = dy.ptr() + t * out;
                for (size_t o = 0; o < out; ++o) gb.data[o] += row[o];
            }
        }
        if (!want_dx) return TensorT<S>();
        TensorT<S> dx({steps, in_features()});
        matmul_acc(dx, dy, w);
        return dx;
    }
};

// 3x3 same-padding convolution layer parameters (application is per
// timestep inside the model, so this only owns weights and gradients).
template <typename S>
struct ConvT {
    TensorT<S> w;  // [out_c, in_c, 3, 3]
    TensorT<S> b;  // [out_c]
    TensorT<S> gw;
    TensorT<S> gb;
    bool frozen = false;

    void init(size_t out_c, size_t in_c, RngStream& rng) {
        w = TensorT<S>({out_c, in_c, 3, 3});
        b = TensorT<S>({out_c});
        const size_t fan_in = in_c * 9;
        init_uniform_fanin(w, fan_in, rng);
        init_uniform_fanin(b, fan_in, rng);
        gw = TensorT<S>({out_c, in_c, 3, 3});
        gb = TensorT<S>({out_c});
    }
};

// Named handle on one parameter tensor, in the model's canonical order.
// Drives the optimizer, the checkpoint layout, and freeze checksums.
template <typename S>
struct ParamRef {
    std::string name;
    TensorT<S>* value;
    TensorT<S>* grad;
    bool frozen;
};

// Everything one sample's backward pass needs, plus reusable scratch so the
// per-sample loop does not reallocate. One instance per training/eval loop.
template <typename S>
struct SampleTraceT {
    LifSeqT<S> lif1;
    LifSeqT<S> lif2;

    // conv prefix sequences (convnet only)
    TensorT<S> pool1;              // [T, 32*16*16]
    TensorT<S> pool2;              // [T, 64*8*8], the flattened fc1 input
    std::vector<uint8_t> argmax1;  // T * 32*16*16
    std::vector<uint8_t> argmax2;  // T * 64*8*8

    // per-step scratch
    TensorT<S> x, c1, p1, c2, p2;
    TensorT<S> dp2, dc2, dp1, dc1;
    std::vector<S> pad1, pad2;

    const TensorT<S>& output_membranes() const { return lif2.u; }  // [T, K], pre-reset
};

template <typename S>
struct SnnModelT {
    ArchKind arch = ArchKind::kFcNet;
    size_t classes = 0;
    size_t in_features = 0;  // flattened input width (channels*32*32 for convnet)
    size_t in_channels = 1;  // convnet input channels
    size_t hidden = 1000;
    LifParamsT<S> lif;

    ConvT<S> conv1, conv2;  // convnet only: in_channels->32, 32->64
    LinearT<S> fc1, fc2;

    static constexpr size_t kImage = 32;  // fixed input spatial size
    size_t conv_flat() const { return 64 * (kImage / 4) * (kImage / 4); }  // 4096

    static SnnModelT make_fc(size_t features, size_t classes, const LifParamsT<S>& lif,
                             size_t hidden, RngStream& winit) {
        SnnModelT m;
        m.arch = ArchKind::kFcNet;
        m.classes = classes;
        m.in_features = features;
        m.hidden = hidden;
        m.lif = lif;
        m.lif.validate();
        m.fc1.init(hidden, features, winit);
        m.fc2.init(classes, hidden, winit);
        return m;
    }

    static SnnModelT make_conv(size_t channels, size_t classes, const LifParamsT<S>& lif,
                               size_t hidden, RngStream& winit) {
        SnnModelT m;
        m.arch = ArchKind::kConvNet;
        m.classes = classes;
        m.in_channels = channels;
        m.in_features = channels * kImage * kImage;
        m.hidden = hidden;
        m.lif = lif;
        m.lif.validate();
        m.conv1.init(32, channels, winit);
        m.conv2.init(64, 32, winit);
        m.fc1.init(hidden, m.conv_flat(), winit);
        m.fc2.init(classes, hidden, winit);
        return m;
    }

    std::vector<ParamRef<S>> params() {
        std::vector<ParamRef<S>> out;
        if (arch == ArchKind::kConvNet) {
            out.push_back({"conv1.w", &conv1.w, &conv1.gw, conv1.frozen});
            out.push_back({"conv1.b", &conv1.b, &conv1.gb, conv1.frozen});
            out.push_back({"conv2.w", &conv2.w, &conv2.gw, conv2.frozen});
            out.push_back({"conv2.b", &conv2.b, &conv2.gb, conv2.frozen});
        }
        out.push_back({"fc1.w", &fc1.w, &fc1.gw, fc1.frozen});
        out.push_back({"fc1.b", &fc1.b, &fc1.gb, fc1.frozen});
        out.push_back({"fc2.w", &fc2.w, &fc2.gw, fc2.frozen});
        out.push_back({"fc2.b", &fc2.b, &fc2.gb, fc2.frozen});
        return out;
    }

    void zero_grads() {
        for (auto& p : params()) p.grad->fill(S(0));
    }

    void scale_grads(S factor) {
        for (auto& p : params()) scale_inplace(*p.grad, factor);
    }

    void refresh_caches() {
        fc1.refresh_wt();
        fc2.refresh_wt();
    }

    void freeze_conv(bool on) {
        conv1.frozen = on;
        conv2.frozen = on;
    }

    // Forward one sample's spike train [T, in_features]; fills the trace.
    void forward_sample(const TensorT<S>& spikes, SampleTraceT<S>& tr) const {
        if (spikes.shape.size() != 2 || spikes.shape[1] != in_features)
            throw ShapeError("forward_sample: expected [T," + std::to_string(in_features) +
                             "], got " + spikes.shape_str());
        const TensorT<S>* fc_in = &spikes;
        if (arch == ArchKind::kConvNet) {
            conv_prefix_forward(spikes, tr);
            fc_in = &tr.pool2;
        }
        TensorT<S> a1 = fc1.forward(*fc_in);
        tr.lif1.forward(a1, lif);
        TensorT<S> a2 = fc2.forward(tr.lif1.s);
        tr.lif2.forward(a2, lif);
    }

    // Mean-over-timesteps softmax cross-entropy on the output membranes,
    // with its gradient. d_direct comes out shaped [T, K].
    S loss_from_trace(const SampleTraceT<S>& tr, size_t label, TensorT<S>& d_direct) const {
        const TensorT<S>& u2 = tr.lif2.u;
        const size_t steps = u2.shape[0];
        if (label >= classes) throw ShapeError("label out of range");
        if (!d_direct.same_shape(u2)) d_direct = TensorT<S>({steps, classes});
        S loss = S(0);
        const S inv_steps = S(1) / static_cast<S>(steps);
        for (size_t t = 0; t < steps; ++t) {
            const S* row = u2.ptr() + t * classes;
            S* grow = d_direct.ptr() + t * classes;
            S mx = row[0];
            for (size_t c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
            S sum = S(0);
            for (size_t c = 0; c < classes; ++c) {
                grow[c] = std::exp(row[c] - mx);
                sum += grow[c];
            }
            loss -= (row[label] - mx - std::log(sum)) * inv_steps;
            const S inv_sum = S(1) / sum;
            for (size_t c = 0; c < classes; ++c) grow[c] *= inv_sum * inv_steps;
            grow[label] -= inv_steps;
        }
        if (!std::isfinite(static_cast<double>(loss)))
            throw NumericalError("non-finite loss value");
        return loss;
    }

    // BPTT for one sample, accumulating parameter gradients.
    void backward_sample(const TensorT<S>& spikes, SampleTraceT<S>& tr,
                         const TensorT<S>& d_direct) {
        TensorT<S> d_a2 = tr.lif2.backward(nullptr, &d_direct, lif);
        TensorT<S> d_s1 = fc2.backward(tr.lif1.s, d_a2, true);
        TensorT<S> d_a1 = tr.lif1.backward(&d_s1, nullptr, lif);
        if (arch == ArchKind::kFcNet) {
            fc1.backward(spikes, d_a1, false);
            return;
        }
        const bool prefix = !(conv1.frozen && conv2.frozen);
        TensorT<S> d_flat = fc1.backward(tr.pool2, d_a1, prefix);
        if (prefix) conv_prefix_backward(spikes, tr, d_flat);
    }

    // Convenience: full train step for one sample. Returns the loss.
    S train_sample(const TensorT<S>& spikes, size_t label, SampleTraceT<S>& tr,
                   TensorT<S>& d_direct_scratch) {
        forward_sample(spikes, tr);
        const S loss = loss_from_trace(tr, label, d_direct_scratch);
        backward_sample(spikes, tr, d_direct_scratch);
        return loss;
    }

    // argmax over per-timestep output membranes summed across time;
    // ties break toward the lower class index
    size_t predict_from_trace(const SampleTraceT<S>& tr) const {
        const TensorT<S>& u2 = tr.lif2.u;
        const size_t steps = u2.shape[0];
        std::vector<S> total(classes, S(0));
        for (size_t t = 0; t < steps; ++t) {
            const S* row = u2.ptr() + t * classes;
            for (size_t c = 0; c < classes; ++c) total[c] += row[c];
        }
        size_t best = 0;
        for (size_t c = 1; c < classes; ++c)
            if (total[c] > total[best]) best = c;
        return best;
    }

    size_t predict(const TensorT<S>& spikes, SampleTraceT<S>& tr) const {
        forward_sample(spikes, tr);
        return predict_from_trace(tr);
    }

    // Output membranes at the final step, before that step's reset: the
    // feature vector the membership attack consumes.
    std::vector<S> extract_attack_features(const TensorT<S>& spikes, SampleTraceT<S>& tr) const {
        forward_sample(spikes, tr);
        const TensorT<S>& u2 = tr.lif2.u;
        const size_t steps = u2.shape[0];
        const S* last = u2.ptr() + (steps - 1) * classes;
        return std::vector<S>(last, last + classes);
    }

  private:
    void ensure_conv_scratch(size_t steps, SampleTraceT<S>& tr) const {
        const size_t p1n = 32 * (kImage / 2) * (kImage / 2);
        const size_t p2n = conv_flat();
        if (tr.pool1.shape != std::vector<size_t>{steps, p1n}) {
            tr.pool1 = TensorT<S>({steps, p1n});
            tr.pool2 = TensorT<S>({steps, p2n});
            tr.argmax1.resize(steps * p1n);
            tr.argmax2.resize(steps * p2n);
            tr.x = TensorT<S>({in_channels, kImage, kImage});
            tr.c1 = TensorT<S>({32, kImage, kImage});
            tr.p1 = TensorT<S>({32, kImage / 2, kImage / 2});
            tr.c2 = TensorT<S>({64, kImage / 2, kImage / 2});
            tr.p2 = TensorT<S>({64, kImage / 4, kImage / 4});
            tr.dp2 = TensorT<S>({64, kImage / 4, kImage / 4});
            tr.dc2 = TensorT<S>({64, kImage / 2, kImage / 2});
            tr.dp1 = TensorT<S>({32, kImage / 2, kImage / 2});
            tr.dc1 = TensorT<S>({32, kImage, kImage});
        }
    }

    void conv_prefix_forward(const TensorT<S>& spikes, SampleTraceT<S>& tr) const {
        const size_t steps = spikes.shape[0];
        ensure_conv_scratch(steps, tr);
        const size_t p1n = tr.p1.numel(), p2n = tr.p2.numel();
        for (size_t t = 0; t < steps; ++t) {
            std::memcpy(tr.x.ptr(), spikes.ptr() + t * in_features, in_features * sizeof(S));
            conv2d_3x3_forward(tr.x, conv1.w, conv1.b, tr.c1, &tr.pad1);
            maxpool_2x2_forward(tr.c1, tr.p1, tr.argmax1.data() + t * p1n);
            conv2d_3x3_forward(tr.p1, conv2.w, conv2.b, tr.c2, &tr.pad2);
            maxpool_2x2_forward(tr.c2, tr.p2, tr.argmax2.data() + t * p2n);
            std::memcpy(tr.pool1.ptr() + t * p1n, tr.p1.ptr(), p1n * sizeof(S));
            std::memcpy(tr.pool2.ptr() + t * p2n, tr.p2.ptr(), p2n * sizeof(S));
        }
    }

    void conv_prefix_backward(const TensorT<S>& spikes, SampleTraceT<S>& tr,
                              const TensorT<S>& d_flat) {
        const size_t steps = spikes.shape[0];
        const size_t p1n = tr.p1.numel(), p2n = tr.p2.numel();
        // scratch accumulators so a frozen layer's gradients are discarded
        TensorT<S> junk_w2, junk_b2, junk_w1, junk_b1;
        if (conv2.frozen) {
            junk_w2 = TensorT<S>(conv2.w.shape);
            junk_b2 = TensorT<S>(conv2.b.shape);
        }
        if (conv1.frozen) {
            junk_w1 = TensorT<S>(conv1.w.shape);
            junk_b1 = TensorT<S>(conv1.b.shape);
        }
        for (size_t t = 0; t < steps; ++t) {
            std::memcpy(tr.dp2.ptr(), d_flat.ptr() + t * p2n, p2n * sizeof(S));
            maxpool_2x2_backward(tr.dp2, tr.argmax2.data() + t * p2n, tr.dc2);
            std::memcpy(tr.p1.ptr(), tr.pool1.ptr() + t * p1n, p1n * sizeof(S));
            conv2d_3x3_backward(tr.p1, conv2.w, tr.dc2, conv1.frozen ? nullptr : &tr.dp1,
                                conv2.frozen ? junk_w2 : conv2.gw,
                                conv2.frozen ? junk_b2 : conv2.gb);
            if (conv1.frozen) continue;
            maxpool_2x2_backward(tr.dp1, tr.argmax1.data() + t * p1n, tr.dc1);
            std::memcpy(tr.x.ptr(), spikes.ptr() + t * in_features, in_features * sizeof(S));
            conv2d_3x3_backward(tr.x, conv1.w, tr.dc1, static_cast<TensorT<S>*>(nullptr),
                                conv1.gw, conv1.gb);
        }
    }
};

using SnnModel = SnnModelT<float>;
using SampleTrace = SampleTraceT<float>;

}  // namespace spikebench
