#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

#include "spikebench/tensor.hpp"

namespace spikebench {

// Dense kernels used by the layers. All loops run in a fixed order so a run
// is bit-reproducible; the inner loops are contiguous-axis SAXPYs that the
// compiler vectorizes without reassociating sums.

// C[m,n] += A[m,k] * B[k,n]. Row blocking keeps the C rows of the active
// block cache-resident while B streams through once per block.
template <typename S>
void matmul_acc(TensorT<S>& c, const TensorT<S>& a, const TensorT<S>& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || c.shape.size() != 2)
        throw ShapeError("matmul: operands must be rank-2");
    const size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    if (b.shape[0] != k || c.shape[0] != m || c.shape[1] != n)
        throw ShapeError("matmul: incompatible shapes " + a.shape_str() + " x " + b.shape_str() + " -> " +
                         c.shape_str());

    constexpr size_t kRowBlock = 64;
    const S* pa = a.ptr();
    const S* pb = b.ptr();
    S* pc = c.ptr();
    for (size_t i0 = 0; i0 < m; i0 += kRowBlock) {
        const size_t i1 = std::min(i0 + kRowBlock, m);
        for (size_t kk = 0; kk < k; ++kk) {
            const S* brow = pb + kk * n;
            for (size_t i = i0; i < i1; ++i) {
                const S aik = pa[i * k + kk];
                if (aik == S(0)) continue;
                S* crow = pc + i * n;
                for (size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
            }
        }
    }
}

template <typename S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    TensorT<S> c({a.shape.size() == 2 ? a.shape[0] : 0, b.shape.size() == 2 ? b.shape[1] : 0});
    matmul_acc(c, a, b);
    return c;
}

template <typename S>
TensorT<S> transpose2d(const TensorT<S>& a) {
    if (a.shape.size() != 2) throw ShapeError("transpose2d: operand must be rank-2");
    const size_t m = a.shape[0], n = a.shape[1];
    TensorT<S> t({n, m});
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) t.data[j * m + i] = a.data[i * n + j];
    return t;
}

template <typename S>
void add_inplace(TensorT<S>& a, const TensorT<S>& b) {
    check_same_shape(a, b, "add");
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

template <typename S>
void scale_inplace(TensorT<S>& a, S factor) {
    for (auto& v : a.data) v *= factor;
}

// 3x3 convolution, stride 1, zero same-padding. in [Ci,H,W], w [Co,Ci,3,3],
// bias [Co], out [Co,H,W]. Works on a padded copy of the input so every
// kernel tap is a contiguous row SAXPY.
template <typename S>
void conv2d_3x3_forward(const TensorT<S>& in, const TensorT<S>& w, const TensorT<S>& bias, TensorT<S>& out,
                        std::vector<S>* padded_scratch = nullptr) {
    if (in.shape.size() != 3 || w.shape.size() != 4 || w.shape[2] != 3 || w.shape[3] != 3)
        throw ShapeError("conv2d_3x3: input must be [C,H,W], weights [Co,Ci,3,3]");
    const size_t ci = in.shape[0], h = in.shape[1], wd = in.shape[2];
    const size_t co = w.shape[0];
    if (w.shape[1] != ci) throw ShapeError("conv2d_3x3: channel mismatch " + in.shape_str() + " vs " + w.shape_str());
    if (bias.numel() != co) throw ShapeError("conv2d_3x3: bias size mismatch");
    if (out.shape != std::vector<size_t>{co, h, wd}) throw ShapeError("conv2d_3x3: bad output shape " + out.shape_str());

    const size_t ph = h + 2, pw = wd + 2;
    std::vector<S> local;
    std::vector<S>& pad = padded_scratch ? *padded_scratch : local;
    pad.assign(ci * ph * pw, S(0));
    for (size_t c = 0; c < ci; ++c)
        for (size_t y = 0; y < h; ++y)
            std::memcpy(pad.data() + (c * ph + y + 1) * pw + 1, in.ptr() + (c * h + y) * wd, wd * sizeof(S));

    for (size_t oc = 0; oc < co; ++oc) {
        S* oplane = out.ptr() + oc * h * wd;
        std::fill(oplane, oplane + h * wd, bias.data[oc]);
        for (size_t c = 0; c < ci; ++c) {
            const S* wk = w.ptr() + (oc * ci + c) * 9;
            const S* pplane = pad.data() + c * ph * pw;
            for (size_t dy = 0; dy < 3; ++dy) {
                for (size_t dx = 0; dx < 3; ++dx) {
                    const S wv = wk[dy * 3 + dx];
                    if (wv == S(0)) continue;
                    for (size_t y = 0; y < h; ++y) {
                        const S* prow = pplane + (y + dy) * pw + dx;
                        S* orow = oplane + y * wd;
                        for (size_t x = 0; x < wd; ++x) orow[x] += wv * prow[x];
                    }
                }
            }
        }
    }
}

// Gradients for conv2d_3x3_forward. d_in may be null when the input needs no
// gradient (first layer, frozen prefix). d_w/d_bias accumulate.
template <typename S>
void conv2d_3x3_backward(const TensorT<S>& in, const TensorT<S>& w, const TensorT<S>& d_out, TensorT<S>* d_in,
                         TensorT<S>& d_w, TensorT<S>& d_bias) {
    const size_t ci = in.shape[0], h = in.shape[1], wd = in.shape[2];
    const size_t co = w.shape[0];
    check_same_shape(d_w, w, "conv2d_3x3_backward d_w");

    const size_t ph = h + 2, pw = wd + 2;
    std::vector<S> pad(ci * ph * pw, S(0));
    for (size_t c = 0; c < ci; ++c)
        for (size_t y = 0; y < h; ++y)
            std::memcpy(pad.data() + (c * ph + y + 1) * pw + 1, in.ptr() + (c * h + y) * wd, wd * sizeof(S));

    for (size_t oc = 0; oc < co; ++oc) {
        const S* gplane = d_out.ptr() + oc * h * wd;
        S bsum = 0;
        for (size_t i = 0; i < h * wd; ++i) bsum += gplane[i];
        d_bias.data[oc] += bsum;
        for (size_t c = 0; c < ci; ++c) {
            S* gw = d_w.ptr() + (oc * ci + c) * 9;
            const S* pplane = pad.data() + c * ph * pw;
            for (size_t dy = 0; dy < 3; ++dy) {
                for (size_t dx = 0; dx < 3; ++dx) {
                    S acc = 0;
                    for (size_t y = 0; y < h; ++y) {
                        const S* prow = pplane + (y + dy) * pw + dx;
                        const S* grow = gplane + y * wd;
                        for (size_t x = 0; x < wd; ++x) acc += prow[x] * grow[x];
                    }
                    gw[dy * 3 + dx] += acc;
                }
            }
        }
    }

    if (!d_in) return;
    check_same_shape(*d_in, in, "conv2d_3x3_backward d_in");
    // full correlation of d_out with the flipped kernel, via a padded d_out
    std::vector<S> gpad(co * ph * pw, S(0));
    for (size_t oc = 0; oc < co; ++oc)
        for (size_t y = 0; y < h; ++y)
            std::memcpy(gpad.data() + (oc * ph + y + 1) * pw + 1, d_out.ptr() + (oc * h + y) * wd, wd * sizeof(S));
    for (size_t c = 0; c < ci; ++c) {
        S* iplane = d_in->ptr() + c * h * wd;
        std::fill(iplane, iplane + h * wd, S(0));
        for (size_t oc = 0; oc < co; ++oc) {
            const S* wk = w.ptr() + (oc * ci + c) * 9;
            const S* gplane = gpad.data() + oc * ph * pw;
            for (size_t dy = 0; dy < 3; ++dy) {
                for (size_t dx = 0; dx < 3; ++dx) {
                    const S wv = wk[(2 - dy) * 3 + (2 - dx)];
                    if (wv == S(0)) continue;
                    for (size_t y = 0; y < h; ++y) {
                        const S* grow = gplane + (y + dy) * pw + dx;
                        S* irow = iplane + y * wd;
                        for (size_t x = 0; x < wd; ++x) irow[x] += wv * grow[x];
                    }
                }
            }
        }
    }
}

// 2x2 max pooling, stride 2. Ties resolve to the first element in scan
// order so the backward scatter is unambiguous. argmax holds 0..3 per cell
// (row-major within the window); the pointer form writes c*oh*ow entries.
template <typename S>
void maxpool_2x2_forward(const TensorT<S>& in, TensorT<S>& out, uint8_t* argmax) {
    if (in.shape.size() != 3) throw ShapeError("maxpool_2x2: input must be [C,H,W]");
    const size_t c = in.shape[0], h = in.shape[1], wd = in.shape[2];
    if (h % 2 || wd % 2) throw ShapeError("maxpool_2x2: spatial dims must be even, got " + in.shape_str());
    const size_t oh = h / 2, ow = wd / 2;
    if (out.shape != std::vector<size_t>{c, oh, ow}) throw ShapeError("maxpool_2x2: bad output shape");

    for (size_t ch = 0; ch < c; ++ch) {
        const S* ip = in.ptr() + ch * h * wd;
        S* op = out.ptr() + ch * oh * ow;
        uint8_t* ap = argmax + ch * oh * ow;
        for (size_t y = 0; y < oh; ++y) {
            for (size_t x = 0; x < ow; ++x) {
                const S v00 = ip[(2 * y) * wd + 2 * x];
                const S v01 = ip[(2 * y) * wd + 2 * x + 1];
                const S v10 = ip[(2 * y + 1) * wd + 2 * x];
                const S v11 = ip[(2 * y + 1) * wd + 2 * x + 1];
                S best = v00;
                uint8_t idx = 0;
                if (v01 > best) { best = v01; idx = 1; }
                if (v10 > best) { best = v10; idx = 2; }
                if (v11 > best) { best = v11; idx = 3; }
                op[y * ow + x] = best;
                ap[y * ow + x] = idx;
            }
        }
    }
}

template <typename S>
void maxpool_2x2_forward(const TensorT<S>& in, TensorT<S>& out, std::vector<uint8_t>& argmax) {
    const size_t n = out.shape.size() == 3 ? out.numel() : 0;
    argmax.resize(n ? n : in.numel() / 4);
    maxpool_2x2_forward(in, out, argmax.data());
}

template <typename S>
void maxpool_2x2_backward(const TensorT<S>& d_out, const uint8_t* argmax, TensorT<S>& d_in) {
    const size_t c = d_out.shape[0], oh = d_out.shape[1], ow = d_out.shape[2];
    d_in.fill(S(0));
    const size_t h = d_in.shape[1], wd = d_in.shape[2];
    if (h != 2 * oh || wd != 2 * ow) throw ShapeError("maxpool_2x2_backward: shape mismatch");
    for (size_t ch = 0; ch < c; ++ch) {
        const S* gp = d_out.ptr() + ch * oh * ow;
        const uint8_t* ap = argmax + ch * oh * ow;
        S* ip = d_in.ptr() + ch * h * wd;
        for (size_t y = 0; y < oh; ++y) {
            for (size_t x = 0; x < ow; ++x) {
                const uint8_t idx = ap[y * ow + x];
                const size_t yy = 2 * y + idx / 2, xx = 2 * x + idx % 2;
                ip[yy * wd + xx] += gp[y * ow + x];
            }
        }
    }
}

template <typename S>
void maxpool_2x2_backward(const TensorT<S>& d_out, const std::vector<uint8_t>& argmax,
                          TensorT<S>& d_in) {
    maxpool_2x2_backward(d_out, argmax.data(), d_in);
}

}  // namespace spikebench
