#include "spikebench/svm.hpp"

#include <algorithm>
#include <cmath>

#include "spikebench/errors.hpp"

namespace spikebench {

namespace {

double rbf(const float* a, const float* b, size_t k, double gamma) {
    double d2 = 0.0;
    for (size_t i = 0; i < k; ++i) {
        const double d = double(a[i]) - double(b[i]);
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// 1 / (K * var), with the variance taken over the whole matrix; falls back
// to 1 when the features carry no spread at all
double default_gamma(const Tensor& X) {
    double sum = 0.0, sq = 0.0;
    for (float v : X.data) {
        sum += v;
        sq += double(v) * double(v);
    }
    const double n = double(X.numel());
    const double var = std::max(0.0, sq / n - (sum / n) * (sum / n));
    return var > 1e-12 ? 1.0 / (double(X.shape[1]) * var) : 1.0;
}

}  // namespace

double SvmModel::decision(const float* x, size_t k) const {
    if (support.numel() == 0) return bias;
    if (k != support.shape[1])
        throw ShapeError("svm decision: expected " + std::to_string(support.shape[1]) +
                         " features, got " + std::to_string(k));
    double s = bias;
    for (size_t i = 0; i < support.shape[0]; ++i)
        s += coef[i] * rbf(x, support.ptr() + i * k, k, gamma);
    return s;
}

double SvmModel::decision(const std::vector<float>& x) const { return decision(x.data(), x.size()); }

SvmModel train_svm_rbf(const Tensor& X, const std::vector<int>& labels, const SvmConfig& cfg) {
    if (X.shape.size() != 2)
        throw ShapeError("train_svm_rbf: X must be [M,K], got " + X.shape_str());
    const size_t m = X.shape[0], k = X.shape[1];
    if (labels.size() != m)
        throw ShapeError("train_svm_rbf: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(m) + " rows");
    size_t pos = 0;
    for (int v : labels) pos += size_t(v != 0);
    if (pos < 2 || m - pos < 2)
        throw ConfigError("train_svm_rbf: need at least two examples per class");
    if (cfg.C <= 0.0) throw ConfigError("train_svm_rbf: C must be positive");

    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : default_gamma(X);
    const double C = cfg.C;

    std::vector<double> y(m);
    for (size_t i = 0; i < m; ++i) y[i] = labels[i] ? 1.0 : -1.0;

    // attack sets stay small (tens to a few hundred rows), so a dense kernel
    // matrix and O(m^2) sweeps are the simple, deterministic choice
    std::vector<double> K(m * m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i; j < m; ++j)
            K[i * m + j] = K[j * m + i] = rbf(X.ptr() + i * k, X.ptr() + j * k, k, gamma);

    std::vector<double> alpha(m, 0.0), f(m, 0.0);  // f_i = sum_j alpha_j y_j K_ij

    // An example may push its margin up when (alpha, y) leaves room in that
    // direction; symmetrically for down. The violation measure is the gap
    // between the most up-pushable and least down-pushable margins.
    auto can_up = [&](size_t t) { return y[t] > 0.0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto can_down = [&](size_t t) { return y[t] > 0.0 ? alpha[t] > 0.0 : alpha[t] < C; };

    // One dual step on the pair (i, j); flat directions (duplicate points)
    // fall back to a bound-hitting step. Returns false only when the joint
    // box leaves the pair no room.
    auto try_pair = [&](size_t i, size_t j) -> bool {
        if (i == j) return false;
        double L, H;
        if (y[i] != y[j]) {
            L = std::max(0.0, alpha[j] - alpha[i]);
            H = std::min(C, C + alpha[j] - alpha[i]);
        } else {
            L = std::max(0.0, alpha[i] + alpha[j] - C);
            H = std::min(C, alpha[i] + alpha[j]);
        }
        if (L >= H) return false;
        const double quad =
            std::max(K[i * m + i] + K[j * m + j] - 2.0 * K[i * m + j], 1e-12);
        const double Ei = f[i] - y[i], Ej = f[j] - y[j];
        // land exactly on 0 or C when rounding leaves an alpha an ulp away;
        // otherwise the pair selection keeps picking a direction with no room
        const double snap = 1e-10 * C;
        double aj = std::clamp(alpha[j] + y[j] * (Ei - Ej) / quad, L, H);
        if (aj < snap)
            aj = 0.0;
        else if (aj > C - snap)
            aj = C;
        const double dj = aj - alpha[j];
        if (std::abs(dj) < 1e-12) return false;
        double ai = std::clamp(alpha[i] - y[i] * y[j] * dj, 0.0, C);
        if (ai < snap)
            ai = 0.0;
        else if (ai > C - snap)
            ai = C;
        const double di = ai - alpha[i];
        alpha[i] = ai;
        alpha[j] = aj;
        for (size_t t = 0; t < m; ++t)
            f[t] += y[i] * di * K[i * m + t] + y[j] * dj * K[j * m + t];
        return true;
    };

    double residual = 0.0;
    double up = 0.0, down = 0.0;  // bias interval endpoints at convergence
    const size_t max_steps = cfg.max_sweeps * m;
    for (size_t step = 0;; ++step) {
        size_t iu = m, jd = m;
        up = 0.0;
        down = 0.0;
        for (size_t t = 0; t < m; ++t) {
            const double g = y[t] - f[t];  // the bias that would zero t's margin
            if (can_up(t) && (iu == m || g > up)) {
                up = g;
                iu = t;
            }
            if (can_down(t) && (jd == m || g < down)) {
                down = g;
                jd = t;
            }
        }
        residual = (iu == m || jd == m) ? 0.0 : up - down;
        if (residual <= cfg.tol) break;
        if (step >= max_steps)
            throw ConvergenceError("svm did not reach KKT tolerance " + std::to_string(cfg.tol),
                                   residual);
        if (!try_pair(iu, jd)) {
            // maximal violating pair is blocked; take any violating pair
            bool moved = false;
            for (size_t i = 0; !moved && i < m; ++i) {
                if (!can_up(i)) continue;
                for (size_t j = 0; !moved && j < m; ++j)
                    if (can_down(j) && (y[i] - f[i]) - (y[j] - f[j]) > cfg.tol)
                        moved = try_pair(i, j);
            }
            if (!moved)
                throw ConvergenceError("svm stalled above KKT tolerance", residual);
        }
    }

    // bias: average margin over free vectors, else the interval midpoint
    double b = 0.0;
    size_t free_count = 0;
    for (size_t t = 0; t < m; ++t)
        if (alpha[t] > 0.0 && alpha[t] < C) {
            b += y[t] - f[t];
            ++free_count;
        }
    b = free_count ? b / double(free_count) : 0.5 * (up + down);

    SvmModel model;
    model.gamma = gamma;
    model.C = C;
    model.bias = b;
    model.kkt_residual = residual;
    size_t n_sv = 0;
    for (double a : alpha) n_sv += size_t(a > 0.0);
    model.support = Tensor({n_sv, k});
    model.coef.reserve(n_sv);
    size_t s = 0;
    for (size_t i = 0; i < m; ++i) {
        if (alpha[i] <= 0.0) continue;
        std::copy(X.ptr() + i * k, X.ptr() + (i + 1) * k, model.support.ptr() + s * k);
        model.coef.push_back(alpha[i] * y[i]);
        ++s;
    }
    return model;
}

}  // namespace spikebench
