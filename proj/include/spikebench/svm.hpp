#pragma once

#include <cstdint>
#include <vector>

#include "spikebench/tensor.hpp"

namespace spikebench {

struct SvmConfig {
    double C = 1.0;
    double gamma = 0.0;      // <= 0 selects 1 / (n_features * var(X))
    double tol = 1e-3;       // KKT tolerance
    size_t max_sweeps = 10000;  // full passes before giving up
};

// Binary RBF-kernel classifier in dual form. `coef[i]` is alpha_i * y_i for
// support vector i, so the decision score needs no separate label array.
struct SvmModel {
    Tensor support;            // [S, K]
    std::vector<double> coef;  // alpha * y, |coef| in (0, C]
    double bias = 0.0;
    double gamma = 0.0;
    double C = 1.0;
    double kkt_residual = 0.0;  // largest violation left at convergence

    double decision(const float* x, size_t k) const;
    double decision(const std::vector<float>& x) const;
    int predict(const std::vector<float>& x) const { return decision(x) >= 0.0 ? 1 : 0; }
};

// Pairwise (SMO-style) dual ascent until every KKT violation is below
// cfg.tol. Labels are 0/1; throws ConvergenceError (with the residual) when
// max_sweeps passes do not reach tolerance, ConfigError on a degenerate
// problem (fewer than two examples in either class).
SvmModel train_svm_rbf(const Tensor& X, const std::vector<int>& y, const SvmConfig& cfg);

}  // namespace spikebench
