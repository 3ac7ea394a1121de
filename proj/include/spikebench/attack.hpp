#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "spikebench/datasets.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/model.hpp"
#include "spikebench/roc.hpp"
#include "spikebench/svm.hpp"
#include "spikebench/tensor.hpp"

namespace spikebench {

// Attack-training set for the membership classifier: standardized
// final-timestep membranes from the shadow model, balanced IN vs OUT.
struct AttackDataset {
    Tensor features;          // [M, K]
    std::vector<int> labels;  // 1 = member (shadow_train), 0 = nonmember (shadow_test)
    std::vector<double> mean, stdev;  // fit on these rows; degenerate columns use 1
};

// Balance by subsampling the larger side (without replacement, from `rng`),
// then standardize feature-wise with the balanced set's own statistics.
AttackDataset build_attack_dataset(const Tensor& in_features, const Tensor& out_features,
                                   RngStream& rng);

// Standardization recorded in `ds`, applied to a fresh feature row.
std::vector<float> standardize_row(const AttackDataset& ds, const float* row, size_t k);

struct MiaSeedResult {
    uint64_t seed = 0;
    RocResult roc;
    float target_train_acc = 0.0f;
    float target_test_acc = 0.0f;
};

struct MiaSummary {
    std::vector<MiaSeedResult> per_seed;
    double auc_mean = 0.5;
    double auc_std = 0.0;  // population std, matching the mean(+-std) reporting
};

// Produces a model trained on the given rows; the attack calls it twice per
// seed (target on target_train, shadow on shadow_train) so both share the
// architecture and training configuration.
using TrainedModelFn =
    std::function<SnnModel(const DatasetSplit& ds, const std::vector<size_t>& rows, uint64_t seed)>;

// Full shadow-model membership inference: split, train target and shadow,
// fit the RBF attack SVM on shadow membranes, score the target's train/test
// rows, and aggregate ROC-AUC over seeds.
MiaSummary run_mia(const DatasetSplit& ds, const TrainedModelFn& fit, const EncoderSpec& spec,
                   const std::array<double, 4>& fractions, const std::vector<uint64_t>& seeds,
                   const SvmConfig& svm_cfg);

}  // namespace spikebench
