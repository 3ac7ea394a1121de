#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spikebench/tensor.hpp"

namespace spikebench {

// Per-feature affine chain applied to tabular data: z-score with training
// statistics, then min-max rescale of the z values into [0,1] (again with
// training statistics). Enough to invert the transform for in-range values.
struct NormalizationRecord {
    std::vector<float> mean, stdev;  // z-score stage
    std::vector<float> zmin, zmax;   // rescale stage, over training z values
    std::vector<uint8_t> degenerate;  // constant features, pinned to 0.5
    bool fitted = false;
};

struct DatasetSplit {
    std::string name;
    Tensor X;            // [N, F] tabular or [N, C, 32, 32] images
    std::vector<int> y;  // labels in [0, classes)
    size_t classes = 0;
    size_t channels = 0;  // 0 for tabular
    NormalizationRecord norm;
    std::vector<std::string> class_names;  // tabular label mapping, sorted

    size_t size() const { return y.size(); }
    size_t features() const { return size() ? X.numel() / size() : 0; }
};

// IDX ubyte pair (big-endian header). 28x28 images are zero-padded to 32x32;
// pixel bytes scale to [0,1].
DatasetSplit load_idx_images(const std::string& images_path, const std::string& labels_path,
                             const std::string& name);

// CIFAR-10 binary batches: 1 label byte + 3072 pixel bytes per record.
DatasetSplit load_cifar10(const std::vector<std::string>& batch_paths, const std::string& name);

// CSV with a header row; every non-label column must be numeric. Label
// strings map to class ids in lexicographic order.
DatasetSplit load_csv_tabular(const std::string& path, const std::string& label_column,
                              const std::string& name);

// Fit the normalization on the given training rows and apply it to every
// row; rows outside the training set are clamped to [0,1].
void normalize_tabular(DatasetSplit& ds, const std::vector<size_t>& train_rows);

// Inverse of the normalization chain for feature j (undefined for
// degenerate features, which carry no information anyway).
float denormalize_value(const NormalizationRecord& norm, size_t feature, float v);

// Disjoint index sets for the attack protocol, drawn from one seeded
// shuffle. Fractions order: target_train, target_test, shadow_train,
// shadow_test; they must sum to at most 1.
struct SplitPlan {
    std::vector<size_t> target_train, target_test, shadow_train, shadow_test;
    uint64_t seed = 0;
    std::array<double, 4> fractions{0.4, 0.1, 0.4, 0.1};
};

SplitPlan make_split_plan(size_t n, uint64_t seed, const std::array<double, 4>& fractions);

// Name-based loader for the bundled datasets ("iris", "breast-cancer",
// "mnist", "fmnist", "cifar10") rooted at data_dir.
DatasetSplit load_dataset(const std::string& name, const std::string& data_dir);

}  // namespace spikebench
