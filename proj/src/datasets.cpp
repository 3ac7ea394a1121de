#include "spikebench/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spikebench/errors.hpp"
#include "spikebench/rng.hpp"

namespace spikebench {

namespace {

std::vector<uint8_t> read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

uint32_t read_be32(const std::vector<uint8_t>& b, size_t offset, const std::string& path) {
    if (offset + 4 > b.size())
        throw FormatError(path + ": truncated at byte " + std::to_string(b.size()) +
                          ", need 4 bytes at offset " + std::to_string(offset));
    return (uint32_t(b[offset]) << 24) | (uint32_t(b[offset + 1]) << 16) |
           (uint32_t(b[offset + 2]) << 8) | uint32_t(b[offset + 3]);
}

}  // namespace

DatasetSplit load_idx_images(const std::string& images_path, const std::string& labels_path,
                             const std::string& name) {
    constexpr uint32_t kImageMagic = 0x00000803;
    constexpr uint32_t kLabelMagic = 0x00000801;
    constexpr size_t kSide = 32;

    const std::vector<uint8_t> img = read_all_bytes(images_path);
    const uint32_t img_magic = read_be32(img, 0, images_path);
    if (img_magic != kImageMagic)
        throw FormatError(images_path + ": bad magic 0x" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%08x", img_magic);
            return std::string(buf);
        }() + " at byte 0, expected 0x00000803");
    const size_t n = read_be32(img, 4, images_path);
    const size_t rows = read_be32(img, 8, images_path);
    const size_t cols = read_be32(img, 12, images_path);
    if (!((rows == 28 && cols == 28) || (rows == kSide && cols == kSide)))
        throw FormatError(images_path + ": unsupported image size " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " in header at byte 8");
    const size_t need = 16 + n * rows * cols;
    if (img.size() < need)
        throw FormatError(images_path + ": truncated at byte " + std::to_string(img.size()) +
                          ", expected " + std::to_string(need));

    const std::vector<uint8_t> lab = read_all_bytes(labels_path);
    const uint32_t lab_magic = read_be32(lab, 0, labels_path);
    if (lab_magic != kLabelMagic)
        throw FormatError(labels_path + ": bad magic at byte 0, expected 0x00000801");
    const size_t n_lab = read_be32(lab, 4, labels_path);
    if (n_lab != n)
        throw FormatError(labels_path + ": " + std::to_string(n_lab) + " labels for " +
                          std::to_string(n) + " images");
    if (lab.size() < 8 + n)
        throw FormatError(labels_path + ": truncated at byte " + std::to_string(lab.size()) +
                          ", expected " + std::to_string(8 + n));

    DatasetSplit ds;
    ds.name = name;
    ds.channels = 1;
    ds.X = Tensor({n, 1, kSide, kSide});
    ds.y.resize(n);
    const size_t pad = (kSide - rows) / 2;  // 2 for 28x28, 0 for 32x32
    float* out = ds.X.ptr();
    int max_label = -1;
    for (size_t i = 0; i < n; ++i) {
        const uint8_t* src = img.data() + 16 + i * rows * cols;
        float* dst = out + i * kSide * kSide;
        for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c)
                dst[(r + pad) * kSide + (c + pad)] = float(src[r * cols + c]) / 255.0f;
        ds.y[i] = lab[8 + i];
        max_label = std::max(max_label, ds.y[i]);
    }
    ds.classes = size_t(max_label) + 1;
    return ds;
}

DatasetSplit load_cifar10(const std::vector<std::string>& batch_paths, const std::string& name) {
    constexpr size_t kRecord = 1 + 3 * 32 * 32;
    DatasetSplit ds;
    ds.name = name;
    ds.channels = 3;
    ds.classes = 10;

    std::vector<float> pixels;
    for (const auto& path : batch_paths) {
        const std::vector<uint8_t> b = read_all_bytes(path);
        if (b.size() % kRecord != 0)
            throw FormatError(path + ": size " + std::to_string(b.size()) +
                              " is not a multiple of the " + std::to_string(kRecord) +
                              "-byte record, trailing data at byte " +
                              std::to_string((b.size() / kRecord) * kRecord));
        const size_t n = b.size() / kRecord;
        pixels.reserve(pixels.size() + n * (kRecord - 1));
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* rec = b.data() + i * kRecord;
            if (rec[0] > 9)
                throw FormatError(path + ": label " + std::to_string(rec[0]) + " at byte " +
                                  std::to_string(i * kRecord) + " out of range");
            ds.y.push_back(rec[0]);
            for (size_t j = 1; j < kRecord; ++j) pixels.push_back(float(rec[j]) / 255.0f);
        }
    }
    ds.X = Tensor({ds.y.size(), 3, 32, 32}, pixels);
    return ds;
}

DatasetSplit load_csv_tabular(const std::string& path, const std::string& label_column,
                              const std::string& name) {
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open");

    auto split_line = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        return cells;
    };

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    size_t label_idx = header.size();
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size())
        throw FormatError(path + ": no column named '" + label_column + "' in header");

    const size_t n_features = header.size() - 1;
    std::vector<float> values;
    std::vector<std::string> labels;
    size_t row = 1;  // header was row 0
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++row;
            continue;
        }
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw FormatError(path + ": row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) {
                labels.push_back(cells[i]);
                continue;
            }
            try {
                size_t used = 0;
                const float v = std::stof(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument("trailing");
                values.push_back(v);
            } catch (const std::exception&) {
                throw FormatError(path + ": row " + std::to_string(row) + " column '" +
                                  header[i] + "': '" + cells[i] + "' is not numeric");
            }
        }
        ++row;
    }
    if (labels.empty()) throw FormatError(path + ": no data rows");

    std::vector<std::string> names(labels);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::map<std::string, int> ids;
    for (size_t i = 0; i < names.size(); ++i) ids[names[i]] = int(i);

    DatasetSplit ds;
    ds.name = name;
    ds.X = Tensor({labels.size(), n_features}, values);
    ds.y.reserve(labels.size());
    for (const auto& s : labels) ds.y.push_back(ids[s]);
    ds.classes = names.size();
    ds.class_names = std::move(names);
    return ds;
}

void normalize_tabular(DatasetSplit& ds, const std::vector<size_t>& train_rows) {
    if (ds.channels != 0) throw ConfigError("normalize_tabular: image dataset");
    if (train_rows.empty()) throw ConfigError("normalize_tabular: empty training set");
    const size_t n = ds.size(), f = ds.features();
    for (size_t r : train_rows)
        if (r >= n) throw ConfigError("normalize_tabular: training row out of range");

    NormalizationRecord& rec = ds.norm;
    rec.mean.assign(f, 0.0f);
    rec.stdev.assign(f, 0.0f);
    rec.zmin.assign(f, 0.0f);
    rec.zmax.assign(f, 0.0f);
    rec.degenerate.assign(f, 0);

    float* x = ds.X.ptr();
    for (size_t j = 0; j < f; ++j) {
        double sum = 0.0, sq = 0.0;
        for (size_t r : train_rows) {
            const double v = x[r * f + j];
            sum += v;
            sq += v * v;
        }
        const double mean = sum / double(train_rows.size());
        const double var = std::max(0.0, sq / double(train_rows.size()) - mean * mean);
        const double stdev = std::sqrt(var);
        rec.mean[j] = float(mean);
        rec.stdev[j] = float(stdev);
        if (stdev < 1e-12) {
            rec.degenerate[j] = 1;
            std::fprintf(stderr, "warning: %s feature %zu is constant, pinned to 0.5\n",
                         ds.name.c_str(), j);
            for (size_t r = 0; r < n; ++r) x[r * f + j] = 0.5f;
            continue;
        }
        float zmin = 0.0f, zmax = 0.0f;
        bool first = true;
        for (size_t r : train_rows) {
            const float z = (x[r * f + j] - rec.mean[j]) / rec.stdev[j];
            zmin = first ? z : std::min(zmin, z);
            zmax = first ? z : std::max(zmax, z);
            first = false;
        }
        rec.zmin[j] = zmin;
        rec.zmax[j] = zmax;
        const float span = zmax - zmin;
        for (size_t r = 0; r < n; ++r) {
            const float z = (x[r * f + j] - rec.mean[j]) / rec.stdev[j];
            x[r * f + j] = std::clamp((z - zmin) / span, 0.0f, 1.0f);
        }
    }
    rec.fitted = true;
}

float denormalize_value(const NormalizationRecord& norm, size_t feature, float v) {
    if (!norm.fitted || feature >= norm.mean.size())
        throw ConfigError("denormalize_value: no normalization record for feature");
    const float z = norm.zmin[feature] + v * (norm.zmax[feature] - norm.zmin[feature]);
    return z * norm.stdev[feature] + norm.mean[feature];
}

SplitPlan make_split_plan(size_t n, uint64_t seed, const std::array<double, 4>& fractions) {
    double total = 0.0;
    for (double frac : fractions) {
        if (frac < 0.0) throw ConfigError("make_split_plan: negative fraction");
        total += frac;
    }
    if (total > 1.0 + 1e-9) throw ConfigError("make_split_plan: fractions sum to more than 1");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng(seed, kStreamAttackSplit);
    for (size_t i = n; i > 1; --i) {
        const size_t j = size_t(rng.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    SplitPlan plan;
    plan.seed = seed;
    plan.fractions = fractions;
    size_t offset = 0;
    std::vector<size_t>* sets[4] = {&plan.target_train, &plan.target_test, &plan.shadow_train,
                                    &plan.shadow_test};
    for (size_t k = 0; k < 4; ++k) {
        const size_t count = size_t(std::floor(fractions[k] * double(n) + 1e-9));
        sets[k]->assign(order.begin() + offset, order.begin() + offset + count);
        offset += count;
    }
    return plan;
}

DatasetSplit load_dataset(const std::string& name, const std::string& data_dir) {
    const std::string root = data_dir.empty() ? "." : data_dir;
    if (name == "iris") return load_csv_tabular(root + "/iris.csv", "species", name);
    if (name == "breast-cancer")
        return load_csv_tabular(root + "/breast_cancer.csv", "diagnosis", name);
    if (name == "mnist")
        return load_idx_images(root + "/mnist-images-idx3-ubyte", root + "/mnist-labels-idx1-ubyte",
                               name);
    if (name == "fmnist")
        return load_idx_images(root + "/fmnist-images-idx3-ubyte",
                               root + "/fmnist-labels-idx1-ubyte", name);
    if (name == "cifar10") {
        std::vector<std::string> batches;
        for (int i = 1; i <= 5; ++i)
            batches.push_back(root + "/data_batch_" + std::to_string(i) + ".bin");
        return load_cifar10(batches, name);
    }
    throw ConfigError("unknown dataset '" + name + "'");
}

}  // namespace spikebench
