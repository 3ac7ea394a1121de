#include "spikebench/attack.hpp"

#include <algorithm>
#include <cmath>

#include "spikebench/errors.hpp"
#include "spikebench/train.hpp"

namespace spikebench {

namespace {

// n distinct indices from [0, total), drawn without replacement, in order
std::vector<size_t> subsample(size_t total, size_t n, RngStream& rng) {
    std::vector<size_t> all(total);
    for (size_t i = 0; i < total; ++i) all[i] = i;
    for (size_t i = 0; i < n; ++i)
        std::swap(all[i], all[i + size_t(rng.next_below(total - i))]);
    all.resize(n);
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

AttackDataset build_attack_dataset(const Tensor& in_features, const Tensor& out_features,
                                   RngStream& rng) {
    if (in_features.shape.size() != 2 || out_features.shape.size() != 2 ||
        in_features.shape[1] != out_features.shape[1])
        throw ShapeError("build_attack_dataset: feature matrices must be [N,K] with equal K");
    const size_t k = in_features.shape[1];
    const size_t n_in = in_features.shape[0], n_out = out_features.shape[0];
    if (n_in == 0 || n_out == 0)
        throw ConfigError("build_attack_dataset: both member and nonmember sets must be nonempty");

    const size_t n = std::min(n_in, n_out);
    const std::vector<size_t> in_rows = subsample(n_in, n, rng);
    const std::vector<size_t> out_rows = subsample(n_out, n, rng);

    AttackDataset ds;
    ds.features = Tensor({2 * n, k});
    ds.labels.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
        std::copy(in_features.ptr() + in_rows[i] * k, in_features.ptr() + (in_rows[i] + 1) * k,
                  ds.features.ptr() + i * k);
        ds.labels.push_back(1);
    }
    for (size_t i = 0; i < n; ++i) {
        std::copy(out_features.ptr() + out_rows[i] * k, out_features.ptr() + (out_rows[i] + 1) * k,
                  ds.features.ptr() + (n + i) * k);
        ds.labels.push_back(0);
    }

    ds.mean.assign(k, 0.0);
    ds.stdev.assign(k, 1.0);
    const size_t m = 2 * n;
    for (size_t j = 0; j < k; ++j) {
        double sum = 0.0, sq = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double v = ds.features.at(i, j);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / double(m);
        const double var = std::max(0.0, sq / double(m) - mean * mean);
        const double stdev = std::sqrt(var);
        ds.mean[j] = mean;
        ds.stdev[j] = stdev > 1e-12 ? stdev : 1.0;
        for (size_t i = 0; i < m; ++i)
            ds.features.at(i, j) = float((ds.features.at(i, j) - ds.mean[j]) / ds.stdev[j]);
    }
    return ds;
}

std::vector<float> standardize_row(const AttackDataset& ds, const float* row, size_t k) {
    if (k != ds.mean.size())
        throw ShapeError("standardize_row: expected " + std::to_string(ds.mean.size()) +
                         " features, got " + std::to_string(k));
    std::vector<float> out(k);
    for (size_t j = 0; j < k; ++j) out[j] = float((double(row[j]) - ds.mean[j]) / ds.stdev[j]);
    return out;
}

MiaSummary run_mia(const DatasetSplit& ds, const TrainedModelFn& fit, const EncoderSpec& spec,
                   const std::array<double, 4>& fractions, const std::vector<uint64_t>& seeds,
                   const SvmConfig& svm_cfg) {
    if (seeds.empty()) throw ConfigError("run_mia: need at least one seed");

    MiaSummary summary;
    summary.per_seed.reserve(seeds.size());
    for (uint64_t seed : seeds) {
        const SplitPlan plan = make_split_plan(ds.size(), seed, fractions);
        if (plan.target_train.empty() || plan.target_test.empty() || plan.shadow_train.empty() ||
            plan.shadow_test.empty())
            throw ConfigError("run_mia: split plan leaves an empty set; adjust fractions");

        const SnnModel target = fit(ds, plan.target_train, seed);
        const SnnModel shadow = fit(ds, plan.shadow_train, seed);

        const Tensor in_feats = collect_attack_features(shadow, ds, plan.shadow_train, spec, seed);
        const Tensor out_feats = collect_attack_features(shadow, ds, plan.shadow_test, spec, seed);
        RngStream balance_rng = RngStream(seed, kStreamAttackSplit).derive(1);
        const AttackDataset attack = build_attack_dataset(in_feats, out_feats, balance_rng);
        const SvmModel svm = train_svm_rbf(attack.features, attack.labels, svm_cfg);

        const size_t k = attack.mean.size();
        auto score_rows = [&](const std::vector<size_t>& rows) {
            const Tensor feats = collect_attack_features(target, ds, rows, spec, seed);
            std::vector<double> scores(rows.size());
            for (size_t i = 0; i < rows.size(); ++i)
                scores[i] = svm.decision(standardize_row(attack, feats.ptr() + i * k, k));
            return scores;
        };

        MiaSeedResult r;
        r.seed = seed;
        r.roc = roc_auc(score_rows(plan.target_train), score_rows(plan.target_test));
        r.target_train_acc = evaluate_accuracy(target, ds, plan.target_train, spec, seed);
        r.target_test_acc = evaluate_accuracy(target, ds, plan.target_test, spec, seed);
        summary.per_seed.push_back(std::move(r));
    }

    double mean = 0.0;
    for (const auto& r : summary.per_seed) mean += r.roc.auc;
    mean /= double(summary.per_seed.size());
    double var = 0.0;
    for (const auto& r : summary.per_seed) var += (r.roc.auc - mean) * (r.roc.auc - mean);
    summary.auc_mean = mean;
    summary.auc_std = std::sqrt(var / double(summary.per_seed.size()));
    return summary;
}

}  // namespace spikebench
