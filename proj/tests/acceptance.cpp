// End-to-end acceptance suite. Each check prints one PASS/FAIL line with the
// measured numbers and its wall time; the exit code is the number of failures.
// Checks that train models run at desk scale (small row budgets, few seeds)
// and compare seed-averaged results against fixed floors, so a single run
// decides the whole suite. Cheap checks run first.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "gradcheck_util.hpp"
#include "spikebench/attack.hpp"
#include "spikebench/datasets.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/roc.hpp"
#include "spikebench/train.hpp"
#include "spikebench/transfer.hpp"

using namespace spikebench;
namespace fs = std::filesystem;

namespace {

constexpr std::array<double, 4> kFractions{0.4, 0.1, 0.4, 0.1};

struct Check {
    int id = 0;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Check> g_checks;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void record(int id, const char* name, bool pass, double t0, double limit_s,
            const std::string& detail) {
    Check c;
    c.id = id;
    c.seconds = now_s() - t0;
    c.pass = pass && (limit_s <= 0.0 || c.seconds < limit_s);
    c.detail = detail;
    if (limit_s > 0.0 && c.seconds >= limit_s) c.detail += " [over time budget]";
    std::printf("[%2d] %s  %-38s %s (%.1fs)\n", id, c.pass ? "PASS" : "FAIL", name,
                c.detail.c_str(), c.seconds);
    std::fflush(stdout);
    g_checks.push_back(std::move(c));
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

DatasetSplit load_limited(const std::string& name, size_t limit) {
    DatasetSplit ds = load_dataset(name, SPIKEBENCH_DATA_DIR);
    if (limit && limit < ds.size()) {
        const size_t feat = ds.features();
        ds.X.data.resize(limit * feat);
        ds.X.data.shrink_to_fit();
        ds.X.shape[0] = limit;
        ds.y.resize(limit);
    }
    return ds;
}

std::vector<size_t> cat(const std::vector<size_t>& a, const std::vector<size_t>& b) {
    std::vector<size_t> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// One train/eval run on a tabular dataset: pool the split halves into an
// 80/20 train/test partition, fit normalization on the train pool only.
float tabular_seed_acc(const DatasetSplit& raw, EncoderKind kind, uint64_t seed, size_t epochs,
                       size_t batch, float lr) {
    const SplitPlan plan = make_split_plan(raw.size(), seed, kFractions);
    const auto train_rows = cat(plan.target_train, plan.shadow_train);
    const auto test_rows = cat(plan.target_test, plan.shadow_test);
    DatasetSplit ds = raw;
    normalize_tabular(ds, train_rows);
    const EncoderSpec spec = default_encoder_spec(kind, 100);
    SnnModel model = make_model_for(ds, ArchKind::kFcNet, LifParams{}, 1000, seed);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.lr = lr;
    tc.seed = seed;
    train_model(model, ds, train_rows, spec, tc);
    return evaluate_accuracy(model, ds, test_rows, spec, seed);
}

float mean_acc(const DatasetSplit& raw, EncoderKind kind, size_t epochs, size_t batch, float lr) {
    float sum = 0.0f;
    for (uint64_t seed = 1; seed <= 5; ++seed)
        sum += tabular_seed_acc(raw, kind, seed, epochs, batch, lr);
    return sum / 5.0f;
}

// --- check 1: encoder sampling distributions --------------------------------

void check_encoder_distributions() {
    const double t0 = now_s();
    const int n_rows = 100000;
    const EncoderSpec pb = default_encoder_spec(EncoderKind::kPoissonBurst, 100);
    const EncoderSpec db = default_encoder_spec(EncoderKind::kDelayedBurst, 100);
    const RngStream base(20260814, kStreamEncoder);

    bool pass = true;
    std::string detail;

    // burst triggers per interval are Bernoulli(x); sizes pool across x
    int64_t draws = 0, zero_draws = 0;
    double size_sum = 0.0;
    std::vector<float> row(100);
    double worst_trigger = 0.0;
    for (double x : {0.1, 0.5, 0.9}) {
        RngStream rng = base.derive(uint64_t(x * 10));
        int64_t triggers = 0, intervals = 0;
        for (int i = 0; i < n_rows; ++i) {
            BurstRowStats st;  // accumulates, so fresh per row
            poisson_burst_row(x, pb, rng, row.data(), 1, &st);
            triggers += st.triggers;
            intervals += 100 / pb.interval;
            draws += int64_t(st.drawn_sizes.size());
            for (int32_t s : st.drawn_sizes) {
                size_sum += s;
                if (s == 0) ++zero_draws;
            }
        }
        worst_trigger = std::max(worst_trigger, std::abs(double(triggers) / intervals - x));
    }
    const double size_mean = size_sum / double(draws);
    const double p_zero = double(zero_draws) / double(draws);
    const double p_zero_ref = std::exp(-pb.burst_mean);
    if (worst_trigger > 0.01) pass = false;
    if (std::abs(size_mean - pb.burst_mean) > 0.01 * pb.burst_mean) pass = false;
    if (std::abs(p_zero - p_zero_ref) > 0.005) pass = false;

    // delayed bursts: every onset inside the clip window, raw geometric mean
    // within 2% of (1-x)*(T-margin)
    double worst_mean_err = 0.0;
    int64_t out_of_bounds = 0;
    for (double x : {0.1, 0.5, 0.9}) {
        RngStream rng = base.derive(100 + uint64_t(x * 10));
        DelayStats st;
        double sampled_sum = 0.0;
        for (int i = 0; i < n_rows; ++i) {
            delayed_burst_row(x, db, rng, row.data(), 1, &st);
            sampled_sum += double(st.sampled);
            const auto lo = int64_t(std::ceil((1.0 - db.clip_ratio) * st.expected));
            const auto hi = int64_t(std::floor((1.0 + db.clip_ratio) * st.expected));
            // a degenerate band (hi < lo) resolves to hi; then the window clamp
            const int64_t blo = std::clamp<int64_t>(std::min(lo, hi), 0, 99);
            const int64_t bhi = std::clamp<int64_t>(hi, 0, 99);
            if (st.onset < blo || st.onset > bhi) ++out_of_bounds;
        }
        const double expected = (1.0 - x) * double(100 - db.margin);
        worst_mean_err =
            std::max(worst_mean_err, std::abs(sampled_sum / n_rows - expected) / expected);
    }
    if (out_of_bounds > 0) pass = false;
    if (worst_mean_err > 0.02) pass = false;

    detail = fmt("trig err %.4f, size mean %.3f, P(0) %.4f (ref %.4f), oob %lld, delay err %.3f%%",
                 worst_trigger, size_mean, p_zero, p_zero_ref, (long long)out_of_bounds,
                 worst_mean_err * 100);
    record(1, "encoder sampling distributions", pass, t0, 60.0, detail);
}

// --- check 2: gradient check ------------------------------------------------

void check_gradients() {
    const double t0 = now_s();
    const double worst = testutil::gradcheck_fcnet(4, 3, 12, 10, 1e-3, 71);
    record(2, "bptt matches finite differences", worst <= 1e-4, t0, 0.0,
           fmt("worst rel err %.2e (tol 1e-4)", worst));
}

// --- checks 3/4: tabular accuracy floors ------------------------------------

void check_iris_accuracy() {
    const double t0 = now_s();
    const DatasetSplit raw = load_limited("iris", 0);
    const float rate = mean_acc(raw, EncoderKind::kRate, 200, 8, 0.001f);
    const float pb = mean_acc(raw, EncoderKind::kPoissonBurst, 200, 8, 0.001f);
    const float db = mean_acc(raw, EncoderKind::kDelayedBurst, 200, 8, 0.001f);
    const bool pass = rate >= 0.90f && pb >= 0.85f && db >= 0.75f;
    record(3, "iris accuracy floors", pass, t0, 600.0,
           fmt("rate %.3f (>=0.90), pb %.3f (>=0.85), db %.3f (>=0.75)", rate, pb, db));
}

void check_breast_cancer_accuracy() {
    const double t0 = now_s();
    const DatasetSplit raw = load_limited("breast-cancer", 0);
    const float rate = mean_acc(raw, EncoderKind::kRate, 60, 16, 0.001f);
    const float pb = mean_acc(raw, EncoderKind::kPoissonBurst, 60, 16, 0.001f);
    const float db = mean_acc(raw, EncoderKind::kDelayedBurst, 60, 16, 0.001f);
    // floors are the published full-scale accuracies minus 8 points
    const bool pass = rate >= 0.92f && rate >= 0.8849f && pb >= 0.8937f && db >= 0.8937f;
    record(4, "breast cancer accuracy floors", pass, t0, 600.0,
           fmt("rate %.3f (>=0.92), pb %.3f (>=0.8937), db %.3f (>=0.8937)", rate, pb, db));
}

// --- check 5: membership attack separates rate from poisson-burst -----------

double iris_attack_auc(const DatasetSplit& ds, EncoderKind kind) {
    const EncoderSpec spec = default_encoder_spec(kind, 100);
    const TrainedModelFn fit = [&](const DatasetSplit& d, const std::vector<size_t>& rows,
                                   uint64_t seed) {
        SnnModel model = make_model_for(d, ArchKind::kFcNet, LifParams{}, 1000, seed);
        TrainConfig tc;
        tc.epochs = 200;
        tc.batch_size = 8;
        tc.lr = 0.001f;
        tc.seed = seed;
        train_model(model, d, rows, spec, tc);
        return model;
    };
    const MiaSummary s = run_mia(ds, fit, spec, kFractions, {1, 2, 3, 4, 5}, SvmConfig{});
    return s.auc_mean;
}

void check_attack_gap() {
    const double t0 = now_s();
    DatasetSplit ds = load_limited("iris", 0);
    std::vector<size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    normalize_tabular(ds, all);
    const double auc_rate = iris_attack_auc(ds, EncoderKind::kRate);
    const double auc_pb = iris_attack_auc(ds, EncoderKind::kPoissonBurst);
    const double gap = auc_rate - auc_pb;
    record(5, "iris attack auc gap rate vs pb", gap > 0.05, t0, 900.0,
           fmt("auc rate %.3f, pb %.3f, gap %.3f (>0.05)", auc_rate, auc_pb, gap));
}

// --- check 6: roc auc equals the pairwise count ------------------------------

void check_roc_oracle() {
    const double t0 = now_s();
    RngStream rng(977, 7);
    int mismatches = 0;
    for (int it = 0; it < 1000; ++it) {
        const size_t n_pos = 1 + rng.next_below(40), n_neg = 1 + rng.next_below(40);
        std::vector<double> pos(n_pos), neg(n_neg);
        // coarse score grid so tie groups are common
        for (auto& v : pos) v = double(rng.next_below(8)) / 2.0;
        for (auto& v : neg) v = double(rng.next_below(8)) / 2.0;
        const double auc = roc_auc(pos, neg).auc;
        int64_t half_wins = 0;  // 2*wins, ties count 1
        for (double p : pos)
            for (double q : neg) half_wins += p > q ? 2 : (p == q ? 1 : 0);
        const double brute = (double(half_wins) / 2.0) / (double(n_pos) * double(n_neg));
        if (auc != brute) ++mismatches;
    }
    record(6, "roc auc equals pairwise counts", mismatches == 0, t0, 0.0,
           fmt("%d/1000 sets mismatched (exact compare)", mismatches));
}

// --- check 7: mnist convnet -------------------------------------------------

void check_mnist_convnet() {
    const double t0 = now_s();
    const DatasetSplit ds = load_limited("mnist", 3000);
    std::vector<size_t> train_rows(2000), test_rows(1000);
    std::iota(train_rows.begin(), train_rows.end(), 0);
    std::iota(test_rows.begin(), test_rows.end(), 2000);
    const EncoderSpec spec = default_encoder_spec(EncoderKind::kRate, 25);
    SnnModel model = make_model_for(ds, ArchKind::kConvNet, LifParams{}, 1000, 1);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 128;
    tc.lr = 0.001f;
    tc.seed = 1;
    train_model(model, ds, train_rows, spec, tc);
    const float acc = evaluate_accuracy(model, ds, test_rows, spec, 1);
    record(7, "mnist convnet accuracy", acc >= 0.85f, t0, 3600.0,
           fmt("test acc %.3f (>=0.85, 2000 train / 1000 test)", acc));
}

// --- check 8: poisson-burst emits ~30% of rate's spikes ----------------------

void check_spike_ratio() {
    const double t0 = now_s();
    const DatasetSplit ds = load_limited("mnist", 256);
    const EncoderSpec rate = default_encoder_spec(EncoderKind::kRate, 100);
    const EncoderSpec pb = default_encoder_spec(EncoderKind::kPoissonBurst, 100);
    const RngStream base(20260814, kStreamEncoder);
    double rate_spikes = 0.0, pb_spikes = 0.0;
    for (size_t r = 0; r < ds.size(); ++r) {
        RngStream rng_a = base.derive(r);
        RngStream rng_b = base.derive(r);
        const float* x = ds.X.ptr() + r * ds.features();
        const SpikeTrain a = encode_sample(x, int64_t(ds.features()), rate, rng_a);
        const SpikeTrain b = encode_sample(x, int64_t(ds.features()), pb, rng_b);
        rate_spikes += std::accumulate(a.bits.data.begin(), a.bits.data.end(), 0.0);
        pb_spikes += std::accumulate(b.bits.data.begin(), b.bits.data.end(), 0.0);
    }
    const double ratio = pb_spikes / rate_spikes;
    record(8, "pb/rate spike count ratio", ratio >= 0.28 && ratio <= 0.32, t0, 60.0,
           fmt("ratio %.4f (0.30 +- 0.02)", ratio));
}

// --- check 9: mnist -> fashion-mnist transfer --------------------------------

struct TransferOutcome {
    float scratch_acc = 0.0f, transfer_acc = 0.0f;
    double scratch_auc = 0.5, transfer_auc = 0.5;
};

TransferOutcome run_transfer(const DatasetSplit& source, const DatasetSplit& target,
                             EncoderKind kind) {
    const EncoderSpec spec = default_encoder_spec(kind, 20);
    const std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    const std::vector<size_t> frozen{0, 1};
    TrainConfig pre_tc;
    pre_tc.epochs = 5;
    pre_tc.batch_size = 32;
    pre_tc.lr = 0.001f;
    TrainConfig fit_tc = pre_tc;

    std::map<uint64_t, SnnModel> pretrained;
    auto pretrain_for = [&](uint64_t seed) -> const SnnModel& {
        auto it = pretrained.find(seed);
        if (it != pretrained.end()) return it->second;
        const SplitPlan plan = make_split_plan(source.size(), seed, kFractions);
        TrainConfig tc = pre_tc;
        tc.seed = seed;
        SnnModel m = pretrain_convnet(source, cat(plan.target_train, plan.shadow_train), spec, tc,
                                      256);
        return pretrained.emplace(seed, std::move(m)).first->second;
    };

    // target-model cache so both protocols report accuracy on the pooled test
    // rows without retraining
    std::map<uint64_t, std::vector<size_t>> target_rows;
    for (uint64_t s : seeds) target_rows[s] = make_split_plan(target.size(), s, kFractions).target_train;
    std::map<uint64_t, SnnModel> scratch_models, transfer_models;

    const TrainedModelFn fit_scratch = [&](const DatasetSplit& d, const std::vector<size_t>& rows,
                                           uint64_t seed) {
        SnnModel model = make_model_for(d, ArchKind::kConvNet, LifParams{}, 256, seed);
        TrainConfig tc = fit_tc;
        tc.seed = seed;
        train_model(model, d, rows, spec, tc);
        if (rows == target_rows[seed]) scratch_models.emplace(seed, model);
        return model;
    };
    const TrainedModelFn fit_transfer = [&](const DatasetSplit& d, const std::vector<size_t>& rows,
                                            uint64_t seed) {
        TrainConfig tc = fit_tc;
        tc.seed = seed;
        SnnModel model = finetune(pretrain_for(seed), d, rows, spec, frozen, tc);
        if (rows == target_rows[seed]) transfer_models.emplace(seed, model);
        return model;
    };

    TransferOutcome out;
    out.scratch_auc = run_mia(target, fit_scratch, spec, kFractions, seeds, SvmConfig{}).auc_mean;
    out.transfer_auc = run_mia(target, fit_transfer, spec, kFractions, seeds, SvmConfig{}).auc_mean;

    float s_sum = 0.0f, t_sum = 0.0f;
    for (uint64_t s : seeds) {
        const SplitPlan plan = make_split_plan(target.size(), s, kFractions);
        const auto test_rows = cat(plan.target_test, plan.shadow_test);
        s_sum += evaluate_accuracy(scratch_models.at(s), target, test_rows, spec, s);
        t_sum += evaluate_accuracy(transfer_models.at(s), target, test_rows, spec, s);
    }
    out.scratch_acc = s_sum / 5.0f;
    out.transfer_acc = t_sum / 5.0f;
    return out;
}

void check_transfer() {
    const double t0 = now_s();
    const DatasetSplit source = load_limited("mnist", 360);
    const DatasetSplit target = load_limited("fmnist", 360);
    const TransferOutcome rate = run_transfer(source, target, EncoderKind::kRate);
    const TransferOutcome pb = run_transfer(source, target, EncoderKind::kPoissonBurst);
    const bool acc_ok = std::abs(rate.transfer_acc - rate.scratch_acc) <= 0.05f &&
                        std::abs(pb.transfer_acc - pb.scratch_acc) <= 0.05f;
    const bool auc_ok = rate.transfer_auc <= rate.scratch_auc + 0.03 &&
                        pb.transfer_auc <= pb.scratch_auc + 0.03;
    record(9, "mnist to fmnist transfer", acc_ok && auc_ok, t0, 5400.0,
           fmt("rate acc %.3f/%.3f auc %.3f/%.3f, pb acc %.3f/%.3f auc %.3f/%.3f (scratch/transfer)",
               rate.scratch_acc, rate.transfer_acc, rate.scratch_auc, rate.transfer_auc,
               pb.scratch_acc, pb.transfer_acc, pb.scratch_auc, pb.transfer_auc));
}

// --- check 10: deterministic rerun is byte-identical -------------------------

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void check_deterministic_rerun() {
    const double t0 = now_s();
    const fs::path base = fs::temp_directory_path() / "spikebench-accept";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string args =
        " train --dataset iris --encoder poisson-burst --timesteps 30 --epochs 2 --seeds 9"
        " --hidden 16 --batch 8 --limit 60 --deterministic --data-dir " SPIKEBENCH_DATA_DIR
        " --out ";
    const std::string quiet = " >/dev/null 2>&1";
    bool pass = true;
    std::string detail = "report.json and checkpoint.bin identical across reruns";
    for (const char* d : {"a", "b"}) {
        const std::string cmd = SPIKEBENCH_BIN + args + (base / d).string() + quiet;
        if (std::system(cmd.c_str()) != 0) {
            pass = false;
            detail = "cli run failed";
        }
    }
    const std::string run_id = "train-iris-poisson-burst-s9";
    for (const char* f : {"report.json", "checkpoint.bin"}) {
        const auto a = slurp(base / "a" / run_id / f);
        const auto b = slurp(base / "b" / run_id / f);
        if (a.empty() || a != b) {
            pass = false;
            detail = fmt("%s differs or is missing", f);
        }
    }
    fs::remove_all(base);
    record(10, "deterministic rerun byte-identical", pass, t0, 0.0, detail);
}

}  // namespace

int main() {
    std::printf("acceptance checks (data: %s)\n", SPIKEBENCH_DATA_DIR);
    check_encoder_distributions();
    check_gradients();
    check_roc_oracle();
    check_spike_ratio();
    check_deterministic_rerun();
    check_iris_accuracy();
    check_breast_cancer_accuracy();
    check_attack_gap();
    check_mnist_convnet();
    check_transfer();

    std::sort(g_checks.begin(), g_checks.end(),
              [](const Check& a, const Check& b) { return a.id < b.id; });
    int failures = 0;
    std::printf("\nsummary:\n");
    for (const Check& c : g_checks) {
        std::printf("  [%2d] %s  %s\n", c.id, c.pass ? "PASS" : "FAIL", c.detail.c_str());
        if (!c.pass) ++failures;
    }
    std::printf("%d/%zu passed\n", int(g_checks.size()) - failures, g_checks.size());
    return failures;
}
