#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spikebench/attack.hpp"
#include "spikebench/checkpoint.hpp"
#include "spikebench/cost.hpp"
#include "spikebench/datasets.hpp"
#include "spikebench/errors.hpp"
#include "spikebench/jsonio.hpp"
#include "spikebench/runconfig.hpp"
#include "spikebench/train.hpp"
#include "spikebench/transfer.hpp"

namespace fs = std::filesystem;
using namespace spikebench;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const OrderedJson& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<float> parse_float_list(const std::string& csv) {
    std::vector<float> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        const std::string item = csv.substr(pos, comma - pos);
        try {
            size_t used = 0;
            out.push_back(std::stof(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in values list");
        }
        pos = comma + 1;
    }
    return out;
}

std::vector<size_t> concat_rows(const std::vector<size_t>& a, const std::vector<size_t>& b) {
    std::vector<size_t> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::vector<size_t> iota_rows(size_t n) {
    std::vector<size_t> rows(n);
    for (size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

// Loaded dataset, optionally truncated to the first `limit` rows, with
// tabular features still raw; callers pick the normalization fit.
DatasetSplit load_raw(const std::string& name, const RunConfig& cfg) {
    DatasetSplit ds = load_dataset(name, cfg.data_dir);
    if (cfg.limit > 0 && cfg.limit < ds.size()) {
        const size_t f = ds.features();
        ds.X.data.resize(cfg.limit * f);
        ds.X.shape[0] = cfg.limit;
        ds.y.resize(cfg.limit);
    }
    return ds;
}

// Shared input space across seeds: normalization fit on every row. Used
// where target and shadow models must see identical encodings (the attack
// protocol) and where no training happens at all (encode, cost).
DatasetSplit prepare_dataset(const std::string& name, const RunConfig& cfg) {
    DatasetSplit ds = load_raw(name, cfg);
    if (ds.channels == 0) normalize_tabular(ds, iota_rows(ds.size()));
    return ds;
}

ArchKind resolve_arch(const RunConfig& cfg, const DatasetSplit& ds) {
    if (cfg.arch == "fcnet") return ArchKind::kFcNet;
    if (cfg.arch == "convnet") return ArchKind::kConvNet;
    return ds.channels > 0 ? ArchKind::kConvNet : ArchKind::kFcNet;
}

TrainConfig train_config_of(const RunConfig& cfg, uint64_t seed, size_t epochs) {
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = cfg.batch_size;
    tc.lr = cfg.lr;
    tc.seed = seed;
    tc.verbose = true;
    return tc;
}

OrderedJson report_envelope(const RunConfig& cfg, const std::string& run_id, double wall) {
    OrderedJson j;
    j["schema_version"] = 1;
    j["command"] = cfg.command;
    j["run_id"] = run_id;
    j["dataset"] = cfg.dataset;
    j["encoder"] = encoder_spec_to_json(cfg.encoder);
    j["wall_clock_seconds"] = cfg.deterministic ? 0.0 : wall;
    return j;
}

CostReport cost_over_rows(const SnnModel& model, const DatasetSplit& ds,
                          const std::vector<size_t>& rows, const EncoderSpec& spec,
                          uint64_t seed, size_t cap) {
    CostReport total;
    const RngStream base(seed, kStreamEncoder);
    const size_t n = std::min(cap, rows.size());
    for (size_t i = 0; i < n; ++i)
        add_costs(total, count_costs(model, encode_row(ds, rows[i], spec, base).bits));
    return total;
}

void population_stats(const std::vector<double>& xs, double& mean, double& stdev) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    stdev = std::sqrt(var / double(xs.size()));
}

void cmd_encode(const RunConfig& cfg, const fs::path& dir, bool preview,
                std::chrono::steady_clock::time_point t0) {
    std::vector<float> x;
    if (cfg.use_values) {
        x = cfg.values;
    } else {
        const DatasetSplit ds = prepare_dataset(cfg.dataset, cfg);
        if (cfg.row >= ds.size())
            throw ConfigError("row " + std::to_string(cfg.row) + " out of range for '" +
                              cfg.dataset + "' (" + std::to_string(ds.size()) + " rows)");
        const size_t f = ds.features();
        x.assign(ds.X.ptr() + cfg.row * f, ds.X.ptr() + (cfg.row + 1) * f);
    }

    RngStream rng = RngStream(cfg.seeds.front(), kStreamEncoder).derive(cfg.row);
    const SpikeTrain train = encode_sample(x, cfg.encoder, rng);

    const std::string raster = raster_text(train);
    write_text(dir / "raster.txt", raster);
    write_text(dir / "spikes.csv", spike_csv(train));
    if (preview) std::cout << raster;

    uint64_t total = 0;
    OrderedJson per_feature = OrderedJson::array();
    for (int64_t i = 0; i < train.features; ++i) {
        uint64_t n = 0;
        for (int64_t t = 0; t < train.timesteps; ++t)
            n += uint64_t(train.bits.ptr()[t * train.features + i] != 0.0f);
        per_feature.push_back(n);
        total += n;
    }
    OrderedJson report = report_envelope(cfg, dir.filename().string(), seconds_since(t0));
    report["features"] = train.features;
    report["timesteps"] = train.timesteps;
    report["total_spikes"] = total;
    report["spikes_per_feature"] = per_feature;
    write_json(dir / "report.json", report);
}

void cmd_train(const RunConfig& cfg, const fs::path& dir,
               std::chrono::steady_clock::time_point t0) {
    const DatasetSplit raw = load_raw(cfg.dataset, cfg);
    const ArchKind arch = resolve_arch(cfg, raw);

    OrderedJson per_seed = OrderedJson::array();
    std::vector<double> train_accs, test_accs;
    bool saved = false;
    DatasetSplit norm;  // per-seed normalized copy (tabular only)
    for (uint64_t seed : cfg.seeds) {
        const SplitPlan plan = make_split_plan(raw.size(), seed, cfg.fractions);
        const std::vector<size_t> train_rows = concat_rows(plan.target_train, plan.shadow_train);
        const std::vector<size_t> test_rows = concat_rows(plan.target_test, plan.shadow_test);
        if (train_rows.empty() || test_rows.empty())
            throw ConfigError("split leaves an empty train or test pool");

        // normalization statistics come from this seed's training pool only
        const DatasetSplit* dsp = &raw;
        if (raw.channels == 0) {
            norm = raw;
            normalize_tabular(norm, train_rows);
            dsp = &norm;
        }
        const DatasetSplit& ds = *dsp;

        SnnModel model = make_model_for(ds, arch, cfg.lif, cfg.hidden, seed);
        TrainResult log;
        if (cfg.epochs > 0)
            log = train_model(model, ds, train_rows, cfg.encoder, train_config_of(cfg, seed, cfg.epochs));

        const float train_acc = evaluate_accuracy(model, ds, train_rows, cfg.encoder, seed);
        const float test_acc = evaluate_accuracy(model, ds, test_rows, cfg.encoder, seed);
        const CostReport cost = cost_over_rows(model, ds, test_rows, cfg.encoder, seed, 64);

        OrderedJson e;
        e["seed"] = seed;
        e["train_rows"] = train_rows.size();
        e["test_rows"] = test_rows.size();
        e["train_accuracy"] = train_acc;
        e["test_accuracy"] = test_acc;
        e["final_epoch_loss"] = log.epoch_loss.empty() ? 0.0f : log.epoch_loss.back();
        e["cost"] = cost_report_to_json(cost);
        per_seed.push_back(e);
        train_accs.push_back(train_acc);
        test_accs.push_back(test_acc);

        if (!saved) {
            save_checkpoint((dir / "checkpoint.bin").string(), model, cfg.encoder, seed);
            saved = true;
        }
    }

    double mean_train, std_train, mean_test, std_test;
    population_stats(train_accs, mean_train, std_train);
    population_stats(test_accs, mean_test, std_test);

    OrderedJson report = report_envelope(cfg, dir.filename().string(), seconds_since(t0));
    report["arch"] = arch_name(arch);
    report["per_seed"] = per_seed;
    report["train_accuracy_mean"] = mean_train;
    report["train_accuracy_std"] = std_train;
    report["test_accuracy_mean"] = mean_test;
    report["test_accuracy_std"] = std_test;
    report["test_accuracy_table"] = format_mean_std(mean_test, std_test);
    write_json(dir / "report.json", report);
}

void cmd_attack(const RunConfig& cfg, const fs::path& dir,
                std::chrono::steady_clock::time_point t0) {
    const DatasetSplit ds = prepare_dataset(cfg.dataset, cfg);
    const ArchKind arch = resolve_arch(cfg, ds);

    auto fit = [&](const DatasetSplit& d, const std::vector<size_t>& rows, uint64_t seed) {
        SnnModel model = make_model_for(d, arch, cfg.lif, cfg.hidden, seed);
        if (cfg.epochs > 0)
            train_model(model, d, rows, cfg.encoder, train_config_of(cfg, seed, cfg.epochs));
        return model;
    };
    const MiaSummary summary =
        run_mia(ds, fit, cfg.encoder, cfg.fractions, cfg.seeds, SvmConfig{});

    OrderedJson report = report_envelope(cfg, dir.filename().string(), seconds_since(t0));
    report["arch"] = arch_name(arch);
    report["attack"] = mia_summary_to_json(summary);
    write_json(dir / "report.json", report);
    write_text(dir / "roc.csv", roc_csv_text(summary));
}

void cmd_transfer(const RunConfig& cfg, const fs::path& dir,
                  std::chrono::steady_clock::time_point t0) {
    const DatasetSplit source = prepare_dataset(cfg.source, cfg);
    const DatasetSplit target = prepare_dataset(cfg.target, cfg);
    const size_t ft_epochs = cfg.finetune_epochs > 0 ? cfg.finetune_epochs : cfg.epochs;

    // one pretrained source model per seed, shared by the target and shadow
    // fine-tunes of that seed
    std::map<uint64_t, SnnModel> pretrained;
    auto pretrain_for = [&](uint64_t seed) -> SnnModel& {
        auto it = pretrained.find(seed);
        if (it == pretrained.end()) {
            const SplitPlan plan = make_split_plan(source.size(), seed, cfg.fractions);
            const std::vector<size_t> rows = concat_rows(plan.target_train, plan.shadow_train);
            SnnModel m = pretrain_convnet(source, rows, cfg.encoder,
                                          train_config_of(cfg, seed, cfg.epochs), cfg.hidden,
                                          cfg.lif);
            it = pretrained.emplace(seed, std::move(m)).first;
        }
        return it->second;
    };

    auto fit_scratch = [&](const DatasetSplit& d, const std::vector<size_t>& rows,
                           uint64_t seed) {
        SnnModel model = make_model_for(d, ArchKind::kConvNet, cfg.lif, cfg.hidden, seed);
        if (cfg.epochs > 0)
            train_model(model, d, rows, cfg.encoder, train_config_of(cfg, seed, cfg.epochs));
        return model;
    };
    auto fit_transfer = [&](const DatasetSplit& d, const std::vector<size_t>& rows,
                            uint64_t seed) {
        return finetune(pretrain_for(seed), d, rows, cfg.encoder, cfg.frozen_layers,
                        train_config_of(cfg, seed, ft_epochs));
    };

    const MiaSummary scratch =
        run_mia(target, fit_scratch, cfg.encoder, cfg.fractions, cfg.seeds, SvmConfig{});
    const MiaSummary transfer =
        run_mia(target, fit_transfer, cfg.encoder, cfg.fractions, cfg.seeds, SvmConfig{});

    // the pretrained source net is the reusable artifact of this run
    save_checkpoint((dir / "checkpoint.bin").string(), pretrain_for(cfg.seeds.front()),
                    cfg.encoder, cfg.seeds.front());

    auto mean_test_acc = [](const MiaSummary& s) {
        double sum = 0.0;
        for (const auto& r : s.per_seed) sum += r.target_test_acc;
        return s.per_seed.empty() ? 0.0 : sum / double(s.per_seed.size());
    };

    OrderedJson report = report_envelope(cfg, dir.filename().string(), seconds_since(t0));
    report["source"] = cfg.source;
    report["target"] = cfg.target;
    report["frozen_layers"] = cfg.frozen_layers;
    report["finetune_epochs"] = ft_epochs;
    report["scratch"] = mia_summary_to_json(scratch);
    report["transfer"] = mia_summary_to_json(transfer);
    OrderedJson table;
    table["scratch_accuracy"] = mean_test_acc(scratch);
    table["scratch_auc"] = scratch.auc_mean;
    table["transfer_accuracy"] = mean_test_acc(transfer);
    table["transfer_auc"] = transfer.auc_mean;
    report["table"] = table;
    write_json(dir / "report.json", report);

    std::string csv = "phase,seed,fpr,tpr\n";
    char buf[112];
    for (const auto* phase : {&scratch, &transfer}) {
        const char* label = phase == &scratch ? "scratch" : "transfer";
        for (const auto& r : phase->per_seed)
            for (const auto& pt : r.roc.curve) {
                std::snprintf(buf, sizeof(buf), "%s,%llu,%.6f,%.6f\n", label,
                              static_cast<unsigned long long>(r.seed), pt.first, pt.second);
                csv += buf;
            }
    }
    write_text(dir / "roc.csv", csv);
}

void cmd_cost(const RunConfig& cfg, const fs::path& dir,
              std::chrono::steady_clock::time_point t0) {
    const DatasetSplit ds = prepare_dataset(cfg.dataset, cfg);
    const ArchKind arch = resolve_arch(cfg, ds);
    const SnnModel model = make_model_for(ds, arch, cfg.lif, cfg.hidden, cfg.seeds.front());
    const std::vector<size_t> rows = iota_rows(std::min<size_t>(ds.size(), 128));
    const CostReport cost =
        cost_over_rows(model, ds, rows, cfg.encoder, cfg.seeds.front(), rows.size());

    OrderedJson report = report_envelope(cfg, dir.filename().string(), seconds_since(t0));
    report["arch"] = arch_name(arch);
    report["cost"] = cost_report_to_json(cost);
    write_json(dir / "report.json", report);
}

// flag values held raw until after parsing so only flags that were actually
// given (or satisfied from SPIKEBENCH_* env vars) overlay the config file
struct FlagHolder {
    std::string dataset, encoder, arch, out, data_dir, source, target, values;
    std::vector<double> fractions;
    std::vector<uint64_t> seeds;
    uint64_t seed = 0;
    int64_t timesteps = 0;
    size_t epochs = 0, batch = 0, hidden = 0, row = 0, limit = 0, finetune_epochs = 0;
    std::vector<size_t> frozen;
    double lr = 0.0;
    bool deterministic = false, preview = false;
};

void add_common_flags(CLI::App* sub, FlagHolder& h) {
    sub->add_option("--dataset", h.dataset, "dataset id (iris, breast-cancer, mnist, fmnist, cifar10)")
        ->envname("SPIKEBENCH_DATASET");
    sub->add_option("--encoder", h.encoder, "spike encoder")
        ->check(CLI::IsMember({"rate", "poisson-burst", "delayed-burst"}))
        ->envname("SPIKEBENCH_ENCODER");
    sub->add_option("--timesteps", h.timesteps, "simulation window length T")
        ->envname("SPIKEBENCH_TIMESTEPS");
    sub->add_option("--seed", h.seed, "single run seed")->envname("SPIKEBENCH_SEED");
    sub->add_option("--seeds", h.seeds, "comma-separated seed list")
        ->delimiter(',')
        ->envname("SPIKEBENCH_SEEDS");
    sub->add_option("--epochs", h.epochs, "training epochs")->envname("SPIKEBENCH_EPOCHS");
    sub->add_option("--fractions", h.fractions,
                    "target-train,target-test,shadow-train,shadow-test split fractions")
        ->delimiter(',')
        ->expected(4)
        ->envname("SPIKEBENCH_FRACTIONS");
    sub->add_option("--out", h.out, "output root directory")->envname("SPIKEBENCH_OUT");
    sub->add_option("--data-dir", h.data_dir, "dataset root directory")
        ->envname("SPIKEBENCH_DATA_DIR");
    sub->add_option("--limit", h.limit, "keep only the first N dataset rows")
        ->envname("SPIKEBENCH_LIMIT");
    sub->add_flag("--deterministic", h.deterministic,
                  "zero wall-clock fields so reruns are byte-identical")
        ->envname("SPIKEBENCH_DETERMINISTIC");
}

void add_model_flags(CLI::App* sub, FlagHolder& h) {
    sub->add_option("--arch", h.arch, "model architecture")
        ->check(CLI::IsMember({"auto", "fcnet", "convnet"}))
        ->envname("SPIKEBENCH_ARCH");
    sub->add_option("--hidden", h.hidden, "hidden layer width")->envname("SPIKEBENCH_HIDDEN");
    sub->add_option("--batch", h.batch, "mini-batch size")->envname("SPIKEBENCH_BATCH");
    sub->add_option("--lr", h.lr, "learning rate")->envname("SPIKEBENCH_LR");
}

void overlay_flags(const CLI::App* sub, const FlagHolder& h, RunConfig& cfg) {
    auto given = [&](const std::string& name) {
        return sub->count(name) > 0;
    };
    if (given("--dataset")) cfg.dataset = h.dataset;
    if (given("--encoder")) {
        const EncoderKind kind = encoder_kind_from_name(h.encoder);
        if (kind != cfg.encoder.kind)
            cfg.encoder = default_encoder_spec(kind, cfg.encoder.timesteps);
    }
    if (given("--timesteps")) cfg.encoder.timesteps = h.timesteps;
    if (given("--seed")) cfg.seeds = {h.seed};
    if (given("--seeds")) cfg.seeds = h.seeds;
    if (given("--epochs")) cfg.epochs = h.epochs;
    if (given("--fractions"))
        for (size_t i = 0; i < 4; ++i) cfg.fractions[i] = h.fractions[i];
    if (given("--out")) cfg.out_dir = h.out;
    if (given("--data-dir")) cfg.data_dir = h.data_dir;
    if (given("--limit")) cfg.limit = h.limit;
    if (h.deterministic) cfg.deterministic = true;
    if (sub->get_option_no_throw("--arch") != nullptr) {
        if (given("--arch")) cfg.arch = h.arch;
        if (given("--hidden")) cfg.hidden = h.hidden;
        if (given("--batch")) cfg.batch_size = h.batch;
        if (given("--lr")) cfg.lr = float(h.lr);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal spike encodings for LIF networks: train, attack, transfer, count"};
    app.require_subcommand(1);

    // the config file seeds the defaults, so it must be read before parsing
    RunConfig cfg;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            config_path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            config_path = arg.substr(9);
    }
    if (config_path.empty())
        if (const char* env = std::getenv("SPIKEBENCH_CONFIG")) config_path = env;
    try {
        if (!config_path.empty()) cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::string config_sink;  // registered so --config shows up in help

    FlagHolder h;
    CLI::App* enc = app.add_subcommand("encode", "encode a sample and dump raster + CSV");
    add_common_flags(enc, h);
    enc->add_option("--config", config_sink, "JSON config file");
    enc->add_option("--row", h.row, "dataset row to encode");
    enc->add_option("--values", h.values, "comma-separated intensities in [0,1] (overrides --row)");
    enc->add_flag("--preview", h.preview, "print the raster to stdout");

    CLI::App* trn = app.add_subcommand("train", "train a model and report accuracy + cost");
    add_common_flags(trn, h);
    add_model_flags(trn, h);
    trn->add_option("--config", config_sink, "JSON config file");

    CLI::App* atk = app.add_subcommand("attack", "run the shadow-model membership attack");
    add_common_flags(atk, h);
    add_model_flags(atk, h);
    atk->add_option("--config", config_sink, "JSON config file");

    CLI::App* tra = app.add_subcommand("transfer", "pretrain, fine-tune, and attack both");
    add_common_flags(tra, h);
    add_model_flags(tra, h);
    tra->add_option("--config", config_sink, "JSON config file");
    tra->add_option("--source", h.source, "pretraining dataset")->envname("SPIKEBENCH_SOURCE");
    tra->add_option("--target", h.target, "fine-tuning dataset")->envname("SPIKEBENCH_TARGET");
    tra->add_option("--finetune-epochs", h.finetune_epochs, "fine-tune epochs (0 = epochs)");
    tra->add_option("--frozen", h.frozen, "layer indices to freeze (0..3)")->delimiter(',');

    CLI::App* cst = app.add_subcommand("cost", "count spikes, ops and MACs on a batch");
    add_common_flags(cst, h);
    add_model_flags(cst, h);
    cst->add_option("--config", config_sink, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        cfg.command = sub->get_name();
        overlay_flags(sub, h, cfg);
        if (sub == enc && sub->count("--values") > 0) {
            cfg.use_values = true;
            cfg.values = parse_float_list(h.values);
        }
        if (sub == enc && sub->count("--row") > 0) cfg.row = h.row;
        if (sub == tra) {
            if (sub->count("--source")) cfg.source = h.source;
            if (sub->count("--target")) cfg.target = h.target;
            if (sub->count("--finetune-epochs")) cfg.finetune_epochs = h.finetune_epochs;
            if (sub->count("--frozen")) cfg.frozen_layers = h.frozen;
        }
        cfg.validate();

        const std::string run_id = derive_run_id(cfg);
        const fs::path dir = fs::path(cfg.out_dir) / run_id;
        fs::create_directories(dir);
        write_json(dir / "config.json", run_config_to_json(cfg));

        if (sub == enc)
            cmd_encode(cfg, dir, h.preview, t0);
        else if (sub == trn)
            cmd_train(cfg, dir, t0);
        else if (sub == atk)
            cmd_attack(cfg, dir, t0);
        else if (sub == tra)
            cmd_transfer(cfg, dir, t0);
        else
            cmd_cost(cfg, dir, t0);
        std::cerr << "wrote " << dir.string() << "\n";
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
