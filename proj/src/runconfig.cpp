#include "spikebench/runconfig.hpp"

#include <fstream>
#include <set>

#include "spikebench/errors.hpp"

namespace spikebench {

void RunConfig::validate() const {
    if (schema_version != 1)
        throw ConfigError("unsupported config schema_version " + std::to_string(schema_version));
    if (arch != "auto" && arch != "fcnet" && arch != "convnet")
        throw ConfigError("arch must be auto, fcnet or convnet, got '" + arch + "'");
    encoder.validate();
    lif.validate();
    if (!(lr > 0.0f)) throw ConfigError("lr must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (hidden == 0) throw ConfigError("hidden must be positive");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    double total = 0.0;
    for (double f : fractions) {
        if (f < 0.0) throw ConfigError("split fractions must be nonnegative");
        total += f;
    }
    if (total > 1.0 + 1e-9) throw ConfigError("split fractions sum above 1");
    for (size_t idx : frozen_layers)
        if (idx > 3)
            throw ConfigError("frozen layer index " + std::to_string(idx) +
                              " out of range (layers are 0..3)");
    for (float v : values)
        if (!(v >= 0.0f && v <= 1.0f))
            throw ConfigError("encode values must lie in [0,1]");
}

OrderedJson run_config_to_json(const RunConfig& cfg) {
    OrderedJson j;
    j["schema_version"] = cfg.schema_version;
    j["command"] = cfg.command;
    j["dataset"] = cfg.dataset;
    j["arch"] = cfg.arch;
    j["encoder"] = encoder_spec_to_json(cfg.encoder);
    j["lif"] = lif_params_to_json(cfg.lif);
    j["lr"] = cfg.lr;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["hidden"] = cfg.hidden;
    j["fractions"] = cfg.fractions;
    j["seeds"] = cfg.seeds;
    j["deterministic"] = cfg.deterministic;
    j["limit"] = cfg.limit;
    j["source"] = cfg.source;
    j["target"] = cfg.target;
    j["frozen_layers"] = cfg.frozen_layers;
    j["finetune_epochs"] = cfg.finetune_epochs;
    j["row"] = cfg.row;
    if (cfg.use_values)
        j["values"] = cfg.values;
    else
        j["values"] = nullptr;
    j["out_dir"] = cfg.out_dir;
    j["data_dir"] = cfg.data_dir;
    return j;
}

RunConfig run_config_from_json(const OrderedJson& j) {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    static const std::set<std::string> known = {
        "schema_version", "command",  "dataset",       "arch",
        "encoder",        "lif",      "lr",            "batch_size",
        "epochs",         "hidden",   "fractions",     "seeds",
        "deterministic",  "limit",    "source",        "target",
        "frozen_layers",  "finetune_epochs", "row",    "values",
        "out_dir",        "data_dir"};
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw ConfigError("unknown config key '" + item.key() + "'");

    RunConfig cfg;
    cfg.schema_version = j.value("schema_version", cfg.schema_version);
    cfg.command = j.value("command", cfg.command);
    cfg.dataset = j.value("dataset", cfg.dataset);
    cfg.arch = j.value("arch", cfg.arch);
    if (j.contains("encoder")) cfg.encoder = encoder_spec_from_json(j.at("encoder"));
    if (j.contains("lif")) cfg.lif = lif_params_from_json(j.at("lif"));
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.hidden = j.value("hidden", cfg.hidden);
    if (j.contains("fractions")) {
        const auto& f = j.at("fractions");
        if (!f.is_array() || f.size() != 4)
            throw ConfigError("fractions must be an array of 4 numbers");
        for (size_t i = 0; i < 4; ++i) cfg.fractions[i] = f[i].get<double>();
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    cfg.deterministic = j.value("deterministic", cfg.deterministic);
    cfg.limit = j.value("limit", cfg.limit);
    cfg.source = j.value("source", cfg.source);
    cfg.target = j.value("target", cfg.target);
    if (j.contains("frozen_layers"))
        cfg.frozen_layers = j.at("frozen_layers").get<std::vector<size_t>>();
    cfg.finetune_epochs = j.value("finetune_epochs", cfg.finetune_epochs);
    cfg.row = j.value("row", cfg.row);
    if (j.contains("values") && !j.at("values").is_null()) {
        cfg.use_values = true;
        cfg.values = j.at("values").get<std::vector<float>>();
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.data_dir = j.value("data_dir", cfg.data_dir);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    OrderedJson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

std::string derive_run_id(const RunConfig& cfg) {
    std::string data = cfg.command == "transfer" ? cfg.source + "-to-" + cfg.target : cfg.dataset;
    std::string id = cfg.command + "-" + data + "-" + encoder_kind_name(cfg.encoder.kind) + "-s" +
                     std::to_string(cfg.seeds.empty() ? 0 : cfg.seeds.front());
    if (cfg.seeds.size() > 1) id += "x" + std::to_string(cfg.seeds.size());
    return id;
}

}  // namespace spikebench
