#include "spikebench/jsonio.hpp"

#include <cstdio>

#include "spikebench/errors.hpp"

namespace spikebench {

OrderedJson encoder_spec_to_json(const EncoderSpec& spec) {
    OrderedJson j;
    j["kind"] = encoder_kind_name(spec.kind);
    j["timesteps"] = spec.timesteps;
    j["interval"] = spec.interval;
    j["burst_mean"] = spec.burst_mean;
    j["isi"] = spec.isi;
    j["margin"] = spec.margin;
    j["clip_ratio"] = spec.clip_ratio;
    return j;
}

EncoderSpec encoder_spec_from_json(const OrderedJson& j) {
    if (!j.is_object()) throw ConfigError("encoder spec must be a JSON object");
    const std::string kind_name = j.value("kind", std::string("rate"));
    EncoderSpec spec = default_encoder_spec(encoder_kind_from_name(kind_name),
                                            j.value("timesteps", int64_t(100)));
    spec.interval = j.value("interval", spec.interval);
    spec.burst_mean = j.value("burst_mean", spec.burst_mean);
    spec.isi = j.value("isi", spec.isi);
    spec.margin = j.value("margin", spec.margin);
    spec.clip_ratio = j.value("clip_ratio", spec.clip_ratio);
    spec.validate();
    return spec;
}

OrderedJson lif_params_to_json(const LifParams& p) {
    OrderedJson j;
    j["beta"] = p.beta;
    j["threshold"] = p.threshold;
    j["subtract_reset"] = p.subtract_reset;
    j["surrogate_width"] = p.surrogate_width;
    j["detach_reset"] = p.detach_reset;
    j["smooth"] = p.smooth;
    return j;
}

LifParams lif_params_from_json(const OrderedJson& j) {
    if (!j.is_object()) throw ConfigError("lif params must be a JSON object");
    LifParams p;
    p.beta = j.value("beta", p.beta);
    p.threshold = j.value("threshold", p.threshold);
    p.subtract_reset = j.value("subtract_reset", p.subtract_reset);
    p.surrogate_width = j.value("surrogate_width", p.surrogate_width);
    p.detach_reset = j.value("detach_reset", p.detach_reset);
    p.smooth = j.value("smooth", p.smooth);
    p.validate();
    return p;
}

OrderedJson cost_report_to_json(const CostReport& r) {
    OrderedJson j;
    j["samples"] = r.samples;
    j["total_input_spikes"] = r.total_input_spikes;
    OrderedJson ops;
    for (const auto& entry : r.synaptic_ops) ops[entry.first] = entry.second;
    j["synaptic_ops"] = ops;
    j["synaptic_ops_total"] = r.total_synaptic_ops();
    OrderedJson macs;
    for (const auto& entry : r.dense_macs) macs[entry.first] = entry.second;
    j["dense_macs"] = macs;
    j["dense_macs_total"] = r.total_dense_macs();
    j["peak_activation_elements"] = r.peak_activation_elements;
    j["wall_clock_seconds"] = r.wall_clock_seconds;
    return j;
}

std::string format_mean_std(double mean, double stdev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f(+-%.3f)", mean, stdev);
    return buf;
}

OrderedJson mia_summary_to_json(const MiaSummary& s) {
    OrderedJson j;
    OrderedJson per_seed = OrderedJson::array();
    double train_sum = 0.0, test_sum = 0.0;
    for (const auto& r : s.per_seed) {
        OrderedJson e;
        e["seed"] = r.seed;
        e["attack_auc"] = r.roc.auc;
        e["target_train_accuracy"] = r.target_train_acc;
        e["target_test_accuracy"] = r.target_test_acc;
        per_seed.push_back(e);
        train_sum += r.target_train_acc;
        test_sum += r.target_test_acc;
    }
    j["per_seed"] = per_seed;
    j["attack_auc_mean"] = s.auc_mean;
    j["attack_auc_std"] = s.auc_std;
    j["attack_auc_table"] = format_mean_std(s.auc_mean, s.auc_std);
    const double n = s.per_seed.empty() ? 1.0 : double(s.per_seed.size());
    j["target_train_accuracy_mean"] = train_sum / n;
    j["target_test_accuracy_mean"] = test_sum / n;
    return j;
}

std::string roc_csv_text(const MiaSummary& s) {
    std::string out = "seed,fpr,tpr\n";
    char buf[96];
    for (const auto& r : s.per_seed)
        for (const auto& pt : r.roc.curve) {
            std::snprintf(buf, sizeof(buf), "%llu,%.6f,%.6f\n",
                          static_cast<unsigned long long>(r.seed), pt.first, pt.second);
            out += buf;
        }
    return out;
}

}  // namespace spikebench
