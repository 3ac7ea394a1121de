#pragma once

#include <string>

#include <json.hpp>

#include "spikebench/attack.hpp"
#include "spikebench/cost.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/lif.hpp"

namespace spikebench {

// Insertion-ordered JSON everywhere so serialized output is reproducible.
using OrderedJson = nlohmann::ordered_json;

OrderedJson encoder_spec_to_json(const EncoderSpec& spec);
// Missing fields fall back to the defaults for the given kind.
EncoderSpec encoder_spec_from_json(const OrderedJson& j);

OrderedJson lif_params_to_json(const LifParams& p);
LifParams lif_params_from_json(const OrderedJson& j);

OrderedJson cost_report_to_json(const CostReport& r);

// Per-seed attack results plus the aggregate, including the table-style
// "0.545(+-0.003)" rendering of mean and spread.
OrderedJson mia_summary_to_json(const MiaSummary& s);
std::string format_mean_std(double mean, double stdev);

// All seeds' ROC curves as "seed,fpr,tpr" rows.
std::string roc_csv_text(const MiaSummary& s);

}  // namespace spikebench
