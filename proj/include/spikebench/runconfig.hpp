#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spikebench/encoders.hpp"
#include "spikebench/jsonio.hpp"
#include "spikebench/lif.hpp"

namespace spikebench {

// Fully resolved run configuration. Field initializers are the experiment
// defaults, a JSON config file overlays them, and command-line flags win
// last. The resolved struct is echoed into every run directory so a run
// replays from its persisted config alone.
struct RunConfig {
    int schema_version = 1;
    std::string command;  // filled in by the entry point
    std::string dataset = "iris";
    std::string arch = "auto";  // auto | fcnet | convnet
    EncoderSpec encoder;
    LifParams lif;
    float lr = 0.001f;
    size_t batch_size = 128;
    size_t epochs = 50;
    size_t hidden = 1000;
    std::array<double, 4> fractions{0.4, 0.1, 0.4, 0.1};
    std::vector<uint64_t> seeds{42};
    bool deterministic = false;
    size_t limit = 0;  // keep only the first N dataset rows; 0 keeps all

    // transfer runs
    std::string source = "mnist";
    std::string target = "fmnist";
    std::vector<size_t> frozen_layers{0, 1};
    size_t finetune_epochs = 0;  // 0 reuses `epochs`

    // encode previews: encode either a dataset row or literal intensities
    size_t row = 0;
    bool use_values = false;  // --values was given (an empty list is meaningful)
    std::vector<float> values;

    std::string out_dir = "runs";
    std::string data_dir = "data";

    void validate() const;
};

OrderedJson run_config_to_json(const RunConfig& cfg);
// Missing fields keep their defaults; unknown keys are rejected so config
// typos fail loudly instead of silently running the defaults.
RunConfig run_config_from_json(const OrderedJson& j);
RunConfig load_run_config(const std::string& path);

// Deterministic directory name: command-dataset-encoder-s<seed>[xN].
std::string derive_run_id(const RunConfig& cfg);

}  // namespace spikebench
