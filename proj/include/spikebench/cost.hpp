#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spikebench/model.hpp"
#include "spikebench/tensor.hpp"

namespace spikebench {

// Hardware-independent cost accounting for one or more forward passes.
// Spike-driven layers (binary inputs) are charged one synaptic op per
// arriving spike per reachable weight; layers fed by real-valued
// activations are charged their full dense MAC count per timestep. Bias
// adds, pooling comparisons and LIF state updates are not counted.
// wall_clock_seconds is left at zero here; callers time whole runs.
struct CostReport {
    uint64_t total_input_spikes = 0;
    uint64_t samples = 0;

    // forward order, spike-driven layers only (conv1, fc1/fc2 as applicable)
    std::vector<std::pair<std::string, uint64_t>> synaptic_ops;
    // forward order, activity-independent layers (convnet conv2 and fc1)
    std::vector<std::pair<std::string, uint64_t>> dense_macs;

    // largest single activation buffer a forward pass retains, in elements
    uint64_t peak_activation_elements = 0;
    double wall_clock_seconds = 0.0;

    uint64_t total_synaptic_ops() const;
    uint64_t total_dense_macs() const;
};

// Counting forward over one sample's spike train [T, in_features].
CostReport count_costs(const SnnModel& model, const Tensor& spikes);

// Merge a per-sample report into a running total: counters add, the
// activation peak takes the max. Layer tables must match or be empty.
void add_costs(CostReport& into, const CostReport& part);

}  // namespace spikebench
