#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikebench/cost.hpp"
#include "spikebench/datasets.hpp"
#include "spikebench/encoders.hpp"
#include "spikebench/errors.hpp"
#include "spikebench/model.hpp"
#include "spikebench/train.hpp"
#include "test_util.hpp"

using spikebench::ArchKind;
using spikebench::CostReport;
using spikebench::DatasetSplit;
using spikebench::EncoderKind;
using spikebench::EncoderSpec;
using spikebench::LifParams;
using spikebench::RngStream;
using spikebench::SnnModel;
using spikebench::Tensor;

namespace {

SnnModel make_fc_model(size_t features, size_t classes, size_t hidden, uint64_t seed) {
    RngStream winit(seed, spikebench::kStreamWeightInit);
    return SnnModel::make_fc(features, classes, LifParams{}, hidden, winit);
}

void zero_biases(SnnModel& m) {
    m.fc1.b.fill(0.0f);
    m.fc2.b.fill(0.0f);
    if (m.arch == ArchKind::kConvNet) {
        m.conv1.b.fill(0.0f);
        m.conv2.b.fill(0.0f);
    }
    m.refresh_caches();
}

// gather-side oracle for the spike-driven conv count: walk output positions
// and kernel taps, charging one op per output channel whenever the tap lands
// on a spiking input pixel
uint64_t conv_ops_oracle(const Tensor& frame, size_t channels, size_t side, size_t out_c) {
    uint64_t ops = 0;
    for (size_t y = 0; y < side; ++y)
        for (size_t x = 0; x < side; ++x)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int yy = int(y) + dy, xx = int(x) + dx;
                    if (yy < 0 || yy >= int(side) || xx < 0 || xx >= int(side)) continue;
                    for (size_t c = 0; c < channels; ++c)
                        if (frame.data[(c * side + size_t(yy)) * side + size_t(xx)] != 0.0f)
                            ops += out_c;
                }
    return ops;
}

}  // namespace

TEST_CASE("silence costs nothing: zero input and zero bias give zero ops") {
    // bias drive alone can push membranes past threshold, so a quiet network
    // means quiet weights too
    SnnModel m = make_fc_model(12, 3, 50, 7);
    zero_biases(m);
    const Tensor silence({20, 12});
    const CostReport r = spikebench::count_costs(m, silence);
    CHECK(r.total_input_spikes == 0);
    CHECK(r.total_synaptic_ops() == 0);
    CHECK(r.total_dense_macs() == 0);
    CHECK(r.samples == 1);
    CHECK(r.peak_activation_elements == 20 * 50);
}

TEST_CASE("a single spike into a 1000-unit layer costs exactly 1000 ops") {
    SnnModel m = make_fc_model(8, 2, 1000, 7);
    zero_biases(m);
    Tensor spikes({5, 8});
    spikes.data[2 * 8 + 3] = 1.0f;
    const CostReport r = spikebench::count_costs(m, spikes);
    CHECK(r.total_input_spikes == 1);
    REQUIRE(r.synaptic_ops.size() == 2);
    CHECK(r.synaptic_ops[0].first == "fc1");
    CHECK(r.synaptic_ops[0].second == 1000);
    // downstream ops are bounded by the hidden layer's own fan-out
    CHECK(r.synaptic_ops[1].first == "fc2");
    CHECK(r.synaptic_ops[1].second <= 1000 * 2 * 5);
}

TEST_CASE("convnet counting matches a gather-side oracle and the dense formulas") {
    RngStream winit(11, spikebench::kStreamWeightInit);
    SnnModel m = SnnModel::make_conv(1, 4, LifParams{}, 64, winit);

    const size_t T = 3, F = 1 * 32 * 32;
    Tensor spikes({T, F});
    RngStream rng(99, 5);
    for (auto& v : spikes.data) v = rng.next_double() < 0.1 ? 1.0f : 0.0f;
    // corners and edges exercise the reduced border fan-out
    spikes.data[0] = 1.0f;
    spikes.data[31] = 1.0f;
    spikes.data[F - 1] = 1.0f;

    const CostReport r = spikebench::count_costs(m, spikes);

    uint64_t spikes_total = 0, conv1_oracle = 0;
    for (size_t t = 0; t < T; ++t) {
        Tensor frame({1, 32, 32});
        std::copy(spikes.ptr() + t * F, spikes.ptr() + (t + 1) * F, frame.ptr());
        conv1_oracle += conv_ops_oracle(frame, 1, 32, 32);
        for (float v : frame.data) spikes_total += uint64_t(v != 0.0f);
    }
    CHECK(r.total_input_spikes == spikes_total);
    REQUIRE(r.synaptic_ops.size() == 2);
    CHECK(r.synaptic_ops[0].first == "conv1");
    CHECK(r.synaptic_ops[0].second == conv1_oracle);
    // border spikes were planted, so the count sits strictly below the
    // interior-fan-out bound while still respecting it
    CHECK(r.synaptic_ops[0].second < spikes_total * 32 * 9);
    CHECK(r.synaptic_ops[1].first == "fc2");
    CHECK(r.synaptic_ops[1].second % 4 == 0);

    REQUIRE(r.dense_macs.size() == 2);
    CHECK(r.dense_macs[0].first == "conv2");
    CHECK(r.dense_macs[0].second == uint64_t(64) * 32 * 9 * 16 * 16 * T);
    CHECK(r.dense_macs[1].first == "fc1");
    CHECK(r.dense_macs[1].second == uint64_t(64) * 4096 * T);
    // at T=3 the per-step conv buffer outweighs the pooled sequence
    CHECK(r.peak_activation_elements ==
          std::max<uint64_t>(uint64_t(32) * 32 * 32, T * 32 * 16 * 16));

    // same model, same train, same counters
    const CostReport again = spikebench::count_costs(m, spikes);
    CHECK(again.total_input_spikes == r.total_input_spikes);
    CHECK(again.synaptic_ops == r.synaptic_ops);
    CHECK(again.dense_macs == r.dense_macs);
}

TEST_CASE("fc ops equal spikes times fan-out on random trains") {
    SnnModel m = make_fc_model(40, 5, 30, 3);
    RngStream rng(4, 4);
    for (int rep = 0; rep < 10; ++rep) {
        Tensor spikes({7, 40});
        uint64_t n = 0;
        for (auto& v : spikes.data) {
            v = rng.next_double() < 0.3 ? 1.0f : 0.0f;
            n += uint64_t(v != 0.0f);
        }
        const CostReport r = spikebench::count_costs(m, spikes);
        CHECK(r.total_input_spikes == n);
        CHECK(r.synaptic_ops[0].second == n * 30);
        CHECK(r.synaptic_ops[1].second <= uint64_t(7) * 30 * 5);
    }
}

TEST_CASE("reports merge by summing counters and taking the peak") {
    SnnModel m = make_fc_model(6, 2, 10, 1);
    Tensor a({4, 6}), b({9, 6});
    a.data[0] = 1.0f;
    b.data[1] = 1.0f;
    b.data[7] = 1.0f;

    CostReport total;
    total.wall_clock_seconds = 1.5;
    const CostReport ra = spikebench::count_costs(m, a);
    const CostReport rb = spikebench::count_costs(m, b);
    spikebench::add_costs(total, ra);
    spikebench::add_costs(total, rb);

    CHECK(total.samples == 2);
    CHECK(total.total_input_spikes == 3);
    CHECK(total.synaptic_ops[0].second ==
          ra.synaptic_ops[0].second + rb.synaptic_ops[0].second);
    CHECK(total.peak_activation_elements ==
          std::max(ra.peak_activation_elements, rb.peak_activation_elements));
    CHECK(total.wall_clock_seconds == 1.5);

    // a convnet report describes different layers and must not merge in
    RngStream winit(2, spikebench::kStreamWeightInit);
    SnnModel conv = SnnModel::make_conv(1, 2, LifParams{}, 8, winit);
    const CostReport rc = spikebench::count_costs(conv, Tensor({2, 1024}));
    CHECK_THROWS_AS(spikebench::add_costs(total, rc), spikebench::ConfigError);
}

TEST_CASE("shape mismatches are rejected") {
    SnnModel m = make_fc_model(6, 2, 10, 1);
    CHECK_THROWS_AS(spikebench::count_costs(m, Tensor({4, 7})), spikebench::ShapeError);
    CHECK_THROWS_AS(spikebench::count_costs(m, Tensor({24})), spikebench::ShapeError);
}

TEST_CASE("poisson-burst spends about 30% of rate's input spikes on mnist") {
    const DatasetSplit ds = spikebench::load_dataset("mnist", SPIKEBENCH_DATA_DIR);
    SnnModel m = make_fc_model(ds.features(), ds.classes, 16, 5);

    const EncoderSpec rate = spikebench::default_encoder_spec(EncoderKind::kRate, 100);
    const EncoderSpec burst = spikebench::default_encoder_spec(EncoderKind::kPoissonBurst, 100);
    const RngStream base(42, spikebench::kStreamEncoder);

    CostReport rate_total, burst_total;
    for (size_t row = 0; row < 64; ++row) {
        add_costs(rate_total, spikebench::count_costs(m, encode_row(ds, row, rate, base).bits));
        add_costs(burst_total, spikebench::count_costs(m, encode_row(ds, row, burst, base).bits));
    }
    REQUIRE(rate_total.total_input_spikes > 0);
    const double ratio =
        double(burst_total.total_input_spikes) / double(rate_total.total_input_spikes);
    // tau=10 intervals of expected size lambda=3 against T=100 bernoulli
    // draws: 30x vs 100x expected spikes per unit intensity
    CHECK(ratio > 0.28);
    CHECK(ratio < 0.32);
}
