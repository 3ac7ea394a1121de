#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradcheck_util.hpp"
#include "spikebench/model.hpp"
#include "spikebench/rng.hpp"

using namespace spikebench;

namespace {

Tensor bernoulli_train(size_t steps, size_t features, double p, RngStream& rng) {
    Tensor t({steps, features});
    for (auto& v : t.data) v = rng.sample_bernoulli(p) ? 1.0f : 0.0f;
    return t;
}

}  // namespace

TEST_CASE("identical seeds build identical models") {
    LifParams lif;
    RngStream r1(11, 2), r2(11, 2);
    auto a = SnnModel::make_fc(8, 3, lif, 16, r1);
    auto b = SnnModel::make_fc(8, 3, lif, 16, r2);
    CHECK(a.fc1.w.data == b.fc1.w.data);
    CHECK(a.fc2.b.data == b.fc2.b.data);
}

TEST_CASE("weight init respects the fan-in bound") {
    LifParams lif;
    RngStream rng(13, 2);
    auto m = SnnModel::make_conv(1, 10, lif, 1000, rng);
    const float bound_conv1 = 1.0f / std::sqrt(9.0f);
    for (float v : m.conv1.w.data) CHECK(std::abs(v) <= bound_conv1);
    const float bound_fc1 = 1.0f / std::sqrt(4096.0f);
    for (float v : m.fc1.w.data) CHECK(std::abs(v) <= bound_fc1);
}

TEST_CASE("fcnet with zero biases maps zero input to zero output") {
    LifParams lif;
    RngStream rng(17, 2);
    auto m = SnnModel::make_fc(6, 4, lif, 10, rng);
    m.fc1.b.fill(0.0f);
    m.fc2.b.fill(0.0f);

    for (size_t steps : {5, 10}) {  // doubling T keeps everything zero
        Tensor spikes({steps, 6});
        SampleTrace tr;
        m.forward_sample(spikes, tr);
        for (float v : tr.lif2.u.data) CHECK(v == 0.0f);
        for (float v : tr.lif2.s.data) CHECK(v == 0.0f);
        for (float v : tr.lif1.s.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("convnet trace walks the documented shape chain down to 4096") {
    LifParams lif;
    RngStream rng(19, 2);
    auto m = SnnModel::make_conv(1, 10, lif, 1000, rng);
    RngStream data(19, 1);
    Tensor spikes = bernoulli_train(3, 1024, 0.3, data);
    SampleTrace tr;
    m.forward_sample(spikes, tr);
    CHECK(tr.pool1.shape == std::vector<size_t>{3, 32 * 16 * 16});
    CHECK(tr.pool2.shape == std::vector<size_t>{3, 64 * 8 * 8});
    CHECK(m.conv_flat() == 4096);
    CHECK(tr.lif1.u.shape == std::vector<size_t>{3, 1000});
    CHECK(tr.lif2.u.shape == std::vector<size_t>{3, 10});
}

TEST_CASE("forward rejects inputs of the wrong width") {
    LifParams lif;
    RngStream rng(23, 2);
    auto m = SnnModel::make_fc(6, 4, lif, 10, rng);
    Tensor spikes({5, 7});
    SampleTrace tr;
    CHECK_THROWS_AS(m.forward_sample(spikes, tr), ShapeError);
}

TEST_CASE("uniform output membranes give loss ln K") {
    LifParams lif;
    RngStream rng(29, 2);
    auto m = SnnModel::make_fc(6, 5, lif, 10, rng);
    SampleTrace tr;
    tr.lif2.u = Tensor({4, 5});
    tr.lif2.u.fill(0.7f);  // equal logits at every step
    Tensor scratch;
    const float loss = m.loss_from_trace(tr, 2, scratch);
    CHECK(loss == doctest::Approx(std::log(5.0f)));
}

TEST_CASE("prediction takes the argmax of summed membranes, low index on ties") {
    LifParams lif;
    RngStream rng(31, 2);
    auto m = SnnModel::make_fc(6, 2, lif, 10, rng);
    SampleTrace tr;
    tr.lif2.u = Tensor({2, 2}, {10.0f, 2.0f, 0.0f, 0.0f});
    CHECK(m.predict_from_trace(tr) == 0);
    tr.lif2.u = Tensor({2, 2}, {1.0f, 2.0f, 2.0f, 1.0f});  // tie 3 vs 3
    CHECK(m.predict_from_trace(tr) == 0);
    tr.lif2.u = Tensor({2, 2}, {1.0f, 2.0f, 2.0f, 1.5f});
    CHECK(m.predict_from_trace(tr) == 1);
}

TEST_CASE("prediction is invariant to a constant shift of the membranes") {
    LifParams lif;
    RngStream rng(37, 2);
    auto m = SnnModel::make_fc(6, 3, lif, 10, rng);
    RngStream vals(37, 5);
    SampleTrace tr;
    tr.lif2.u = Tensor({7, 3});
    for (auto& v : tr.lif2.u.data) v = vals.uniform(-2.0f, 2.0f);
    const size_t before = m.predict_from_trace(tr);
    for (auto& v : tr.lif2.u.data) v += 13.25f;
    CHECK(m.predict_from_trace(tr) == before);
}

TEST_CASE("single-class models always predict class 0") {
    LifParams lif;
    RngStream rng(41, 2);
    auto m = SnnModel::make_fc(4, 1, lif, 8, rng);
    RngStream data(41, 1);
    Tensor spikes = bernoulli_train(6, 4, 0.5, data);
    SampleTrace tr;
    CHECK(m.predict(spikes, tr) == 0);
}

TEST_CASE("attack features equal the final pre-reset output membranes") {
    LifParams lif;
    RngStream rng(43, 2);
    auto m = SnnModel::make_fc(5, 3, lif, 12, rng);
    RngStream data(43, 1);
    Tensor spikes = bernoulli_train(9, 5, 0.4, data);
    SampleTrace tr;
    auto features = m.extract_attack_features(spikes, tr);
    REQUIRE(features.size() == 3);
    for (size_t c = 0; c < 3; ++c) CHECK(features[c] == tr.lif2.u.at(8, c));

    // identical call, identical features
    SampleTrace tr2;
    auto again = m.extract_attack_features(spikes, tr2);
    CHECK(features == again);

    // all-zero input with zero biases gives a zero feature vector
    m.fc1.b.fill(0.0f);
    m.fc2.b.fill(0.0f);
    Tensor silent({9, 5});
    auto zero_features = m.extract_attack_features(silent, tr);
    for (float v : zero_features) CHECK(v == 0.0f);
}

TEST_CASE("zero-weight model spreads balanced label gradients evenly") {
    LifParams lif;
    auto zero_model = [&] {
        RngStream rng(47, 2);
        auto m = SnnModel::make_fc(4, 2, lif, 6, rng);
        for (auto& p : m.params()) p.value->fill(0.0f);
        m.refresh_caches();
        m.zero_grads();
        return m;
    };
    RngStream data(47, 1);
    Tensor spikes = bernoulli_train(8, 4, 0.5, data);
    SampleTrace tr;
    Tensor scratch;

    auto m0 = zero_model();
    m0.train_sample(spikes, 0, tr, scratch);
    auto m1 = zero_model();
    m1.train_sample(spikes, 1, tr, scratch);

    // per-label output-bias gradients are mirror images of each other
    CHECK(m0.fc2.gb.data[0] == doctest::Approx(m1.fc2.gb.data[1]));
    CHECK(m0.fc2.gb.data[1] == doctest::Approx(m1.fc2.gb.data[0]));

    // and a balanced pair pushes both output biases identically
    auto mb = zero_model();
    mb.train_sample(spikes, 0, tr, scratch);
    mb.train_sample(spikes, 1, tr, scratch);
    CHECK(mb.fc2.gb.data[0] == doctest::Approx(mb.fc2.gb.data[1]));
}

TEST_CASE("frozen conv layers receive no gradient and skip the prefix backward") {
    LifParams lif;
    RngStream rng(53, 2);
    auto m = SnnModel::make_conv(1, 4, lif, 32, rng);
    m.freeze_conv(true);
    m.zero_grads();
    RngStream data(53, 1);
    Tensor spikes = bernoulli_train(4, 1024, 0.2, data);
    SampleTrace tr;
    Tensor scratch;
    m.train_sample(spikes, 1, tr, scratch);
    for (float v : m.conv1.gw.data) CHECK(v == 0.0f);
    for (float v : m.conv2.gw.data) CHECK(v == 0.0f);
    // the head still learns
    float head = 0;
    for (float v : m.fc2.gw.data) head += std::abs(v);
    CHECK(head > 0.0f);
}

TEST_CASE("bptt gradients match finite differences on a small smooth fcnet") {
    const double worst = testutil::gradcheck_fcnet(4, 3, 12, 10, 1e-3, 71);
    CHECK(worst <= 1e-4);
}

TEST_CASE("bptt gradients also check out on the conv path") {
    // tiny conv gradcheck in double: probe a sample of parameters per layer
    spikebench::LifParamsT<double> lif;
    lif.smooth = true;
    lif.detach_reset = false;
    RngStream winit(59, 2);
    auto m = SnnModelT<double>::make_conv(1, 3, lif, 8, winit);

    RngStream data(59, 1);
    TensorT<double> spikes({2, 1024});
    for (auto& v : spikes.data) v = data.sample_bernoulli(0.25) ? 1.0 : 0.0;
    const size_t label = 1;

    SampleTraceT<double> tr;
    TensorT<double> scratch;
    m.zero_grads();
    m.train_sample(spikes, label, tr, scratch);

    auto loss_at = [&]() {
        SampleTraceT<double> t2;
        TensorT<double> s2;
        m.forward_sample(spikes, t2);
        return m.loss_from_trace(t2, label, s2);
    };

    const double h = 1e-4;
    for (auto& p : m.params()) {
        // probe a handful of indices in each tensor
        for (size_t i = 0; i < p.value->numel(); i += std::max<size_t>(1, p.value->numel() / 5)) {
            const double orig = p.value->data[i];
            p.value->data[i] = orig + h;
            m.refresh_caches();
            const double lp = loss_at();
            p.value->data[i] = orig - h;
            m.refresh_caches();
            const double lm = loss_at();
            p.value->data[i] = orig;
            m.refresh_caches();
            const double fd = (lp - lm) / (2 * h);
            const double an = p.grad->data[i];
            CHECK(std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-7) <= 1e-4);
        }
    }
}
