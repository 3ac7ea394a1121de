#include "spikebench/train.hpp"

#include <algorithm>
#include <cstdio>

#include "spikebench/adam.hpp"
#include "spikebench/digest.hpp"
#include "spikebench/errors.hpp"

namespace spikebench {

SpikeTrain encode_row(const DatasetSplit& ds, size_t row, const EncoderSpec& spec,
                      const RngStream& encoder_base) {
    if (row >= ds.size()) throw ConfigError("encode_row: row out of range");
    const size_t f = ds.features();
    RngStream rng = encoder_base.derive(uint64_t(row));
    return encode_sample(ds.X.ptr() + row * f, int64_t(f), spec, rng);
}

SnnModel make_model_for(const DatasetSplit& ds, ArchKind arch, const LifParams& lif,
                        size_t hidden, uint64_t seed) {
    RngStream winit(seed, kStreamWeightInit);
    if (arch == ArchKind::kConvNet) {
        if (ds.channels == 0)
            throw ConfigError("convnet needs image input, dataset '" + ds.name + "' is tabular");
        return SnnModel::make_conv(ds.channels, ds.classes, lif, hidden, winit);
    }
    return SnnModel::make_fc(ds.features(), ds.classes, lif, hidden, winit);
}

TrainResult train_model(SnnModel& model, const DatasetSplit& ds, const std::vector<size_t>& rows,
                        const EncoderSpec& spec, const TrainConfig& cfg) {
    if (rows.empty()) throw ConfigError("train_model: no training rows");
    if (cfg.batch_size == 0) throw ConfigError("train_model: batch_size must be positive");
    if (cfg.epochs == 0) throw ConfigError("train_model: epochs must be positive");
    if (!(cfg.lr > 0.0f)) throw ConfigError("train_model: lr must be positive");
    spec.validate();
    for (size_t row : rows)
        if (row >= ds.size()) throw ConfigError("train_model: row out of range");

    const RngStream encoder_base(cfg.seed, kStreamEncoder);
    const RngStream shuffle_base(cfg.seed, kStreamBatchShuffle);

    std::vector<ParamRef<float>> refs = model.params();
    std::vector<Adam> opts;
    opts.reserve(refs.size());
    for (const auto& p : refs) opts.emplace_back(p.value->shape, cfg.lr);

    // frozen tensors must come out of every epoch byte-identical
    std::vector<uint64_t> frozen_digest(refs.size(), 0);
    for (size_t p = 0; p < refs.size(); ++p)
        if (refs[p].frozen) frozen_digest[p] = fnv1a(*refs[p].value);

    SampleTrace tr;
    Tensor d_direct;
    std::vector<size_t> order(rows);
    TrainResult result;
    result.epoch_loss.reserve(cfg.epochs);

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream shuffle = shuffle_base.derive(epoch);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[size_t(shuffle.next_below(i))]);

        // fresh spike draws every epoch, so the model learns the encoding
        // distribution instead of one frozen realization per row; tag 0
        // (the underived base) stays reserved for evaluation
        const RngStream epoch_base = encoder_base.derive(epoch + 1);

        double epoch_loss = 0.0;
        size_t done = 0;
        while (done < order.size()) {
            const size_t bsz = std::min(cfg.batch_size, order.size() - done);
            model.zero_grads();
            for (size_t k = 0; k < bsz; ++k) {
                const size_t row = order[done + k];
                const SpikeTrain st = encode_row(ds, row, spec, epoch_base);
                epoch_loss += model.train_sample(st.bits, size_t(ds.y[row]), tr, d_direct);
            }
            model.scale_grads(1.0f / float(bsz));
            for (size_t p = 0; p < refs.size(); ++p)
                if (!refs[p].frozen) opts[p].step(*refs[p].value, *refs[p].grad);
            model.refresh_caches();
            done += bsz;
        }
        for (size_t p = 0; p < refs.size(); ++p)
            if (refs[p].frozen && fnv1a(*refs[p].value) != frozen_digest[p])
                throw NumericalError("frozen parameter '" + refs[p].name +
                                     "' changed during training");
        result.epoch_loss.push_back(float(epoch_loss / double(order.size())));
        if (cfg.verbose)
            std::fprintf(stderr, "epoch %zu/%zu loss %.4f\n", epoch + 1, cfg.epochs,
                         double(result.epoch_loss.back()));
    }
    return result;
}

float evaluate_accuracy(const SnnModel& model, const DatasetSplit& ds,
                        const std::vector<size_t>& rows, const EncoderSpec& spec, uint64_t seed) {
    if (rows.empty()) throw ConfigError("evaluate_accuracy: no rows");
    const RngStream encoder_base(seed, kStreamEncoder);
    SampleTrace tr;
    size_t correct = 0;
    for (size_t row : rows) {
        const SpikeTrain st = encode_row(ds, row, spec, encoder_base);
        if (model.predict(st.bits, tr) == size_t(ds.y[row])) ++correct;
    }
    return float(correct) / float(rows.size());
}

Tensor collect_attack_features(const SnnModel& model, const DatasetSplit& ds,
                               const std::vector<size_t>& rows, const EncoderSpec& spec,
                               uint64_t seed) {
    if (rows.empty()) throw ConfigError("collect_attack_features: no rows");
    const RngStream encoder_base(seed, kStreamEncoder);
    SampleTrace tr;
    Tensor out({rows.size(), model.classes});
    for (size_t i = 0; i < rows.size(); ++i) {
        const SpikeTrain st = encode_row(ds, rows[i], spec, encoder_base);
        const std::vector<float> feats = model.extract_attack_features(st.bits, tr);
        std::copy(feats.begin(), feats.end(), out.ptr() + i * model.classes);
    }
    return out;
}

}  // namespace spikebench
