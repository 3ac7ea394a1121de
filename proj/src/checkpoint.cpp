#include "spikebench/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "spikebench/errors.hpp"
#include "spikebench/jsonio.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as native little-endian floats");

namespace spikebench {

void save_checkpoint(const std::string& path, SnnModel& model, const EncoderSpec& spec,
                     uint64_t seed) {
    OrderedJson h;
    h["format_version"] = 1;
    h["arch"] = arch_name(model.arch);
    h["classes"] = model.classes;
    h["in_channels"] = model.in_channels;
    h["in_features"] = model.in_features;
    h["hidden"] = model.hidden;
    h["lif"] = lif_params_to_json(model.lif);
    h["encoder"] = encoder_spec_to_json(spec);
    h["seed"] = seed;
    OrderedJson manifest = OrderedJson::array();
    const auto refs = model.params();
    for (const auto& p : refs) manifest.push_back({{"name", p.name}, {"shape", p.value->shape}});
    h["tensors"] = manifest;

    const std::string header = h.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const uint32_t len = uint32_t(header.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(header.data(), std::streamsize(header.size()));
    for (const auto& p : refs)
        out.write(reinterpret_cast<const char*>(p.value->ptr()),
                  std::streamsize(p.value->numel() * sizeof(float)));
    if (!out) throw FormatError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof(kCheckpointMagic) + 4)
        throw FormatError(path + ": truncated at byte " + std::to_string(bytes.size()));
    if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw FormatError(path + ": bad magic at byte 0");
    uint32_t len = 0;
    std::memcpy(&len, bytes.data() + sizeof(kCheckpointMagic), 4);
    size_t offset = sizeof(kCheckpointMagic) + 4;
    if (bytes.size() < offset + len)
        throw FormatError(path + ": truncated header at byte " + std::to_string(bytes.size()));

    OrderedJson h;
    try {
        h = OrderedJson::parse(bytes.data() + offset, bytes.data() + offset + len);
    } catch (const std::exception& e) {
        throw FormatError(path + ": header is not valid JSON: " + e.what());
    }
    offset += len;

    Checkpoint ck;
    try {
        if (h.value("format_version", 0) != 1)
            throw ConfigError("unsupported checkpoint format_version");
        ck.spec = encoder_spec_from_json(h.at("encoder"));
        ck.seed = h.value("seed", uint64_t(0));
        const LifParams lif = lif_params_from_json(h.at("lif"));
        const ArchKind arch = arch_from_name(h.at("arch").get<std::string>());
        const size_t classes = h.at("classes").get<size_t>();
        const size_t hidden = h.at("hidden").get<size_t>();
        RngStream dummy(0, 0);  // weights come from the blobs below
        if (arch == ArchKind::kConvNet)
            ck.model = SnnModel::make_conv(h.at("in_channels").get<size_t>(), classes, lif,
                                           hidden, dummy);
        else
            ck.model = SnnModel::make_fc(h.at("in_features").get<size_t>(), classes, lif, hidden,
                                         dummy);
    } catch (const OrderedJson::exception& e) {
        throw FormatError(path + ": header field error: " + e.what());
    }

    const auto refs = ck.model.params();
    const OrderedJson& manifest = h.at("tensors");
    if (!manifest.is_array() || manifest.size() != refs.size())
        throw FormatError(path + ": tensor manifest does not match the architecture");
    for (size_t i = 0; i < refs.size(); ++i) {
        const auto& entry = manifest[i];
        if (entry.value("name", std::string()) != refs[i].name)
            throw FormatError(path + ": tensor " + std::to_string(i) + " is '" +
                              entry.value("name", std::string()) + "', expected '" + refs[i].name +
                              "'");
        if (entry.at("shape").get<std::vector<size_t>>() != refs[i].value->shape)
            throw FormatError(path + ": tensor '" + refs[i].name + "' shape mismatch");
        const size_t n_bytes = refs[i].value->numel() * sizeof(float);
        if (bytes.size() < offset + n_bytes)
            throw FormatError(path + ": truncated tensor '" + refs[i].name + "' at byte " +
                              std::to_string(bytes.size()));
        std::memcpy(refs[i].value->ptr(), bytes.data() + offset, n_bytes);
        offset += n_bytes;
    }
    if (offset != bytes.size())
        throw FormatError(path + ": " + std::to_string(bytes.size() - offset) +
                          " trailing bytes after the last tensor");
    ck.model.refresh_caches();
    return ck;
}

}  // namespace spikebench
