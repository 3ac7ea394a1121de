#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "spikebench/tensor.hpp"

namespace spikebench {

// FNV-1a, enough to detect accidental mutation of a frozen tensor or to
// derive a stable run id from a config string.
inline uint64_t fnv1a(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xCBF29CE484222325ULL;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

template <typename S>
uint64_t fnv1a(const TensorT<S>& t) {
    return fnv1a(t.ptr(), t.numel() * sizeof(S));
}

}  // namespace spikebench
