#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "joininfer/types.hpp"

namespace joininfer {

// 64-bit finalizer from MurmurHash3.
constexpr uint64_t mix64(uint64_t h) noexcept {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

uint64_t hash_bytes(std::string_view bytes, uint64_t seed = 0) noexcept;
uint64_t hash_value(const Value& value, uint64_t seed = 0) noexcept;

/// Hex digest of a file's bytes; used to key the stats cache.
std::string file_content_hash(const std::filesystem::path& path);

/// Derives an independent stream seed from a base seed and a label.
uint64_t derive_seed(uint64_t base, std::string_view label) noexcept;

}  // namespace joininfer
