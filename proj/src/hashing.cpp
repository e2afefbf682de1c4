#include "joininfer/hashing.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace joininfer {

uint64_t hash_bytes(std::string_view bytes, uint64_t seed) noexcept {
    // FNV-1a over the bytes, then a full-avalanche finalizer so the low and
    // high bits are both usable by the cardinality sketch.
    uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed + 0x9e3779b97f4a7c15ULL);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h ^ bytes.size());
}

uint64_t hash_value(const Value& value, uint64_t seed) noexcept {
    if (const auto* text = std::get_if<std::string>(&value)) {
        return hash_bytes(*text, seed);
    }
    double d = std::get<double>(value);
    if (d == 0.0) d = 0.0;  // fold -0.0
    uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof bits);
    return mix64(bits ^ mix64(seed ^ 0x5bd1e995ULL));
}

std::string file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path.string());
    uint64_t h1 = 0xcbf29ce484222325ULL;
    uint64_t h2 = 0x84222325cbf29ce4ULL;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            auto c = static_cast<unsigned char>(buf[static_cast<size_t>(i)]);
            h1 = (h1 ^ c) * 0x100000001b3ULL;
            h2 = (h2 ^ c) * 0x100000001b3ULL + 0x9e37ULL;
        }
    }
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << mix64(h1) << std::setw(16) << mix64(h2);
    return out.str();
}

uint64_t derive_seed(uint64_t base, std::string_view label) noexcept {
    return mix64(base ^ hash_bytes(label, 0x7f4a7c15ULL));
}

}  // namespace joininfer
