#ifndef TLI_UTIL_HPP
#define TLI_UTIL_HPP

#include <cstddef>
#include <cstdint>
#include <string>

namespace tli {

inline std::uint64_t fnv1a_init() { return 14695981039346656037ull; }

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = fnv1a_init()) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = fnv1a_init()) {
    return fnv1a(s.data(), s.size(), h);
}

std::string hex_u64(std::uint64_t v);

// Locale-independent shortest-roundtrip formatting of a double, used by all
// CSV and JSON writers so outputs are byte-stable.
std::string format_double(double v);

}  // namespace tli

#endif
