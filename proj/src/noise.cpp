#include "tli/noise.hpp"

#include <stdexcept>

namespace tli {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    return detail::inverse_normal_cdf_unchecked(p);
}

NoiseStream NoiseStream::derived(std::uint64_t salt) const {
    return NoiseStream(splitmix64(seed_ ^ splitmix64(salt + 0x51ED2701ull)));
}

std::uint64_t site_code(const Coord& x) {
    const std::size_t d = x.size();
    if (d <= 3) {
        std::uint64_t code = 1;  // tag bit so (x) and (x,0) differ
        for (std::size_t k = 0; k < d; ++k) {
            const int v = x[k];
            if (v < -((1 << 20) - 1) || v > ((1 << 20) - 1))
                throw std::invalid_argument("site_code: coordinate out of packing range");
            code = (code << 21) | static_cast<std::uint64_t>(v + (1 << 20));
        }
        return code;
    }
    std::uint64_t h = 0x8000000000000000ull | d;
    for (int v : x) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
    return h;
}

std::vector<std::uint64_t> site_codes(const LatticeBox& box) {
    std::vector<std::uint64_t> codes(static_cast<std::size_t>(box.volume()));
    for (std::int64_t i = 0; i < box.volume(); ++i)
        codes[static_cast<std::size_t>(i)] = site_code(box.coord_of(i));
    return codes;
}

}  // namespace tli
