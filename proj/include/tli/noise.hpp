#ifndef TLI_NOISE_HPP
#define TLI_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <utility>

#include "tli/lattice.hpp"

namespace tli {

namespace detail {

// Philox4x32-10, Salmon et al. 2011.  Counter = (step ; site code), key
// derived from seed and stream id.
inline void philox10(std::uint64_t key64, std::uint64_t c01, std::uint64_t c23, std::uint32_t out[4]) {
    constexpr std::uint32_t kW32A = 0x9E3779B9u, kW32B = 0xBB67AE85u;
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    std::uint32_t c0 = static_cast<std::uint32_t>(c01), c1 = static_cast<std::uint32_t>(c01 >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(c23), c3 = static_cast<std::uint32_t>(c23 >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key64), k1 = static_cast<std::uint32_t>(key64 >> 32);
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2;
        const std::uint32_t nc0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
        const std::uint32_t nc1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t nc2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
        const std::uint32_t nc3 = static_cast<std::uint32_t>(p0);
        c0 = nc0;
        c1 = nc1;
        c2 = nc2;
        c3 = nc3;
        k0 += kW32A;
        k1 += kW32B;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
}

inline double u53_to_unit(std::uint64_t bits) {
    // (k + 1/2) * 2^-53, strictly inside (0,1)
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal quantile, Acklam's rational approximation (|rel| ~ 1e-9).
inline double inverse_normal_cdf_unchecked(double p) {
    constexpr double a0 = -3.969683028665376e+01, a1 = 2.209460984245205e+02,
                     a2 = -2.759285104469687e+02, a3 = 1.383577518672690e+02,
                     a4 = -3.066479806614716e+01, a5 = 2.506628277459239e+00;
    constexpr double b0 = -5.447609879822406e+01, b1 = 1.615858368580409e+02,
                     b2 = -1.556989798598866e+02, b3 = 6.680131188771972e+01,
                     b4 = -1.328068155288572e+01;
    constexpr double c0 = -7.784894002430293e-03, c1 = -3.223964580411365e-01,
                     c2 = -2.400758277161838e+00, c3 = -2.549732539343734e+00,
                     c4 = 4.374664141464968e+00, c5 = 2.938163982698783e+00;
    constexpr double d0 = 7.784695709041462e-03, d1 = 3.224671290700398e-01,
                     d2 = 2.445134137142996e+00, d3 = 3.754408661907416e+00;
    constexpr double plow = 0.02425;

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) /
               ((((d0 * q + d1) * q + d2) * q + d3) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5) /
               ((((d0 * q + d1) * q + d2) * q + d3) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * q /
           (((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint32_t stream) {
    return seed ^ (static_cast<std::uint64_t>(stream) * 0xA24BAED4963EE407ull);
}

inline std::pair<double, double> gaussian_pair_impl(std::uint64_t seed, std::uint64_t site,
                                                    std::uint64_t step, std::uint32_t stream) {
    std::uint32_t r[4];
    philox10(stream_key(seed, stream), step, site, r);
    const std::uint64_t hi = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t lo = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    return {inverse_normal_cdf_unchecked(u53_to_unit(hi)), inverse_normal_cdf_unchecked(u53_to_unit(lo))};
}

}  // namespace detail

// Counter-based Gaussian source.  A draw is addressed by (site, step,
// stream); the 64-bit site code comes from the absolute Z^d coordinates, so
// the same physical site receives the same increments in every scheme and
// box size.  This is what makes the common-noise couplings exact.
//
// Streams: 0 = driving noise, 1 = initial conditions, 2+ = samplers.
class NoiseStream {
  public:
    explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent standard Gaussians for layers 1 and 2 at (site, step).
    std::pair<double, double> gaussian_pair(std::uint64_t site_code, std::uint64_t step,
                                            std::uint32_t stream = 0) const {
        return detail::gaussian_pair_impl(seed_, site_code, step, stream);
    }

    double gaussian(int layer, std::uint64_t site_code, std::uint64_t step,
                    std::uint32_t stream = 0) const {
        const auto [g1, g2] = gaussian_pair(site_code, step, stream);
        return layer == 1 ? g1 : g2;
    }

    // The driving pair rotated clockwise by 45 degrees.
    std::pair<double, double> rotated_pair(std::uint64_t site_code, std::uint64_t step) const {
        const auto [g1, g2] = gaussian_pair(site_code, step, 0);
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        return {(g1 + g2) * inv_sqrt2, (-g1 + g2) * inv_sqrt2};
    }

    std::pair<double, double> uniform_pair(std::uint64_t site_code, std::uint64_t step,
                                           std::uint32_t stream) const {
        std::uint32_t r[4];
        detail::philox10(detail::stream_key(seed_, stream), step, site_code, r);
        const std::uint64_t hi = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
        const std::uint64_t lo = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
        return {detail::u53_to_unit(hi), detail::u53_to_unit(lo)};
    }

    // An unrelated stream (replica seeds, independent comparison runs).
    NoiseStream derived(std::uint64_t salt) const;

  private:
    std::uint64_t seed_;
};

// 64-bit site code from absolute coordinates.  For d <= 3 the packing is
// bijective (21 bits per coordinate, |x_k| < 2^20); higher dimensions use a
// mixing chain.
std::uint64_t site_code(const Coord& x);

// Codes for every site of a box, indexed by flat site index.
std::vector<std::uint64_t> site_codes(const LatticeBox& box);

// Range-checked quantile function, exposed for tests.
double inverse_normal_cdf(double p);

}  // namespace tli

#endif
