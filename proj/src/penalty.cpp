#include "tli/penalty.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tli {

void PenaltyParams::validate() const {
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw std::invalid_argument("PenaltyParams: eps must be positive");
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("PenaltyParams: delta must be in (0,1]");
}

double chi(double alpha, double u) {
    if (!(alpha > 0.0)) throw std::invalid_argument("chi: alpha must be positive");
    if (u >= 0.0) return 0.0;
    return u * u / (2.0 * alpha);
}

double chi_prime(double alpha, double u) {
    if (!(alpha > 0.0)) throw std::invalid_argument("chi_prime: alpha must be positive");
    return u < 0.0 ? u / alpha : 0.0;
}

namespace detail {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(std::size_t n) {
    static std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    // Newton iteration on P_n, symmetric nodes.
    std::vector<double> x(n), w(n);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) + 1.0) * z * p1 - static_cast<double>(j) * p2) / (static_cast<double>(j) + 1.0);
            }
            pp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

}  // namespace detail

namespace {

constexpr std::size_t kQuadOrder = 64;

struct BumpConstants {
    double norm;           // 1 / integral of exp(-1/(1-u^2))
    double second_moment;  // int u^2 rho(u) du
};

const BumpConstants& bump_constants() {
    static const BumpConstants bc = [] {
        const auto& [x, w] = detail::gauss_legendre(192);
        double mass = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = 1.0 - x[i] * x[i];
            if (t <= 0.0) continue;
            const double v = std::exp(-1.0 / t);
            mass += w[i] * v;
            m2 += w[i] * v * x[i] * x[i];
        }
        return BumpConstants{1.0 / mass, m2 / mass};
    }();
    return bc;
}

// integral over y in [max(-delta, u+delta), delta] of rho_delta(y) * f(u+delta-y)
template <typename F>
double convolve_negative_part(double delta, double u, F f) {
    const double ylo = std::max(-delta, u + delta);
    if (ylo >= delta) return 0.0;
    const auto& [x, w] = detail::gauss_legendre(kQuadOrder);
    const double mid = 0.5 * (ylo + delta), half = 0.5 * (delta - ylo);
    const double c = bump_constants().norm / delta;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = mid + half * x[i];
        const double s = y / delta;
        const double t = 1.0 - s * s;
        if (t <= 0.0) continue;
        acc += w[i] * c * std::exp(-1.0 / t) * f(u + delta - y);
    }
    return acc * half;
}

void check_smoothing_params(double alpha, double delta) {
    if (!(alpha > 0.0)) throw std::invalid_argument("chi_smoothed: alpha must be positive");
    if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("chi_smoothed: delta must be in (0,1]");
}

}  // namespace

double mollifier_rho(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return bump_constants().norm * std::exp(-1.0 / (1.0 - u * u));
}

double mollifier_second_moment() { return bump_constants().second_moment; }

double chi_smoothed(double alpha, double delta, double u) {
    check_smoothing_params(alpha, delta);
    if (u >= 0.0) return 0.0;
    if (u <= -2.0 * delta) {
        // argument stays negative across the mollifier support: quadratic case
        const double s = u + delta;
        return (s * s + mollifier_second_moment() * delta * delta) / (2.0 * alpha);
    }
    return convolve_negative_part(delta, u, [alpha](double v) { return v < 0.0 ? v * v / (2.0 * alpha) : 0.0; });
}

double chi_smoothed_prime(double alpha, double delta, double u) {
    check_smoothing_params(alpha, delta);
    if (u >= 0.0) return 0.0;
    if (u <= -2.0 * delta) return (u + delta) / alpha;
    return convolve_negative_part(delta, u, [alpha](double v) { return v < 0.0 ? v / alpha : 0.0; });
}

double MollifiedPenalty::Segment::eval(double u) const {
    const std::size_t n = y.size();
    double s = (u - lo) * inv_h;
    std::size_t j = static_cast<std::size_t>(s);
    if (j >= n - 1) j = n - 2;
    const double t = s - static_cast<double>(j);
    const double h = 1.0 / inv_h;
    const double y0 = y[j], y1 = y[j + 1], m0 = slope[j] * h, m1 = slope[j + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

namespace {

// Fritsch-Carlson slopes: the interpolant is monotone when the data are.
std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> sec(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (y[i + 1] - y[i]) / h;
    d[0] = sec[0];
    d[n - 1] = sec[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (sec[i - 1] * sec[i] <= 0.0)
            d[i] = 0.0;
        else
            d[i] = 2.0 * sec[i - 1] * sec[i] / (sec[i - 1] + sec[i]);  // harmonic mean
    }
    return d;
}

}  // namespace

MollifiedPenalty::MollifiedPenalty(double alpha, double delta) : alpha_(alpha), delta_(delta) {
    check_smoothing_params(alpha, delta);
    const double lo = -8.0 * delta - 8.0 * std::sqrt(alpha);
    const double mid = -2.0 * delta;
    constexpr std::size_t kHalf = 2048;  // 4096 points total

    auto build = [&](Segment& seg, double a, double b) {
        seg.lo = a;
        seg.hi = b;
        seg.y.resize(kHalf);
        const double h = (b - a) / static_cast<double>(kHalf - 1);
        seg.inv_h = 1.0 / h;
        for (std::size_t i = 0; i < kHalf; ++i) seg.y[i] = chi_smoothed_prime(alpha, delta, a + h * static_cast<double>(i));
        seg.slope = pchip_slopes(seg.y, h);
    };
    build(tail_, lo, mid);
    build(inner_, mid, 0.0);
}

double MollifiedPenalty::prime(double u) const {
    if (u >= 0.0) return 0.0;
    if (u <= -2.0 * delta_) return (u + delta_) / alpha_;  // exact linear tail
    if (u < inner_.lo) return tail_.eval(u);
    return inner_.eval(u);
}

double MollifiedPenalty::prime_exact(double u) const { return chi_smoothed_prime(alpha_, delta_, u); }

double w_eps(const PenaltyParams& p, double u, double v) {
    p.validate();
    return chi(p.eps1, u) + chi(p.eps2, v - u);
}

std::pair<double, double> w_eps_grad(const PenaltyParams& p, double u, double v) {
    p.validate();
    const double cu = chi_prime(p.eps1, u);
    const double cg = chi_prime(p.eps2, v - u);
    return {cu - cg, cg};
}

double w_eps_delta(const PenaltyParams& p, double u, double v) {
    p.validate();
    return chi_smoothed(p.eps1, p.delta, u) + chi_smoothed(p.eps2, p.delta, v - u);
}

std::pair<double, double> w_eps_delta_grad(const PenaltyParams& p, double u, double v) {
    p.validate();
    const double cu = chi_smoothed_prime(p.eps1, p.delta, u);
    const double cg = chi_smoothed_prime(p.eps2, p.delta, v - u);
    return {cu - cg, cg};
}

}  // namespace tli
