#include "tli/heatkernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tli {

namespace {

constexpr double kSeam = 30.0;

double i0_scaled_series(double z) {
    // e^{-z} sum_k (z/2)^{2k} / (k!)^2, all terms positive
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return std::exp(-z) * sum;
}

double i0_scaled_asymptotic(double z) {
    // I_0(z) ~ e^z / sqrt(2 pi z) * sum a_k / z^k, a_k = prod (2j-1)^2 / (8^k k!)
    double ak = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
    for (int k = 1; k <= 16; ++k) {
        const double odd = 2.0 * k - 1.0;
        ak *= odd * odd / (8.0 * k);
        const double term = ak / std::pow(z, k);
        if (term > prev) break;  // asymptotic series started diverging
        sum += term;
        prev = term;
    }
    return sum / std::sqrt(2.0 * M_PI * z);
}

}  // namespace

double bessel_i0_scaled(double z) {
    if (z < 0.0) throw std::invalid_argument("bessel_i0_scaled: z must be >= 0");
    if (z == 0.0) return 1.0;
    return z <= kSeam ? i0_scaled_series(z) : i0_scaled_asymptotic(z);
}

std::vector<double> bessel_i_scaled(double z, int nmax) {
    if (z < 0.0 || nmax < 0) throw std::invalid_argument("bessel_i_scaled: bad arguments");
    std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
    if (z == 0.0) {
        out[0] = 1.0;
        return out;
    }
    // Miller backward recurrence with normalization I_0 + 2 sum_{n>=1} I_n = e^z.
    const int start = nmax + 20 + static_cast<int>(std::sqrt(40.0 * std::max(z, static_cast<double>(nmax))));
    double fp = 0.0, fc = 1e-280;  // f_{n+1}, f_n with n = start
    double norm = 2.0 * fc;
    for (int n = start; n >= 1; --n) {
        const double fm = fp + (2.0 * n / z) * fc;  // f_{n-1}
        fp = fc;
        fc = fm;
        norm += (n - 1 >= 1) ? 2.0 * fm : fm;  // f_0 enters once
        if (n - 1 <= nmax) out[static_cast<std::size_t>(n - 1)] = fm;
        if (fm > 1e260) {  // rescale to avoid overflow
            fp /= 1e260;
            fc /= 1e260;
            norm /= 1e260;
            for (auto& v : out) v /= 1e260;
        }
    }
    const double scale = 1.0 / norm;
    for (auto& v : out) v *= scale;
    return out;
}

int truncation_radius(double t) {
    return static_cast<int>(std::ceil(4.0 * t + 12.0 * std::sqrt(4.0 * t) + 20.0));
}

double kernel_infinite_p00(int d, double t) {
    if (t < 0.0) throw std::invalid_argument("kernel_infinite: t must be >= 0");
    return std::pow(bessel_i0_scaled(4.0 * t), d);
}

double kernel_infinite(int d, double t, const Coord& x, const Coord& y) {
    if (t < 0.0) throw std::invalid_argument("kernel_infinite: t must be >= 0");
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
        throw std::invalid_argument("kernel_infinite: coordinate dimension mismatch");
    int nmax = 0;
    for (int k = 0; k < d; ++k) nmax = std::max(nmax, std::abs(x[static_cast<std::size_t>(k)] - y[static_cast<std::size_t>(k)]));
    if (t == 0.0) return nmax == 0 ? 1.0 : 0.0;
    if (nmax == 0) return kernel_infinite_p00(d, t);
    const auto in = bessel_i_scaled(4.0 * t, nmax);
    double p = 1.0;
    for (int k = 0; k < d; ++k) p *= in[static_cast<std::size_t>(std::abs(x[static_cast<std::size_t>(k)] - y[static_cast<std::size_t>(k)]))];
    return p;
}

namespace {

template <typename F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                            double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(F f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

constexpr double kAsympFrom = 400.0;

// primitive of (8 pi s)^{-d/2} (1 + A/s + B/s^2), A = d/32, B = d(d+8)/2048
double p00_tail_primitive(int d, double s) {
    const double A = d / 32.0;
    const double B = d * (d + 8.0) / 2048.0;
    const double c = std::pow(8.0 * M_PI, -0.5 * d);
    if (d == 2) return c * (std::log(s) - A / s - 0.5 * B / (s * s));
    const double h = 0.5 * d;
    return c * (std::pow(s, 1.0 - h) / (1.0 - h) - A * std::pow(s, -h) / h - B * std::pow(s, -h - 1.0) / (h + 1.0));
}

double integral_p00_to(int d, double T) {
    const double head_end = std::min(T, kAsympFrom);
    double acc = adaptive_simpson([d](double s) { return kernel_infinite_p00(d, s); }, 0.0, head_end, 1e-12);
    if (T > kAsympFrom) acc += p00_tail_primitive(d, T) - p00_tail_primitive(d, kAsympFrom);
    return acc;
}

}  // namespace

double integral_p00(int d, double T) {
    if (d < 1) throw std::invalid_argument("integral_p00: d must be >= 1");
    if (std::isinf(T)) {
        if (d < 3) throw std::invalid_argument("integral_p00: integral diverges for d < 3");
        // analytic tail to infinity
        return integral_p00_to(d, kAsympFrom) - p00_tail_primitive(d, kAsympFrom);
    }
    if (T < 0.0) throw std::invalid_argument("integral_p00: T must be >= 0");
    return integral_p00_to(d, T);
}

double green_constant(int d) {
    if (d < 3) throw std::invalid_argument("green_constant: needs d >= 3 (use log_rate_2d for d = 2)");
    return integral_p00(d, std::numeric_limits<double>::infinity());
}

double log_rate_2d() { return 1.0 / (8.0 * M_PI); }

double log_rate_2d_at(double t) {
    if (t <= 1.0) throw std::invalid_argument("log_rate_2d_at: t must exceed 1");
    return integral_p00(2, t) / std::log(t);
}

double log_rate_2d_extrapolated(double t1, double t2) {
    // A(t) = a + b/log t  =>  eliminate b from two evaluations
    const double L1 = std::log(t1), L2 = std::log(t2);
    const double A1 = log_rate_2d_at(t1), A2 = log_rate_2d_at(t2);
    return (A2 * L2 - A1 * L1) / (L2 - L1);
}

double c2_constant(int d) {
    if (d < 2) throw std::invalid_argument("c2_constant: needs d >= 2");
    const double c1 = (d == 2) ? log_rate_2d() : green_constant(d);
    return (3.0 + 2.0 * std::sqrt(2.0)) * c1;
}

double variance_bound(double t, int d) {
    if (t < 0.0) throw std::invalid_argument("variance_bound: t must be >= 0");
    if (t == 0.0) return 0.0;
    // 4 int_0^t p_{2r}(0,0) dr = 2 int_0^{2t} p_s(0,0) ds
    return 2.0 * integral_p00(d, 2.0 * t);
}

double log_d(int d, double t) {
    const double l = std::log(t);
    return d == 2 ? l * l : l;
}

DirichletKernel::DirichletKernel(int d, int N, double t) : d_(d), N_(N), side_(2 * N + 1), t_(t) {
    if (d < 1 || N < 0) throw std::invalid_argument("DirichletKernel: bad box");
    if (t < 0.0) throw std::invalid_argument("DirichletKernel: t must be >= 0");
    const int M = side_;
    m1d_.assign(static_cast<std::size_t>(M) * M, 0.0);
    std::vector<double> decay(static_cast<std::size_t>(M)), s(static_cast<std::size_t>(M) * M);
    for (int k = 1; k <= M; ++k) {
        const double lam = 2.0 - 2.0 * std::cos(M_PI * k / (M + 1.0));
        decay[static_cast<std::size_t>(k - 1)] = std::exp(-2.0 * t * lam);
        for (int i = 0; i < M; ++i)
            s[static_cast<std::size_t>(k - 1) * M + i] = std::sin(M_PI * k * (i + 1.0) / (M + 1.0));
    }
    const double w = 2.0 / (M + 1.0);
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) {
            double acc = 0.0;
            for (int k = 0; k < M; ++k)
                acc += decay[static_cast<std::size_t>(k)] * s[static_cast<std::size_t>(k) * M + i] * s[static_cast<std::size_t>(k) * M + j];
            const double v = std::max(0.0, w * acc);
            m1d_[static_cast<std::size_t>(i) * M + j] = v;
            m1d_[static_cast<std::size_t>(j) * M + i] = v;
        }
}

double DirichletKernel::value1d(int i, int j) const {
    if (i < 0 || j < 0 || i >= side_ || j >= side_) throw std::invalid_argument("DirichletKernel: index outside box");
    return m1d_[static_cast<std::size_t>(i) * side_ + j];
}

double DirichletKernel::value(const Coord& x, const Coord& y) const {
    if (static_cast<int>(x.size()) != d_ || static_cast<int>(y.size()) != d_)
        throw std::invalid_argument("DirichletKernel: coordinate dimension mismatch");
    double p = 1.0;
    for (int k = 0; k < d_; ++k) p *= value1d(x[static_cast<std::size_t>(k)] + N_, y[static_cast<std::size_t>(k)] + N_);
    return p;
}

}  // namespace tli
