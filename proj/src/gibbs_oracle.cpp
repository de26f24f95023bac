#include "tli/gibbs_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tli {

namespace {

// Half-axis quadrature nodes: `panels` composite Gauss-Legendre panels of
// the given order on [0, upper], mirrored to [-upper, 0] when needed.  The
// densities are smooth away from the coordinate axes, so panel edges at zero
// keep every integrand piece analytic.
struct Axis {
    std::vector<double> x, w;
};

Axis half_axis(double upper, int panels, int order, bool negative) {
    const auto& [gx, gw] = detail::gauss_legendre(static_cast<std::size_t>(order));
    Axis ax;
    const double h = upper / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = p * h, b = a + h;
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * h * gx[q];
            ax.x.push_back(negative ? -x : x);
            ax.w.push_back(0.5 * h * gw[q]);
        }
    }
    return ax;
}

Axis full_axis(double upper, int panels, int order) {
    Axis pos = half_axis(upper, panels, order, false);
    Axis neg = half_axis(upper, panels, order, true);
    neg.x.insert(neg.x.end(), pos.x.begin(), pos.x.end());
    neg.w.insert(neg.w.end(), pos.w.begin(), pos.w.end());
    return neg;
}

template <typename F>
double gl_piece(F&& f, double a, double b, int order = 32) {
    if (b <= a) return 0.0;
    const auto& [gx, gw] = detail::gauss_legendre(static_cast<std::size_t>(order));
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < gx.size(); ++q) acc += gw[q] * f(m + h * gx[q]);
    return acc * h;
}

}  // namespace

SmallGibbs::SmallGibbs(int d, int n_sites, GibbsVariant variant, PenaltyParams params)
    : d_(d), n_(n_sites), variant_(variant), params_(params) {
    if (d < 1) throw std::invalid_argument("SmallGibbs: d must be >= 1");
    if (n_sites != 1 && n_sites != 2)
        throw std::invalid_argument("SmallGibbs: only boxes with one or two sites are supported");
    if (variant != GibbsVariant::reflected) params_.validate();
    // the marginal Gaussian scale is 1/sqrt(2d) (single site) or wider for
    // the pair; eight standard deviations bounds the truncation error well
    // below the quadrature budget
    const double coef = (n_ == 1) ? static_cast<double>(d) : (2.0 * d - 1.0) / 2.0;
    trunc_ = 8.0 / std::sqrt(2.0 * coef) + 1.0;
    normalizer_ = quad_moment(0, -1);
    if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_))
        throw std::runtime_error("SmallGibbs: degenerate normalizer");
}

double SmallGibbs::unnormalized_density(const std::vector<double>& u, const std::vector<double>& v) const {
    if (static_cast<int>(u.size()) != n_ || static_cast<int>(v.size()) != n_)
        throw std::invalid_argument("SmallGibbs: wrong number of layer values");
    double Q = 0.0;
    if (n_ == 1) {
        Q = d_ * (u[0] * u[0] + v[0] * v[0]);
    } else {
        const double c = 2.0 * d_ - 1.0;
        Q = 0.5 * (c * (u[0] * u[0] + u[1] * u[1]) + (u[1] - u[0]) * (u[1] - u[0])) +
            0.5 * (c * (v[0] * v[0] + v[1] * v[1]) + (v[1] - v[0]) * (v[1] - v[0]));
    }
    double constraint = 0.0;  // log scale
    for (int s = 0; s < n_; ++s) {
        const double us = u[static_cast<std::size_t>(s)], vs = v[static_cast<std::size_t>(s)];
        switch (variant_) {
            case GibbsVariant::reflected:
                if (us < 0.0 || vs < us) return 0.0;
                break;
            case GibbsVariant::penalized:
                constraint += w_eps(params_, us, vs);
                break;
            case GibbsVariant::smoothed:
                constraint += w_eps_delta(params_, us, vs);
                break;
        }
    }
    return std::exp(-Q - constraint);
}

// which: -1 normalizer, 0 E[u(site)], 1 E[v(site)], 2 E[v-u](site)
double SmallGibbs::quad_moment(int site, int which) const {
    const bool refl = variant_ == GibbsVariant::reflected;
    if (n_ == 1) {
        const Axis au = refl ? half_axis(trunc_, 6, 16, false) : full_axis(trunc_, 6, 16);
        const Axis ag = au;
        double acc = 0.0;
        std::vector<double> uu(1), vv(1);
        for (std::size_t i = 0; i < au.x.size(); ++i)
            for (std::size_t j = 0; j < ag.x.size(); ++j) {
                const double u = au.x[i], g = ag.x[j];
                uu[0] = u;
                vv[0] = u + g;
                double f = unnormalized_density(uu, vv);
                if (which == 0) f *= u;
                if (which == 1) f *= u + g;
                if (which == 2) f *= g;
                acc += au.w[i] * ag.w[j] * f;
            }
        return acc;
    }
    const Axis ax = refl ? half_axis(trunc_, 2, 12, false) : full_axis(trunc_, 2, 12);
    double acc = 0.0;
    std::vector<double> uu(2), vv(2);
    for (std::size_t i0 = 0; i0 < ax.x.size(); ++i0)
        for (std::size_t j0 = 0; j0 < ax.x.size(); ++j0)
            for (std::size_t i1 = 0; i1 < ax.x.size(); ++i1)
                for (std::size_t j1 = 0; j1 < ax.x.size(); ++j1) {
                    uu[0] = ax.x[i0];
                    vv[0] = uu[0] + ax.x[j0];
                    uu[1] = ax.x[i1];
                    vv[1] = uu[1] + ax.x[j1];
                    double f = unnormalized_density(uu, vv);
                    if (f == 0.0) continue;
                    if (which == 0) f *= uu[static_cast<std::size_t>(site)];
                    if (which == 1) f *= vv[static_cast<std::size_t>(site)];
                    if (which == 2) f *= vv[static_cast<std::size_t>(site)] - uu[static_cast<std::size_t>(site)];
                    acc += ax.w[i0] * ax.w[j0] * ax.w[i1] * ax.w[j1] * f;
                }
    return acc;
}

double SmallGibbs::mean_lower(int site) const { return quad_moment(site, 0) / normalizer_; }
double SmallGibbs::mean_upper(int site) const { return quad_moment(site, 1) / normalizer_; }
double SmallGibbs::mean_gap(int site) const { return quad_moment(site, 2) / normalizer_; }

std::vector<double> SmallGibbs::marginal_cdf(Marginal m, const std::vector<double>& xs) const {
    if (n_ != 1) throw std::invalid_argument("SmallGibbs::marginal_cdf: single-site oracles only");
    const bool refl = variant_ == GibbsVariant::reflected;
    const double lo = refl ? 0.0 : -trunc_;
    const double hi = trunc_;
    std::vector<double> uu(1), vv(1);

    // pdf of the requested marginal, integrating out the other coordinate in
    // kink-free pieces
    auto pdf = [&](double x) {
        auto split_int = [&](auto&& f, std::initializer_list<double> cuts) {
            std::vector<double> pts{lo, hi};
            for (double c : cuts)
                if (c > lo && c < hi) pts.push_back(c);
            std::sort(pts.begin(), pts.end());
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < pts.size(); ++k) acc += gl_piece(f, pts[k], pts[k + 1]);
            return acc;
        };
        switch (m) {
            case Marginal::lower:
                return split_int(
                    [&](double g) {
                        uu[0] = x;
                        vv[0] = x + g;
                        return unnormalized_density(uu, vv);
                    },
                    {0.0});
            case Marginal::upper:
                return split_int(
                    [&](double u) {
                        uu[0] = u;
                        vv[0] = x;
                        return unnormalized_density(uu, vv);
                    },
                    {0.0, x});
            case Marginal::gap:
            default:
                return split_int(
                    [&](double u) {
                        uu[0] = u;
                        vv[0] = u + x;
                        return unnormalized_density(uu, vv);
                    },
                    {0.0});
        }
    };

    // cumulative trapezoid on a fine grid, renormalized to end at 1
    constexpr int kGrid = 4096;
    const double a = refl ? 0.0 : -trunc_;
    const double b = trunc_ + (m == Marginal::upper ? 0.5 : 0.0);
    std::vector<double> grid(kGrid + 1), dens(kGrid + 1), cum(kGrid + 1, 0.0);
    for (int i = 0; i <= kGrid; ++i) {
        grid[static_cast<std::size_t>(i)] = a + (b - a) * i / kGrid;
        dens[static_cast<std::size_t>(i)] = pdf(grid[static_cast<std::size_t>(i)]);
    }
    for (int i = 1; i <= kGrid; ++i)
        cum[static_cast<std::size_t>(i)] = cum[static_cast<std::size_t>(i - 1)] +
                                           0.5 * (dens[static_cast<std::size_t>(i)] + dens[static_cast<std::size_t>(i - 1)]) * (b - a) / kGrid;
    const double total = cum.back();

    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (x <= a) {
            out.push_back(0.0);
            continue;
        }
        if (x >= b) {
            out.push_back(1.0);
            continue;
        }
        const double s = (x - a) / (b - a) * kGrid;
        const auto j = static_cast<std::size_t>(s);
        const double frac = s - static_cast<double>(j);
        out.push_back((cum[j] + frac * (cum[j + 1] - cum[j])) / total);
    }
    return out;
}

double SmallGibbs::tv_distance(const SmallGibbs& other) const {
    if (n_ != 1 || other.n_ != 1 || d_ != other.d_)
        throw std::invalid_argument("SmallGibbs::tv_distance: matching single-site oracles only");
    const double U = std::max(trunc_, other.trunc_);
    const Axis ax = full_axis(U, 12, 12);
    double acc = 0.0;
    std::vector<double> uu(1), vv(1);
    for (std::size_t i = 0; i < ax.x.size(); ++i)
        for (std::size_t j = 0; j < ax.x.size(); ++j) {
            uu[0] = ax.x[i];
            vv[0] = uu[0] + ax.x[j];
            const double f1 = unnormalized_density(uu, vv) / normalizer_;
            const double f2 = other.unnormalized_density(uu, vv) / other.normalizer_;
            acc += ax.w[i] * ax.w[j] * std::abs(f1 - f2);
        }
    return 0.5 * acc;
}

std::vector<std::pair<double, double>> SmallGibbs::sample(std::int64_t n, const NoiseStream& noise) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n * n_));
    const double coef = (n_ == 1) ? static_cast<double>(d_) : 2.0 * d_ - 1.0;
    const double sigma = 1.0 / std::sqrt((n_ == 1) ? 2.0 * coef : coef);
    for (std::int64_t k = 0; k < n; ++k) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 2000000) throw std::runtime_error("SmallGibbs::sample: rejection stalled");
            std::vector<double> u(static_cast<std::size_t>(n_)), v(static_cast<std::size_t>(n_));
            for (int s = 0; s < n_; ++s) {
                const auto [g1, g2] = noise.gaussian_pair(attempt * 2 + static_cast<std::uint64_t>(s),
                                                          static_cast<std::uint64_t>(k), 2);
                u[static_cast<std::size_t>(s)] = sigma * g1;
                v[static_cast<std::size_t>(s)] = sigma * g2;
            }
            // accept with probability target / envelope
            double log_ratio = 0.0;
            bool ok = true;
            if (n_ == 2) {
                log_ratio -= 0.5 * (u[1] - u[0]) * (u[1] - u[0]) + 0.5 * (v[1] - v[0]) * (v[1] - v[0]);
            }
            for (int s = 0; s < n_ && ok; ++s) {
                switch (variant_) {
                    case GibbsVariant::reflected:
                        if (u[static_cast<std::size_t>(s)] < 0.0 ||
                            v[static_cast<std::size_t>(s)] < u[static_cast<std::size_t>(s)])
                            ok = false;
                        break;
                    case GibbsVariant::penalized:
                        log_ratio -= w_eps(params_, u[static_cast<std::size_t>(s)], v[static_cast<std::size_t>(s)]);
                        break;
                    case GibbsVariant::smoothed:
                        log_ratio -= w_eps_delta(params_, u[static_cast<std::size_t>(s)], v[static_cast<std::size_t>(s)]);
                        break;
                }
            }
            if (!ok) continue;
            const double accept = std::exp(log_ratio);
            if (accept < 1.0) {
                const double coin = noise.uniform_pair(attempt, static_cast<std::uint64_t>(k), 3).first;
                if (coin > accept) continue;
            }
            for (int s = 0; s < n_; ++s)
                out.emplace_back(u[static_cast<std::size_t>(s)], v[static_cast<std::size_t>(s)]);
            break;
        }
    }
    return out;
}

namespace {

double ks_distance(std::vector<double>& samples, const SmallGibbs& oracle, SmallGibbs::Marginal m) {
    std::sort(samples.begin(), samples.end());
    const std::vector<double> cdf = oracle.marginal_cdf(m, samples);
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        ks = std::max(ks, std::max(cdf[i] - lo, hi - cdf[i]));
    }
    return ks;
}

}  // namespace

StationarityReport stationarity_test(const SimConfig& cfg, const SmallGibbs& oracle, double burn_in_time,
                                     std::int64_t n_samples, double sample_gap, std::uint64_t seed) {
    cfg.validate();
    if (cfg.N != 0) throw std::invalid_argument("stationarity_test: single-site box required");
    if (cfg.d != oracle.dim()) throw std::invalid_argument("stationarity_test: dimension mismatch");
    const bool match = (cfg.scheme == Scheme::reflected && oracle.variant() == GibbsVariant::reflected) ||
                       (cfg.scheme == Scheme::penalized && oracle.variant() == GibbsVariant::penalized) ||
                       (cfg.scheme == Scheme::smoothed && oracle.variant() == GibbsVariant::smoothed);
    if (!match) throw std::invalid_argument("stationarity_test: scheme/variant mismatch");

    Simulator sim(cfg, seed);
    const auto burn_steps = static_cast<std::uint64_t>(std::llround(burn_in_time / cfg.dt));
    const auto gap_steps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(sample_gap / cfg.dt)));
    sim.run_steps(burn_steps);

    std::vector<double> lower, upper, gap;
    lower.reserve(static_cast<std::size_t>(n_samples));
    upper.reserve(static_cast<std::size_t>(n_samples));
    gap.reserve(static_cast<std::size_t>(n_samples));
    for (std::int64_t k = 0; k < n_samples; ++k) {
        sim.run_steps(gap_steps);
        const double u = sim.state().phi1[0];
        const double v = sim.state().phi2[0];
        lower.push_back(u);
        upper.push_back(v);
        gap.push_back(v - u);
    }

    StationarityReport rep;
    rep.dt = cfg.dt;
    rep.n_samples = n_samples;
    rep.enough_samples = n_samples >= 1000;
    rep.ks_lower = ks_distance(lower, oracle, SmallGibbs::Marginal::lower);
    rep.ks_upper = ks_distance(upper, oracle, SmallGibbs::Marginal::upper);
    rep.ks_gap = ks_distance(gap, oracle, SmallGibbs::Marginal::gap);
    return rep;
}

}  // namespace tli
