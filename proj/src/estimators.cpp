#include "tli/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tli/heatkernel.hpp"
#include "tli/parallel.hpp"

namespace tli {

std::vector<std::int64_t> pooling_sites(const LatticeBox& box, int stride) {
    if (stride < 1) throw std::invalid_argument("pooling_sites: stride must be >= 1");
    const int N = box.halfwidth();
    const int margin = std::min(stride, N);
    std::vector<std::int64_t> sites;
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        const Coord x = box.coord_of(i);
        bool ok = true;
        for (int c : x) {
            if (c % stride != 0 || std::abs(c) > N - margin) {
                ok = false;
                break;
            }
        }
        if (ok) sites.push_back(i);
    }
    return sites;
}

HeightSeries estimate_heights(const SimConfig& cfg, const std::vector<double>& times, int replicas,
                              int stride, std::uint64_t seed, int workers) {
    cfg.validate();
    if (times.empty()) throw std::invalid_argument("estimate_heights: no observation times");
    if (replicas < 1) throw std::invalid_argument("estimate_heights: need at least one replica");
    const double T = times.back();
    const double diffusive = 2.0 * std::sqrt(T);
    if (static_cast<double>(stride) < diffusive)
        throw std::invalid_argument("estimate_heights: stride below the decorrelation length 2 sqrt(T)");
    if (static_cast<double>(2 * cfg.N + 1) < diffusive + stride)
        throw std::invalid_argument("estimate_heights: box too small for horizon");

    HeightSeries out;
    out.times = times;
    out.n_replicas = replicas;
    const std::size_t nt = times.size();
    out.rep1.assign(nt, std::vector<double>(static_cast<std::size_t>(replicas), 0.0));
    out.rep2.assign(nt, std::vector<double>(static_cast<std::size_t>(replicas), 0.0));

    {
        const LatticeBox probe(cfg.d, cfg.N);
        out.n_sites = static_cast<int>(pooling_sites(probe, stride).size());
    }

    // large boxes are memory-bound: thread inside one replica instead of
    // running replicas side by side
    const LatticeBox probe2(cfg.d, cfg.N);
    const bool big = probe2.volume() >= (std::int64_t(1) << 17);
    const int jobs_par = big ? 1 : workers;
    const int sim_threads = big ? workers : 1;

    const NoiseStream root(seed);
    parallel_jobs(replicas, jobs_par, [&](std::int64_t r) {
        Simulator sim(cfg, root.derived(static_cast<std::uint64_t>(r)).seed(), sim_threads);
        const std::vector<std::int64_t> pool = pooling_sites(sim.box(), stride);
        const double inv = 1.0 / static_cast<double>(pool.size());
        for (std::size_t k = 0; k < nt; ++k) {
            const std::uint64_t target = sim.steps_for(times[k]);
            while (sim.state().step < target) sim.step();
            double m1 = 0.0, m2 = 0.0;
            for (std::int64_t i : pool) {
                m1 += sim.state().phi1[i];
                m2 += sim.state().phi2[i];
            }
            out.rep1[k][static_cast<std::size_t>(r)] = m1 * inv;
            out.rep2[k][static_cast<std::size_t>(r)] = m2 * inv;
        }
    });

    out.mean1.resize(nt);
    out.mean2.resize(nt);
    out.stderr1.resize(nt);
    out.stderr2.resize(nt);
    auto reduce = [&](const std::vector<double>& vals, double& mean, double& se) {
        const double n = static_cast<double>(vals.size());
        mean = 0.0;
        for (double v : vals) mean += v;
        mean /= n;
        double s2 = 0.0;
        for (double v : vals) s2 += (v - mean) * (v - mean);
        se = n > 1 ? std::sqrt(s2 / (n - 1) / n) : 0.0;
    };
    for (std::size_t k = 0; k < nt; ++k) {
        reduce(out.rep1[k], out.mean1[k], out.stderr1[k]);
        reduce(out.rep2[k], out.mean2[k], out.stderr2[k]);
    }
    return out;
}

GrowthFit fit_growth(const HeightSeries& series, int layer, int d, double window_lo, double window_hi) {
    if (layer != 1 && layer != 2) throw std::invalid_argument("fit_growth: layer must be 1 or 2");
    std::vector<double> xs, ys, vy;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        if (t < window_lo || t > window_hi || t <= 1.0) continue;
        const double m = layer == 1 ? series.mean1[k] : series.mean2[k];
        const double se = layer == 1 ? series.stderr1[k] : series.stderr2[k];
        xs.push_back(log_d(d, t));
        ys.push_back(m * m);
        vy.push_back(4.0 * m * m * se * se);  // var of m^2 by the delta method
    }
    if (xs.size() < 4) throw std::invalid_argument("fit_growth: fewer than 4 points in the fit window");

    const double n = static_cast<double>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        xbar += xs[k];
        ybar += ys[k];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - xbar) * (xs[k] - xbar);
        sxy += (xs[k] - xbar) * (ys[k] - ybar);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_growth: degenerate window");

    GrowthFit fit;
    fit.layer = layer;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double var_slope = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double w = (xs[k] - xbar) / sxx;
        var_slope += w * w * vy[k];
    }
    fit.slope_stderr = std::sqrt(var_slope);
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.n_points = static_cast<int>(xs.size());
    return fit;
}

RatioEstimate height_ratio(const HeightSeries& series, double t, double trailing_fraction) {
    const double lo = t * (1.0 - trailing_fraction);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < series.times.size(); ++k)
        if (series.times[k] >= lo && series.times[k] <= t * (1.0 + 1e-12)) idx.push_back(k);
    if (idx.empty()) throw std::invalid_argument("height_ratio: t not covered by the series");

    // per-replica trailing means, then the delta method across replicas
    const auto R = static_cast<std::size_t>(series.n_replicas);
    std::vector<double> a(R, 0.0), b(R, 0.0);
    for (std::size_t k : idx)
        for (std::size_t r = 0; r < R; ++r) {
            a[r] += series.rep1[k][r];
            b[r] += series.rep2[k][r];
        }
    for (std::size_t r = 0; r < R; ++r) {
        a[r] /= static_cast<double>(idx.size());
        b[r] /= static_cast<double>(idx.size());
    }
    double A = 0.0, B = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        A += a[r];
        B += b[r];
    }
    A /= static_cast<double>(R);
    B /= static_cast<double>(R);
    double va = 0.0, vb = 0.0, cab = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        va += (a[r] - A) * (a[r] - A);
        vb += (b[r] - B) * (b[r] - B);
        cab += (a[r] - A) * (b[r] - B);
    }
    const double denom = R > 1 ? static_cast<double>(R) * static_cast<double>(R - 1) : 1.0;
    va /= denom;
    vb /= denom;
    cab /= denom;

    RatioEstimate est;
    const double seA = std::sqrt(va);
    if (!(A > 2.0 * seA) || A <= 0.0) {
        est.valid = false;
        return est;
    }
    est.valid = true;
    est.ratio = B / A;
    est.stderr_ = std::sqrt(std::max(0.0, vb / (A * A) + B * B * va / (A * A * A * A) - 2.0 * B * cab / (A * A * A)));
    return est;
}

std::vector<double> gap_coefficient(const HeightSeries& series, int d) {
    std::vector<double> out;
    out.reserve(series.times.size());
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        out.push_back(t > 1.0 ? (series.mean2[k] - series.mean1[k]) / std::sqrt(log_d(d, t)) : 0.0);
    }
    return out;
}

std::vector<VarianceCheckPoint> variance_check(const SimConfig& cfg, const std::vector<double>& times,
                                               int replicas, std::uint64_t seed, int workers) {
    cfg.validate();
    if (replicas < 2) throw std::invalid_argument("variance_check: need at least two replicas");
    const std::size_t nt = times.size();
    std::vector<std::vector<double>> v1(nt, std::vector<double>(static_cast<std::size_t>(replicas)));
    std::vector<std::vector<double>> v2(nt, std::vector<double>(static_cast<std::size_t>(replicas)));

    Coord origin(static_cast<std::size_t>(cfg.d), 0);
    const LatticeBox probe(cfg.d, cfg.N);
    const bool big = probe.volume() >= (std::int64_t(1) << 17);
    const int jobs_par = big ? 1 : workers;
    const int sim_threads = big ? workers : 1;
    const NoiseStream root(seed);
    parallel_jobs(replicas, jobs_par, [&](std::int64_t r) {
        Simulator sim(cfg, root.derived(static_cast<std::uint64_t>(r)).seed(), sim_threads);
        const std::int64_t o = sim.box().index_of(origin);
        for (std::size_t k = 0; k < nt; ++k) {
            const std::uint64_t target = sim.steps_for(times[k]);
            while (sim.state().step < target) sim.step();
            v1[k][static_cast<std::size_t>(r)] = sim.state().phi1[o];
            v2[k][static_cast<std::size_t>(r)] = sim.state().phi2[o];
        }
    });

    std::vector<VarianceCheckPoint> out;
    for (std::size_t k = 0; k < nt; ++k) {
        for (int layer = 1; layer <= 2; ++layer) {
            const std::vector<double>& vals = layer == 1 ? v1[k] : v2[k];
            const double n = static_cast<double>(vals.size());
            double mean = 0.0;
            for (double x : vals) mean += x;
            mean /= n;
            double m2 = 0.0, m4 = 0.0;
            for (double x : vals) {
                const double d0 = x - mean;
                m2 += d0 * d0;
                m4 += d0 * d0 * d0 * d0;
            }
            VarianceCheckPoint p;
            p.time = times[k];
            p.layer = layer;
            p.variance = m2 / (n - 1);
            m4 /= n;
            const double v = m2 / n;
            p.var_stderr = std::sqrt(std::max(0.0, m4 - v * v) / n);
            p.bound = variance_bound(times[k], cfg.d);
            p.margin = p.bound - (p.variance + 3.0 * p.var_stderr);
            p.pass = p.margin >= 0.0;
            out.push_back(p);
        }
    }
    return out;
}

double blocked_bootstrap_stderr(const std::vector<double>& series, int block_len, int n_boot,
                                std::uint64_t seed) {
    if (series.empty() || block_len < 1 || n_boot < 2)
        throw std::invalid_argument("blocked_bootstrap_stderr: bad arguments");
    const std::size_t n = series.size();
    const std::size_t nblocks = (n + static_cast<std::size_t>(block_len) - 1) / static_cast<std::size_t>(block_len);
    const NoiseStream rng(seed);
    std::vector<double> boot_means;
    boot_means.reserve(static_cast<std::size_t>(n_boot));
    for (int b = 0; b < n_boot; ++b) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < nblocks; ++j) {
            const auto [u, _] = rng.uniform_pair(j, static_cast<std::uint64_t>(b), 4);
            const auto start = static_cast<std::size_t>(u * static_cast<double>(n));
            for (int m = 0; m < block_len && count < n; ++m, ++count)
                acc += series[(start + static_cast<std::size_t>(m)) % n];
        }
        boot_means.push_back(acc / static_cast<double>(n));
    }
    double mean = 0.0;
    for (double v : boot_means) mean += v;
    mean /= static_cast<double>(n_boot);
    double s2 = 0.0;
    for (double v : boot_means) s2 += (v - mean) * (v - mean);
    return std::sqrt(s2 / static_cast<double>(n_boot - 1));
}

}  // namespace tli
