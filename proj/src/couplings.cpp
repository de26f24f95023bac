#include "tli/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tli/heatkernel.hpp"
#include "tli/parallel.hpp"

namespace tli {

namespace {

struct ViolationTally {
    double max_violation = -std::numeric_limits<double>::infinity();
    std::int64_t samples = 0;
    std::int64_t above_tol = 0;

    void add(double v, double tol) {
        max_violation = std::max(max_violation, v);
        samples += 1;
        above_tol += v > tol ? 1 : 0;
    }
    void merge(const ViolationTally& o) {
        max_violation = std::max(max_violation, o.max_violation);
        samples += o.samples;
        above_tol += o.above_tol;
    }
};

CouplingReport make_report(const std::string& name, const CouplingOptions& opt,
                           const std::vector<ViolationTally>& per_replica) {
    CouplingReport rep;
    rep.experiment = name;
    rep.seed = opt.seed;
    rep.replicas = opt.replicas;
    rep.tolerance = opt.tolerance;
    ViolationTally all;
    for (const auto& t : per_replica) all.merge(t);
    rep.samples = all.samples;
    rep.max_violation = all.samples > 0 ? all.max_violation : 0.0;
    rep.violation_rate = all.samples > 0 ? static_cast<double>(all.above_tol) / static_cast<double>(all.samples) : 0.0;
    rep.finish();
    return rep;
}

std::uint64_t replica_seed(const CouplingOptions& opt, std::int64_t r) {
    return NoiseStream(opt.seed).derived(static_cast<std::uint64_t>(r)).seed();
}

// Common core of the nested-box comparisons.
CouplingReport nested_box_check(const std::string& name, const SimConfig& base, int N_small, int N_large,
                                const CouplingOptions& opt) {
    if (base.scheme != Scheme::reflected)
        throw std::invalid_argument(name + ": reflected scheme required");
    if (N_small > N_large) throw std::invalid_argument(name + ": boxes are not nested");
    if (base.initial.support_N < 0 || base.initial.support_N > N_small)
        throw std::invalid_argument(name + ": initial support must sit inside the smaller box");

    SimConfig small_cfg = base;
    small_cfg.N = N_small;
    SimConfig large_cfg = base;
    large_cfg.N = N_large;
    small_cfg.validate();
    large_cfg.validate();

    std::vector<ViolationTally> tallies(static_cast<std::size_t>(opt.replicas));
    parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
        const std::uint64_t seed = replica_seed(opt, r);
        Simulator small(small_cfg, seed);
        Simulator large(large_cfg, seed);
        // map small-box sites into the large box once
        std::vector<std::int64_t> to_large(static_cast<std::size_t>(small.box().volume()));
        for (std::int64_t i = 0; i < small.box().volume(); ++i)
            to_large[static_cast<std::size_t>(i)] = large.box().index_of(small.box().coord_of(i));

        ViolationTally& tally = tallies[static_cast<std::size_t>(r)];
        const std::uint64_t total = small.steps_for(base.T);
        for (std::uint64_t s = 0; s < total; ++s) {
            small.step();
            large.step();
            if ((s + 1) % static_cast<std::uint64_t>(opt.check_every) != 0 && s + 1 != total) continue;
            for (std::int64_t i = 0; i < small.box().volume(); ++i) {
                const std::int64_t j = to_large[static_cast<std::size_t>(i)];
                tally.add(small.state().phi1[i] - large.state().phi1[j], opt.tolerance);
                tally.add(small.state().phi2[i] - large.state().phi2[j], opt.tolerance);
            }
        }
    });
    return make_report(name, opt, tallies);
}

}  // namespace

CouplingReport check_box_monotonicity(const SimConfig& base, int N_small, int N_large,
                                      const CouplingOptions& opt) {
    return nested_box_check("box_monotonicity", base, N_small, N_large, opt);
}

CouplingReport check_infinite_comparison(const SimConfig& base, int N, int N_proxy,
                                         const CouplingOptions& opt) {
    if (N_proxy < 4 * N) throw std::invalid_argument("infinite_comparison: proxy box must satisfy N' >= 4N");
    if (base.T > static_cast<double>(N_proxy) * N_proxy / 8.0)
        throw std::invalid_argument("infinite_comparison: T beyond the proxy's diffusive horizon");
    return nested_box_check("infinite_comparison", base, N, N_proxy, opt);
}

CouplingReport check_initial_monotonicity(const SimConfig& base, double offset, const CouplingOptions& opt) {
    if (base.scheme != Scheme::smoothed)
        throw std::invalid_argument("initial_monotonicity: smoothed scheme required");
    if (offset < 0.0) throw std::invalid_argument("initial_monotonicity: initial data must be ordered");
    SimConfig cfg = base;
    cfg.validate();

    // sampled steps and the kernel-smoothed bound on the summed difference;
    // the linearized drift is the plain Laplacian, whose kernel is the 2*Delta
    // kernel at half the time
    const double dt = cfg.dt;
    const std::uint64_t total = static_cast<std::uint64_t>(std::llround(cfg.T / dt));
    std::vector<std::uint64_t> sampled;
    for (std::uint64_t s = opt.check_every; s < total; s += static_cast<std::uint64_t>(opt.check_every))
        sampled.push_back(s);
    if (total > 0) sampled.push_back(total);

    const LatticeBox probe(cfg.d, cfg.N);
    const int side = probe.side();
    std::vector<std::vector<double>> rhs(sampled.size(),
                                         std::vector<double>(static_cast<std::size_t>(probe.volume())));
    for (std::size_t si = 0; si < sampled.size(); ++si) {
        const double t = static_cast<double>(sampled[si]) * dt;
        const auto in = bessel_i_scaled(2.0 * t, 2 * cfg.N);  // q_t factors, generator Delta
        std::vector<double> coord_sum(static_cast<std::size_t>(side));
        for (int x = -cfg.N; x <= cfg.N; ++x) {
            double acc = 0.0;
            for (int y = -cfg.N; y <= cfg.N; ++y) acc += in[static_cast<std::size_t>(std::abs(x - y))];
            coord_sum[static_cast<std::size_t>(x + cfg.N)] = acc;
        }
        for (std::int64_t i = 0; i < probe.volume(); ++i) {
            const Coord x = probe.coord_of(i);
            double prod = 1.0;
            for (int c : x) prod *= coord_sum[static_cast<std::size_t>(c + cfg.N)];
            rhs[si][static_cast<std::size_t>(i)] = 2.0 * offset * prod;
        }
    }

    std::vector<ViolationTally> tallies(static_cast<std::size_t>(opt.replicas));
    parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
        const std::uint64_t seed = replica_seed(opt, r);
        Simulator lowr(cfg, seed);
        Simulator high(cfg, seed);
        {
            InterfacePair shifted = lowr.state();
            for (std::int64_t i = 0; i < lowr.box().volume(); ++i) {
                shifted.phi1[i] += offset;
                shifted.phi2[i] += offset;
            }
            high.set_state(shifted);
        }
        ViolationTally& tally = tallies[static_cast<std::size_t>(r)];
        std::size_t si = 0;
        for (std::uint64_t s = 1; s <= total; ++s) {
            lowr.step();
            high.step();
            if (si >= sampled.size() || sampled[si] != s) continue;
            for (std::int64_t i = 0; i < lowr.box().volume(); ++i) {
                const double d1 = high.state().phi1[i] - lowr.state().phi1[i];
                const double d2 = high.state().phi2[i] - lowr.state().phi2[i];
                tally.add(-d1, opt.tolerance);  // ordering: differences stay nonnegative
                tally.add(-d2, opt.tolerance);
                tally.add(d1 + d2 - rhs[si][static_cast<std::size_t>(i)], opt.tolerance);  // kernel bound
            }
            ++si;
        }
    });
    return make_report("initial_monotonicity", opt, tallies);
}

namespace {

CouplingReport chain_check(const std::string& name, const std::vector<SimConfig>& chain, bool compare_both_layers,
                           const CouplingOptions& opt) {
    std::vector<ViolationTally> tallies(static_cast<std::size_t>(opt.replicas));
    parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
        const std::uint64_t seed = replica_seed(opt, r);
        std::vector<Simulator> sims;
        sims.reserve(chain.size());
        for (const auto& c : chain) sims.emplace_back(c, seed);
        ViolationTally& tally = tallies[static_cast<std::size_t>(r)];
        const std::uint64_t total = sims[0].steps_for(chain[0].T);
        for (std::uint64_t s = 1; s <= total; ++s) {
            for (auto& sim : sims) sim.step();
            if (s % static_cast<std::uint64_t>(opt.check_every) != 0 && s != total) continue;
            for (std::size_t a = 0; a + 1 < sims.size(); ++a) {
                const auto& lo = sims[a].state();    // larger eps: should stay below
                const auto& hi = sims[a + 1].state();
                for (std::int64_t i = 0; i < sims[a].box().volume(); ++i) {
                    tally.add(lo.phi1[i] - hi.phi1[i], opt.tolerance);
                    if (compare_both_layers) tally.add(lo.phi2[i] - hi.phi2[i], opt.tolerance);
                }
            }
        }
    });
    return make_report(name, opt, tallies);
}

}  // namespace

CouplingReport check_eps1_monotonicity(const SimConfig& base, const std::vector<double>& eps1_chain,
                                       const CouplingOptions& opt) {
    if (base.scheme != Scheme::penalized)
        throw std::invalid_argument("eps1_monotonicity: penalized scheme required");
    if (eps1_chain.size() < 2) throw std::invalid_argument("eps1_monotonicity: need a chain of eps1 values");
    for (std::size_t k = 0; k + 1 < eps1_chain.size(); ++k)
        if (!(eps1_chain[k] > eps1_chain[k + 1]))
            throw std::invalid_argument("eps1_monotonicity: chain must decrease");
    std::vector<SimConfig> chain;
    for (double e1 : eps1_chain) {
        SimConfig c = base;
        c.penalty.eps1 = e1;
        c.validate();
        chain.push_back(c);
    }
    return chain_check("eps1_monotonicity", chain, true, opt);
}

CouplingReport check_eps2_rotated(const SimConfig& base, const std::vector<double>& eps2_chain,
                                  const CouplingOptions& opt) {
    if (base.scheme != Scheme::rotated)
        throw std::invalid_argument("eps2_rotated: rotated scheme required");
    if (eps2_chain.size() < 2) throw std::invalid_argument("eps2_rotated: need a chain of eps2 values");
    for (std::size_t k = 0; k + 1 < eps2_chain.size(); ++k)
        if (!(eps2_chain[k] > eps2_chain[k + 1]))
            throw std::invalid_argument("eps2_rotated: chain must decrease");
    std::vector<SimConfig> chain;
    for (double e2 : eps2_chain) {
        SimConfig c = base;
        c.penalty.eps2 = e2;
        c.validate();
        chain.push_back(c);
    }
    return chain_check("eps2_rotated", chain, true, opt);
}

CouplingReport check_aux_ordering(const SimConfig& base, const CouplingOptions& opt) {
    SimConfig refl = base;
    refl.scheme = Scheme::reflected;
    SimConfig wall = base;
    wall.scheme = Scheme::wall_only;
    SimConfig free = base;
    free.scheme = Scheme::no_wall;
    refl.validate();

    std::vector<ViolationTally> tallies(static_cast<std::size_t>(opt.replicas));
    parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
        const std::uint64_t seed = replica_seed(opt, r);
        Simulator a(refl, seed), b(wall, seed), c(free, seed);
        ViolationTally& tally = tallies[static_cast<std::size_t>(r)];
        const std::uint64_t total = a.steps_for(base.T);
        for (std::uint64_t s = 1; s <= total; ++s) {
            a.step();
            b.step();
            c.step();
            if (s % static_cast<std::uint64_t>(opt.check_every) != 0 && s != total) continue;
            for (std::int64_t i = 0; i < a.box().volume(); ++i) {
                tally.add(a.state().phi1[i] - b.state().phi1[i], opt.tolerance);  // Phi <= Phi~
                tally.add(a.state().phi2[i] - b.state().phi2[i], opt.tolerance);
                const double gap_wall = b.state().phi2[i] - b.state().phi1[i];
                const double gap_free = c.state().phi2[i] - c.state().phi1[i];
                tally.add(gap_wall - gap_free, opt.tolerance);  // psi~ <= psi^
            }
        }
    });
    return make_report("aux_ordering", opt, tallies);
}

std::vector<ConvergencePoint> check_penalized_convergence(const SimConfig& base, int k_from, int k_to,
                                                          double t, const CouplingOptions& opt) {
    if (k_from > k_to) throw std::invalid_argument("penalized_convergence: bad k range");
    std::vector<ConvergencePoint> points;
    for (int k = k_from; k <= k_to; ++k) {
        const double eps = std::pow(2.0, -k);
        const double delta = eps / 10.0;
        const double dt_cap = std::min(base.dt, eps / 8.0);  // refine dt with eps
        const auto steps = static_cast<std::uint64_t>(std::ceil(t / dt_cap - 1e-12));
        const double dt = t / static_cast<double>(steps);

        SimConfig refl = base;
        refl.scheme = Scheme::reflected;
        refl.dt = dt;
        refl.T = t;
        SimConfig smth = base;
        smth.scheme = Scheme::smoothed;
        smth.dt = dt;
        smth.T = t;
        smth.penalty.eps1 = eps;
        smth.penalty.eps2 = eps;
        smth.penalty.delta = delta;
        refl.validate();
        smth.validate();

        std::vector<double> dist(static_cast<std::size_t>(opt.replicas), 0.0);
        parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
            const std::uint64_t seed = replica_seed(opt, r);
            Simulator a(refl, seed), b(smth, seed);
            for (std::uint64_t s = 0; s < steps; ++s) {
                a.step();
                b.step();
            }
            double acc = 0.0;
            for (std::int64_t i = 0; i < a.box().volume(); ++i) {
                const double d1 = a.state().phi1[i] - b.state().phi1[i];
                const double d2 = a.state().phi2[i] - b.state().phi2[i];
                acc += d1 * d1 + d2 * d2;
            }
            dist[static_cast<std::size_t>(r)] = acc;
        });
        double mean = 0.0;
        for (double v : dist) mean += v;
        mean /= static_cast<double>(opt.replicas);
        double var = 0.0;
        for (double v : dist) var += (v - mean) * (v - mean);
        var = opt.replicas > 1 ? var / static_cast<double>(opt.replicas - 1) : 0.0;

        ConvergencePoint p;
        p.k = k;
        p.eps = eps;
        p.delta = delta;
        p.dt = dt;
        p.distance = mean;
        p.stderr_ = std::sqrt(var / static_cast<double>(opt.replicas));
        points.push_back(p);
    }
    return points;
}

namespace {

struct MomentSummary {
    double mean = 0.0, se_mean = 0.0, var = 0.0, se_var = 0.0;
};

MomentSummary summarize(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    MomentSummary m;
    for (double x : xs) m.mean += x;
    m.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m.var = n > 1 ? m2 / (n - 1) : 0.0;
    m4 /= n;
    const double v = m2 / n;
    m.se_mean = std::sqrt(m.var / n);
    m.se_var = std::sqrt(std::max(0.0, m4 - v * v) / n);
    return m;
}

}  // namespace

std::vector<LawIdentityPoint> check_law_identity(const SimConfig& base, const std::vector<double>& times,
                                                 const CouplingOptions& opt) {
    SimConfig gap_cfg = base;
    gap_cfg.scheme = Scheme::no_wall;
    SimConfig rho_cfg = base;
    rho_cfg.scheme = Scheme::single;
    gap_cfg.validate();

    const std::size_t nt = times.size();
    std::vector<std::vector<double>> gap_vals(nt, std::vector<double>(static_cast<std::size_t>(opt.replicas)));
    std::vector<std::vector<double>> rho_vals(nt, std::vector<double>(static_cast<std::size_t>(opt.replicas)));

    Coord origin(static_cast<std::size_t>(base.d), 0);
    parallel_jobs(opt.replicas, opt.threads, [&](std::int64_t r) {
        // distributional comparison: the two systems get unrelated streams
        const std::uint64_t seed_gap = NoiseStream(replica_seed(opt, r)).derived(0xAAu).seed();
        const std::uint64_t seed_rho = NoiseStream(replica_seed(opt, r)).derived(0xBBu).seed();
        Simulator g(gap_cfg, seed_gap), rho(rho_cfg, seed_rho);
        const std::int64_t o_g = g.box().index_of(origin);
        const std::int64_t o_r = rho.box().index_of(origin);
        for (std::size_t k = 0; k < nt; ++k) {
            const std::uint64_t target = g.steps_for(times[k]);
            while (g.state().step < target) g.step();
            while (rho.state().step < target) rho.step();
            gap_vals[k][static_cast<std::size_t>(r)] = g.state().phi2[o_g] - g.state().phi1[o_g];
            rho_vals[k][static_cast<std::size_t>(r)] = rho.state().phi1[o_r];
        }
    });

    std::vector<LawIdentityPoint> out;
    for (std::size_t k = 0; k < nt; ++k) {
        const MomentSummary mg = summarize(gap_vals[k]);
        const MomentSummary mr = summarize(rho_vals[k]);
        LawIdentityPoint p;
        p.time = times[k];
        p.mean_gap = mg.mean;
        p.se_mean_gap = mg.se_mean;
        p.mean_rho = mr.mean;
        p.se_mean_rho = mr.se_mean;
        p.var_gap = mg.var;
        p.se_var_gap = mg.se_var;
        p.var_rho = mr.var;
        p.se_var_rho = mr.se_var;
        const double sq2 = std::sqrt(2.0);
        const double se_mean_comb = std::sqrt(mg.se_mean * mg.se_mean + 2.0 * mr.se_mean * mr.se_mean);
        const double se_var_comb = std::sqrt(mg.se_var * mg.se_var + 4.0 * mr.se_var * mr.se_var);
        p.mean_mismatch = std::abs(mg.mean - sq2 * mr.mean) - 3.0 * se_mean_comb;
        p.var_mismatch = std::abs(mg.var - 2.0 * mr.var) - 3.0 * se_var_comb;
        p.pass = p.mean_mismatch <= 0.0 && p.var_mismatch <= 0.0;
        out.push_back(p);
    }
    return out;
}

}  // namespace tli
