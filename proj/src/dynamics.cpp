#include "tli/dynamics.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "tli/parallel.hpp"
#include "tli/util.hpp"

namespace tli {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr int kMaxChunks = 64;

inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

}  // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::reflected: return "reflected";
        case Scheme::penalized: return "penalized";
        case Scheme::smoothed: return "smoothed";
        case Scheme::wall_only: return "wall_only";
        case Scheme::no_wall: return "no_wall";
        case Scheme::single: return "single";
        case Scheme::rotated: return "rotated";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::reflected, Scheme::penalized, Scheme::smoothed, Scheme::wall_only,
                     Scheme::no_wall, Scheme::single, Scheme::rotated})
        if (name == scheme_name(s)) return s;
    throw std::invalid_argument("unknown scheme: " + name);
}

void SimConfig::validate() const {
    if (d < 1) throw std::invalid_argument("SimConfig: d must be >= 1");
    if (N < 0) throw std::invalid_argument("SimConfig: N must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(T >= 0.0)) throw std::invalid_argument("SimConfig: T must be >= 0");
    const double slack = 1.0 + 1e-12;
    if (dt > slack / (8.0 * d))
        throw std::invalid_argument("SimConfig: dt exceeds the stability bound 1/(8d)");
    if (uses_penalty()) {
        penalty.validate();
        if (dt > slack * std::min(penalty.eps1, penalty.eps2) / 4.0)
            throw std::invalid_argument("SimConfig: dt exceeds the penalty stability bound min(eps)/4");
    }
    if (initial.sigma1 < 0.0 || initial.sigma2 < 0.0)
        throw std::invalid_argument("SimConfig: initial scales must be >= 0");
    if (initial.support_N > N)
        throw std::invalid_argument("SimConfig: initial support exceeds the box");
    if (boundary1 < 0.0 || boundary2 < boundary1)
        throw std::invalid_argument("SimConfig: boundary values must satisfy 0 <= b1 <= b2");
}

NumericalFailure::NumericalFailure(std::int64_t site_, std::uint64_t step_)
    : std::runtime_error("non-finite field value at site " + std::to_string(site_) + ", step " +
                         std::to_string(step_)),
      site(site_),
      step(step_) {}

InterfacePair::InterfacePair(const LatticeBox& box)
    : phi1(box),
      phi2(box),
      ell1(static_cast<std::size_t>(box.volume()), 0.0),
      ell2(static_cast<std::size_t>(box.volume()), 0.0) {}

bool InterfacePair::cone_ok(double tol) const {
    for (std::int64_t i = 0; i < phi1.box->volume(); ++i)
        if (phi1[i] < -tol || phi2[i] - phi1[i] < -tol) return false;
    return true;
}

RotatedPair::RotatedPair(const LatticeBox& box)
    : psi1(box),
      psi2(box),
      lhat1(static_cast<std::size_t>(box.volume()), 0.0),
      lhat2(static_cast<std::size_t>(box.volume()), 0.0) {}

RotatedPair rotate(const InterfacePair& phi) {
    RotatedPair out(*phi.phi1.box);
    const std::size_t padded = phi.phi1.data.size();
    for (std::size_t j = 0; j < padded; ++j) {
        out.psi1.data[j] = (phi.phi1.data[j] + phi.phi2.data[j]) * kInvSqrt2;
        out.psi2.data[j] = (-phi.phi1.data[j] + phi.phi2.data[j]) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < phi.ell1.size(); ++i) {
        out.lhat1[i] = phi.ell1[i] * kInvSqrt2;
        out.lhat2[i] = phi.ell2[i] * kSqrt2;
    }
    out.t = phi.t;
    out.step = phi.step;
    return out;
}

InterfacePair unrotate(const RotatedPair& psi) {
    InterfacePair out(*psi.psi1.box);
    const std::size_t padded = psi.psi1.data.size();
    for (std::size_t j = 0; j < padded; ++j) {
        out.phi1.data[j] = (psi.psi1.data[j] - psi.psi2.data[j]) * kInvSqrt2;
        out.phi2.data[j] = (psi.psi1.data[j] + psi.psi2.data[j]) * kInvSqrt2;
    }
    for (std::size_t i = 0; i < psi.lhat1.size(); ++i) {
        out.ell1[i] = psi.lhat1[i] * kSqrt2;
        out.ell2[i] = psi.lhat2[i] * kInvSqrt2;
    }
    out.t = psi.t;
    out.step = psi.step;
    return out;
}

InterfacePair initial_sample(const LatticeBox& box, const InitialLaw& law, const NoiseStream& noise,
                             double boundary1, double boundary2) {
    if (law.sigma1 < 0.0 || law.sigma2 < 0.0) throw std::invalid_argument("initial_sample: scales must be >= 0");
    if (law.support_N > box.halfwidth()) throw std::invalid_argument("initial_sample: support exceeds the box");
    InterfacePair s(box);
    s.phi1.set_halo(boundary1);
    s.phi2.set_halo(boundary2);
    if (law.sigma1 == 0.0 && law.sigma2 == 0.0) return s;
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        if (law.support_N >= 0) {
            const Coord x = box.coord_of(i);
            bool inside = true;
            for (int c : x)
                if (std::abs(c) > law.support_N) inside = false;
            if (!inside) continue;
        }
        const auto [g1, g2] = noise.gaussian_pair(site_code(box.coord_of(i)), 0, 1);
        const double u = std::abs(g1) * law.sigma1;
        s.phi1[i] = u;
        s.phi2[i] = u + std::abs(g2) * law.sigma2;
    }
    return s;
}

namespace {

struct PenaltyTables {
    const MollifiedPenalty* wall = nullptr;
    const MollifiedPenalty* gap = nullptr;
};

// One explicit Euler-Maruyama step with per-site constraint handling.
// Writes layer values into next1/next2 (box part only; halo tails are
// preserved by the caller), accumulates local times in place, then swaps.
//
// The sweep is organized by rows (runs along the last coordinate).  Rows
// whose outer coordinates sit strictly inside the box take a stride-offset
// path the compiler can vectorize; boundary rows and tiny boxes use the
// neighbor table.  Both paths add neighbors in the same order, so they are
// bit-identical.
template <Scheme S, bool TL>
void advance(InterfacePair& st, const SimConfig& cfg, const NoiseStream& noise,
             const std::vector<std::uint64_t>& codes, PenaltyTables tables, std::vector<double>& next1,
             std::vector<double>& next2, int threads) {
    const LatticeBox& box = *st.phi1.box;
    const int d = box.dim();
    const int twod = 2 * d;
    const std::int64_t vol = box.volume();
    const std::int64_t side = box.side();
    const std::int64_t nrows = box.rows();
    const double dt = cfg.dt;
    const double c0 = 1.0 - twod * dt;
    const double sn = std::sqrt(2.0 * dt);
    const double inv_e1 = cfg.uses_penalty() ? 1.0 / cfg.penalty.eps1 : 0.0;
    const double inv_e2 = cfg.uses_penalty() ? 1.0 / cfg.penalty.eps2 : 0.0;
    const double* __restrict p1 = st.phi1.data.data();
    const double* __restrict p2 = st.phi2.data.data();
    double* __restrict n1 = next1.data();
    double* __restrict n2 = next2.data();
    double* __restrict l1 = st.ell1.data();
    double* __restrict l2 = st.ell2.data();
    const std::uint32_t* __restrict nbt = box.neighbor_table().data();
    const std::uint64_t* __restrict cds = codes.data();
    const std::uint64_t step = st.step;
    const std::uint64_t key0 = detail::stream_key(noise.seed(), 0);
    const bool sequential_codes = d <= 3;  // packed codes increment along a row

    std::int64_t offs[16];  // cross-row neighbor offsets, table order
    for (int k = 0; k + 1 < d; ++k) {
        offs[2 * k] = box.strides()[static_cast<std::size_t>(k)];
        offs[2 * k + 1] = -box.strides()[static_cast<std::size_t>(k)];
    }
    const int noffs = 2 * (d - 1);

    double monitor[kMaxChunks] = {0.0};
    parallel_chunks(nrows, std::min(threads, kMaxChunks), [&](std::int64_t rlo, std::int64_t rhi, int ci) {
        double mon = 0.0;
        std::vector<double> abuf(static_cast<std::size_t>(side)), bbuf(static_cast<std::size_t>(side));
        std::vector<double> w1(static_cast<std::size_t>(side)), w2(static_cast<std::size_t>(side));
        for (std::int64_t row = rlo; row < rhi; ++row) {
            const std::int64_t base = row * side;

            // drift pass
            auto table_site = [&](std::int64_t j) {
                const std::int64_t i = base + j;
                const std::uint32_t* nb = nbt + i * twod;
                double lap1 = 0.0;
                for (int k = 0; k < twod; ++k) lap1 += p1[nb[k]];
                double lap2 = 0.0;
                for (int k = 0; k < twod; ++k) lap2 += p2[nb[k]];
                abuf[static_cast<std::size_t>(j)] = c0 * p1[i] + dt * lap1;
                bbuf[static_cast<std::size_t>(j)] = c0 * p2[i] + dt * lap2;
            };
            if (side >= 4 && box.row_is_bulk(row)) {
                table_site(0);
                table_site(side - 1);
                for (std::int64_t j = 1; j + 1 < side; ++j) {
                    const std::int64_t i = base + j;
                    double lap1 = 0.0, lap2 = 0.0;
                    for (int k = 0; k < noffs; ++k) {
                        lap1 += p1[i + offs[k]];
                        lap2 += p2[i + offs[k]];
                    }
                    lap1 += p1[i + 1];
                    lap1 += p1[i - 1];
                    lap2 += p2[i + 1];
                    lap2 += p2[i - 1];
                    abuf[static_cast<std::size_t>(j)] = c0 * p1[i] + dt * lap1;
                    bbuf[static_cast<std::size_t>(j)] = c0 * p2[i] + dt * lap2;
                }
            } else {
                for (std::int64_t j = 0; j < side; ++j) table_site(j);
            }

            // noise pass: counters run along the row
            if (sequential_codes) {
                const std::uint64_t code0 = cds[base];
                for (std::int64_t j = 0; j < side; ++j) {
                    std::uint32_t r[4];
                    detail::philox10(key0, step, code0 + static_cast<std::uint64_t>(j), r);
                    w1[static_cast<std::size_t>(j)] =
                        detail::u53_to_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
                    w2[static_cast<std::size_t>(j)] =
                        detail::u53_to_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
                }
            } else {
                for (std::int64_t j = 0; j < side; ++j) {
                    std::uint32_t r[4];
                    detail::philox10(key0, step, cds[base + j], r);
                    w1[static_cast<std::size_t>(j)] =
                        detail::u53_to_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
                    w2[static_cast<std::size_t>(j)] =
                        detail::u53_to_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
                }
            }

            // constraint pass
            for (std::int64_t j = 0; j < side; ++j) {
                const std::int64_t i = base + j;
                double g1 = detail::inverse_normal_cdf_unchecked(w1[static_cast<std::size_t>(j)]);
                double g2 = detail::inverse_normal_cdf_unchecked(w2[static_cast<std::size_t>(j)]);
                if constexpr (S == Scheme::rotated) {
                    constexpr double inv_sqrt2 = 0.7071067811865475244;
                    const double r1 = (g1 + g2) * inv_sqrt2;
                    const double r2 = (-g1 + g2) * inv_sqrt2;
                    g1 = r1;
                    g2 = r2;
                }
                double a = abuf[static_cast<std::size_t>(j)] + sn * g1;
                double b = bbuf[static_cast<std::size_t>(j)] + sn * g2;

                if constexpr (S == Scheme::reflected) {
                    const ConeProjection pr = project_cone(a, b);
                    n1[i] = pr.u;
                    n2[i] = pr.v;
                    if constexpr (TL) {
                        l1[i] += pr.dl1;
                        l2[i] += pr.dl2;
                    }
                    mon += pr.u + pr.v;
                } else if constexpr (S == Scheme::penalized) {
                    const double q1 = inv_e1 * neg_part(p1[i]);
                    const double q2 = inv_e2 * neg_part(p2[i] - p1[i]);
                    a += dt * (q1 - q2);
                    b += dt * q2;
                    n1[i] = a;
                    n2[i] = b;
                    if constexpr (TL) {
                        l1[i] += dt * q1;
                        l2[i] += dt * q2;
                    }
                    mon += a + b;
                } else if constexpr (S == Scheme::smoothed) {
                    const double q1 = -tables.wall->prime(p1[i]);
                    const double q2 = -tables.gap->prime(p2[i] - p1[i]);
                    a += dt * (q1 - q2);
                    b += dt * q2;
                    n1[i] = a;
                    n2[i] = b;
                    if constexpr (TL) {
                        l1[i] += dt * q1;
                        l2[i] += dt * q2;
                    }
                    mon += a + b;
                } else if constexpr (S == Scheme::wall_only) {
                    const double u = a > 0.0 ? a : 0.0;
                    const double v = b > u ? b : u;
                    n1[i] = u;
                    n2[i] = v;
                    if constexpr (TL) {
                        l1[i] += u - a;
                        l2[i] += v - b;
                    }
                    mon += u + v;
                } else if constexpr (S == Scheme::no_wall) {
                    const double v = b > a ? b : a;
                    n1[i] = a;
                    n2[i] = v;
                    if constexpr (TL) l2[i] += v - b;
                    mon += a + v;
                } else if constexpr (S == Scheme::single) {
                    const double u = a > 0.0 ? a : 0.0;
                    n1[i] = u;
                    n2[i] = p2[i];
                    if constexpr (TL) l1[i] += u - a;
                    mon += u;
                } else if constexpr (S == Scheme::rotated) {
                    const double q1 = 0.5 * inv_e1 * neg_part(p1[i] - p2[i]);
                    const double q2 = 2.0 * inv_e2 * neg_part(p2[i]);
                    a += dt * q1;
                    b += dt * (q2 - q1);
                    n1[i] = a;
                    n2[i] = b;
                    if constexpr (TL) {
                        l1[i] += dt * q1;
                        l2[i] += dt * q2;
                    }
                    mon += a + b;
                }
            }
        }
        monitor[ci] = mon;
    });

    for (int c = 0; c < kMaxChunks; ++c) {
        if (std::isfinite(monitor[c])) continue;
        for (std::int64_t i = 0; i < vol; ++i)
            if (!std::isfinite(n1[i]) || !std::isfinite(n2[i])) throw NumericalFailure(i, step);
        throw NumericalFailure(-1, step);
    }

    st.phi1.data.swap(next1);
    st.phi2.data.swap(next2);
    st.step += 1;
    st.t = static_cast<double>(st.step) * dt;
}

void advance_dispatch(InterfacePair& st, const SimConfig& cfg, const NoiseStream& noise,
                      const std::vector<std::uint64_t>& codes, PenaltyTables tables,
                      std::vector<double>& next1, std::vector<double>& next2, int threads) {
    auto go = [&]<Scheme S>() {
        if (cfg.track_local_times)
            advance<S, true>(st, cfg, noise, codes, tables, next1, next2, threads);
        else
            advance<S, false>(st, cfg, noise, codes, tables, next1, next2, threads);
    };
    switch (cfg.scheme) {
        case Scheme::reflected: go.template operator()<Scheme::reflected>(); break;
        case Scheme::penalized: go.template operator()<Scheme::penalized>(); break;
        case Scheme::smoothed: go.template operator()<Scheme::smoothed>(); break;
        case Scheme::wall_only: go.template operator()<Scheme::wall_only>(); break;
        case Scheme::no_wall: go.template operator()<Scheme::no_wall>(); break;
        case Scheme::single: go.template operator()<Scheme::single>(); break;
        case Scheme::rotated: go.template operator()<Scheme::rotated>(); break;
    }
}

// Shared scratch for the one-shot step_* helpers.
void one_step(InterfacePair& s, Scheme scheme, const NoiseStream& noise, double dt,
              const PenaltyParams* eps) {
    SimConfig cfg;
    cfg.d = s.phi1.box->dim();
    cfg.N = s.phi1.box->halfwidth();
    cfg.dt = dt;
    cfg.T = dt;
    cfg.scheme = scheme;
    if (eps) cfg.penalty = *eps;
    cfg.validate();
    const auto codes = site_codes(*s.phi1.box);
    std::vector<double> next1 = s.phi1.data, next2 = s.phi2.data;
    PenaltyTables tables;
    std::optional<MollifiedPenalty> t1, t2;
    if (scheme == Scheme::smoothed) {
        t1.emplace(eps->eps1, eps->delta);
        t2.emplace(eps->eps2, eps->delta);
        tables.wall = &*t1;
        tables.gap = &*t2;
    }
    advance_dispatch(s, cfg, noise, codes, tables, next1, next2, 1);
}

}  // namespace

void step_reflected(InterfacePair& s, const NoiseStream& noise, double dt) {
    one_step(s, Scheme::reflected, noise, dt, nullptr);
}
void step_penalized(InterfacePair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps) {
    one_step(s, Scheme::penalized, noise, dt, &eps);
}
void step_smoothed(InterfacePair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps) {
    one_step(s, Scheme::smoothed, noise, dt, &eps);
}
void step_wall_only(InterfacePair& s, const NoiseStream& noise, double dt) {
    one_step(s, Scheme::wall_only, noise, dt, nullptr);
}
void step_no_wall(InterfacePair& s, const NoiseStream& noise, double dt) {
    one_step(s, Scheme::no_wall, noise, dt, nullptr);
}
void step_single_reflected(InterfacePair& s, const NoiseStream& noise, double dt) {
    one_step(s, Scheme::single, noise, dt, nullptr);
}

void step_rotated(RotatedPair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps) {
    InterfacePair tmp(*s.psi1.box);
    tmp.phi1.data = s.psi1.data;
    tmp.phi2.data = s.psi2.data;
    tmp.ell1 = s.lhat1;
    tmp.ell2 = s.lhat2;
    tmp.t = s.t;
    tmp.step = s.step;
    one_step(tmp, Scheme::rotated, noise, dt, &eps);
    s.psi1.data = tmp.phi1.data;
    s.psi2.data = tmp.phi2.data;
    s.lhat1 = tmp.ell1;
    s.lhat2 = tmp.ell2;
    s.t = tmp.t;
    s.step = tmp.step;
}

Simulator::Simulator(const SimConfig& cfg, std::uint64_t seed, int threads)
    : cfg_(cfg),
      box_(std::make_shared<const LatticeBox>(cfg.d, cfg.N)),
      noise_(seed),
      codes_(site_codes(*box_)),
      state_(*box_),
      threads_(std::max(1, std::min(threads, kMaxChunks))) {
    cfg_.validate();
    if (cfg_.scheme == Scheme::smoothed) {
        table1_.emplace(cfg_.penalty.eps1, cfg_.penalty.delta);
        table2_.emplace(cfg_.penalty.eps2, cfg_.penalty.delta);
    }
    sample_initial();
}

void Simulator::sample_initial() {
    InterfacePair init = initial_sample(*box_, cfg_.initial, noise_, cfg_.boundary1, cfg_.boundary2);
    if (cfg_.scheme == Scheme::rotated) {
        const RotatedPair rot = rotate(init);
        state_.phi1.data = rot.psi1.data;
        state_.phi2.data = rot.psi2.data;
        state_.ell1 = rot.lhat1;
        state_.ell2 = rot.lhat2;
    } else {
        state_.phi1.data = init.phi1.data;
        state_.phi2.data = init.phi2.data;
        state_.ell1 = init.ell1;
        state_.ell2 = init.ell2;
    }
    state_.t = 0.0;
    state_.step = 0;
    next1_ = state_.phi1.data;
    next2_ = state_.phi2.data;
}

void Simulator::set_state(const InterfacePair& s) {
    if (s.phi1.box->dim() != box_->dim() || s.phi1.box->halfwidth() != box_->halfwidth())
        throw std::invalid_argument("Simulator::set_state: box mismatch");
    state_.phi1.data = s.phi1.data;
    state_.phi2.data = s.phi2.data;
    state_.ell1 = s.ell1;
    state_.ell2 = s.ell2;
    state_.t = s.t;
    state_.step = s.step;
    next1_ = state_.phi1.data;  // refresh frozen halo tails
    next2_ = state_.phi2.data;
}

void Simulator::step() {
    PenaltyTables tables;
    if (cfg_.scheme == Scheme::smoothed) {
        tables.wall = &*table1_;
        tables.gap = &*table2_;
    }
    advance_dispatch(state_, cfg_, noise_, codes_, tables, next1_, next2_, threads_);
}

void Simulator::run_steps(std::uint64_t n) {
    for (std::uint64_t k = 0; k < n; ++k) step();
}

std::uint64_t Simulator::steps_for(double t) const {
    if (t < 0.0) throw std::invalid_argument("steps_for: negative time");
    const double raw = t / cfg_.dt;
    const auto n = static_cast<std::uint64_t>(std::llround(raw));
    if (std::abs(static_cast<double>(n) * cfg_.dt - t) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument("steps_for: time is not a multiple of dt");
    return n;
}

TrajectoryRecord run_trajectory(const SimConfig& cfg, std::uint64_t seed, const TrajectoryRequest& req,
                                int threads) {
    cfg.validate();
    Simulator sim(cfg, seed, threads);

    std::vector<std::uint64_t> target_steps;
    target_steps.reserve(req.times.size());
    for (std::size_t k = 0; k < req.times.size(); ++k) {
        const double t = req.times[k];
        if (t > cfg.T * (1.0 + 1e-12)) throw std::invalid_argument("run_trajectory: observation time beyond T");
        if (k > 0 && t < req.times[k - 1]) throw std::invalid_argument("run_trajectory: times must be nondecreasing");
        target_steps.push_back(sim.steps_for(t));
    }

    std::vector<std::int64_t> site_idx;
    site_idx.reserve(req.sites.size());
    for (const Coord& x : req.sites) site_idx.push_back(sim.box().index_of(x));

    TrajectoryRecord rec;
    auto observe = [&](double t_obs) {
        rec.times.push_back(t_obs);
        const InterfacePair& st = sim.state();
        std::vector<double> v1, v2, e1, e2;
        for (std::int64_t i : site_idx) {
            v1.push_back(st.phi1[i]);
            v2.push_back(st.phi2[i]);
            if (req.record_local_times) {
                e1.push_back(st.ell1[static_cast<std::size_t>(i)]);
                e2.push_back(st.ell2[static_cast<std::size_t>(i)]);
            }
        }
        rec.phi1.push_back(std::move(v1));
        rec.phi2.push_back(std::move(v2));
        if (req.record_local_times) {
            rec.ell1.push_back(std::move(e1));
            rec.ell2.push_back(std::move(e2));
        }
        if (req.norm_r > 0.0) rec.norms.push_back(weighted_norm(st.phi1, st.phi2, req.norm_r));
    };

    for (std::size_t k = 0; k < target_steps.size(); ++k) {
        while (sim.state().step < target_steps[k]) sim.step();
        observe(req.times[k]);
    }
    const std::uint64_t final_step = sim.steps_for(cfg.T);
    while (sim.state().step < final_step) sim.step();

    const InterfacePair& st = sim.state();
    std::uint64_t h = fnv1a_init();
    h = fnv1a(st.phi1.data.data(), st.phi1.data.size() * sizeof(double), h);
    h = fnv1a(st.phi2.data.data(), st.phi2.data.size() * sizeof(double), h);
    h = fnv1a(st.ell1.data(), st.ell1.size() * sizeof(double), h);
    h = fnv1a(st.ell2.data(), st.ell2.size() * sizeof(double), h);
    h = fnv1a(&st.step, sizeof(st.step), h);
    rec.final_checksum = h;
    return rec;
}

}  // namespace tli
