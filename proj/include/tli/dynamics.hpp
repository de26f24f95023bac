#ifndef TLI_DYNAMICS_HPP
#define TLI_DYNAMICS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tli/lattice.hpp"
#include "tli/noise.hpp"
#include "tli/penalty.hpp"

namespace tli {

// The stochastic systems implemented by the stepper.
//   reflected  two layers, per-site projection onto {0 <= u <= v}
//   penalized  soft wall/exclusion drifts eps^-1 (.)^-
//   smoothed   mollified penalty drifts -chi'_{eps,delta}
//   wall_only  layer 1 reflected at 0 only, layer 2 reflected above layer 1
//   no_wall    layer 1 free, layer 2 reflected above layer 1
//   single     one layer reflected at 0 (the rho dynamics)
//   rotated    the 45-degree rotation of the penalized system
enum class Scheme { reflected, penalized, smoothed, wall_only, no_wall, single, rotated };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// Per-site product initial law: phi1 = |g1| sigma1, phi2 = phi1 + |g2| sigma2,
// restricted to Lambda_{support_N} when support_N >= 0 (zero elsewhere).
struct InitialLaw {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    int support_N = -1;
};

struct SimConfig {
    int d = 1;
    int N = 0;
    double dt = 0.0;
    double T = 0.0;
    Scheme scheme = Scheme::reflected;
    PenaltyParams penalty;  // penalized / smoothed / rotated only
    InitialLaw initial;
    double boundary1 = 0.0;  // frozen exterior values
    double boundary2 = 0.0;
    bool track_local_times = true;  // off saves bandwidth when ell is not observed

    bool uses_penalty() const {
        return scheme == Scheme::penalized || scheme == Scheme::smoothed || scheme == Scheme::rotated;
    }
    // Throws std::invalid_argument on violated stability bounds
    // (dt <= 1/(8d), and dt <= min(eps1,eps2)/4 for penalty schemes).
    void validate() const;
};

// Raised when a non-finite field value is produced.
struct NumericalFailure : std::runtime_error {
    NumericalFailure(std::int64_t site_, std::uint64_t step_);
    std::int64_t site;
    std::uint64_t step;
};

// Euclidean projection of (a, b) onto the cone {0 <= u <= v}, with the
// displacement decomposed along the local-time directions (1,0) and (-1,1):
// u - a = dl1 - dl2, v - b = dl2, both dl >= 0.  The complementarity
// products u * dl1 and (v - u) * dl2 vanish exactly, including in floating
// point.
struct ConeProjection {
    double u, v, dl1, dl2;
};
inline ConeProjection project_cone(double a, double b) {
    if (a >= 0.0) {
        if (b >= a) return {a, b, 0.0, 0.0};
        const double m = 0.5 * (a + b);
        if (m >= 0.0) return {m, m, 0.0, m - b};  // exclusion edge u = v
        return {0.0, 0.0, -(a + b), -b};          // vertex
    }
    if (b >= 0.0) return {0.0, b, -a, 0.0};  // wall face u = 0
    return {0.0, 0.0, -(a + b), -b};         // vertex
}

// State of the two-layer system: heights and accumulated local times.
struct InterfacePair {
    explicit InterfacePair(const LatticeBox& box);

    ScalarField phi1, phi2;
    std::vector<double> ell1, ell2;
    double t = 0.0;
    std::uint64_t step = 0;

    bool cone_ok(double tol = 0.0) const;  // 0 <= phi1 <= phi2 on box sites
};

// The clockwise-45-degree rotation of an InterfacePair:
// psi1 = (phi1 + phi2)/sqrt2, psi2 = (-phi1 + phi2)/sqrt2,
// lhat1 = ell1/sqrt2, lhat2 = sqrt2 * ell2.
struct RotatedPair {
    explicit RotatedPair(const LatticeBox& box);

    ScalarField psi1, psi2;
    std::vector<double> lhat1, lhat2;
    double t = 0.0;
    std::uint64_t step = 0;
};

RotatedPair rotate(const InterfacePair& phi);
InterfacePair unrotate(const RotatedPair& psi);

InterfacePair initial_sample(const LatticeBox& box, const InitialLaw& law, const NoiseStream& noise,
                             double boundary1 = 0.0, double boundary2 = 0.0);

// Time-stepping engine.  One Simulator advances one trajectory; independent
// replicas use independent Simulators (typically with seeds derived from a
// base seed).  Stepping is deterministic in (seed, config) regardless of the
// thread count.
class Simulator {
  public:
    Simulator(const SimConfig& cfg, std::uint64_t seed, int threads = 1);

    const SimConfig& config() const { return cfg_; }
    const LatticeBox& box() const { return *box_; }
    const NoiseStream& noise() const { return noise_; }
    const std::vector<std::uint64_t>& codes() const { return codes_; }

    InterfacePair& state() { return state_; }
    const InterfacePair& state() const { return state_; }
    void set_state(const InterfacePair& s);
    void sample_initial();  // draw the configured initial law (rotating it for the rotated scheme)

    void step();
    void run_steps(std::uint64_t n);
    std::uint64_t steps_for(double t) const;  // t must be a multiple of dt (1e-9 slack)
    double time() const { return state_.t; }

  private:
    SimConfig cfg_;
    std::shared_ptr<const LatticeBox> box_;
    NoiseStream noise_;
    std::vector<std::uint64_t> codes_;
    InterfacePair state_;
    std::vector<double> next1_, next2_;
    std::optional<MollifiedPenalty> table1_, table2_;
    int threads_;
};

// Single steps of each system on an existing state (test-facing wrappers
// around the same kernel the Simulator uses).
void step_reflected(InterfacePair& s, const NoiseStream& noise, double dt);
void step_penalized(InterfacePair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps);
void step_smoothed(InterfacePair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps);
void step_wall_only(InterfacePair& s, const NoiseStream& noise, double dt);
void step_no_wall(InterfacePair& s, const NoiseStream& noise, double dt);
void step_single_reflected(InterfacePair& s, const NoiseStream& noise, double dt);
void step_rotated(RotatedPair& s, const NoiseStream& noise, double dt, const PenaltyParams& eps);

// Streaming observation of a trajectory; memory is bounded by the request,
// not the path length.
struct TrajectoryRequest {
    std::vector<double> times;  // nondecreasing multiples of dt within [0, T]
    std::vector<Coord> sites;   // record both layers at these sites
    bool record_local_times = false;
    double norm_r = 0.0;  // record ||Phi||_r when positive
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> phi1, phi2;  // [time][site]
    std::vector<std::vector<double>> ell1, ell2;
    std::vector<double> norms;
    std::uint64_t final_checksum = 0;
};

TrajectoryRecord run_trajectory(const SimConfig& cfg, std::uint64_t seed, const TrajectoryRequest& req,
                                int threads = 1);

}  // namespace tli

#endif
