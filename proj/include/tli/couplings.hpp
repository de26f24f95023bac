#ifndef TLI_COUPLINGS_HPP
#define TLI_COUPLINGS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tli/dynamics.hpp"

namespace tli {

// Outcome of one coupling experiment: the largest signed violation of the
// tested inequality over every sampled (time, site, layer) and replica.
// Negative max_violation means the ordering held with margin.
struct CouplingReport {
    std::string experiment;
    std::uint64_t seed = 0;
    int replicas = 0;
    std::int64_t samples = 0;
    double max_violation = 0.0;
    double violation_rate = 0.0;  // fraction of samples above tolerance
    double tolerance = 0.0;
    bool pass = false;

    void finish() { pass = max_violation <= tolerance; }
};

struct CouplingOptions {
    int replicas = 50;
    double tolerance = 1e-8;
    std::uint64_t seed = 1;
    int check_every = 1;  // steps between comparisons
    int threads = 1;
};

// Phi^Lambda <= Phi^Lambda' for nested boxes under common noise
// (requires supp Phi_0 inside the smaller box).
CouplingReport check_box_monotonicity(const SimConfig& base, int N_small, int N_large,
                                      const CouplingOptions& opt);

// Phi^Lambda <= Phi with the infinite system proxied by a box with
// N_proxy >= 4 N, valid for T <= N_proxy^2 / 8.
CouplingReport check_infinite_comparison(const SimConfig& base, int N, int N_proxy,
                                         const CouplingOptions& opt);

// Ordered initial data stay ordered under the smoothed dynamics, and the
// summed difference is dominated by the heat kernel smoothing of the initial
// difference.  `offset` is added to both layers of the second copy.
CouplingReport check_initial_monotonicity(const SimConfig& base, double offset,
                                          const CouplingOptions& opt);

// Monotonicity in eps1 of the penalized system along a decreasing chain
// (eps2 fixed): Phi^{eps} <= Phi^{eps'} when eps1 >= eps1'.
CouplingReport check_eps1_monotonicity(const SimConfig& base, const std::vector<double>& eps1_chain,
                                       const CouplingOptions& opt);

// Monotonicity in eps2 of the rotated system along a decreasing chain
// (eps1 fixed): Psi^{eps} <= Psi^{eps'} when eps2 >= eps2'.
CouplingReport check_eps2_rotated(const SimConfig& base, const std::vector<double>& eps2_chain,
                                  const CouplingOptions& opt);

// Phi <= Phi~ (wall-only dominates reflected) and psi~ <= psi^ (no-wall gap
// dominates wall-only gap) under common noise and initial data.
CouplingReport check_aux_ordering(const SimConfig& base, const CouplingOptions& opt);

// L2 distance between the smoothed-penalized and reflected systems at time t
// along the iterated limit eps1, eps2 -> 0.
struct ConvergencePoint {
    int k = 0;
    double eps = 0.0;
    double delta = 0.0;
    double dt = 0.0;
    double distance = 0.0;  // E sum_{x,i} |phi - phi^{eps,delta}|^2
    double stderr_ = 0.0;
};
std::vector<ConvergencePoint> check_penalized_convergence(const SimConfig& base, int k_from, int k_to,
                                                          double t, const CouplingOptions& opt);

// Distributional identity psi^ =law sqrt(2) rho: means and variances at the
// requested times, compared with combined 3-standard-error bands.
struct LawIdentityPoint {
    double time = 0.0;
    double mean_gap = 0.0, se_mean_gap = 0.0;
    double mean_rho = 0.0, se_mean_rho = 0.0;
    double var_gap = 0.0, se_var_gap = 0.0;
    double var_rho = 0.0, se_var_rho = 0.0;
    double mean_mismatch = 0.0;  // |mean_gap - sqrt2 mean_rho| - 3 sigma_combined
    double var_mismatch = 0.0;   // |var_gap - 2 var_rho| - 3 sigma_combined
    bool pass = false;
};
std::vector<LawIdentityPoint> check_law_identity(const SimConfig& base, const std::vector<double>& times,
                                                 const CouplingOptions& opt);

}  // namespace tli

#endif
