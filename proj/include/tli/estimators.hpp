#ifndef TLI_ESTIMATORS_HPP
#define TLI_ESTIMATORS_HPP

#include <cstdint>
#include <vector>

#include "tli/dynamics.hpp"

namespace tli {

// Pooled height means: per observation time, the average of each layer over
// the pooling sub-grid and over replicas, with across-replica standard
// errors.  Per-replica pooled values are kept for bootstrap work.
struct HeightSeries {
    std::vector<double> times;
    std::vector<double> mean1, mean2;
    std::vector<double> stderr1, stderr2;
    int n_replicas = 0;
    int n_sites = 0;
    std::vector<std::vector<double>> rep1, rep2;  // [time][replica]
};

struct GrowthFit {
    int layer = 1;
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    int n_points = 0;
};

struct RatioEstimate {
    double ratio = 0.0;
    double stderr_ = 0.0;
    bool valid = false;  // false when the layer-1 mean is not significantly positive
};

struct VarianceCheckPoint {
    double time = 0.0;
    int layer = 1;
    double variance = 0.0;
    double var_stderr = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - (variance + 3 stderr)
    bool pass = false;
};

// Sites pooled by estimate_heights: every coordinate a multiple of `stride`
// and at distance >= min(stride, N) from the boundary.
std::vector<std::int64_t> pooling_sites(const LatticeBox& box, int stride);

// Replica/spatial pooled height means at the origin sub-grid.
// Preconditions (diffusive decorrelation): stride >= 2 sqrt(T) and box width
// 2N+1 >= 2 sqrt(T) + stride, T = last observation time.
HeightSeries estimate_heights(const SimConfig& cfg, const std::vector<double>& times, int replicas,
                              int stride, std::uint64_t seed, int workers = 1);

// OLS of (pooled mean)^2 against log_d(t) over [window_lo, window_hi];
// the slope estimates C_i / 2.
GrowthFit fit_growth(const HeightSeries& series, int layer, int d, double window_lo, double window_hi);

// mean2/mean1 near time t, averaged over the trailing window
// [t (1 - trailing_fraction), t], with a delta-method standard error.
RatioEstimate height_ratio(const HeightSeries& series, double t, double trailing_fraction = 0.2);

// (mean2 - mean1) / sqrt(log_d(t)) per time.
std::vector<double> gap_coefficient(const HeightSeries& series, int d);

// Empirical Var(phi_t(0)) across replicas against 4 int_0^t p_{2r}(0,0) dr.
std::vector<VarianceCheckPoint> variance_check(const SimConfig& cfg, const std::vector<double>& times,
                                               int replicas, std::uint64_t seed, int workers = 1);

// Circular block bootstrap standard error of the mean of a correlated
// series.
double blocked_bootstrap_stderr(const std::vector<double>& series, int block_len, int n_boot,
                                std::uint64_t seed);

}  // namespace tli

#endif
