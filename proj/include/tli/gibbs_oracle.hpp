#ifndef TLI_GIBBS_ORACLE_HPP
#define TLI_GIBBS_ORACLE_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "tli/dynamics.hpp"
#include "tli/noise.hpp"
#include "tli/penalty.hpp"

namespace tli {

enum class GibbsVariant { reflected, penalized, smoothed };

// Exact stationary measure on 1- or 2-site boxes, by quadrature.  The
// density exponent follows the generator of the simulated dynamics:
// exp((1/2) sum_i sum_x phi_i Delta phi_i) with zero boundary, times the
// constraint factor of the variant (hard cone indicator, exp(-W_eps) or
// exp(-W_{eps,delta})).
class SmallGibbs {
  public:
    SmallGibbs(int d, int n_sites, GibbsVariant variant, PenaltyParams params = {});

    int dim() const { return d_; }
    int sites() const { return n_; }
    GibbsVariant variant() const { return variant_; }

    // density in the layer variables, u = lower layer, v = upper layer
    double unnormalized_density(const std::vector<double>& u, const std::vector<double>& v) const;
    double normalizer() const { return normalizer_; }

    double mean_lower(int site = 0) const;
    double mean_upper(int site = 0) const;
    double mean_gap(int site = 0) const;

    enum class Marginal { lower, upper, gap };
    // CDF of a site-0 marginal at the given (increasing) abscissae
    std::vector<double> marginal_cdf(Marginal m, const std::vector<double>& xs) const;

    // total variation distance to another single-site oracle of the same d
    double tv_distance(const SmallGibbs& other) const;

    // exact draws by rejection from the Gaussian envelope; returns (u, v)
    // pairs for every site concatenated per draw
    std::vector<std::pair<double, double>> sample(std::int64_t n, const NoiseStream& noise) const;

    double truncation() const { return trunc_; }

  private:
    double quad_moment(int site, int which) const;  // which: 0 lower, 1 upper, 2 gap

    int d_;
    int n_;
    GibbsVariant variant_;
    PenaltyParams params_;
    double trunc_;
    double normalizer_;
};

struct StationarityReport {
    double ks_lower = 0.0;
    double ks_upper = 0.0;
    double ks_gap = 0.0;
    std::int64_t n_samples = 0;
    double dt = 0.0;
    bool enough_samples = true;
    double max_ks() const { return std::max(ks_lower, std::max(ks_upper, ks_gap)); }
};

// Long-run marginal comparison of the single-site dynamics against the
// quadrature oracle: burn in, then record (phi1, phi2) every sample_gap time
// units and compute Kolmogorov-Smirnov distances of the three marginals.
StationarityReport stationarity_test(const SimConfig& cfg, const SmallGibbs& oracle, double burn_in_time,
                                     std::int64_t n_samples, double sample_gap, std::uint64_t seed);

}  // namespace tli

#endif
