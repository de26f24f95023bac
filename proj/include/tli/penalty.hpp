#ifndef TLI_PENALTY_HPP
#define TLI_PENALTY_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace tli {

struct PenaltyParams {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double delta = 0.0;

    void validate() const;  // throws on eps <= 0 or delta outside (0, 1]
};

// chi_alpha(u) = (u^-)^2 / (2 alpha) and its derivative u/alpha on u < 0.
double chi(double alpha, double u);
double chi_prime(double alpha, double u);

// Smoothed penalty chi_{alpha,delta} = rho_delta * chi_alpha(. + delta),
// with rho the standard bump on (-1,1).  Evaluation is by Gauss-Legendre
// quadrature restricted to the sub-interval where the shifted argument is
// negative; outside (-2 delta, 0) both value and derivative have closed
// forms (quadratic / linear / zero).
double chi_smoothed(double alpha, double delta, double u);
double chi_smoothed_prime(double alpha, double delta, double u);

// Tabulated chi'_{alpha,delta} for the drift loops: monotone cubic
// interpolant on a 4096-point grid spanning [-8 delta - 8 sqrt(alpha), delta],
// with exact linear/zero tails.  Construction is the only non-const phase;
// evaluation is pure.
class MollifiedPenalty {
  public:
    MollifiedPenalty(double alpha, double delta);

    double alpha() const { return alpha_; }
    double delta() const { return delta_; }

    double prime(double u) const;        // interpolated chi'
    double prime_exact(double u) const;  // quadrature route, for tests

  private:
    struct Segment {
        double lo = 0.0, hi = 0.0, inv_h = 0.0;
        std::vector<double> y;
        std::vector<double> slope;
        double eval(double u) const;
    };
    double alpha_;
    double delta_;
    Segment tail_;   // [-8d-8sqrt(a), -2d]: linear region
    Segment inner_;  // [-2d, 0]: curved region
};

// Pair potentials W_eps(u,v) = chi_{e1}(u) + chi_{e2}(v-u) and the mollified
// W_{eps,delta}; gradients returned as (dW/du, dW/dv).
double w_eps(const PenaltyParams& p, double u, double v);
std::pair<double, double> w_eps_grad(const PenaltyParams& p, double u, double v);
double w_eps_delta(const PenaltyParams& p, double u, double v);
std::pair<double, double> w_eps_delta_grad(const PenaltyParams& p, double u, double v);

// Bump mollifier (unit mass, support [-1,1]) and its second moment; used by
// the smoothing quadrature and exposed for tests.
double mollifier_rho(double u);
double mollifier_second_moment();

namespace detail {
// Gauss-Legendre nodes/weights on [-1,1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(std::size_t n);
}  // namespace detail

}  // namespace tli

#endif
