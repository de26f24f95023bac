#ifndef TLI_HEATKERNEL_HPP
#define TLI_HEATKERNEL_HPP

#include <vector>

#include "tli/lattice.hpp"

namespace tli {

// Scaled modified Bessel functions e^{-z} I_n(z).  Power series below the
// seam, uniform asymptotic expansion above; the two agree to ~1e-13 at the
// switch point.  The vector variant runs Miller's backward recurrence
// normalized by e^{-z}(I_0 + 2 sum I_n) = 1.
double bessel_i0_scaled(double z);
std::vector<double> bessel_i_scaled(double z, int nmax);

// Transition kernel p_t(x,y) of the walk generated by 2*Laplacian:
// product over coordinates of e^{-4t} I_{|x_k-y_k|}(4t).
double kernel_infinite(int d, double t, const Coord& x, const Coord& y);
double kernel_infinite_p00(int d, double t);  // p_t(0,0)

// Per-coordinate truncation radius keeping lost mass below ~1e-12.
int truncation_radius(double t);

// int_0^T p_s(0,0) ds; T may be huge (asymptotic continuation beyond the
// quadrature window) or infinity for d >= 3.
double integral_p00(int d, double T);

// C_1 for d >= 3: int_0^infty p_t(0,0) dt.
double green_constant(int d);

// C_1 for d = 2: lim (1/log t) int_0^t p_s(0,0) ds = 1/(8 pi).
double log_rate_2d();
// Finite-t quotient and its Richardson extrapolation in 1/log t, used to
// verify the limit numerically.
double log_rate_2d_at(double t);
double log_rate_2d_extrapolated(double t1, double t2);

// C_2 = (sqrt(2)+1)^2 C_1 = (3 + 2 sqrt 2) C_1, for d >= 2.
double c2_constant(int d);

// 4 int_0^t p_{2r}(0,0) dr (the variance bound of the two-layer dynamics).
double variance_bound(double t, int d);

// log_d(t): (log t)^2 in d = 2, log t otherwise.
double log_d(int d, double t);

// Absorbing-boundary kernel on Lambda_N, exact in the product sine basis.
class DirichletKernel {
  public:
    DirichletKernel(int d, int N, double t);

    int dim() const { return d_; }
    int halfwidth() const { return N_; }
    double time() const { return t_; }

    // x, y with coordinates in [-N, N]
    double value(const Coord& x, const Coord& y) const;
    // one-dimensional factor, shifted indices in [0, 2N]
    double value1d(int i, int j) const;

  private:
    int d_;
    int N_;
    int side_;
    double t_;
    std::vector<double> m1d_;
};

}  // namespace tli

#endif
