#pragma once

#include <functional>
#include <vector>

namespace mps {

/// Result of an adaptive quadrature; `error` is the accumulated Kronrod
/// error estimate over all subintervals.
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7-15) integration of f over [a, b].
QuadratureResult integrate(const Integrand& f, double a, double b,
                           double abs_tol = 0.0, double rel_tol = 1e-12,
                           int max_intervals = 4000);

/// Same, but with the interval pre-split at the given interior breakpoints
/// (points outside (a,b) are ignored).
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const std::vector<double>& breakpoints,
                           double abs_tol = 0.0, double rel_tol = 1e-12,
                           int max_intervals = 4000);

/// Integral of f over [a, +inf) through the substitution t = a + u/(1-u).
QuadratureResult integrate_to_infinity(const Integrand& f, double a,
                                       double abs_tol = 0.0,
                                       double rel_tol = 1e-12,
                                       int max_intervals = 4000);

/// Average of a 2*pi-periodic integrand by the composite trapezoid rule
/// with node doubling until two successive estimates differ by less than
/// rel_tol (spectrally accurate for smooth periodic integrands).
QuadratureResult periodic_average(const Integrand& f, double rel_tol = 1e-12,
                                  int initial_nodes = 16,
                                  int max_nodes = 1 << 22);

/// Fixed-node trapezoid average of a 2*pi-periodic integrand.
double periodic_average_fixed(const Integrand& f, int nodes);

/// Total measure of the unit n-sphere S^n embedded in R^{n+1}
/// (e.g. n=1 gives 2*pi, n=2 gives 4*pi).
double unit_sphere_measure(int n);

}  // namespace mps
