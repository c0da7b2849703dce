#pragma once

#include "mps/geometry.hpp"

namespace mps {

/// Point in symmetry-reduced coordinates: rho = radius in the pole plane,
/// theta = sector angle (ignored in Circular mode), s = orthogonal radius.
struct ReducedPoint {
  double rho = 0.0;
  double theta = 0.0;
  double s = 0.0;
};

/// Ring-averaged inverse-square potential of a circle of radius r,
/// evaluated at (rho, s): 1/sqrt(((r-rho)^2+s^2) ((r+rho)^2+s^2)).
/// The two factors are the squared distances to the nearest and farthest
/// point of the circle, so the product form is cancellation-free.
/// Rejects evaluation on the circle itself.
double circle_potential(double r, double rho, double s);

/// Matched asymptote of the ring potential: 1/(2 r | |y|-r |) within one
/// radius of the circle, 1/|y|^2 beyond. Validation and tolerance scaling
/// only.
double circle_potential_near_field(double r, double rho, double s);

/// Ring average of |x - y|^{-2} by node-doubling trapezoid quadrature;
/// independent oracle for circle_potential.
double circle_potential_quadrature(double r, double rho, double s);

/// Central term plus every pole of every polygon:
/// lambda0/(rho^2+s^2) + sum_l lambda_l sum_i 1/d(i,l)^2 with
/// d^2 = (rho - r_l)^2 + 4 rho r_l sin^2((theta - phi_l - 2 pi i/k)/2) + s^2.
double polygon_potential(const PoleConfiguration& cfg, const ReducedPoint& p);

/// Mode dispatch: polygon_potential in Polygonal mode; in Circular mode
/// lambda0/(rho^2+s^2) + sum_l Lambda_l * circle_potential(r_l, rho, s).
double total_potential(const PoleConfiguration& cfg, const ReducedPoint& p);

}  // namespace mps
