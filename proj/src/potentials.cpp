#include "mps/potentials.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mps/quadrature.hpp"

namespace mps {

double circle_potential(double r, double rho, double s) {
  if (!(r > 0.0)) throw std::invalid_argument("circle_potential: r > 0");
  const double near = (r - rho) * (r - rho) + s * s;
  const double far = (r + rho) * (r + rho) + s * s;
  if (near == 0.0) {
    std::ostringstream msg;
    msg << "circle_potential: evaluation on the singular circle "
        << "(distance to circle = " << std::sqrt(near) << ")";
    throw std::invalid_argument(msg.str());
  }
  return 1.0 / std::sqrt(near * far);
}

double circle_potential_near_field(double r, double rho, double s) {
  const double t = std::hypot(rho, s);
  const double dist = std::abs(t - r);
  if (dist < r) return 1.0 / (2.0 * r * dist);
  return 1.0 / (t * t);
}

double circle_potential_quadrature(double r, double rho, double s) {
  const double base = rho * rho + r * r + s * s;
  auto integrand = [&](double phi) {
    return 1.0 / (base - 2.0 * rho * r * std::cos(phi));
  };
  const QuadratureResult res = periodic_average(integrand, 1e-12);
  if (!res.converged)
    throw std::runtime_error(
        "circle_potential_quadrature: trapezoid did not converge");
  return res.value;
}

double polygon_potential(const PoleConfiguration& cfg, const ReducedPoint& p) {
  if (cfg.mode != SymmetryMode::Polygonal)
    throw std::logic_error("polygon_potential: Polygonal mode only");
  const double t2 = p.rho * p.rho + p.s * p.s;
  if (t2 == 0.0 && cfg.lambda0 != 0.0)
    throw std::invalid_argument("polygon_potential: origin pole evaluation");
  double v = t2 > 0.0 ? cfg.lambda0 / t2 : 0.0;
  for (const Polygon& poly : cfg.polygons) {
    const double base = (p.rho - poly.radius) * (p.rho - poly.radius) +
                        p.s * p.s;
    double pole_sum = 0.0;
    for (int i = 1; i <= cfg.k; ++i) {
      const double half =
          0.5 * (p.theta - poly.phase - 2.0 * std::numbers::pi * i / cfg.k);
      const double sh = std::sin(half);
      const double d2 = base + 4.0 * p.rho * poly.radius * sh * sh;
      if (d2 == 0.0)
        throw std::invalid_argument("polygon_potential: pole evaluation");
      pole_sum += 1.0 / d2;
    }
    v += poly.mass * pole_sum;
  }
  return v;
}

double total_potential(const PoleConfiguration& cfg, const ReducedPoint& p) {
  if (cfg.mode == SymmetryMode::Polygonal) return polygon_potential(cfg, p);
  const double t2 = p.rho * p.rho + p.s * p.s;
  if (t2 == 0.0 && cfg.lambda0 != 0.0)
    throw std::invalid_argument("total_potential: origin pole evaluation");
  double v = t2 > 0.0 ? cfg.lambda0 / t2 : 0.0;
  for (size_t l = 0; l < cfg.polygons.size(); ++l)
    v += cfg.total_mass(static_cast<int>(l)) *
         circle_potential(cfg.polygons[l].radius, p.rho, p.s);
  return v;
}

}  // namespace mps
