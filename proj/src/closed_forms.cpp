#include "mps/closed_forms.hpp"

#include <stdexcept>

#include "mps/quadrature.hpp"

namespace mps {

namespace {

// Leading coefficient (N(N-2)nu^2)^{(N-2)/4} of the un-normalized profile.
double leading_coefficient(const HardyParameter& p) {
  const double nu = p.nu();
  const int n = p.dim();
  return std::pow(n * (n - 2) * nu * nu, 0.25 * (n - 2));
}

}  // namespace

HardyParameter::HardyParameter(int dim, double lambda)
    : dim_(dim), lambda_(lambda) {
  if (dim < 3) throw std::invalid_argument("HardyParameter: N >= 3 required");
  if (!(lambda < hardy_threshold()))
    throw std::invalid_argument(
        "HardyParameter: lambda must be below (N-2)^2/4");
}

double HardyParameter::hardy_threshold() const {
  const double d = dim_ - 2;
  return 0.25 * d * d;
}

double HardyParameter::nu() const {
  return std::sqrt(1.0 - lambda_ / hardy_threshold());
}

double HardyParameter::critical_exponent() const {
  return 2.0 * dim_ / (dim_ - 2.0);
}

double nu_lambda(const HardyParameter& p) { return p.nu(); }

double level_ratio(const HardyParameter& p) {
  if (p.lambda() < 0.0)
    throw std::invalid_argument(
        "level_ratio: defined for 0 <= lambda < (N-2)^2/4 only");
  const double nu2 = 1.0 - p.lambda() / p.hardy_threshold();
  return std::pow(nu2, (p.dim() - 1.0) / p.dim());
}

double w_lp_norm(const HardyParameter& p) {
  const int n = p.dim();
  const double nu = p.nu();
  const double a = leading_coefficient(p);
  const double ap = std::pow(a, p.critical_exponent());
  // Integrand of ||w||_{2*}^{2*} in radial form: A^{2*} t^{N nu - 1} /
  // (1 + t^{2 nu})^N, with weight t^{N-1} already absorbed.
  auto integrand = [&](double t) {
    return ap * std::pow(t, n * nu - 1.0) /
           std::pow(1.0 + std::pow(t, 2.0 * nu), n);
  };
  // Power tail beyond T, from (1+x)^{-N} = 1 - N x + N(N+1)/2 x^2 - ...
  auto tail = [&](double T) {
    const double t1 = std::pow(T, -n * nu) / (n * nu);
    const double t2 = -n * std::pow(T, -(n + 2.0) * nu) / ((n + 2.0) * nu);
    const double t3 = 0.5 * n * (n + 1.0) * std::pow(T, -(n + 4.0) * nu) /
                      ((n + 4.0) * nu);
    return ap * (t1 + t2 + t3);
  };
  auto tail_error = [&](double T) {
    return ap * (n * (n + 1.0) * (n + 2.0) / 6.0) *
           std::pow(T, -(n + 6.0) * nu) / ((n + 6.0) * nu);
  };
  double T = 10.0;
  const double rough =
      integrate(integrand, 0.0, T, {0.1, 1.0}, 0.0, 1e-8).value + tail(T);
  while (T < 1e12 && tail_error(T) > 1e-13 * rough) T *= 2.0;
  const QuadratureResult main =
      integrate(integrand, 0.0, T, {0.1, 1.0, 10.0}, 0.0, 1e-13, 20000);
  if (!main.converged)
    throw std::runtime_error("w_lp_norm: radial quadrature did not converge");
  const double total = unit_sphere_measure(n - 1) * (main.value + tail(T));
  return std::pow(total, 1.0 / p.critical_exponent());
}

double normalization_alpha(const HardyParameter& p) {
  return leading_coefficient(p) / w_lp_norm(p);
}

double z_l2_norm_sq(const HardyParameter& p) {
  const int n = p.dim();
  const double nu = p.nu();
  if (!(p.lambda() < 0.25 * n * (n - 4.0)))
    throw std::invalid_argument(
        "z_l2_norm_sq: finite only for lambda < N(N-4)/4");
  const double alpha = normalization_alpha(p);
  auto integrand = [&](double t) {
    const double g = std::pow(t, 1.0 - nu) + std::pow(t, 1.0 + nu);
    return std::pow(t, n - 1.0) * std::pow(g, -(n - 2.0));
  };
  const QuadratureResult head =
      integrate(integrand, 0.0, 10.0, {0.1, 1.0}, 0.0, 1e-13, 20000);
  const QuadratureResult rest =
      integrate_to_infinity(integrand, 10.0, 0.0, 1e-13, 20000);
  if (!head.converged || !rest.converged)
    throw std::runtime_error("z_l2_norm_sq: quadrature did not converge");
  return unit_sphere_measure(n - 1) * alpha * alpha *
         (head.value + rest.value);
}

RadialProfile::RadialProfile(HardyParameter p, ProfileKind kind, double mu)
    : param_(p), kind_(kind), mu_(mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("RadialProfile: mu > 0");
  alpha_ = kind == ProfileKind::W ? leading_coefficient(p)
                                  : normalization_alpha(p);
}

double RadialProfile::value(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("RadialProfile: t > 0");
  const int n = param_.dim();
  const double nu = param_.nu();
  const double s = t / mu_;
  const double g = std::pow(s, 1.0 - nu) + std::pow(s, 1.0 + nu);
  return std::pow(mu_, -0.5 * (n - 2)) * alpha_ * std::pow(g, -0.5 * (n - 2));
}

double RadialProfile::derivative(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("RadialProfile: t > 0");
  const int n = param_.dim();
  const double nu = param_.nu();
  const double s = t / mu_;
  const double g = std::pow(s, 1.0 - nu) + std::pow(s, 1.0 + nu);
  const double gp =
      (1.0 - nu) * std::pow(s, -nu) + (1.0 + nu) * std::pow(s, nu);
  return std::pow(mu_, -0.5 * n) * alpha_ * (-0.5 * (n - 2)) *
         std::pow(g, -0.5 * n) * gp;
}

AsymptoticExpansion asymptotics_of(const HardyParameter& p) {
  AsymptoticExpansion e;
  const double nu = p.nu();
  const int n = p.dim();
  e.exponent_at_zero = -0.5 * (n - 2) * (1.0 - nu);
  e.exponent_at_infinity = -0.5 * (n - 2) * (1.0 + nu);
  const double alpha = normalization_alpha(p);
  e.kappa0 = alpha;
  e.kappa_inf = alpha;
  return e;
}

AsymptoticExpansion asymptotics_of(const RadialProfile& profile) {
  AsymptoticExpansion e = asymptotics_of(profile.param());
  e.kappa0 = profile.alpha();
  e.kappa_inf = profile.alpha();
  const int n = profile.param().dim();
  const double mu = profile.mu();
  // mu^{-(N-2)/2} kappa (t/mu)^e = kappa mu^{-(N-2)/2 - e} t^e.
  e.kappa0 *= std::pow(mu, -0.5 * (n - 2) - e.exponent_at_zero);
  e.kappa_inf *= std::pow(mu, -0.5 * (n - 2) - e.exponent_at_infinity);
  return e;
}

}  // namespace mps
