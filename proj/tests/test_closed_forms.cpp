#include <cmath>
#include <random>

#include "doctest.h"
#include "mps/closed_forms.hpp"
#include "mps/fit.hpp"
#include "mps/quadrature.hpp"

using namespace mps;

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(HardyParameter(2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(HardyParameter(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(HardyParameter(4, 2.0), std::invalid_argument);
  CHECK_NOTHROW(HardyParameter(4, 0.999));
  CHECK_NOTHROW(HardyParameter(4, -100.0));
}

TEST_CASE("nu at pinned parameter values") {
  CHECK(HardyParameter(4, 0.75).nu() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(HardyParameter(5, -4.0).nu() ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(HardyParameter(4, 0.0).nu() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(HardyParameter(6, 0.0).hardy_threshold() == doctest::Approx(4.0));
  CHECK(HardyParameter(6, 0.0).critical_exponent() == doctest::Approx(3.0));
}

TEST_CASE("profile value at pinned points") {
  // N = 4, lambda = 0, t = 1: (4*2)^{1/2} / (1 + 1) = sqrt(2).
  RadialProfile w(HardyParameter(4, 0.0), ProfileKind::W, 1.0);
  CHECK(w.value(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(w.value(0.0), std::invalid_argument);
  CHECK_THROWS_AS(w.value(-1.0), std::invalid_argument);
}

TEST_CASE("level ratio closed form") {
  CHECK(level_ratio(HardyParameter(4, 0.75)) ==
        doctest::Approx(std::pow(0.25, 0.75)).epsilon(1e-14));
  CHECK(level_ratio(HardyParameter(5, 9.0 / 8.0)) ==
        doctest::Approx(std::pow(0.5, 0.8)).epsilon(1e-14));
  CHECK(level_ratio(HardyParameter(4, 0.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(level_ratio(HardyParameter(4, -0.5)),
                  std::invalid_argument);
}

TEST_CASE("dilation covariance") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> logt(-2.0, 2.0);
  for (double lambda : {-3.0, 0.0, 0.6}) {
    HardyParameter p(4, lambda);
    RadialProfile base(p, ProfileKind::W, 1.0);
    for (double mu : {0.1, 1.0, 10.0}) {
      RadialProfile scaled(p, ProfileKind::W, mu);
      for (int i = 0; i < 100; ++i) {
        const double t = std::pow(10.0, logt(rng));
        const double expect = std::pow(mu, -1.0) * base.value(t / mu);
        CHECK(scaled.value(t) ==
              doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("derivative matches finite differences") {
  HardyParameter p(6, 2.5);
  for (auto kind : {ProfileKind::W, ProfileKind::Z}) {
    RadialProfile prof(p, kind, 0.7);
    for (double t : {0.05, 0.3, 1.0, 4.0, 50.0}) {
      const double h = 1e-6 * t;
      const double fd = (prof.value(t + h) - prof.value(t - h)) / (2.0 * h);
      CHECK(prof.derivative(t) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("critical norm against substitution oracle") {
  // With tau = t^nu the radial integral collapses to
  // (2 A^{2*}/nu) int_0^1 tau^{N-1} (1+tau^2)^{-N} dtau,
  // an independent smooth-integrand route.
  for (int n : {4, 5, 6}) {
    for (double lambda : {-2.0, 0.0, 0.3}) {
      HardyParameter p(n, lambda);
      const double nu = p.nu();
      const double a = std::pow(n * (n - 2) * nu * nu, 0.25 * (n - 2));
      auto g = [&](double tau) {
        return std::pow(tau, n - 1.0) * std::pow(1.0 + tau * tau, -n);
      };
      const double core = integrate(g, 0.0, 1.0, 0.0, 1e-14).value;
      const double oracle =
          std::pow(unit_sphere_measure(n - 1) * 2.0 *
                       std::pow(a, p.critical_exponent()) / nu * core,
                   1.0 / p.critical_exponent());
      CHECK(w_lp_norm(p) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("normalized profile has unit critical norm") {
  for (int n : {4, 6}) {
    HardyParameter p(n, 0.4);
    RadialProfile z(p, ProfileKind::Z, 1.0);
    const double nu = p.nu();
    auto integrand = [&](double t) {
      const double v = z.value(t);
      return std::pow(t, n - 1.0) * std::pow(v, p.critical_exponent());
    };
    const double head =
        integrate(integrand, 0.0, 50.0, {0.1, 1.0, 10.0}, 0.0, 1e-13, 20000)
            .value;
    const double rest =
        integrate_to_infinity(integrand, 50.0, 0.0, 1e-13, 20000).value;
    const double norm = std::pow(unit_sphere_measure(n - 1) * (head + rest),
                                 1.0 / p.critical_exponent());
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("squared mass of the normalized profile") {
  // Finite only below N(N-4)/4; direct quadrature cross-check.
  HardyParameter p(6, 1.0);  // threshold N(N-4)/4 = 3
  RadialProfile z(p, ProfileKind::Z, 1.0);
  auto integrand = [&](double t) {
    const double v = z.value(t);
    return std::pow(t, 5.0) * v * v;
  };
  const double head =
      integrate(integrand, 0.0, 50.0, {0.1, 1.0, 10.0}, 0.0, 1e-13, 20000)
          .value;
  const double rest =
      integrate_to_infinity(integrand, 50.0, 0.0, 1e-12, 20000).value;
  const double direct = unit_sphere_measure(5) * (head + rest);
  CHECK(z_l2_norm_sq(p) == doctest::Approx(direct).epsilon(1e-8));

  CHECK_THROWS_AS(z_l2_norm_sq(HardyParameter(6, 3.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(z_l2_norm_sq(HardyParameter(6, 3.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(z_l2_norm_sq(HardyParameter(4, 0.5)),
                  std::invalid_argument);
  CHECK(std::isfinite(z_l2_norm_sq(HardyParameter(4, -1.0))));
}

TEST_CASE("power-law tails match predicted exponents") {
  HardyParameter p(5, 1.5);
  const auto asym = asymptotics_of(p);
  RadialProfile z(p, ProfileKind::Z, 1.0);

  Eigen::VectorXd t(6), v(6);
  for (int i = 0; i < 6; ++i) {
    t[i] = std::pow(10.0, -6 + 0.25 * i);
    v[i] = z.value(t[i]);
  }
  auto near = fit_loglog(t, v);
  CHECK(near.slope == doctest::Approx(asym.exponent_at_zero).epsilon(1e-3));
  CHECK(std::exp(near.intercept) ==
        doctest::Approx(asym.kappa0).epsilon(1e-3));

  for (int i = 0; i < 6; ++i) {
    t[i] = std::pow(10.0, 5 + 0.25 * i);
    v[i] = z.value(t[i]);
  }
  auto far = fit_loglog(t, v);
  CHECK(far.slope ==
        doctest::Approx(asym.exponent_at_infinity).epsilon(1e-3));
  CHECK(std::exp(far.intercept) ==
        doctest::Approx(asym.kappa_inf).epsilon(1e-3));
}

TEST_CASE("asymptotics track dilation") {
  HardyParameter p(4, 0.5);
  const double mu = 0.03;
  RadialProfile z(p, ProfileKind::Z, mu);
  const auto asym = asymptotics_of(z);
  const double t0 = 1e-7, tinf = 1e7;
  CHECK(z.value(t0) ==
        doctest::Approx(asym.kappa0 * std::pow(t0, asym.exponent_at_zero))
            .epsilon(1e-6));
  CHECK(z.value(tinf) ==
        doctest::Approx(asym.kappa_inf *
                        std::pow(tinf, asym.exponent_at_infinity))
            .epsilon(1e-6));
}
