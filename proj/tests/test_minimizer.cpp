#include <cmath>
#include <random>

#include "doctest.h"
#include "mps/minimizer.hpp"

using namespace mps;

namespace {

PoleConfiguration central_cfg(int dim, double lambda0, SymmetryMode mode,
                              int k = 1) {
  PoleConfiguration cfg;
  cfg.dim = dim;
  cfg.lambda0 = lambda0;
  cfg.mode = mode;
  cfg.k = k;
  return cfg;
}

// Weighted L^2 distance over the interior |y| <= cutoff; the square
// integral of the singular profiles diverges at infinity, so the region
// near the Dirichlet truncation would otherwise dominate the comparison.
double interior_l2_error(const ReducedGrid& g, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& b, double cutoff) {
  const int nr = int(g.rho_nodes().size());
  const int nt = int(g.theta_nodes().size());
  const int ns = int(g.s_nodes().size());
  const Eigen::VectorXd& m = g.volume_weights();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int l = 0; l < ns; ++l) {
        if (std::hypot(g.rho_nodes()[i], g.s_nodes()[l]) > cutoff) continue;
        const Eigen::Index q = g.index(i, j, l);
        num += m[q] * (a[q] - b[q]) * (a[q] - b[q]);
        den += m[q] * a[q] * a[q];
      }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("zero-mass level matches the sampled reference profile") {
  auto cfg = central_cfg(4, 0.0, SymmetryMode::Circular);
  MeshSpec spec;
  spec.rho_nodes = 48;
  spec.s_nodes = 48;
  spec.r_trunc = 40.0;
  spec.s_trunc = 40.0;
  auto g = ReducedGrid::build(spec, cfg);
  SolverOptions opts;
  opts.tol = 1e-7;
  auto res = minimize_quotient(g, cfg, InitPreset::OriginProfile, opts);

  RadialProfile talenti(HardyParameter(4, 0.0), ProfileKind::Z, 0.5);
  const Field ref = sample_closed_form(g, cfg, talenti, std::nullopt);
  const double ref_level = rayleigh_quotient(ref, g, cfg).quotient;
  CHECK(res.level <= ref_level + 1e-12);
  CHECK(res.level == doctest::Approx(ref_level).epsilon(0.03));

  // Monotone descent along the whole trace.
  for (size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i].quotient <=
          res.trace[i - 1].quotient + 1e-12 * std::abs(res.level));

  // Nonnegative minimizer, unit critical norm.
  CHECK(res.field.values().minCoeff() >= 0.0);
  CHECK(res.breakdown.lp_integral == doctest::Approx(1.0).epsilon(1e-10));

  // Homogeneity: a rescaled start reaches the same level.
  Field big(10.0 * ref.values());
  auto res2 = minimize_quotient(g, cfg, big, opts);
  CHECK(res2.level == doctest::Approx(res.level).epsilon(1e-5));
}

TEST_CASE("central-mass minimizer recovers the closed-form profile") {
  const double lambda = 0.5;
  auto cfg = central_cfg(4, lambda, SymmetryMode::Circular);
  MeshSpec spec;
  spec.rho_nodes = 64;
  spec.s_nodes = 64;
  spec.r_trunc = 40.0;
  spec.s_trunc = 40.0;
  auto g = ReducedGrid::build(spec, cfg);
  SolverOptions opts;
  opts.tol = 1e-7;
  auto res = minimize_quotient(g, cfg, InitPreset::OriginProfile, opts);
  CHECK(res.converged);
  CHECK(res.residual <= 1e-6);  // Euler-Lagrange residual in the dual norm

  // Level ratio against the zero-mass run tracks the closed form.
  auto cfg0 = central_cfg(4, 0.0, SymmetryMode::Circular);
  auto res0 = minimize_quotient(g, cfg0, InitPreset::OriginProfile, opts);
  CHECK(res.level / res0.level ==
        doctest::Approx(level_ratio(HardyParameter(4, lambda))).epsilon(0.03));

  // Fit the dilation scale and compare profiles in weighted L^2.
  const double p = 4.0;  // critical exponent for N = 4
  double best_err = 1e300;
  for (int i = 0; i <= 160; ++i) {
    const double mu = 0.05 * std::pow(40.0, i / 160.0);
    RadialProfile prof(HardyParameter(4, lambda), ProfileKind::Z, mu);
    Eigen::VectorXd z = sample_closed_form(g, cfg, prof, std::nullopt).values();
    z /= std::pow(g.lp_quadrature().integral(z, p), 1.0 / p);
    best_err = std::min(
        best_err, interior_l2_error(g, res.field.values(), z, 5.0));
  }
  CHECK(best_err <= 0.02);
}

TEST_CASE("assembled gradient matches directional finite differences") {
  auto cfg = central_cfg(4, 0.3, SymmetryMode::Circular);
  MeshSpec spec;
  spec.rho_nodes = 32;
  spec.s_nodes = 32;
  spec.r_trunc = 40.0;
  spec.s_trunc = 40.0;
  auto g = ReducedGrid::build(spec, cfg);
  const auto w = assemble_potential(g, cfg);
  SolverOptions opts;
  opts.max_iterations = 50;  // a generic non-stationary point
  auto res = minimize_quotient(g, cfg, w,
                               initial_field(g, cfg, InitPreset::FlatBump),
                               opts);
  const Eigen::VectorXd& u = res.field.values();
  const double p = 4.0;
  const double q = res.level;

  // Reassemble the quotient gradient from the public pieces.
  const Eigen::VectorXd c = combined_potential(w, cfg);
  const auto& lp = g.lp_quadrature();
  const Eigen::VectorXd v = lp.sampler * u;
  const Eigen::VectorXd grad =
      2.0 * (g.stiffness() * u - (c.array() * u.array()).matrix() -
             q * (lp.sampler.transpose() *
                  (lp.weights.array() * v.array().abs().pow(p - 2.0) *
                   v.array())
                      .matrix()));
  const double gnorm = grad.norm();

  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd d(u.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = gauss(rng);
    d.normalize();
    const double qp =
        rayleigh_quotient(Field(u + eps * d), g, cfg, w).quotient;
    const double qm =
        rayleigh_quotient(Field(u - eps * d), g, cfg, w).quotient;
    const double fd = (qp - qm) / (2.0 * eps);
    CHECK(fd == doctest::Approx(grad.dot(d)).epsilon(1e-4).scale(gnorm));
  }
}

TEST_CASE("theta-independent start stays theta-independent") {
  auto cfg = central_cfg(5, 0.4, SymmetryMode::Polygonal, 4);
  MeshSpec spec;
  spec.rho_nodes = 24;
  spec.s_nodes = 24;
  spec.theta_nodes = 6;
  spec.r_trunc = 30.0;
  spec.s_trunc = 30.0;
  auto g = ReducedGrid::build(spec, cfg);
  SolverOptions opts;
  opts.tol = 1e-6;
  auto res = minimize_quotient(g, cfg, InitPreset::FlatBump, opts);
  const Eigen::VectorXd& u = res.field.values();
  const double scale = u.maxCoeff();
  const int nr = int(g.rho_nodes().size());
  const int nt = int(g.theta_nodes().size());
  const int ns = int(g.s_nodes().size());
  for (int i = 0; i < nr; ++i)
    for (int l = 0; l < ns; ++l) {
      double lo = 1e300, hi = -1e300;
      for (int j = 0; j < nt; ++j) {
        lo = std::min(lo, u[g.index(i, j, l)]);
        hi = std::max(hi, u[g.index(i, j, l)]);
      }
      CHECK(hi - lo <= 1e-10 * scale);
    }
}

TEST_CASE("level family is monotone in the central mass and mode-ordered") {
  MeshSpec spec;
  spec.rho_nodes = 32;
  spec.s_nodes = 32;
  spec.r_trunc = 30.0;
  spec.s_trunc = 30.0;
  SolverOptions opts;
  opts.tol = 1e-6;
  opts.multistart_iterations = 40;

  const double base =
      estimate_level_family(spec, 4, 0.0, SymmetryMode::Circular, 1, opts)
          .level;
  const double circ =
      estimate_level_family(spec, 4, 0.25, SymmetryMode::Circular, 1, opts)
          .level;
  CHECK(circ < base);
  CHECK(circ / base ==
        doctest::Approx(level_ratio(HardyParameter(4, 0.25))).epsilon(0.03));

  spec.theta_nodes = 4;
  const double sect =
      estimate_level_family(spec, 4, 0.25, SymmetryMode::Polygonal, 4, opts)
          .level;
  CHECK(sect <= circ * (1.0 + 1e-3));

  CHECK_THROWS_AS(
      estimate_level_family(spec, 4, 1.5, SymmetryMode::Circular, 1, opts),
      std::invalid_argument);
}

TEST_CASE("dilation scan dips below the reference iff the ring mass helps") {
  MeshSpec spec;
  spec.rho_nodes = 56;
  spec.s_nodes = 56;
  spec.r_trunc = 60.0;
  spec.s_trunc = 60.0;
  const std::vector<double> mus = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0};

  PoleConfiguration helpful = central_cfg(4, 0.3, SymmetryMode::Circular);
  helpful.polygons = {{1.0, 0.5, 0.0}};
  auto g = ReducedGrid::build(spec, helpful);
  auto scan = mu_scan_upper_bound(g, helpful, std::nullopt, 0.3, mus);
  CHECK(scan.dip_detected);
  CHECK(scan.best_bound < scan.reference_bounds.front());

  PoleConfiguration harmful = helpful;
  harmful.polygons[0].mass = -0.5;
  auto scan2 = mu_scan_upper_bound(g, harmful, std::nullopt, 0.3, mus);
  CHECK_FALSE(scan2.dip_detected);

  // The ring's relative contribution fades as the profile concentrates at
  // the origin, away from the ring.
  auto rel_gap = [](const MuScanResult& s, size_t i) {
    return std::abs(s.upper_bounds[i] - s.reference_bounds[i]) /
           s.reference_bounds[i];
  };
  CHECK(rel_gap(scan, 0) < rel_gap(scan, 4));
  CHECK(rel_gap(scan, 0) < 0.02);

  // At large dilation the ring is seen from far away and acts like extra
  // central mass: the bound matches the merged-mass quotient.
  PoleConfiguration merged = helpful;
  merged.polygons[0].mass = 0.0;
  merged.lambda0 = helpful.lambda0 + helpful.polygons[0].mass;
  RadialProfile wide(HardyParameter(4, 0.3), ProfileKind::Z, mus.back());
  const Field trial = sample_closed_form(g, helpful, wide, std::nullopt);
  const double merged_q = rayleigh_quotient(trial, g, merged).quotient;
  CHECK(scan.upper_bounds.back() == doctest::Approx(merged_q).epsilon(0.01));
}

TEST_CASE("singular exponents of converged minimizers") {
  // Central mass three quarters of the threshold: origin exponent -1/2.
  const double lambda = 0.75;
  auto cfg = central_cfg(4, lambda, SymmetryMode::Circular);
  MeshSpec spec;
  spec.rho_nodes = 96;
  spec.s_nodes = 72;
  spec.r_trunc = 40.0;
  spec.s_trunc = 40.0;
  spec.grading = 1.25;  // deep inner refinement for the asymptotic window
  auto g = ReducedGrid::build(spec, cfg);
  SolverOptions opts;
  opts.tol = 1e-7;
  auto res = minimize_quotient(g, cfg, InitPreset::OriginProfile, opts);
  CHECK(res.converged);
  auto fits = extract_singular_exponents(res, g, cfg);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].label == "origin");
  CHECK(fits[0].reliable);
  const double nu = HardyParameter(4, lambda).nu();
  CHECK(fits[0].exponent ==
        doctest::Approx(-(4.0 - 2.0) * (1.0 - nu) / 2.0).epsilon(0.1));
  CHECK(fits[0].classification == 1);

  // A negative-mass polygon: the profile vanishes at the pole radius.
  // The pole phase is placed on a theta-node ray so the radial approach
  // to the pole is sampled without a fixed angular offset.
  PoleConfiguration poly = central_cfg(4, 0.1, SymmetryMode::Polygonal, 3);
  poly.polygons = {{1.0, -2.0, 0.5 * (2.0 * std::numbers::pi / (3 * 24))}};
  MeshSpec pspec;
  pspec.rho_nodes = 72;
  pspec.s_nodes = 24;
  pspec.theta_nodes = 24;
  pspec.r_trunc = 30.0;
  pspec.s_trunc = 30.0;
  pspec.grading = 1.12;
  auto gp = ReducedGrid::build(pspec, poly);
  SolverOptions popts;
  popts.tol = 1e-6;
  auto pres = minimize_quotient(gp, poly, InitPreset::OriginProfile, popts);
  CHECK(pres.converged);
  auto pfits = extract_singular_exponents(pres, gp, poly);
  REQUIRE(pfits.size() == 2);
  CHECK(pfits[1].label == "polygon 0");
  CHECK(pfits[1].exponent > 0.05);
  CHECK(pfits[1].classification == -1);
}

TEST_CASE("indefinite quadratic forms are refused") {
  auto cfg = central_cfg(4, 1.5, SymmetryMode::Circular);  // above threshold
  MeshSpec spec;
  spec.rho_nodes = 8;
  spec.s_nodes = 8;
  spec.r_trunc = 10.0;
  spec.s_trunc = 10.0;
  auto g = ReducedGrid::build(spec, cfg);
  CHECK_THROWS_AS(minimize_quotient(g, cfg, InitPreset::FlatBump),
                  std::domain_error);
}
