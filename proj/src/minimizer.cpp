#include "mps/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "mps/fit.hpp"

namespace mps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Shared state for quotient, gradient, and dual-norm evaluations.
struct QuotientContext {
  const ReducedGrid& g;
  const Eigen::SparseMatrix<double>& A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  Eigen::VectorXd c;  // combined potential cell weights
  const LpQuadrature& lp;
  double p;           // critical exponent 2N/(N-2)

  QuotientContext(const ReducedGrid& grid, const PoleConfiguration& cfg,
                  const PotentialWeights& w)
      : g(grid),
        A(grid.stiffness()),
        c(combined_potential(w, cfg)),
        lp(grid.lp_quadrature()),
        p(2.0 * grid.dim() / (grid.dim() - 2.0)) {
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("minimize_quotient: stiffness factorization failed");
  }

  double lp_integral(const Eigen::VectorXd& u) const {
    return lp.integral(u, p);
  }
  double energy(const Eigen::VectorXd& u) const {
    return u.dot(A * u) - (c.array() * u.array().square()).sum();
  }
  double quotient(const Eigen::VectorXd& u) const {
    return energy(u) / std::pow(lp_integral(u), 2.0 / p);
  }
  void normalize(Eigen::VectorXd& u) const {
    const double lp = lp_integral(u);
    if (!(lp > 0.0))
      throw std::invalid_argument("minimize_quotient: zero initial field");
    u /= std::pow(lp, 1.0 / p);
  }
  /// Gradient of the quotient at a unit-critical-norm field.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u, double q) const {
    const Eigen::VectorXd v = lp.sampler * u;
    const Eigen::VectorXd lp_grad =
        lp.sampler.transpose() *
        (lp.weights.array() * v.array().abs().pow(p - 2.0) * v.array())
            .matrix();
    return 2.0 * (A * u - (c.array() * u.array()).matrix() - q * lp_grad);
  }
};

struct IterState {
  Eigen::VectorXd u;
  double q = 0.0;
  Eigen::VectorXd grad, z;  // gradient and its preconditioned image
  double residual = 0.0;    // relative dual norm
};

void refresh(QuotientContext& ctx, IterState& st) {
  st.q = ctx.quotient(st.u);
  st.grad = ctx.gradient(st.u, st.q);
  st.z = ctx.solver.solve(st.grad);
  const double dir_energy = st.u.dot(ctx.A * st.u);
  st.residual = std::sqrt(std::max(0.0, st.grad.dot(st.z)) /
                          std::max(dir_energy, 1e-300));
}

/// Preconditioned Polak-Ribiere CG with Armijo backtracking; the iterate
/// stays on the unit critical-norm sphere and the trace is monotone.
void descend(QuotientContext& ctx, IterState& st, const SolverOptions& opts,
             int max_iters, int& iterations, std::vector<TraceEntry>& trace) {
  Eigen::VectorXd dir = -st.z;
  Eigen::VectorXd grad_prev = st.grad, z_prev = st.z;
  double step = 1.0;
  while (iterations < max_iters && st.residual > opts.tol) {
    double slope = st.grad.dot(dir);
    if (!(slope < 0.0)) {  // lost descent: restart on the steepest direction
      dir = -st.z;
      slope = st.grad.dot(dir);
      if (!(slope < 0.0)) break;
    }
    double t = std::min(2.0 * step, 1e6);
    bool accepted = false;
    Eigen::VectorXd cand;
    double q_cand = 0.0, lp_cand = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      cand = st.u + t * dir;
      lp_cand = ctx.lp_integral(cand);
      if (lp_cand > 0.0 && std::isfinite(lp_cand)) {
        q_cand = ctx.energy(cand) / std::pow(lp_cand, 2.0 / ctx.p);
        if (std::isfinite(q_cand) && q_cand <= st.q + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (dir != -st.z) {  // retry once from steepest descent
        dir = -st.z;
        continue;
      }
      break;  // no decrease possible at this resolution
    }
    step = t;
    st.u = cand / std::pow(lp_cand, 1.0 / ctx.p);
    grad_prev.swap(st.grad);
    z_prev.swap(st.z);
    refresh(ctx, st);
    const double denom = grad_prev.dot(z_prev);
    double beta = denom > 0.0
                      ? std::max(0.0, st.grad.dot(st.z - z_prev) / denom)
                      : 0.0;
    dir = -st.z + beta * dir;
    ++iterations;
    trace.push_back({st.q, t, st.residual});
  }
}

MinimizationResult run(const ReducedGrid& g, const PoleConfiguration& cfg,
                       const PotentialWeights& w, const Field& init,
                       const SolverOptions& opts, int max_iters) {
  if (init.size() != g.size())
    throw std::invalid_argument("minimize_quotient: field/grid size mismatch");
  QuotientContext ctx(g, cfg, w);
  IterState st;
  st.u = init.values();
  ctx.normalize(st.u);
  refresh(ctx, st);

  MinimizationResult res;
  res.trace.push_back({st.q, 0.0, st.residual});
  int iterations = 0;
  descend(ctx, st, opts, max_iters, iterations, res.trace);
  // The stiffness has nonpositive off-diagonal couplings, so taking the
  // modulus cannot raise the energy; re-converge from the nonnegative field.
  if ((st.u.array() < 0.0).any()) {
    st.u = st.u.array().abs();
    ctx.normalize(st.u);
    refresh(ctx, st);
    res.trace.push_back({st.q, 0.0, st.residual});
    descend(ctx, st, opts, max_iters, iterations, res.trace);
    st.u = st.u.array().abs();  // clear residual sign noise at roundoff level
  }

  res.level = st.q;
  res.field = Field(st.u);
  res.residual = st.residual;
  res.iterations = iterations;
  res.converged = st.residual <= opts.tol;
  res.breakdown = rayleigh_quotient(res.field, g, cfg, w);
  return res;
}

PoleConfiguration with_masses(const PoleConfiguration& cfg, double lambda0,
                              const std::vector<double>& ring_masses) {
  PoleConfiguration out = cfg;
  out.lambda0 = lambda0;
  for (size_t l = 0; l < out.polygons.size(); ++l)
    out.polygons[l].mass = ring_masses[l];
  return out;
}

MinimizationResult best_of_presets(const ReducedGrid& g,
                                   const PoleConfiguration& cfg,
                                   const PotentialWeights& w,
                                   const SolverOptions& opts);

double companion_level(const ReducedGrid& g, const PoleConfiguration& cfg,
                       const PotentialWeights& w, const SolverOptions& opts) {
  if (!check_positivity(cfg).verdict) return kNaN;
  SolverOptions inner = opts;
  inner.compute_thresholds = false;
  return best_of_presets(g, cfg, w, inner).level;
}

ComparisonThresholds companion_thresholds(const ReducedGrid& g,
                                          const PoleConfiguration& cfg,
                                          const PotentialWeights& w,
                                          const SolverOptions& opts) {
  ComparisonThresholds th;
  th.available = true;
  const std::vector<double> zeros(cfg.polygons.size(), 0.0);
  th.sobolev_proxy = companion_level(g, with_masses(cfg, 0.0, zeros), w, opts);
  const int k = cfg.mode == SymmetryMode::Polygonal ? cfg.k : 1;
  th.scaled_proxy = std::pow(double(k), 2.0 / cfg.dim) * th.sobolev_proxy;
  th.central_level =
      companion_level(g, with_masses(cfg, cfg.lambda0, zeros), w, opts);
  for (size_t l = 0; l < cfg.polygons.size(); ++l) {
    std::vector<double> one = zeros;
    one[l] = cfg.polygons[l].mass;
    th.per_pole_levels.push_back(
        companion_level(g, with_masses(cfg, 0.0, one), w, opts));
  }
  double aggregate = cfg.lambda0;
  for (size_t l = 0; l < cfg.polygons.size(); ++l)
    aggregate += cfg.total_mass(int(l));
  th.aggregate_level = aggregate < cfg.hardy_threshold()
                           ? companion_level(g, with_masses(cfg, aggregate, zeros),
                                             w, opts)
                           : kNaN;
  return th;
}

MinimizationResult best_of_presets(const ReducedGrid& g,
                                   const PoleConfiguration& cfg,
                                   const PotentialWeights& w,
                                   const SolverOptions& opts) {
  const InitPreset presets[] = {InitPreset::OriginProfile,
                                InitPreset::PoleBumps, InitPreset::FlatBump};
  SolverOptions probe = opts;
  probe.compute_thresholds = false;
  Field best_field;
  double best_q = std::numeric_limits<double>::infinity();
  for (InitPreset pr : presets) {
    if (pr == InitPreset::PoleBumps && cfg.polygons.empty()) continue;
    MinimizationResult short_run = run(g, cfg, w, initial_field(g, cfg, pr),
                                       probe, opts.multistart_iterations);
    if (short_run.level < best_q) {
      best_q = short_run.level;
      best_field = short_run.field;
    }
  }
  return run(g, cfg, w, best_field, probe, opts.max_iterations);
}

}  // namespace

Field initial_field(const ReducedGrid& g, const PoleConfiguration& cfg,
                    InitPreset preset) {
  const int nr = int(g.rho_nodes().size());
  const int nt = std::max<int>(1, int(g.theta_nodes().size()));
  const int ns = int(g.s_nodes().size());
  const double half_dim = 0.5 * (g.dim() - 2);
  switch (preset) {
    case InitPreset::OriginProfile: {
      double lam = cfg.lambda0;
      if (!(lam < cfg.hardy_threshold())) lam = 0.0;
      RadialProfile prof(HardyParameter(g.dim(), lam), ProfileKind::Z, 1.0);
      return sample_closed_form(g, cfg, prof, std::nullopt);
    }
    case InitPreset::PoleBumps: {
      if (cfg.polygons.empty())
        return initial_field(g, cfg, InitPreset::FlatBump);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
      if (g.mode() == SymmetryMode::Polygonal) {
        for (size_t l = 0; l < cfg.polygons.size(); ++l) {
          RadialProfile prof(HardyParameter(g.dim(), 0.0), ProfileKind::Z,
                             0.2 * cfg.polygons[l].radius);
          v += sample_closed_form(g, cfg, prof, int(l)).values();
        }
      } else {
        // Circular mode: annular bumps centered on each pole circle.
        for (const Polygon& poly : cfg.polygons) {
          const double mu = 0.2 * poly.radius;
          for (int i = 0; i < nr; ++i)
            for (int l = 0; l < ns; ++l) {
              const double d = std::hypot(g.rho_nodes()[i] - poly.radius,
                                          g.s_nodes()[l]);
              v[g.index(i, 0, l)] +=
                  std::pow(1.0 + d * d / (mu * mu), -half_dim);
            }
        }
      }
      return Field(std::move(v));
    }
    case InitPreset::FlatBump:
    default: {
      Eigen::VectorXd v(g.size());
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nt; ++j)
          for (int l = 0; l < ns; ++l) {
            const double rho = g.rho_nodes()[i];
            const double s = g.s_nodes()[l];
            v[g.index(i, j, l)] =
                std::pow(1.0 + rho * rho + s * s, -half_dim);
          }
      return Field(std::move(v));
    }
  }
}

MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     const PotentialWeights& w,
                                     const Field& init,
                                     const SolverOptions& opts) {
  cfg.validate();
  if (!check_positivity(cfg).verdict)
    throw std::domain_error(
        "minimize_quotient: the quadratic form fails the positivity "
        "condition; the quotient may be unbounded below");
  MinimizationResult res = run(g, cfg, w, init, opts, opts.max_iterations);
  if (opts.compute_thresholds)
    res.thresholds = companion_thresholds(g, cfg, w, opts);
  return res;
}

MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     const Field& init,
                                     const SolverOptions& opts) {
  return minimize_quotient(g, cfg, assemble_potential(g, cfg), init, opts);
}

MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     InitPreset preset,
                                     const SolverOptions& opts) {
  cfg.validate();
  if (!check_positivity(cfg).verdict)
    throw std::domain_error(
        "minimize_quotient: the quadratic form fails the positivity "
        "condition; the quotient may be unbounded below");
  const PotentialWeights w = assemble_potential(g, cfg);
  MinimizationResult res;
  if (preset == InitPreset::BestOfThree)
    res = best_of_presets(g, cfg, w, opts);
  else
    res = run(g, cfg, w, initial_field(g, cfg, preset), opts,
              opts.max_iterations);
  if (opts.compute_thresholds)
    res.thresholds = companion_thresholds(g, cfg, w, opts);
  return res;
}

MinimizationResult estimate_level_family(const MeshSpec& spec, int dim,
                                         double lambda, SymmetryMode mode,
                                         int k, const SolverOptions& opts) {
  PoleConfiguration cfg;
  cfg.dim = dim;
  cfg.lambda0 = lambda;
  cfg.mode = mode;
  cfg.k = k;
  if (!(lambda < cfg.hardy_threshold()))
    throw std::invalid_argument(
        "estimate_level_family: central mass at or above the Hardy threshold");
  const ReducedGrid g = ReducedGrid::build(spec, cfg);
  return minimize_quotient(g, cfg, InitPreset::BestOfThree, opts);
}

MuScanResult mu_scan_upper_bound(const ReducedGrid& g,
                                 const PoleConfiguration& cfg,
                                 std::optional<int> pole_index,
                                 double lambda_profile,
                                 const std::vector<double>& mu_grid) {
  cfg.validate();
  const PotentialWeights w = assemble_potential(g, cfg);
  // Reference problem: keep only the concentration point's own mass.
  std::vector<double> ref_masses(cfg.polygons.size(), 0.0);
  double ref_lambda0 = 0.0;
  if (pole_index) {
    ref_masses.at(*pole_index) = cfg.polygons[*pole_index].mass;
  } else {
    ref_lambda0 = cfg.lambda0;
  }
  const PoleConfiguration ref_cfg = with_masses(cfg, ref_lambda0, ref_masses);

  MuScanResult out;
  out.best_bound = std::numeric_limits<double>::infinity();
  const RadialProfile base(HardyParameter(g.dim(), lambda_profile),
                           ProfileKind::Z, 1.0);
  for (double mu : mu_grid) {
    RadialProfile prof(base.param(), ProfileKind::Z, mu);
    const Field trial = sample_closed_form(g, cfg, prof, pole_index);
    const double full = rayleigh_quotient(trial, g, cfg, w).quotient;
    const double ref = rayleigh_quotient(trial, g, ref_cfg, w).quotient;
    out.mu_values.push_back(mu);
    out.upper_bounds.push_back(full);
    out.reference_bounds.push_back(ref);
    if (full < out.best_bound) {
      out.best_bound = full;
      out.best_mu = mu;
    }
    if (full < ref - 1e-4 * std::abs(ref)) out.dip_detected = true;
  }
  return out;
}

namespace {

SingularPointFit fit_ray(std::string label,
                         const std::vector<double>& dist,
                         const std::vector<double>& val,
                         double d_lo = 0.0, double d_hi = 0.0) {
  SingularPointFit fit;
  fit.label = std::move(label);
  // Drop the innermost sample, then fit over the adjacent decade (or the
  // caller's explicit window).
  std::vector<double> d, v;
  bool skipped_first = d_lo > 0.0;  // an explicit window replaces the drop
  for (size_t i = 0; i < dist.size(); ++i) {
    if (!skipped_first) {
      skipped_first = true;
      continue;
    }
    if (dist[i] < d_lo || !(val[i] > 0.0)) continue;
    if (d_hi > 0.0 && dist[i] > d_hi) break;
    if (!d.empty() && dist[i] > 10.0 * d.front()) break;
    d.push_back(dist[i]);
    v.push_back(val[i]);
  }
  if (d.size() < 4) {
    fit.reliable = false;
    return fit;
  }
  const LineFit line =
      fit_loglog(Eigen::Map<const Eigen::VectorXd>(d.data(), d.size()),
                 Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  fit.exponent = line.slope;
  fit.amplitude = std::exp(line.intercept);
  fit.max_residual = line.max_residual;
  fit.reliable = d.size() >= 5 && d.back() >= 8.0 * d.front();
  if (fit.exponent < -0.05)
    fit.classification = 1;
  else if (fit.exponent > 0.05)
    fit.classification = -1;
  return fit;
}

}  // namespace

std::vector<SingularPointFit> extract_singular_exponents(
    const MinimizationResult& res, const ReducedGrid& g,
    const PoleConfiguration& cfg) {
  if (!res.converged)
    throw std::invalid_argument(
        "extract_singular_exponents: result did not converge");
  const Eigen::VectorXd& u = res.field.values();
  const int nr = int(g.rho_nodes().size());
  const int nt = std::max<int>(1, int(g.theta_nodes().size()));
  const bool sector = g.mode() == SymmetryMode::Polygonal;
  std::vector<SingularPointFit> out;

  // Origin: march outward along the innermost s layer. Below a few times
  // the layer height s_0 the ray distance is pinned at s_0 while rho still
  // shrinks, so the local slope there says nothing about the radial power;
  // start the window safely above that anisotropy floor.
  {
    std::vector<double> d, v;
    for (int i = 0; i < nr; ++i) {
      d.push_back(std::hypot(g.rho_nodes()[i], g.s_nodes()[0]));
      v.push_back(u[g.index(i, 0, 0)]);
    }
    const double floor = 5.0 * std::hypot(g.rho_nodes()[0], g.s_nodes()[0]);
    out.push_back(fit_ray("origin", d, v, floor, 16.0 * floor));
  }

  for (size_t l = 0; l < cfg.polygons.size(); ++l) {
    const double r = cfg.polygons[l].radius;
    int jnear = 0, jfar = 0;
    double toff = 0.0;
    if (sector && nt >= 2) {
      // Theta layers closest to and farthest from the pole angle.
      const double period = 2.0 * std::numbers::pi / cfg.k;
      double best = std::numeric_limits<double>::infinity();
      double worst = -1.0;
      for (int j = 0; j < nt; ++j) {
        double wrap = std::fmod(g.theta_nodes()[j] - cfg.polygons[l].phase,
                                period);
        if (wrap < 0) wrap += period;
        wrap = std::min(wrap, period - wrap);
        if (wrap < best) {
          best = wrap;
          jnear = j;
        }
        if (wrap > worst) {
          worst = wrap;
          jfar = j;
        }
      }
      toff = best;
    }
    std::vector<double> d, v;
    double d_lo = 0.0, d_hi = 0.0;
    for (int i = 0; i < nr; ++i) {
      const double rho = g.rho_nodes()[i];
      if (rho <= r) continue;  // approach from outside the pole radius
      const double sh = std::sin(0.5 * toff);
      const double s0 = g.s_nodes()[0];
      const double dist = std::sqrt((rho - r) * (rho - r) +
                                    4.0 * rho * r * sh * sh + s0 * s0);
      double value = u[g.index(i, jnear, 0)];
      if (sector && nt >= 2) {
        // Divide out the smooth background using the farthest theta layer,
        // which shares the global decay but not the local pole behavior.
        const double bg = u[g.index(i, jfar, 0)];
        if (!(bg > 0.0)) continue;
        value /= bg;
      }
      d.push_back(dist);
      v.push_back(value);
    }
    if (sector && nt >= 2) {
      // Below the angular cell scale the cell-averaged pole potential is
      // not resolved, so start the window at twice the theta arc and stop
      // well before the other singular points.
      const double arc = r * 2.0 * std::numbers::pi / (cfg.k * nt);
      d_lo = 2.0 * arc;
      d_hi = std::min(10.0 * d_lo, 0.5 * r);
    }
    out.push_back(fit_ray("polygon " + std::to_string(l), d, v, d_lo, d_hi));
  }
  return out;
}

}  // namespace mps
