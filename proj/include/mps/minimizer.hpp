#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mps/discretization.hpp"

namespace mps {

struct SolverOptions {
  int max_iterations = 20000;
  double tol = 1e-8;             // relative dual-norm gradient tolerance
  int multistart_iterations = 150;  // short-run length per preset
  double el_tol = 1e-6;          // reported Euler-Lagrange residual target
  bool compute_thresholds = false;  // run the companion comparison levels
};

enum class InitPreset { OriginProfile, PoleBumps, FlatBump, BestOfThree };

/// Grid-consistent comparison levels: every entry is a minimized level on
/// the same mesh family, so no absolute constants are mixed across grids.
struct ComparisonThresholds {
  bool available = false;
  double sobolev_proxy = 0.0;     // zero-mass level on the same grid
  double scaled_proxy = 0.0;      // k^{2/N} * sobolev_proxy
  double central_level = 0.0;     // central mass only
  std::vector<double> per_pole_levels;  // one pole family alone
  double aggregate_level = 0.0;   // central mass lambda0 + k * sum of masses
};

struct TraceEntry {
  double quotient = 0.0;
  double step = 0.0;
  double residual = 0.0;
};

struct MinimizationResult {
  double level = 0.0;
  Field field;
  double residual = 0.0;     // relative dual-norm projected gradient at exit
  int iterations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
  EnergyBreakdown breakdown;
  ComparisonThresholds thresholds;
};

/// Minimize the discrete Rayleigh quotient by preconditioned nonlinear
/// conjugate gradients with a monotone Armijo line search; the iterate is
/// kept on the unit critical-norm sphere and the final field is
/// nonnegative. Throws std::domain_error when the quadratic form fails
/// the positivity condition (the quotient may be unbounded below).
MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     const PotentialWeights& w,
                                     const Field& init,
                                     const SolverOptions& opts = {});
MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     const Field& init,
                                     const SolverOptions& opts = {});
MinimizationResult minimize_quotient(const ReducedGrid& g,
                                     const PoleConfiguration& cfg,
                                     InitPreset preset = InitPreset::BestOfThree,
                                     const SolverOptions& opts = {});

/// Build one of the initialization presets as a grid field.
Field initial_field(const ReducedGrid& g, const PoleConfiguration& cfg,
                    InitPreset preset);

/// Minimized level of the single-central-mass quotient on a fresh grid of
/// the given mesh family in the requested symmetry class.
MinimizationResult estimate_level_family(const MeshSpec& spec, int dim,
                                         double lambda, SymmetryMode mode,
                                         int k = 1,
                                         const SolverOptions& opts = {});

struct MuScanResult {
  std::vector<double> mu_values;
  std::vector<double> upper_bounds;      // full quotient along the family
  std::vector<double> reference_bounds;  // concentration-term-only quotient
  double best_mu = 0.0;
  double best_bound = 0.0;
  bool dip_detected = false;  // full bound falls below the reference bound
};

/// Evaluate the full Rayleigh quotient along the dilation family of the
/// closed-form profile concentrating at the origin (pole_index empty) or
/// at the vertices of one polygon. The reference bound keeps only the
/// concentration point's own mass, so a dip below it signals that the
/// remaining poles lower the level.
MuScanResult mu_scan_upper_bound(const ReducedGrid& g,
                                 const PoleConfiguration& cfg,
                                 std::optional<int> pole_index,
                                 double lambda_profile,
                                 const std::vector<double>& mu_grid);

struct SingularPointFit {
  std::string label;       // "origin" or "polygon <l>"
  double exponent = 0.0;   // log-log slope of the profile vs distance
  double amplitude = 0.0;  // exp(intercept)
  double max_residual = 0.0;
  bool reliable = false;   // a full decade of resolved scales was available
  int classification = 0;  // +1 singular, 0 regular, -1 vanishing
};

/// Fit local power laws of a converged minimizer at the origin and at each
/// pole radius over one decade adjacent to (but excluding) the innermost
/// resolved cells.
std::vector<SingularPointFit> extract_singular_exponents(
    const MinimizationResult& res, const ReducedGrid& g,
    const PoleConfiguration& cfg);

}  // namespace mps
