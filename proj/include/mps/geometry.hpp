#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mps {

enum class SymmetryMode { Polygonal, Circular };

/// One ring of poles. In Polygonal mode `mass` is the per-pole mass
/// lambda_l; in Circular mode it is the total ring mass Lambda_l.
struct Polygon {
  double radius = 1.0;
  double mass = 0.0;
  double phase = 0.0;
};

struct PoleConfiguration {
  int dim = 4;
  double lambda0 = 0.0;
  SymmetryMode mode = SymmetryMode::Polygonal;
  int k = 1;  // vertices per polygon; ignored in Circular mode
  std::vector<Polygon> polygons;

  double hardy_threshold() const {
    const double d = dim - 2;
    return 0.25 * d * d;
  }
  /// Total ring mass Lambda_l, mode-aware.
  double total_mass(int ell) const;
  /// Per-pole mass lambda_l; Polygonal mode only.
  double per_pole_mass(int ell) const;

  /// Throws std::invalid_argument on malformed data (non-positive radii,
  /// k < 1 in Polygonal mode, doubled poles, dim < 3).
  void validate() const;
};

/// One scalar inequality with both sides retained, so the verdict can be
/// re-derived from the report alone.
struct ConditionCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;  // one of "<", "<=", ">", ">="
  bool holds = false;
};

struct ConditionReport {
  std::string label;
  std::vector<ConditionCheck> checks;
  bool verdict = false;

  const ConditionCheck* find(const std::string& name) const;
};

/// Vertices of polygon ell at angles phase + 2*pi*i/k, i = 0..k-1.
std::vector<Eigen::Vector2d> polygon_vertices(const PoleConfiguration& cfg,
                                              int ell);

/// Distance between pole i of polygon j and pole s of polygon ell.
/// Rejects a coincident-pole request.
double pole_distance(const PoleConfiguration& cfg, int j, int i, int ell,
                     int s);

/// Minimum angle between the vertex sets of polygons j and ell: the phase
/// difference reduced mod 2*pi/k and folded to [0, pi/k].
double theta_offset(const PoleConfiguration& cfg, int j, int ell);

/// Quadratic-form positivity: lambda0^+ + sum of positive ring masses
/// below (N-2)^2/4; in Polygonal mode the per-pole form is reported too.
ConditionReport check_positivity(const PoleConfiguration& cfg);

/// Attainment conditions for the circular-symmetry minimization (N >= 4):
/// nonpositive total ring mass, central mass below the Hardy threshold,
/// and a radius-weighted sum whose exponent depends on lambda0.
ConditionReport check_circ_existence(const PoleConfiguration& cfg);

/// Attainment conditions for the discrete-symmetry minimization at fixed k
/// (N > 4). Polygons must be sorted by ascending mass; unsorted input is an
/// error, never silently reordered.
ConditionReport check_polygon_existence_k(const PoleConfiguration& cfg);

/// Smallest k <= k_max for which check_polygon_existence_k passes in full.
/// Requires the largest per-pole mass to be positive.
std::optional<int> min_k_for_existence(const PoleConfiguration& cfg,
                                       int k_max);

/// Sign patterns under which the infimum is known not to be achieved:
/// (i) all ring masses negative; (ii) lambda0 > 0 and all ring masses
/// positive. Mixed signs leave attainability undecided (verdict false).
ConditionReport check_nonattainability(const PoleConfiguration& cfg);

}  // namespace mps
