#include "mps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ConditionCheck make_check(std::string name, double lhs,
                          const std::string& relation, double rhs) {
  ConditionCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.relation = relation;
  if (relation == "<")
    c.holds = lhs < rhs;
  else if (relation == "<=")
    c.holds = lhs <= rhs;
  else if (relation == ">")
    c.holds = lhs > rhs;
  else if (relation == ">=")
    c.holds = lhs >= rhs;
  else
    throw std::invalid_argument("make_check: unknown relation");
  return c;
}

void require_polygon_index(const PoleConfiguration& cfg, int ell) {
  if (ell < 0 || ell >= static_cast<int>(cfg.polygons.size()))
    throw std::out_of_range("polygon index out of range");
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

double PoleConfiguration::total_mass(int ell) const {
  require_polygon_index(*this, ell);
  return mode == SymmetryMode::Polygonal ? k * polygons[ell].mass
                                         : polygons[ell].mass;
}

double PoleConfiguration::per_pole_mass(int ell) const {
  if (mode != SymmetryMode::Polygonal)
    throw std::logic_error("per_pole_mass: Polygonal mode only");
  require_polygon_index(*this, ell);
  return polygons[ell].mass;
}

void PoleConfiguration::validate() const {
  if (dim < 3) throw std::invalid_argument("PoleConfiguration: dim >= 3");
  if (mode == SymmetryMode::Polygonal && k < 1)
    throw std::invalid_argument("PoleConfiguration: k >= 1 required");
  for (const Polygon& p : polygons)
    if (!(p.radius > 0.0))
      throw std::invalid_argument("PoleConfiguration: radii must be positive");
  const double period =
      mode == SymmetryMode::Polygonal ? kTwoPi / k : kTwoPi;
  for (size_t a = 0; a < polygons.size(); ++a)
    for (size_t b = a + 1; b < polygons.size(); ++b) {
      if (polygons[a].radius != polygons[b].radius) continue;
      double w = std::fmod(polygons[b].phase - polygons[a].phase, period);
      if (w < 0) w += period;
      if (w == 0.0 || w == period)
        throw std::invalid_argument("PoleConfiguration: doubled poles");
    }
}

const ConditionCheck* ConditionReport::find(const std::string& name) const {
  for (const ConditionCheck& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<Eigen::Vector2d> polygon_vertices(const PoleConfiguration& cfg,
                                              int ell) {
  if (cfg.mode != SymmetryMode::Polygonal)
    throw std::logic_error("polygon_vertices: Polygonal mode only");
  require_polygon_index(cfg, ell);
  const Polygon& p = cfg.polygons[ell];
  std::vector<Eigen::Vector2d> out;
  out.reserve(cfg.k);
  for (int i = 0; i < cfg.k; ++i) {
    const double ang = p.phase + kTwoPi * i / cfg.k;
    out.emplace_back(p.radius * std::cos(ang), p.radius * std::sin(ang));
  }
  return out;
}

double pole_distance(const PoleConfiguration& cfg, int j, int i, int ell,
                     int s) {
  if (cfg.mode != SymmetryMode::Polygonal)
    throw std::logic_error("pole_distance: Polygonal mode only");
  require_polygon_index(cfg, j);
  require_polygon_index(cfg, ell);
  if (i < 0 || i >= cfg.k || s < 0 || s >= cfg.k)
    throw std::out_of_range("pole_distance: vertex index out of range");
  if (j == ell) {
    if (i == s)
      throw std::invalid_argument("pole_distance: coincident pole request");
    return 2.0 * cfg.polygons[j].radius *
           std::abs(std::sin((s - i) * std::numbers::pi / cfg.k));
  }
  const double rj = cfg.polygons[j].radius;
  const double rl = cfg.polygons[ell].radius;
  const double delta = (cfg.polygons[ell].phase + kTwoPi * s / cfg.k) -
                       (cfg.polygons[j].phase + kTwoPi * i / cfg.k);
  // (rj - rl)^2 + 4 rj rl sin^2(delta/2): cancellation-free law of cosines.
  const double sh = std::sin(0.5 * delta);
  const double d2 = (rj - rl) * (rj - rl) + 4.0 * rj * rl * sh * sh;
  if (!(d2 > 0.0))
    throw std::invalid_argument("pole_distance: coincident pole request");
  return std::sqrt(d2);
}

double theta_offset(const PoleConfiguration& cfg, int j, int ell) {
  if (cfg.mode != SymmetryMode::Polygonal)
    throw std::logic_error("theta_offset: Polygonal mode only");
  if (j == ell) throw std::invalid_argument("theta_offset: j != ell required");
  require_polygon_index(cfg, j);
  require_polygon_index(cfg, ell);
  const double period = kTwoPi / cfg.k;
  double w = std::fmod(cfg.polygons[ell].phase - cfg.polygons[j].phase,
                       period);
  if (w < 0) w += period;
  return std::min(w, period - w);
}

ConditionReport check_positivity(const PoleConfiguration& cfg) {
  cfg.validate();
  ConditionReport rep;
  rep.label = "positivity";
  double pos_total = positive_part(cfg.lambda0);
  for (size_t l = 0; l < cfg.polygons.size(); ++l)
    pos_total += positive_part(cfg.total_mass(static_cast<int>(l)));
  rep.checks.push_back(make_check("aggregate-positive-mass-bound", pos_total,
                                  "<", cfg.hardy_threshold()));
  if (cfg.mode == SymmetryMode::Polygonal) {
    double per_pole = positive_part(cfg.lambda0);
    for (const Polygon& p : cfg.polygons)
      per_pole += cfg.k * positive_part(p.mass);
    rep.checks.push_back(make_check("per-pole-positive-mass-bound", per_pole,
                                    "<", cfg.hardy_threshold()));
  }
  rep.verdict = std::all_of(rep.checks.begin(), rep.checks.end(),
                            [](const ConditionCheck& c) { return c.holds; });
  return rep;
}

ConditionReport check_circ_existence(const PoleConfiguration& cfg) {
  cfg.validate();
  if (cfg.dim < 4)
    throw std::invalid_argument("check_circ_existence: N >= 4 required");
  ConditionReport rep;
  rep.label = "circular-existence";
  double mass_sum = 0.0;
  for (size_t l = 0; l < cfg.polygons.size(); ++l)
    mass_sum += cfg.total_mass(static_cast<int>(l));
  rep.checks.push_back(
      make_check("total-ring-mass-nonpositive", mass_sum, "<=", 0.0));
  rep.checks.push_back(make_check("central-mass-below-hardy-threshold",
                                  cfg.lambda0, "<", cfg.hardy_threshold()));
  const double low_branch = 0.25 * cfg.dim * (cfg.dim - 4.0);
  double weighted = 0.0;
  std::string name;
  if (cfg.lambda0 <= low_branch) {
    for (size_t l = 0; l < cfg.polygons.size(); ++l)
      weighted += cfg.total_mass(static_cast<int>(l)) /
                  (cfg.polygons[l].radius * cfg.polygons[l].radius);
    name = "inverse-square-radius-weighted-sum";
  } else {
    const double q = std::sqrt((cfg.dim - 2.0) * (cfg.dim - 2.0) -
                               4.0 * cfg.lambda0);
    for (size_t l = 0; l < cfg.polygons.size(); ++l)
      weighted += cfg.total_mass(static_cast<int>(l)) /
                  std::pow(cfg.polygons[l].radius, q);
    name = "resonant-exponent-radius-weighted-sum";
  }
  rep.checks.push_back(make_check(name, weighted, ">", 0.0));
  rep.verdict = std::all_of(rep.checks.begin(), rep.checks.end(),
                            [](const ConditionCheck& c) { return c.holds; });
  return rep;
}

ConditionReport check_polygon_existence_k(const PoleConfiguration& cfg) {
  cfg.validate();
  if (cfg.mode != SymmetryMode::Polygonal)
    throw std::logic_error("check_polygon_existence_k: Polygonal mode only");
  if (cfg.dim <= 4)
    throw std::invalid_argument("check_polygon_existence_k: N > 4 required");
  if (cfg.polygons.empty())
    throw std::invalid_argument("check_polygon_existence_k: no polygons");
  const int m = static_cast<int>(cfg.polygons.size());
  for (int l = 0; l + 1 < m; ++l)
    if (cfg.polygons[l].mass > cfg.polygons[l + 1].mass)
      throw std::invalid_argument(
          "check_polygon_existence_k: polygons must be sorted by ascending "
          "mass");

  ConditionReport rep;
  rep.label = "polygonal-existence";
  double mass_sum = 0.0;
  for (const Polygon& p : cfg.polygons) mass_sum += p.mass;
  rep.checks.push_back(
      make_check("per-pole-mass-sum-nonpositive", mass_sum, "<=", 0.0));
  const double low_branch = 0.25 * cfg.dim * (cfg.dim - 4.0);
  rep.checks.push_back(make_check("largest-mass-bound",
                                  cfg.polygons[m - 1].mass, "<=", low_branch));
  rep.checks.push_back(make_check("central-mass-below-hardy-threshold",
                                  cfg.lambda0, "<", cfg.hardy_threshold()));
  double weighted = 0.0;
  std::string name;
  if (cfg.lambda0 <= low_branch) {
    for (const Polygon& p : cfg.polygons)
      weighted += p.mass / (p.radius * p.radius);
    name = "inverse-square-radius-weighted-sum";
  } else {
    const double q = std::sqrt((cfg.dim - 2.0) * (cfg.dim - 2.0) -
                               4.0 * cfg.lambda0);
    for (const Polygon& p : cfg.polygons)
      weighted += p.mass / std::pow(p.radius, q);
    name = "resonant-exponent-radius-weighted-sum";
  }
  rep.checks.push_back(make_check(name, weighted, ">", 0.0));

  // Interaction sum at the outer (largest-mass) polygon: central pull,
  // self-polygon chord sum, and cross-polygon pole sums.
  const double rm = cfg.polygons[m - 1].radius;
  double key = cfg.lambda0 / (rm * rm);
  double self_sum = 0.0;
  for (int i = 1; i <= cfg.k - 1; ++i) {
    const double chord = std::sin(i * std::numbers::pi / cfg.k);
    self_sum += 1.0 / (4.0 * rm * rm * chord * chord);
  }
  key += cfg.polygons[m - 1].mass * self_sum;
  for (int l = 0; l + 1 < m; ++l) {
    const double rl = cfg.polygons[l].radius;
    const double offset = theta_offset(cfg, m - 1, l);
    double cross = 0.0;
    for (int i = 1; i <= cfg.k; ++i)
      cross += 1.0 / (rm * rm + rl * rl -
                      2.0 * rm * rl * std::cos(kTwoPi * i / cfg.k + offset));
    key += cfg.polygons[l].mass * cross;
  }
  rep.checks.push_back(make_check("pole-interaction-sum", key, ">", 0.0));

  rep.verdict = std::all_of(rep.checks.begin(), rep.checks.end(),
                            [](const ConditionCheck& c) { return c.holds; });
  return rep;
}

std::optional<int> min_k_for_existence(const PoleConfiguration& cfg,
                                       int k_max) {
  if (cfg.polygons.empty())
    throw std::invalid_argument("min_k_for_existence: no polygons");
  if (!(cfg.polygons.back().mass > 0.0))
    throw std::invalid_argument(
        "min_k_for_existence: largest per-pole mass must be positive");
  PoleConfiguration probe = cfg;
  probe.mode = SymmetryMode::Polygonal;
  for (int k = 1; k <= k_max; ++k) {
    probe.k = k;
    if (check_polygon_existence_k(probe).verdict) return k;
  }
  return std::nullopt;
}

ConditionReport check_nonattainability(const PoleConfiguration& cfg) {
  cfg.validate();
  if (cfg.dim < 4)
    throw std::invalid_argument("check_nonattainability: N >= 4 required");
  if (!check_positivity(cfg).verdict)
    throw std::invalid_argument(
        "check_nonattainability: positivity condition must hold");
  ConditionReport rep;
  rep.label = "non-attainability";
  const int m = static_cast<int>(cfg.polygons.size());
  double max_mass = -std::numeric_limits<double>::infinity();
  double min_mass = std::numeric_limits<double>::infinity();
  for (int l = 0; l < m; ++l) {
    max_mass = std::max(max_mass, cfg.total_mass(l));
    min_mass = std::min(min_mass, cfg.total_mass(l));
  }
  // Empty ring set decides nothing; both sign cases report false.
  ConditionCheck all_neg =
      make_check("all-ring-masses-negative", m > 0 ? max_mass : 0.0, "<", 0.0);
  ConditionCheck all_pos = make_check(
      "central-positive-and-ring-masses-positive",
      m > 0 ? std::min(cfg.lambda0, min_mass) : 0.0, ">", 0.0);
  rep.checks.push_back(all_neg);
  rep.checks.push_back(all_pos);
  rep.verdict = all_neg.holds || all_pos.holds;
  return rep;
}

}  // namespace mps
