#include "mps/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mps/potentials.hpp"
#include "mps/quadrature.hpp"

namespace mps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Cell widths w, w*g, w*g^2, ... summing to len (grading away from the
// accumulation point).
void append_graded(std::vector<double>& edges, double a, double b, int cells,
                   double g, bool toward_a, bool toward_b) {
  if (cells < 1) throw std::invalid_argument("mesh segment with no cells");
  if (toward_a && toward_b) {
    const int n1 = cells / 2;
    const int n2 = cells - n1;
    const double mid = 0.5 * (a + b);
    if (n1 > 0) append_graded(edges, a, mid, n1, g, true, false);
    append_graded(edges, n1 > 0 ? mid : a, b, n2, g, false, true);
    return;
  }
  std::vector<double> w(cells);
  double sum = 0.0, cur = 1.0;
  for (int i = 0; i < cells; ++i) {
    w[i] = cur;
    sum += cur;
    cur *= g;
  }
  if (toward_b) std::reverse(w.begin(), w.end());
  const double scale = (b - a) / sum;
  double pos = a;
  for (int i = 0; i < cells; ++i) {
    pos += w[i] * scale;
    edges.push_back(i + 1 == cells ? b : pos);
  }
}

std::vector<double> build_edges(double limit,
                                const std::vector<double>& accum_interior,
                                int cells, double g) {
  std::vector<double> pts = accum_interior;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> stops{0.0};
  for (double p : pts)
    if (p > 0.0 && p < limit) stops.push_back(p);
  stops.push_back(limit);
  const int segments = static_cast<int>(stops.size()) - 1;
  if (cells < 2 * segments)
    throw std::invalid_argument("too few mesh cells for the pole layout");
  std::vector<double> edges{0.0};
  int used = 0;
  for (int sgm = 0; sgm < segments; ++sgm) {
    const int n = sgm + 1 == segments ? cells - used : cells / segments;
    used += n;
    const bool last = sgm + 1 == segments;
    // Interior stops are pole radii: grade toward both ends there; the
    // origin is always an accumulation point, the truncation edge never is.
    append_graded(edges, stops[sgm], stops[sgm + 1], n, g, true, !last);
  }
  return edges;
}

double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

struct GridDims {
  int nr, nt, ns;
};

GridDims dims_of(const ReducedGrid& g) {
  return {static_cast<int>(g.rho_nodes().size()),
          static_cast<int>(g.theta_nodes().size()),
          static_cast<int>(g.s_nodes().size())};
}

}  // namespace

Eigen::Index ReducedGrid::size() const {
  return static_cast<Eigen::Index>(rho_nodes_.size()) *
         static_cast<Eigen::Index>(theta_nodes_.size()) *
         static_cast<Eigen::Index>(s_nodes_.size());
}

Eigen::Index ReducedGrid::index(int i, int j, int l) const {
  const auto nt = static_cast<Eigen::Index>(theta_nodes_.size());
  const auto ns = static_cast<Eigen::Index>(s_nodes_.size());
  return (static_cast<Eigen::Index>(i) * nt + j) * ns + l;
}

ReducedGrid ReducedGrid::build(const MeshSpec& spec,
                               const PoleConfiguration& cfg) {
  cfg.validate();
  if (cfg.dim < 4)
    throw std::invalid_argument("ReducedGrid: N >= 4 required");
  if (spec.rho_nodes < 8 || spec.s_nodes < 8)
    throw std::invalid_argument("ReducedGrid: at least 8 nodes per direction");
  if (!(spec.grading >= 1.0))
    throw std::invalid_argument("ReducedGrid: grading ratio >= 1 required");

  double max_r = 0.0;
  std::vector<double> radii;
  for (const Polygon& p : cfg.polygons) {
    radii.push_back(p.radius);
    max_r = std::max(max_r, p.radius);
  }
  const double r_trunc =
      spec.r_trunc > 0.0 ? spec.r_trunc : 40.0 * std::max(max_r, 1.0);
  const double s_trunc =
      spec.s_trunc > 0.0 ? spec.s_trunc : 40.0 * std::max(max_r, 1.0);
  if (r_trunc <= max_r)
    throw std::invalid_argument(
        "ReducedGrid: truncation radius must enclose all poles");

  ReducedGrid g;
  g.mode_ = cfg.mode;
  g.dim_ = cfg.dim;
  g.k_ = cfg.mode == SymmetryMode::Polygonal ? cfg.k : 1;
  g.sphere_ = unit_sphere_measure(cfg.dim - 3);

  g.rho_edges_ = build_edges(r_trunc, radii, spec.rho_nodes, spec.grading);
  g.s_edges_ = build_edges(s_trunc, {}, spec.s_nodes, spec.grading);
  for (size_t i = 0; i + 1 < g.rho_edges_.size(); ++i)
    g.rho_nodes_.push_back(0.5 * (g.rho_edges_[i] + g.rho_edges_[i + 1]));
  for (size_t l = 0; l + 1 < g.s_edges_.size(); ++l)
    g.s_nodes_.push_back(0.5 * (g.s_edges_[l] + g.s_edges_[l + 1]));

  if (cfg.mode == SymmetryMode::Polygonal) {
    const int nt = std::max(spec.theta_nodes, 1);
    g.theta_cell_ = kTwoPi / cfg.k / nt;
    for (int j = 0; j < nt; ++j)
      g.theta_nodes_.push_back((j + 0.5) * g.theta_cell_);
  } else {
    g.theta_cell_ = kTwoPi;
    g.theta_nodes_.push_back(0.0);
  }
  g.angular_total_ = kTwoPi;

  const int nw = cfg.dim - 2;
  for (size_t i = 0; i + 1 < g.rho_edges_.size(); ++i)
    g.rho_weight_.push_back(0.5 * (g.rho_edges_[i + 1] * g.rho_edges_[i + 1] -
                                   g.rho_edges_[i] * g.rho_edges_[i]));
  for (size_t l = 0; l + 1 < g.s_edges_.size(); ++l)
    g.s_weight_.push_back(
        (pow_int(g.s_edges_[l + 1], nw) - pow_int(g.s_edges_[l], nw)) / nw);

  g.assemble();
  return g;
}

void ReducedGrid::assemble() {
  const int nr = static_cast<int>(rho_nodes_.size());
  const int nt = static_cast<int>(theta_nodes_.size());
  const int ns = static_cast<int>(s_nodes_.size());
  const double theta_measure =
      mode_ == SymmetryMode::Polygonal ? k_ * theta_cell_ : kTwoPi;

  volume_.resize(size());
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int l = 0; l < ns; ++l)
        volume_[index(i, j, l)] =
            theta_measure * sphere_ * rho_weight_[i] * s_weight_[l];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(size()) * 8);
  auto add_face = [&](Eigen::Index a, Eigen::Index b, double kappa) {
    trips.emplace_back(a, a, kappa);
    trips.emplace_back(b, b, kappa);
    trips.emplace_back(a, b, -kappa);
    trips.emplace_back(b, a, -kappa);
  };
  auto add_boundary = [&](Eigen::Index a, double kappa) {
    trips.emplace_back(a, a, kappa);
  };

  // Radial faces: int u_rho^2 rho drho over a node-to-node strip is
  // approximated by (du/drho)^2 * (rho_{i+1}^2 - rho_i^2)/2.
  for (int i = 0; i + 1 <= nr; ++i) {
    const double lo = rho_nodes_[i];
    const double hi = i + 1 < nr ? rho_nodes_[i + 1] : rho_edges_.back();
    const double coef = 0.5 * (hi + lo) / (hi - lo);
    for (int j = 0; j < nt; ++j)
      for (int l = 0; l < ns; ++l) {
        const double kappa =
            theta_measure * sphere_ * s_weight_[l] * coef;
        if (i + 1 < nr)
          add_face(index(i, j, l), index(i + 1, j, l), kappa);
        else
          add_boundary(index(i, j, l), kappa);
      }
  }

  // Orthogonal-radius faces, with the s^{N-3} weight integrated exactly
  // between the nodes.
  const int nw = dim_ - 2;
  for (int l = 0; l + 1 <= ns; ++l) {
    const double lo = s_nodes_[l];
    const double hi = l + 1 < ns ? s_nodes_[l + 1] : s_edges_.back();
    const double coef =
        (pow_int(hi, nw) - pow_int(lo, nw)) / nw / ((hi - lo) * (hi - lo));
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nt; ++j) {
        const double kappa =
            theta_measure * sphere_ * rho_weight_[i] * coef;
        if (l + 1 < ns)
          add_face(index(i, j, l), index(i, j, l + 1), kappa);
        else
          add_boundary(index(i, j, l), kappa);
      }
  }

  // Sector faces (periodic): int rho^{-1} u_theta^2 drho dtheta; the
  // 1/rho weight integrates to log(edge ratio) except in the innermost
  // cell, where the midpoint value keeps the coefficient finite.
  if (mode_ == SymmetryMode::Polygonal && nt >= 2) {
    for (int i = 0; i < nr; ++i) {
      const double lrho =
          i == 0 ? (rho_edges_[1] - rho_edges_[0]) / rho_nodes_[0]
                 : std::log(rho_edges_[i + 1] / rho_edges_[i]);
      for (int j = 0; j < nt; ++j) {
        const int jn = (j + 1) % nt;
        for (int l = 0; l < ns; ++l) {
          const double kappa =
              k_ * sphere_ * s_weight_[l] * lrho / theta_cell_;
          add_face(index(i, j, l), index(i, jn, l), kappa);
        }
      }
    }
  }

  stiffness_.resize(size(), size());
  stiffness_.setFromTriplets(trips.begin(), trips.end());
  stiffness_.makeCompressed();

  build_lp_quadrature();
}

namespace {

// One node-to-node interval of the multilinear interpolant along a single
// coordinate. left/right < 0 encode the boundary extensions: a missing
// left node means the constant (zero-flux) extension of the first node
// down to the inner edge, a missing right node the linear decay to zero
// at the outer Dirichlet edge.
struct InterpSegment {
  double a = 0.0, b = 0.0;
  int left = -1, right = -1;

  // Up to two (node, coefficient) pairs of the interpolant at x.
  int coeffs(double x, int idx[2], double c[2]) const {
    const double t = (x - a) / (b - a);
    int n = 0;
    if (left >= 0 && right >= 0) {
      idx[n] = left; c[n] = 1.0 - t; ++n;
      idx[n] = right; c[n] = t; ++n;
    } else if (left < 0) {  // constant extension toward the inner edge
      idx[n] = right; c[n] = 1.0; ++n;
    } else {  // linear decay to the outer Dirichlet edge
      idx[n] = left; c[n] = 1.0 - t; ++n;
    }
    return n;
  }
};

std::vector<InterpSegment> line_segments(const std::vector<double>& nodes,
                                         double inner_edge, double outer_edge) {
  std::vector<InterpSegment> segs;
  segs.push_back({inner_edge, nodes.front(), -1, 0});
  for (size_t i = 0; i + 1 < nodes.size(); ++i)
    segs.push_back({nodes[i], nodes[i + 1], int(i), int(i + 1)});
  segs.push_back({nodes.back(), outer_edge, int(nodes.size()) - 1, -1});
  return segs;
}

constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt(3))

}  // namespace

void ReducedGrid::build_lp_quadrature() {
  const int nw = dim_ - 2;
  const bool theta_dim = mode_ == SymmetryMode::Polygonal &&
                         theta_nodes_.size() >= 2;
  const int nt = static_cast<int>(theta_nodes_.size());

  const auto rho_segs = line_segments(rho_nodes_, rho_edges_.front(),
                                      rho_edges_.back());
  const auto s_segs = line_segments(s_nodes_, s_edges_.front(),
                                    s_edges_.back());
  std::vector<InterpSegment> theta_segs;
  double prefactor = sphere_;
  if (theta_dim) {
    prefactor *= k_;
    for (int j = 0; j + 1 < nt; ++j)
      theta_segs.push_back({theta_nodes_[j], theta_nodes_[j + 1], j, j + 1});
    // Periodic wrap across the sector boundary.
    theta_segs.push_back({theta_nodes_[nt - 1],
                          theta_nodes_[0] + nt * theta_cell_, nt - 1, 0});
  } else {
    prefactor *= (mode_ == SymmetryMode::Polygonal ? k_ * theta_cell_ * nt
                                                   : kTwoPi);
    theta_segs.push_back({0.0, 1.0, 0, 0});  // dummy single point
  }
  const int theta_points = theta_dim ? 2 : 1;

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> weights;
  Eigen::Index row = 0;
  int ridx[2], tidx[2], sidx[2];
  double rc[2], tc[2], sc[2];
  for (const InterpSegment& rs : rho_segs) {
    const double rh = rs.b - rs.a, rm = 0.5 * (rs.a + rs.b);
    for (int gr = 0; gr < 2; ++gr) {
      const double x = rm + (gr == 0 ? -1.0 : 1.0) * kGaussOffset * rh;
      const int rn = rs.coeffs(x, ridx, rc);
      for (const InterpSegment& ts : theta_segs) {
        const double th = ts.b - ts.a, tm = 0.5 * (ts.a + ts.b);
        for (int gt = 0; gt < theta_points; ++gt) {
          const double y = tm + (gt == 0 ? -1.0 : 1.0) * kGaussOffset * th;
          int tn = 1;
          tc[0] = 1.0;
          tidx[0] = 0;
          if (theta_dim) tn = ts.coeffs(y, tidx, tc);
          for (const InterpSegment& ss : s_segs) {
            const double sh = ss.b - ss.a, sm = 0.5 * (ss.a + ss.b);
            for (int gs = 0; gs < 2; ++gs) {
              const double z = sm + (gs == 0 ? -1.0 : 1.0) * kGaussOffset * sh;
              const int sn = ss.coeffs(z, sidx, sc);
              double w = prefactor * x * pow_int(z, nw - 1) * 0.25 * rh * sh;
              if (theta_dim) w *= 0.5 * th;
              weights.push_back(w);
              for (int ar = 0; ar < rn; ++ar)
                for (int at = 0; at < tn; ++at)
                  for (int as = 0; as < sn; ++as)
                    trips.emplace_back(row,
                                       index(ridx[ar], tidx[at], sidx[as]),
                                       rc[ar] * tc[at] * sc[as]);
              ++row;
            }
          }
        }
      }
    }
  }
  lp_.sampler.resize(row, size());
  lp_.sampler.setFromTriplets(trips.begin(), trips.end());
  lp_.sampler.makeCompressed();
  lp_.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), row);
}

namespace {

// Reduced-coordinate cell for potential integration.
struct Cell {
  double ra, rb;  // rho bounds
  double ta, tb;  // theta bounds (equal in Circular mode)
  double sa, sb;  // s bounds
};

// Unweighted reduced measure of a cell (the angular and sphere factors
// are applied by the caller).
double cell_measure(const Cell& c, int nw) {
  const double mr = 0.5 * (c.rb * c.rb - c.ra * c.ra);
  const double ms = (pow_int(c.sb, nw) - pow_int(c.sa, nw)) / nw;
  const double mt = c.tb > c.ta ? (c.tb - c.ta) : 1.0;
  return mr * ms * mt;
}

using Kernel = std::function<double(double, double, double)>;
using Distance = std::function<double(double, double, double)>;

// Graded refinement toward the kernel's singular point. A cell is split
// while its largest Euclidean extent exceeds a fraction of the distance
// to the singular set; only that extent is bisected, so the tree stays
// narrow. The shell contributions near an inverse-square point decay
// geometrically with scale, so the depth cap bounds the truncation error.
double integrate_cell(const Kernel& kern, const Distance& dist, const Cell& c,
                      int nw, bool with_theta, int depth) {
  const double rc = 0.5 * (c.ra + c.rb);
  const double tc = 0.5 * (c.ta + c.tb);
  const double sc = 0.5 * (c.sa + c.sb);
  const double er = c.rb - c.ra;
  const double es = c.sb - c.sa;
  const double et = with_theta ? rc * (c.tb - c.ta) : 0.0;
  const double h = std::max({er, es, et});
  const double d = dist(rc, tc, sc);
  if (depth >= 100 || d > 4.0 * h)
    return kern(rc, tc, sc) * cell_measure(c, nw);
  double total = 0.0;
  for (int half = 0; half < 2; ++half) {
    Cell sub = c;
    if (er >= es && er >= et)
      (half == 0 ? sub.rb : sub.ra) = rc;
    else if (et >= es)
      (half == 0 ? sub.tb : sub.ta) = tc;
    else
      (half == 0 ? sub.sb : sub.sa) = sc;
    total += integrate_cell(kern, dist, sub, nw, with_theta, depth + 1);
  }
  return total;
}

double fold_angle(double x, double period) {
  double w = std::fmod(x, period);
  if (w < 0) w += period;
  return std::min(w, period - w);
}

}  // namespace

PotentialWeights assemble_potential(const ReducedGrid& g,
                                    const PoleConfiguration& cfg) {
  cfg.validate();
  if (cfg.mode != g.mode())
    throw std::logic_error("assemble_potential: grid/config mode mismatch");
  const auto [nr, nt, ns] = dims_of(g);
  const int nw = g.dim() - 2;
  const bool sector = g.mode() == SymmetryMode::Polygonal;
  const double prefactor =
      (sector ? cfg.k : kTwoPi) * unit_sphere_measure(g.dim() - 3);

  PotentialWeights w;
  w.central = Eigen::VectorXd::Zero(g.size());
  for (size_t l = 0; l < cfg.polygons.size(); ++l)
    w.rings.push_back(Eigen::VectorXd::Zero(g.size()));

  Kernel central_kern = [](double rho, double, double s) {
    return 1.0 / (rho * rho + s * s);
  };
  Distance central_dist = [](double rho, double, double s) {
    return std::hypot(rho, s);
  };

  std::vector<Kernel> ring_kerns;
  std::vector<Distance> ring_dists;
  for (const Polygon& poly : cfg.polygons) {
    const double r = poly.radius;
    if (sector) {
      const double phase = poly.phase;
      const int k = cfg.k;
      ring_kerns.push_back([r, phase, k](double rho, double theta, double s) {
        const double base = (rho - r) * (rho - r) + s * s;
        double sum = 0.0;
        for (int i = 1; i <= k; ++i) {
          const double half =
              0.5 * (theta - phase - kTwoPi * i / k);
          const double sh = std::sin(half);
          sum += 1.0 / (base + 4.0 * rho * r * sh * sh);
        }
        return sum;
      });
      ring_dists.push_back([r, phase, k](double rho, double theta, double s) {
        const double delta = fold_angle(theta - phase, kTwoPi / k);
        const double sh = std::sin(0.5 * delta);
        return std::sqrt((rho - r) * (rho - r) + 4.0 * rho * r * sh * sh +
                         s * s);
      });
    } else {
      ring_kerns.push_back([r](double rho, double, double s) {
        return circle_potential(r, rho, s);
      });
      ring_dists.push_back([r](double rho, double, double s) {
        return std::hypot(rho - r, s);
      });
    }
  }

  const auto& re = g.rho_edges();
  const auto& se = g.s_edges();
  const double tc = sector ? kTwoPi / cfg.k / nt : 0.0;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int l = 0; l < ns; ++l) {
        Cell c;
        c.ra = re[i];
        c.rb = re[i + 1];
        c.ta = sector ? j * tc : 0.0;
        c.tb = sector ? (j + 1) * tc : 0.0;
        c.sa = se[l];
        c.sb = se[l + 1];
        const Eigen::Index idx = g.index(i, j, l);
        // The central kernel is theta-independent (its singular set is the
        // axis rho = s = 0, a full theta line), so theta is never split.
        w.central[idx] = prefactor * integrate_cell(central_kern, central_dist,
                                                    c, nw, false, 0);
        for (size_t p = 0; p < ring_kerns.size(); ++p)
          w.rings[p][idx] = prefactor * integrate_cell(ring_kerns[p],
                                                       ring_dists[p], c, nw,
                                                       sector, 0);
      }
  return w;
}

Eigen::VectorXd combined_potential(const PotentialWeights& w,
                                   const PoleConfiguration& cfg) {
  // In Polygonal mode mass is per pole against the full pole-sum kernel;
  // in Circular mode it is the total ring mass against the ring average.
  Eigen::VectorXd v = cfg.lambda0 * w.central;
  for (size_t l = 0; l < w.rings.size(); ++l)
    v += cfg.polygons[l].mass * w.rings[l];
  return v;
}

double dirichlet_energy(const Field& u, const ReducedGrid& g) {
  if (u.size() != g.size())
    throw std::invalid_argument("dirichlet_energy: field/grid size mismatch");
  return u.values().dot(g.stiffness() * u.values());
}

namespace {

std::size_t config_hash(const PoleConfiguration& cfg) {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h ^= bits;
    h *= 1099511628211ull;
  };
  mix(static_cast<double>(cfg.dim));
  mix(cfg.lambda0);
  mix(static_cast<double>(static_cast<int>(cfg.mode)));
  mix(static_cast<double>(cfg.k));
  for (const Polygon& p : cfg.polygons) {
    mix(p.radius);
    mix(p.mass);
    mix(p.phase);
  }
  return h;
}

EnergyBreakdown compute_breakdown(const Field& u, const ReducedGrid& g,
                                  const PoleConfiguration& cfg,
                                  const PotentialWeights& w) {
  if (u.size() != g.size())
    throw std::invalid_argument("rayleigh_quotient: field/grid size mismatch");
  const Eigen::VectorXd& v = u.values();
  const Eigen::ArrayXd v2 = v.array().square();
  EnergyBreakdown eb;
  eb.dirichlet = v.dot(g.stiffness() * v);
  eb.hardy_integral = (w.central.array() * v2).sum();
  eb.central = cfg.lambda0 * eb.hardy_integral;
  for (size_t l = 0; l < w.rings.size(); ++l)
    eb.per_ring.push_back(cfg.polygons[l].mass *
                          (w.rings[l].array() * v2).sum());
  const double p = 2.0 * g.dim() / (g.dim() - 2.0);
  eb.lp_integral = g.lp_quadrature().integral(v, p);
  if (!(eb.lp_integral > 0.0))
    throw std::invalid_argument("rayleigh_quotient: zero field");
  eb.lp_norm = std::pow(eb.lp_integral, 2.0 / p);
  double potential = eb.central;
  for (double t : eb.per_ring) potential += t;
  eb.quotient = (eb.dirichlet - potential) / eb.lp_norm;
  return eb;
}

}  // namespace

struct Field::Cache {
  std::uint64_t version = 0;
  const ReducedGrid* grid = nullptr;
  std::size_t cfg_key = 0;
  EnergyBreakdown breakdown;
};

struct FieldCacheAccess {
  static std::shared_ptr<Field::Cache>& cache(const Field& f) {
    return f.cache_;
  }
  static std::shared_ptr<Field::Cache> make() {
    return std::make_shared<Field::Cache>();
  }
};

EnergyBreakdown rayleigh_quotient(const Field& u, const ReducedGrid& g,
                                  const PoleConfiguration& cfg,
                                  const PotentialWeights& w) {
  const std::size_t key = config_hash(cfg);
  auto& cache = FieldCacheAccess::cache(u);
  if (cache && cache->version == u.version() && cache->grid == &g &&
      cache->cfg_key == key)
    return cache->breakdown;
  EnergyBreakdown eb = compute_breakdown(u, g, cfg, w);
  cache = FieldCacheAccess::make();
  cache->version = u.version();
  cache->grid = &g;
  cache->cfg_key = key;
  cache->breakdown = eb;
  return eb;
}

EnergyBreakdown rayleigh_quotient(const Field& u, const ReducedGrid& g,
                                  const PoleConfiguration& cfg) {
  return rayleigh_quotient(u, g, cfg, assemble_potential(g, cfg));
}

Field sample_closed_form(const ReducedGrid& g, const PoleConfiguration& cfg,
                         const RadialProfile& profile,
                         std::optional<int> pole_index) {
  const auto [nr, nt, ns] = dims_of(g);
  Eigen::VectorXd v(g.size());
  if (!pole_index) {
    for (int i = 0; i < nr; ++i)
      for (int l = 0; l < ns; ++l) {
        const double t = std::hypot(g.rho_nodes()[i], g.s_nodes()[l]);
        const double val = profile.value(t);
        for (int j = 0; j < nt; ++j) v[g.index(i, j, l)] = val;
      }
    return Field(std::move(v));
  }
  if (g.mode() != SymmetryMode::Polygonal)
    throw std::logic_error(
        "sample_closed_form: pole-centered sampling needs a sector grid");
  const int ell = *pole_index;
  if (ell < 0 || ell >= static_cast<int>(cfg.polygons.size()))
    throw std::out_of_range("sample_closed_form: polygon index");
  const double r = cfg.polygons[ell].radius;
  const double phase = cfg.polygons[ell].phase;
  for (int i = 0; i < nr; ++i) {
    const double rho = g.rho_nodes()[i];
    const double base0 = (rho - r) * (rho - r);
    for (int j = 0; j < nt; ++j) {
      const double theta = g.theta_nodes()[j];
      for (int l = 0; l < ns; ++l) {
        const double s = g.s_nodes()[l];
        double sum = 0.0;
        for (int q = 1; q <= cfg.k; ++q) {
          const double half =
              0.5 * (theta - phase - kTwoPi * q / cfg.k);
          const double sh = std::sin(half);
          const double d = std::sqrt(base0 + 4.0 * rho * r * sh * sh + s * s);
          sum += profile.value(d);
        }
        v[g.index(i, j, l)] = sum;
      }
    }
  }
  return Field(std::move(v));
}

void write_field_csv(std::ostream& out, const Field& u,
                     const ReducedGrid& g) {
  const auto [nr, nt, ns] = dims_of(g);
  const bool sector = g.mode() == SymmetryMode::Polygonal;
  out << (sector ? "rho,theta,s,value\n" : "rho,s,value\n");
  char buf[128];
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int l = 0; l < ns; ++l) {
        if (sector)
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n",
                        g.rho_nodes()[i], g.theta_nodes()[j], g.s_nodes()[l],
                        u.values()[g.index(i, j, l)]);
        else
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n",
                        g.rho_nodes()[i], g.s_nodes()[l],
                        u.values()[g.index(i, j, l)]);
        out << buf;
      }
}

Field read_field_csv(std::istream& in, const ReducedGrid& g) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("read_field_csv: empty stream");
  Eigen::VectorXd v(g.size());
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.find_last_of(',');
    if (pos == std::string::npos)
      throw std::invalid_argument("read_field_csv: malformed row");
    if (row >= g.size())
      throw std::invalid_argument("read_field_csv: too many rows");
    v[row++] = std::stod(line.substr(pos + 1));
  }
  if (row != g.size())
    throw std::invalid_argument("read_field_csv: row count mismatch");
  return Field(std::move(v));
}

}  // namespace mps
