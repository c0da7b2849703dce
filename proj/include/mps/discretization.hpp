#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mps/closed_forms.hpp"
#include "mps/geometry.hpp"

namespace mps {

struct MeshSpec {
  int rho_nodes = 128;
  int theta_nodes = 32;  // per sector; ignored in Circular mode
  int s_nodes = 96;
  double r_trunc = 0.0;  // 0 selects 40 * max pole radius (40 if no poles)
  double s_trunc = 0.0;
  double grading = 1.08;  // geometric cell-width ratio toward singular loci
};

/// Non-lumped quadrature of the critical-power integral: the field is
/// interpolated multilinearly between nodes and |u|^p is sampled at two
/// Gauss points per node-to-node interval and direction, so
/// int |u|^p ~ sum_q weights_q |(sampler u)_q|^p. Unlike the lumped
/// midpoint rule this cannot overestimate the integral of a spike that is
/// peaked at the grid scale, which keeps unresolved concentration from
/// artificially lowering the discrete Rayleigh quotient.
struct LpQuadrature {
  Eigen::SparseMatrix<double> sampler;  // (#points) x (#nodes), entries >= 0
  Eigen::VectorXd weights;              // metric volume share per point

  double integral(const Eigen::VectorXd& u, double p) const {
    return (weights.array() * (sampler * u).array().abs().pow(p)).sum();
  }
};

/// Tensor grid in reduced coordinates. Nodes are cell midpoints, so they
/// never coincide with a pole, the origin, or the axes; the outer boundary
/// is a homogeneous Dirichlet truncation, the inner faces (rho = 0, s = 0)
/// carry zero flux because their transverse measure vanishes.
class ReducedGrid {
 public:
  static ReducedGrid build(const MeshSpec& spec, const PoleConfiguration& cfg);

  SymmetryMode mode() const { return mode_; }
  int dim() const { return dim_; }
  int k() const { return k_; }

  const std::vector<double>& rho_nodes() const { return rho_nodes_; }
  const std::vector<double>& theta_nodes() const { return theta_nodes_; }
  const std::vector<double>& s_nodes() const { return s_nodes_; }
  const std::vector<double>& rho_edges() const { return rho_edges_; }
  const std::vector<double>& s_edges() const { return s_edges_; }

  double r_trunc() const { return rho_edges_.back(); }
  double s_trunc() const { return s_edges_.back(); }

  Eigen::Index size() const;
  Eigen::Index index(int i, int j, int l) const;  // j ignored in Circular

  /// Quadrature weight of each node's dual cell; the sum equals the
  /// truncated-region volume exactly (telescoping edges).
  const Eigen::VectorXd& volume_weights() const { return volume_; }

  /// Stiffness of the Dirichlet form: energy(u) = u^T A u.
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// Gauss sampling rule for the critical-power integral.
  const LpQuadrature& lp_quadrature() const { return lp_; }

 private:
  SymmetryMode mode_ = SymmetryMode::Circular;
  int dim_ = 4;
  int k_ = 1;
  std::vector<double> rho_nodes_, theta_nodes_, s_nodes_;
  std::vector<double> rho_edges_, s_edges_;
  std::vector<double> rho_weight_, s_weight_;
  double theta_cell_ = 0.0;    // angular width of one theta cell
  double angular_total_ = 0.0; // k * sector width = 2*pi in both modes
  double sphere_ = 0.0;        // measure of the unit (N-3)-sphere
  Eigen::VectorXd volume_;
  Eigen::SparseMatrix<double> stiffness_;
  LpQuadrature lp_;

  void assemble();
  void build_lp_quadrature();
  friend struct GridAccess;
};

/// Grid field with cached energy breakdown; any write invalidates the cache.
class Field {
 public:
  Field() = default;
  explicit Field(Eigen::VectorXd values) : values_(std::move(values)) {}

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  void assign(Eigen::VectorXd values) {
    values_ = std::move(values);
    ++version_;
  }
  void set(Eigen::Index i, double v) {
    values_[i] = v;
    ++version_;
  }
  std::uint64_t version() const { return version_; }

 private:
  Eigen::VectorXd values_;
  std::uint64_t version_ = 0;

  struct Cache;
  mutable std::shared_ptr<Cache> cache_;
  friend struct FieldCacheAccess;
};

/// Per-node integrals of the unit-mass singular kernels over each dual
/// cell: the central inverse-square term and one kernel per ring (the
/// full pole sum in Polygonal mode, the ring average in Circular mode).
/// Cells near a singular point are integrated by recursive dyadic
/// subdivision; all other cells by the midpoint rule.
struct PotentialWeights {
  Eigen::VectorXd central;
  std::vector<Eigen::VectorXd> rings;
};

PotentialWeights assemble_potential(const ReducedGrid& g,
                                    const PoleConfiguration& cfg);

/// Mass-weighted combination lambda0 * central + sum_l mass_l * ring_l.
Eigen::VectorXd combined_potential(const PotentialWeights& w,
                                   const PoleConfiguration& cfg);

struct EnergyBreakdown {
  double dirichlet = 0.0;       // int |grad u|^2
  double central = 0.0;         // lambda0 * hardy_integral
  std::vector<double> per_ring; // mass_l * ring kernel integral
  double hardy_integral = 0.0;  // int u^2/|x|^2
  double lp_integral = 0.0;     // int |u|^{2*}
  double lp_norm = 0.0;         // lp_integral^{2/2*}
  double quotient = 0.0;        // (dirichlet - central - sum per_ring)/lp_norm
};

double dirichlet_energy(const Field& u, const ReducedGrid& g);

EnergyBreakdown rayleigh_quotient(const Field& u, const ReducedGrid& g,
                                  const PoleConfiguration& cfg);
EnergyBreakdown rayleigh_quotient(const Field& u, const ReducedGrid& g,
                                  const PoleConfiguration& cfg,
                                  const PotentialWeights& w);

/// Sample a radial profile on the grid: origin-centered when pole_index is
/// empty, otherwise the symmetrized sum of copies at every vertex of the
/// chosen polygon.
Field sample_closed_form(const ReducedGrid& g, const PoleConfiguration& cfg,
                         const RadialProfile& profile,
                         std::optional<int> pole_index);

/// CSV export/import: header rho,theta,s,value (theta omitted in Circular
/// mode), rows in (rho, theta, s) order.
void write_field_csv(std::ostream& out, const Field& u, const ReducedGrid& g);
Field read_field_csv(std::istream& in, const ReducedGrid& g);

}  // namespace mps
