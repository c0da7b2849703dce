#pragma once

#include <cmath>

namespace mps {

/// Dimension and central mass of the one-pole Hardy problem. Valid only
/// for N >= 3 and lambda strictly below the Hardy threshold (N-2)^2/4.
class HardyParameter {
 public:
  HardyParameter(int dim, double lambda);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  double hardy_threshold() const;  // (N-2)^2/4
  double nu() const;               // (1 - 4*lambda/(N-2)^2)^{1/2}
  double critical_exponent() const;  // 2* = 2N/(N-2)

 private:
  int dim_;
  double lambda_;
};

double nu_lambda(const HardyParameter& p);

/// Ratio S(lambda)/S of the one-pole minimum level to the Sobolev
/// constant: (1 - 4*lambda/(N-2)^2)^{(N-1)/N}. Defined for lambda >= 0
/// only; negative masses are rejected.
double level_ratio(const HardyParameter& p);

/// L^{2*} norm of the un-normalized radial solution at scale mu = 1,
/// by adaptive radial quadrature on (0, T] plus the analytic power tail.
double w_lp_norm(const HardyParameter& p);

/// Normalization constant alpha_{lambda,N} = (N(N-2)nu^2)^{(N-2)/4} / ||w||_{2*}.
double normalization_alpha(const HardyParameter& p);

/// Squared L^2 norm of the normalized profile at mu = 1 (finite only for
/// lambda < N(N-4)/4; rejected otherwise).
double z_l2_norm_sq(const HardyParameter& p);

enum class ProfileKind { W, Z };

/// Radial one-pole solution profile: un-normalized (W) or
/// L^{2*}-normalized (Z), at dilation scale mu.
class RadialProfile {
 public:
  RadialProfile(HardyParameter p, ProfileKind kind, double mu);

  double value(double t) const;       // profile at radius t > 0
  double derivative(double t) const;  // radial derivative at t > 0

  const HardyParameter& param() const { return param_; }
  ProfileKind kind() const { return kind_; }
  double mu() const { return mu_; }
  double alpha() const { return alpha_; }  // leading coefficient at mu = 1

 private:
  HardyParameter param_;
  ProfileKind kind_;
  double mu_;
  double alpha_;
};

/// Power-law behavior of a one-pole solution at the singularity and at
/// infinity: u ~ kappa0 t^{e0} as t->0 and u ~ kappa_inf t^{e_inf} as
/// t->inf with e0 = -(N-2)(1-nu)/2 and e_inf = -(N-2)(1+nu)/2.
struct AsymptoticExpansion {
  double exponent_at_zero = 0.0;
  double exponent_at_infinity = 0.0;
  double kappa0 = 0.0;
  double kappa_inf = 0.0;
};

AsymptoticExpansion asymptotics_of(const HardyParameter& p);
AsymptoticExpansion asymptotics_of(const RadialProfile& profile);

}  // namespace mps
