#pragma once

#include <Eigen/Dense>

namespace mps {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // max |y - (slope*x + intercept)|
  double rms_residual = 0.0;
};

/// Least-squares straight line through (x_i, y_i).
LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Power-law fit y = c * x^p via regression of log y against log x.
/// Requires strictly positive data.
LineFit fit_loglog(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace mps
