#include "mps/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace mps {

LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two points");
  const auto n = x.size();
  Eigen::MatrixXd design(n, 2);
  design.col(0) = x;
  design.col(1).setOnes();
  Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  LineFit fit;
  fit.slope = coef[0];
  fit.intercept = coef[1];
  Eigen::VectorXd res = y - design * coef;
  fit.max_residual = res.cwiseAbs().maxCoeff();
  fit.rms_residual = std::sqrt(res.squaredNorm() / n);
  return fit;
}

LineFit fit_loglog(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if ((x.array() <= 0).any() || (y.array() <= 0).any())
    throw std::invalid_argument("fit_loglog: data must be positive");
  return fit_line(x.array().log().matrix(), y.array().log().matrix());
}

}  // namespace mps
