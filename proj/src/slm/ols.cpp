#include "acq/slm/ols.hpp"

#include <cmath>
#include <numbers>

#include "acq/error.hpp"

namespace acq::slm {

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  if (y.size() != X.rows()) throw ConfigError("response and design matrix differ in length");
  if (X.rows() <= X.cols())
    throw DataError("least squares needs more units (" + std::to_string(X.rows()) + ") than terms (" +
                    std::to_string(X.cols()) + ")");
  if (!y.allFinite() || !X.allFinite()) throw DataError("least squares input has a non-finite value");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols())
    throw NumericalError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                         std::to_string(X.cols()) + ")");
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  fit.sigma2 = fit.rss / static_cast<double>(y.size());
  return fit;
}

double ols_loglik(const OlsFit& fit) {
  const double n = static_cast<double>(fit.residuals.size());
  return -n / 2.0 * (std::log(2.0 * std::numbers::pi) + 1.0) - n / 2.0 * std::log(fit.sigma2);
}

}  // namespace acq::slm
