#pragma once

#include <Eigen/Dense>

namespace acq::slm {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  double sigma2 = 0.0;  // rss / n
};

/// Least squares through a column-pivoting QR factorization. Throws
/// DataError when n <= k and NumericalError when X is rank deficient.
OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

/// Gaussian log-likelihood of an OLS fit at sigma2 = rss / n.
double ols_loglik(const OlsFit& fit);

}  // namespace acq::slm
