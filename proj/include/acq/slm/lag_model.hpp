#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "acq/esda/spearman.hpp"
#include "acq/ingest/crime.hpp"
#include "acq/ingest/rates.hpp"
#include "acq/slm/ols.hpp"
#include "acq/weights/contiguity.hpp"

namespace acq::slm {

/// Regressors in model order, after the constant.
inline const std::vector<std::string> kRegressors{"liqdens",     "percrent", "percwhite", "percvac",
                                                  "deprivation", "popdens",  "qmiparc"};

struct DesignMatrix {
  std::string response;
  std::vector<std::string> ids;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> terms;  // one name per column of X
};

/// Adds a leading "constant" column. Every value must be present.
DesignMatrix make_design(std::string response, std::vector<std::string> ids, std::span<const double> y,
                         std::span<const esda::NamedColumn> covariates);

struct Estimate {
  std::string term;
  double value = 0.0;
  std::optional<double> se{};
  std::optional<double> z{};
  std::optional<double> p{};  // two-sided normal

  bool significant(double alpha = 0.05) const { return p && *p < alpha; }
};

struct LagModelFit {
  std::string response;
  Estimate rho{"rho"};
  std::vector<Estimate> beta;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double pseudo_r2 = 0.0;
  double aic = 0.0;
  int n = 0;
  int k = 0;  // betas plus rho
  std::vector<double> fitted;  // (I - rho W)^-1 X beta
  std::vector<std::string> warnings;
};

/// Pieces of the concentrated likelihood: residuals of y and of Wy on X.
struct Concentration {
  Eigen::VectorXd e0;
  Eigen::VectorXd eL;
  Eigen::VectorXd beta_o;
  Eigen::VectorXd beta_l;
  Eigen::VectorXd wy;
};

/// Maximum-likelihood spatial lag estimation sharing one eigendecomposition
/// of W across fits. The weights are row-standardized on construction.
class SpatialLagEstimator {
 public:
  explicit SpatialLagEstimator(const weights::ContiguityWeights& w);

  std::size_t n() const { return w_.n(); }
  /// True when W has no links; fits then reduce to OLS with rho = 0.
  bool degenerate() const { return w_.nnz() == 0; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// Open interval of admissible rho, shrunk by 1e-6 at both ends.
  std::pair<double, double> rho_domain() const { return {rho_lo_, rho_hi_}; }

  Concentration concentrate(const DesignMatrix& dm) const;
  /// sum_i ln(1 - rho lambda_i)
  double log_det(double rho) const;
  double concentrated_loglik(double rho, const Concentration& c) const;
  /// d/drho of the concentrated log-likelihood.
  double concentrated_score(double rho, const Concentration& c) const;
  double full_loglik(const DesignMatrix& dm, double rho, const Eigen::VectorXd& beta, double sigma2) const;

  LagModelFit fit(const DesignMatrix& dm) const;

 private:
  void check_design(const DesignMatrix& dm) const;
  double maximize(const Concentration& c) const;

  weights::ContiguityWeights w_;
  Eigen::SparseMatrix<double> wmat_;
  std::vector<double> eigenvalues_;
  double rho_lo_ = 0.0;
  double rho_hi_ = 0.0;
};

/// One-shot convenience for a single design.
LagModelFit fit_spatial_lag(const DesignMatrix& dm, const weights::ContiguityWeights& w);

struct ResponseColumn {
  ingest::CrimeType type = ingest::CrimeType::Burglary;
  ingest::Window window = ingest::Window::All;
  std::vector<std::optional<double>> values;
};

struct RegressionCell {
  ingest::CrimeType type = ingest::CrimeType::Burglary;
  ingest::Window window = ingest::Window::All;
  std::optional<LagModelFit> fit;
  std::string error;  // set when fit is empty
};

struct RegressionTable {
  std::vector<RegressionCell> cells;
  std::vector<std::string> ids;              // units used by every cell
  std::vector<std::string> incomplete;       // dropped for missing values
  std::vector<std::string> dropped_islands;  // dropped for lacking neighbors
};

/// Fits every response over the units complete in all responses and
/// covariates. `binary` holds contiguity over all units in `ids` order.
/// Islands in the complete-case set throw DataError unless `drop_islands`.
/// Errors in one cell leave the others intact.
RegressionTable fit_all(std::span<const ResponseColumn> responses, std::span<const esda::NamedColumn> covariates,
                        const weights::ContiguityWeights& binary, bool drop_islands = false);

}  // namespace acq::slm
