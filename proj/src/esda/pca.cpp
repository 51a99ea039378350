#include "acq/esda/pca.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "acq/error.hpp"

namespace acq::esda {

DeprivationIndex deprivation_pca(std::span<const NamedColumn> indicators) {
  if (indicators.empty()) throw ConfigError("deprivation index needs at least one indicator");
  const std::size_t units = indicators.front().values.size();
  for (const auto& c : indicators)
    if (c.values.size() != units) throw ConfigError("indicator " + c.name + " has a different length");

  std::vector<std::size_t> complete;
  for (std::size_t i = 0; i < units; ++i) {
    bool ok = true;
    for (const auto& c : indicators) ok = ok && c.values[i].has_value() && std::isfinite(*c.values[i]);
    if (ok) complete.push_back(i);
  }
  if (complete.size() < 5)
    throw DataError("deprivation index needs at least 5 units with every indicator, found " +
                    std::to_string(complete.size()));

  DeprivationIndex out;
  const auto n = static_cast<Eigen::Index>(complete.size());
  std::vector<Eigen::VectorXd> standardized;
  for (const auto& c : indicators) {
    Eigen::VectorXd v(n);
    for (Eigen::Index r = 0; r < n; ++r) v(r) = *c.values[complete[static_cast<std::size_t>(r)]];
    const double mean = v.mean();
    v.array() -= mean;
    const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      out.warnings.push_back("indicator " + c.name + " is constant and was dropped from the deprivation index");
      continue;
    }
    standardized.push_back(v / sd);
    out.indicators.push_back(c.name);
  }
  if (standardized.empty()) throw NumericalError("every deprivation indicator is constant");

  const auto k = static_cast<Eigen::Index>(standardized.size());
  Eigen::MatrixXd z(n, k);
  for (Eigen::Index j = 0; j < k; ++j) z.col(j) = standardized[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd corr = z.transpose() * z / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw NumericalError("deprivation eigendecomposition failed");
  Eigen::VectorXd v = solver.eigenvectors().col(k - 1);
  Eigen::Index lead = 0;
  while (lead + 1 < k && std::abs(v(lead)) < 1e-12) ++lead;
  if (v(lead) < 0.0) v = -v;

  out.eigenvalue = solver.eigenvalues()(k - 1);
  out.explained_share = out.eigenvalue / static_cast<double>(k);
  out.loadings.assign(v.data(), v.data() + k);
  out.fitted_units = complete.size();
  const Eigen::VectorXd scores = z * v;
  out.score.assign(units, std::nullopt);
  for (Eigen::Index r = 0; r < n; ++r) out.score[complete[static_cast<std::size_t>(r)]] = scores(r);
  return out;
}

std::vector<NamedColumn> deprivation_indicators(std::span<const ingest::BlockGroup> blockgroups) {
  std::vector<NamedColumn> cols{{"poverty", {}}, {"unemployment", {}}, {"no_diploma", {}}, {"snap", {}}};
  for (const auto& bg : blockgroups) {
    cols[0].values.push_back(bg.poverty);
    cols[1].values.push_back(bg.unemployment);
    cols[2].values.push_back(bg.no_diploma);
    cols[3].values.push_back(bg.snap);
  }
  return cols;
}

}  // namespace acq::esda
