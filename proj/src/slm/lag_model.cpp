#include "acq/slm/lag_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "acq/error.hpp"

namespace acq::slm {

namespace {

constexpr double kDomainMargin = 1e-6;
constexpr int kScanPoints = 1000;
constexpr double kGoldenWidth = 1e-8;
constexpr double kFdStep = 1e-4;

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

void fill_inference(Estimate& e, std::optional<double> variance) {
  if (!variance || !(*variance > 0.0)) return;
  e.se = std::sqrt(*variance);
  e.z = e.value / *e.se;
  e.p = two_sided_p(*e.z);
}

// Central finite-difference Hessian.
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& step) {
  const Eigen::Index k = theta.size();
  Eigen::MatrixXd h(k, k);
  const double f0 = f(theta);
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd t = theta;
    t(i) = theta(i) + step(i);
    const double fp = f(t);
    t(i) = theta(i) - step(i);
    const double fm = f(t);
    h(i, i) = (fp - 2.0 * f0 + fm) / (step(i) * step(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        Eigen::VectorXd u = theta;
        u(i) += si * step(i);
        u(j) += sj * step(j);
        return f(u);
      };
      h(i, j) = h(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * step(i) * step(j));
    }
  }
  return h;
}

// Covariance as the negated inverse Hessian; empty when the Hessian is not
// numerically negative definite.
std::optional<Eigen::MatrixXd> covariance_from(const Eigen::MatrixXd& hessian) {
  if (!hessian.allFinite()) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-hessian);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const auto& ev = solver.eigenvalues();
  if (!(ev.minCoeff() > 0.0) || ev.minCoeff() < 1e-13 * ev.maxCoeff()) return std::nullopt;
  const Eigen::MatrixXd& v = solver.eigenvectors();
  return Eigen::MatrixXd(v * ev.cwiseInverse().asDiagonal() * v.transpose());
}

double squared_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double saa = da.squaredNorm(), sbb = db.squaredNorm();
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  const double r = da.dot(db) / std::sqrt(saa * sbb);
  return r * r;
}

}  // namespace

DesignMatrix make_design(std::string response, std::vector<std::string> ids, std::span<const double> y,
                         std::span<const esda::NamedColumn> covariates) {
  const std::size_t n = y.size();
  if (ids.size() != n) throw ConfigError("design ids do not match the response length");
  DesignMatrix dm;
  dm.response = std::move(response);
  dm.ids = std::move(ids);
  dm.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  dm.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(covariates.size() + 1));
  dm.X.col(0).setOnes();
  dm.terms.push_back("constant");
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    const auto& c = covariates[j];
    if (c.values.size() != n) throw ConfigError("covariate " + c.name + " does not match the response length");
    for (std::size_t i = 0; i < n; ++i) {
      if (!c.values[i]) throw DataError("covariate " + c.name + " is missing for unit " + dm.ids[i]);
      dm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = *c.values[i];
    }
    dm.terms.push_back(c.name);
  }
  return dm;
}

SpatialLagEstimator::SpatialLagEstimator(const weights::ContiguityWeights& w) {
  if (w.include_self()) throw ConfigError("spatial lag weights must not include self links");
  w_ = weights::row_standardize(w);
  wmat_ = w_.to_sparse();
  if (degenerate()) {
    eigenvalues_.assign(w_.n(), 0.0);
    rho_lo_ = -1.0 + kDomainMargin;
    rho_hi_ = 1.0 - kDomainMargin;
    return;
  }
  eigenvalues_ = weights::eigenvalues(w_);
  rho_lo_ = 1.0 / eigenvalues_.front() + kDomainMargin;
  rho_hi_ = 1.0 / eigenvalues_.back() - kDomainMargin;
}

void SpatialLagEstimator::check_design(const DesignMatrix& dm) const {
  const auto n = static_cast<Eigen::Index>(w_.n());
  if (dm.y.size() != n || dm.X.rows() != n)
    throw ConfigError("design for " + dm.response + " has " + std::to_string(dm.y.size()) + " units, weights have " +
                      std::to_string(n));
  if (dm.ids.size() == w_.n() && dm.ids != w_.ids())
    throw ConfigError("design units for " + dm.response + " are not in weights order");
  if (n <= dm.X.cols() + 2)
    throw DataError("spatial lag fit for " + dm.response + " needs more than " + std::to_string(dm.X.cols() + 2) +
                    " units");
  if (!dm.y.allFinite()) throw DataError("response " + dm.response + " has a non-finite value");
  if (dm.y.maxCoeff() == dm.y.minCoeff())
    throw NumericalError("response " + dm.response + " is constant");
}

Concentration SpatialLagEstimator::concentrate(const DesignMatrix& dm) const {
  Concentration c;
  c.wy = wmat_ * dm.y;
  const auto fo = ols_fit(dm.y, dm.X);
  const auto fl = ols_fit(c.wy, dm.X);
  c.e0 = fo.residuals;
  c.eL = fl.residuals;
  c.beta_o = fo.beta;
  c.beta_l = fl.beta;
  return c;
}

double SpatialLagEstimator::log_det(double rho) const {
  double s = 0.0;
  for (double l : eigenvalues_) s += std::log1p(-rho * l);
  return s;
}

double SpatialLagEstimator::concentrated_loglik(double rho, const Concentration& c) const {
  if (!(rho >= rho_lo_ && rho <= rho_hi_)) {
    std::ostringstream msg;
    msg << "rho " << rho << " is outside (" << rho_lo_ << ", " << rho_hi_ << ")";
    throw ConfigError(msg.str());
  }
  const double n = static_cast<double>(c.e0.size());
  const double sigma2 = (c.e0 - rho * c.eL).squaredNorm() / n;
  return -n / 2.0 * (std::log(2.0 * std::numbers::pi) + 1.0) - n / 2.0 * std::log(sigma2) + log_det(rho);
}

double SpatialLagEstimator::concentrated_score(double rho, const Concentration& c) const {
  const double n = static_cast<double>(c.e0.size());
  const Eigen::VectorXd e = c.e0 - rho * c.eL;
  double d = n * c.eL.dot(e) / e.squaredNorm();
  for (double l : eigenvalues_) d -= l / (1.0 - rho * l);
  return d;
}

double SpatialLagEstimator::full_loglik(const DesignMatrix& dm, double rho, const Eigen::VectorXd& beta,
                                        double sigma2) const {
  if (!(sigma2 > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(dm.y.size());
  const Eigen::VectorXd e = dm.y - rho * (wmat_ * dm.y) - dm.X * beta;
  return -n / 2.0 * std::log(2.0 * std::numbers::pi * sigma2) + log_det(rho) - e.squaredNorm() / (2.0 * sigma2);
}

double SpatialLagEstimator::maximize(const Concentration& c) const {
  std::vector<double> grid(kScanPoints), value(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i) {
    grid[static_cast<std::size_t>(i)] = rho_lo_ + (rho_hi_ - rho_lo_) * i / (kScanPoints - 1);
    value[static_cast<std::size_t>(i)] = concentrated_loglik(grid[static_cast<std::size_t>(i)], c);
  }
  const std::size_t last = grid.size() - 1;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i <= last; ++i) {
    const bool left = i == 0 || value[i] >= value[i - 1];
    const bool right = i == last || value[i] > value[i + 1];
    if (left && right) peaks.push_back(i);
  }
  // Merge peaks separated by dips at rounding level.
  const double best_value = *std::max_element(value.begin(), value.end());
  const double noise = 1e-9 * (1.0 + std::abs(best_value));
  std::vector<std::size_t> distinct{peaks.front()};
  for (std::size_t k = 1; k < peaks.size(); ++k) {
    const std::size_t a = distinct.back(), b = peaks[k];
    const double valley = *std::min_element(value.begin() + static_cast<std::ptrdiff_t>(a),
                                            value.begin() + static_cast<std::ptrdiff_t>(b) + 1);
    if (std::min(value[a], value[b]) - valley <= noise) {
      if (value[b] > value[a]) distinct.back() = b;
    } else {
      distinct.push_back(b);
    }
  }
  if (distinct.size() > 1) {
    std::ostringstream msg;
    msg << "concentrated log-likelihood has " << distinct.size() << " local maxima on (" << rho_lo_ << ", "
        << rho_hi_ << "):";
    for (auto i : distinct) msg << " rho=" << grid[i] << " loglik=" << value[i] << ";";
    throw NumericalError(msg.str());
  }

  const std::size_t peak = distinct.front();
  double a = grid[peak == 0 ? 0 : peak - 1];
  double b = grid[std::min(peak + 1, last)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = concentrated_loglik(x1, c), f2 = concentrated_loglik(x2, c);
  while (b - a > kGoldenWidth) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = concentrated_loglik(x2, c);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = concentrated_loglik(x1, c);
    }
  }
  double rho = (a + b) / 2.0;

  // Function values are flat near the optimum; the score locates it exactly.
  double lo = std::max(rho_lo_, a - kGoldenWidth), hi = std::min(rho_hi_, b + kGoldenWidth);
  double s_lo = concentrated_score(lo, c), s_hi = concentrated_score(hi, c);
  if (s_lo > 0.0 && s_hi < 0.0) {
    for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
         ++it) {
      const double mid = (lo + hi) / 2.0;
      const double s = concentrated_score(mid, c);
      if (s == 0.0) {
        lo = hi = mid;
        break;
      }
      (s > 0.0 ? lo : hi) = mid;
    }
    rho = (lo + hi) / 2.0;
  }
  return rho;
}

LagModelFit SpatialLagEstimator::fit(const DesignMatrix& dm) const {
  check_design(dm);
  const auto n = dm.y.size();
  const auto p = dm.X.cols();

  LagModelFit out;
  out.response = dm.response;
  out.n = static_cast<int>(n);
  out.k = static_cast<int>(p) + 1;

  double rho = 0.0;
  Eigen::VectorXd beta;
  if (degenerate()) {
    const auto ols = ols_fit(dm.y, dm.X);
    beta = ols.beta;
    out.sigma2 = ols.sigma2;
    out.loglik = ols_loglik(ols);
    out.warnings.push_back("weights have no links; fitted by least squares with rho fixed at 0");
  } else {
    const auto c = concentrate(dm);
    rho = maximize(c);
    beta = c.beta_o - rho * c.beta_l;
    out.sigma2 = (c.e0 - rho * c.eL).squaredNorm() / static_cast<double>(n);
    out.loglik = concentrated_loglik(rho, c);
  }
  out.rho.value = rho;
  for (Eigen::Index j = 0; j < p; ++j) out.beta.push_back({dm.terms[static_cast<std::size_t>(j)], beta(j)});

  // Parameters (rho, beta, sigma2); rho is held at 0 on the degenerate path.
  const Eigen::Index offset = degenerate() ? 0 : 1;
  Eigen::VectorXd theta(p + 1 + offset), step(p + 1 + offset);
  if (!degenerate()) {
    theta(0) = rho;
    step(0) = kFdStep * std::max(std::abs(rho), 1.0);
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const double col_ss = dm.X.col(j).squaredNorm();
    const double scale = std::sqrt(out.sigma2 * static_cast<double>(n) / std::max(col_ss, 1e-300));
    theta(offset + j) = beta(j);
    step(offset + j) = kFdStep * std::max(std::abs(beta(j)), scale);
  }
  theta(offset + p) = out.sigma2;
  step(offset + p) = kFdStep * out.sigma2;
  auto loglik = [&](const Eigen::VectorXd& t) {
    const double r = degenerate() ? 0.0 : t(0);
    if (!(r > rho_lo_ - kDomainMargin && r < rho_hi_ + kDomainMargin)) return -std::numeric_limits<double>::infinity();
    return full_loglik(dm, r, t.segment(offset, p), t(offset + p));
  };
  const auto cov = covariance_from(fd_hessian(loglik, theta, step));
  if (cov) {
    if (!degenerate()) fill_inference(out.rho, (*cov)(0, 0));
    for (Eigen::Index j = 0; j < p; ++j)
      fill_inference(out.beta[static_cast<std::size_t>(j)], (*cov)(offset + j, offset + j));
  } else {
    out.warnings.push_back("log-likelihood Hessian is not negative definite; standard errors omitted");
  }

  const Eigen::VectorXd xb = dm.X * beta;
  Eigen::VectorXd fitted = xb;
  if (!degenerate() && rho != 0.0) {
    Eigen::SparseMatrix<double> a(n, n);
    a.setIdentity();
    a -= rho * wmat_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("I - rho W could not be factorized");
    fitted = lu.solve(xb);
    if (lu.info() != Eigen::Success) throw NumericalError("I - rho W solve failed");
  }
  out.fitted.assign(fitted.data(), fitted.data() + n);
  out.pseudo_r2 = squared_correlation(dm.y, fitted);
  out.aic = 2.0 * out.k - 2.0 * out.loglik;
  return out;
}

LagModelFit fit_spatial_lag(const DesignMatrix& dm, const weights::ContiguityWeights& w) {
  return SpatialLagEstimator(w).fit(dm);
}

RegressionTable fit_all(std::span<const ResponseColumn> responses, std::span<const esda::NamedColumn> covariates,
                        const weights::ContiguityWeights& binary, bool drop_islands) {
  const std::size_t n = binary.n();
  for (const auto& r : responses)
    if (r.values.size() != n) throw ConfigError("response column does not match the weights");
  for (const auto& c : covariates)
    if (c.values.size() != n) throw ConfigError("covariate " + c.name + " does not match the weights");

  RegressionTable table;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    auto present = [i](const std::vector<std::optional<double>>& v) { return v[i] && std::isfinite(*v[i]); };
    bool ok = true;
    for (const auto& r : responses) ok = ok && present(r.values);
    for (const auto& c : covariates) ok = ok && present(c.values);
    if (ok)
      keep.push_back(i);
    else
      table.incomplete.push_back(binary.ids()[i]);
  }

  auto w = weights::subset(binary, keep);
  if (const auto isl = w.islands(); !isl.empty() && w.nnz() > 0) {
    if (!drop_islands)
      throw DataError(std::to_string(isl.size()) + " regression unit(s) have no neighbors, first " +
                      w.ids()[isl.front()] + "; enable island dropping to continue");
    auto dropped = weights::drop_islands(w);
    std::vector<std::size_t> kept;
    for (auto k : dropped.kept) kept.push_back(keep[k]);
    keep = std::move(kept);
    w = std::move(dropped.weights);
    table.dropped_islands = std::move(dropped.dropped);
  }
  table.ids = w.ids();
  const SpatialLagEstimator estimator(w);

  std::vector<esda::NamedColumn> cov_rows;
  for (const auto& c : covariates) {
    esda::NamedColumn sub{c.name, {}};
    for (auto i : keep) sub.values.push_back(c.values[i]);
    cov_rows.push_back(std::move(sub));
  }
  for (const auto& r : responses) {
    RegressionCell cell{r.type, r.window, std::nullopt, {}};
    try {
      std::vector<double> y;
      for (auto i : keep) y.push_back(*r.values[i]);
      const std::string name = std::string(ingest::short_code(r.type)) + "_" + std::string(ingest::to_string(r.window));
      cell.fit = estimator.fit(make_design(name, table.ids, y, cov_rows));
    } catch (const Error& e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

}  // namespace acq::slm
