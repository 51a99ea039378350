#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acq/weights/contiguity.hpp"

namespace acq::testing {

using Rows = std::vector<std::vector<std::pair<std::size_t, double>>>;

inline std::vector<std::string> unit_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "u%05zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

inline weights::ContiguityWeights from_edges(std::size_t n,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Rows rows(n);
  for (auto [a, b] : edges) {
    rows[a].emplace_back(b, 1.0);
    rows[b].emplace_back(a, 1.0);
  }
  return weights::ContiguityWeights(unit_ids(n), rows, weights::Standardization::Binary, false);
}

/// Binary Queen lattice on a rows x cols grid, row-major units.
inline weights::ContiguityWeights queen_lattice(int rows, int cols) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (auto [dr, dc] : {std::pair{0, 1}, std::pair{1, -1}, std::pair{1, 0}, std::pair{1, 1}}) {
        const int rr = r + dr, cc = c + dc;
        if (rr < rows && cc >= 0 && cc < cols)
          edges.emplace_back(static_cast<std::size_t>(r * cols + c), static_cast<std::size_t>(rr * cols + cc));
      }
  return from_edges(static_cast<std::size_t>(rows * cols), edges);
}

inline weights::ContiguityWeights complete_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return from_edges(n, edges);
}

/// Random connected graph: a random spanning tree plus extra edges.
inline weights::ContiguityWeights random_connected(std::mt19937_64& rng, std::size_t n, std::size_t extra) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  const std::size_t max_edges = n * (n - 1) / 2;
  while (edges.size() < std::min(n - 1 + extra, max_edges)) {
    const auto a = any(rng), b = any(rng);
    if (a != b) edges.emplace(std::min(a, b), std::max(a, b));
  }
  return from_edges(n, {edges.begin(), edges.end()});
}

inline std::vector<double> normal_draws(std::mt19937_64& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = z(rng);
  return x;
}

inline Eigen::MatrixXd dense(const weights::ContiguityWeights& w) {
  const auto n = static_cast<Eigen::Index>(w.n());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < w.n(); ++i) {
    const auto nb = w.neighbors(i);
    const auto ws = w.row_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb[k])) = ws[k];
  }
  return m;
}

/// Moran's I evaluated as the printed double sum.
inline double moran_double_sum(const std::vector<double>& x, const weights::ContiguityWeights& w) {
  const auto m = dense(w);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v / n;
  double s0 = 0.0, num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wij = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      s0 += wij;
      num += wij * (x[i] - mean) * (x[j] - mean);
    }
  }
  return n / s0 * num / den;
}

/// G*_i evaluated term by term with s_x = sqrt(sum x^2 / n - mean^2).
inline std::vector<double> gstar_direct(const std::vector<double>& x, const weights::ContiguityWeights& w) {
  const auto m = dense(w);
  const double n = static_cast<double>(x.size());
  double sum = 0.0, sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double s = std::sqrt(sum_sq / n - mean * mean);
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double wx = 0.0, ws = 0.0, ws2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double wij = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      wx += wij * x[j];
      ws += wij;
      ws2 += wij * wij;
    }
    out.push_back((wx - mean * ws) / (s * std::sqrt((n * ws2 - ws * ws) / (n - 1))));
  }
  return out;
}

/// Ranks by counting, then Pearson.
inline double spearman_brute(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r;
    for (double a : v) {
      double less = 0, equal = 0;
      for (double b : v) {
        less += b < a;
        equal += b == a;
      }
      r.push_back(less + (equal + 1) / 2);
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// ln|det(I - rho W)| from a dense LU factorization.
inline double dense_log_det(const Eigen::MatrixXd& w, double rho) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(w.rows(), w.cols()) - rho * w;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd& u = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) s += std::log(std::abs(u(i, i)));
  return s;
}

}  // namespace acq::testing
