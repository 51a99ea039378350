#include "acq/esda/spearman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "acq/error.hpp"

namespace acq::esda {

NamedColumn make_column(std::string name, std::span<const double> values) {
  NamedColumn c{std::move(name), {}};
  c.values.assign(values.begin(), values.end());
  return c;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("correlation inputs differ in length");
  if (x.size() < 2) throw DataError("correlation needs at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericalError("correlation is undefined for a constant variable");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("correlation inputs differ in length");
  if (x.size() < 3) throw DataError("Spearman correlation needs at least three pairs");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("correlation input has a non-finite value");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::optional<double> CorrelationMatrix::at(const std::string& a, const std::string& b) const {
  const auto ia = std::find(names.begin(), names.end(), a);
  const auto ib = std::find(names.begin(), names.end(), b);
  if (ia == names.end() || ib == names.end()) throw ConfigError("unknown correlation variable " + (ia == names.end() ? a : b));
  return r[static_cast<std::size_t>(ia - names.begin())][static_cast<std::size_t>(ib - names.begin())];
}

CorrelationMatrix spearman_matrix(std::span<const NamedColumn> columns) {
  const std::size_t k = columns.size();
  CorrelationMatrix m;
  for (const auto& c : columns) {
    if (c.values.size() != columns.front().values.size())
      throw ConfigError("correlation column " + c.name + " has a different length");
    m.names.push_back(c.name);
  }
  m.r.assign(k, std::vector<std::optional<double>>(k));
  m.pairs.assign(k, std::vector<int>(k, 0));
  std::vector<double> x, y;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      x.clear();
      y.clear();
      const auto& ca = columns[a].values;
      const auto& cb = columns[b].values;
      for (std::size_t i = 0; i < ca.size(); ++i)
        if (ca[i] && cb[i]) {
          x.push_back(*ca[i]);
          y.push_back(*cb[i]);
        }
      m.pairs[a][b] = m.pairs[b][a] = static_cast<int>(x.size());
      try {
        double v = spearman(x, y);
        if (a == b) v = 1.0;
        m.r[a][b] = m.r[b][a] = v;
      } catch (const Error&) {
      }
    }
  return m;
}

CorrelationTables correlation_tables(std::span<const NamedColumn> crime_all,
                                     std::span<const NamedColumn> crime_night,
                                     std::span<const NamedColumn> covariates) {
  if (crime_all.size() != crime_night.size()) throw ConfigError("night and all-day crime columns must pair up");
  std::vector<NamedColumn> all(crime_all.begin(), crime_all.end());
  std::vector<NamedColumn> night;
  for (std::size_t k = 0; k < crime_night.size(); ++k) night.push_back({crime_all[k].name, crime_night[k].values});
  all.insert(all.end(), covariates.begin(), covariates.end());
  night.insert(night.end(), covariates.begin(), covariates.end());

  CorrelationTables t{spearman_matrix(all), spearman_matrix(night), {}};
  t.diff = t.all;
  for (std::size_t a = 0; a < t.diff.names.size(); ++a)
    for (std::size_t b = 0; b < t.diff.names.size(); ++b) {
      const auto& va = t.all.r[a][b];
      const auto& vn = t.night.r[a][b];
      t.diff.r[a][b] = (va && vn) ? std::optional<double>(*vn - *va) : std::nullopt;
      t.diff.pairs[a][b] = std::min(t.all.pairs[a][b], t.night.pairs[a][b]);
    }
  return t;
}

}  // namespace acq::esda
