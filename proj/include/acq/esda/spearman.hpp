#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace acq::esda {

/// A per-unit variable with missing cells.
struct NamedColumn {
  std::string name;
  std::vector<std::optional<double>> values;
};

NamedColumn make_column(std::string name, std::span<const double> values);

/// 1-based ranks; ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Throws NumericalError when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks. Needs at least 3 pairs.
double spearman(std::span<const double> x, std::span<const double> y);

/// Square matrix of pairwise-complete Spearman correlations. Cells that
/// cannot be computed are missing.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> r;
  std::vector<std::vector<int>> pairs;  // complete pairs used per cell

  std::optional<double> at(const std::string& a, const std::string& b) const;
};

CorrelationMatrix spearman_matrix(std::span<const NamedColumn> columns);

struct CorrelationTables {
  CorrelationMatrix all;    // all-day crime columns followed by covariates
  CorrelationMatrix night;  // night crime columns followed by covariates
  CorrelationMatrix diff;   // night - all, cell by cell
};

/// `crime_night[k]` pairs with `crime_all[k]`; the night matrix keeps the
/// all-day names so the two align.
CorrelationTables correlation_tables(std::span<const NamedColumn> crime_all,
                                     std::span<const NamedColumn> crime_night,
                                     std::span<const NamedColumn> covariates);

}  // namespace acq::esda
