#include "acq/weights/contiguity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "acq/error.hpp"
#include "acq/geo/spatial_index.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::weights {

const char* to_string(Standardization s) {
  return s == Standardization::Binary ? "binary" : "row-standardized";
}

ContiguityWeights::ContiguityWeights(std::vector<std::string> ids,
                                     std::vector<std::vector<std::pair<std::size_t, double>>> rows,
                                     Standardization standardization, bool include_self)
    : ids_(std::move(ids)), standardization_(standardization), include_self_(include_self) {
  if (rows.size() != ids_.size()) throw ConfigError("weights rows do not match the id count");
  offsets_.reserve(rows.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto [j, v] = row[k];
      if (j >= ids_.size()) throw DataError("weights neighbor index out of range");
      if (k > 0 && row[k - 1].first == j) throw DataError("duplicate weights entry for unit " + ids_[i]);
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("weights must be finite and non-negative");
      if (j == i && !include_self_) throw DataError("self weight on unit " + ids_[i]);
      cols_.push_back(j);
      values_.push_back(v);
    }
    offsets_.push_back(cols_.size());
  }
}

std::span<const std::size_t> ContiguityWeights::neighbors(std::size_t i) const {
  return {cols_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> ContiguityWeights::row_weights(std::size_t i) const {
  return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::size_t ContiguityWeights::degree(std::size_t i) const {
  const auto nb = neighbors(i);
  return static_cast<std::size_t>(std::count_if(nb.begin(), nb.end(), [i](std::size_t j) { return j != i; }));
}

double ContiguityWeights::weight(std::size_t i, std::size_t j) const {
  const auto nb = neighbors(i);
  const auto it = std::lower_bound(nb.begin(), nb.end(), j);
  if (it == nb.end() || *it != j) return 0.0;
  return row_weights(i)[static_cast<std::size_t>(it - nb.begin())];
}

double ContiguityWeights::row_sum(std::size_t i) const {
  double s = 0.0;
  for (double v : row_weights(i)) s += v;
  return s;
}

double ContiguityWeights::s0() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

std::vector<std::size_t> ContiguityWeights::islands() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n(); ++i)
    if (degree(i) == 0) out.push_back(i);
  return out;
}

bool ContiguityWeights::symmetric(double tol) const {
  for (std::size_t i = 0; i < n(); ++i) {
    const auto nb = neighbors(i);
    const auto ws = row_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (std::abs(weight(nb[k], i) - ws[k]) > tol) return false;
  }
  return true;
}

std::vector<double> ContiguityWeights::lag(std::span<const double> x) const {
  if (x.size() != n()) throw ConfigError("lag input length does not match the weights");
  std::vector<double> out(n(), 0.0);
  for (std::size_t i = 0; i < n(); ++i) {
    const auto nb = neighbors(i);
    const auto ws = row_weights(i);
    double s = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) s += ws[k] * x[nb[k]];
    out[i] = s;
  }
  return out;
}

Eigen::SparseMatrix<double> ContiguityWeights::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz());
  for (std::size_t i = 0; i < n(); ++i) {
    const auto nb = neighbors(i);
    const auto ws = row_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(nb[k]), ws[k]);
  }
  const auto size = static_cast<Eigen::Index>(n());
  Eigen::SparseMatrix<double> m(size, size);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

namespace {

using Rows = std::vector<std::vector<std::pair<std::size_t, double>>>;

Rows rows_of(const ContiguityWeights& w) {
  Rows rows(w.n());
  for (std::size_t i = 0; i < w.n(); ++i) {
    const auto nb = w.neighbors(i);
    const auto ws = w.row_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) rows[i].emplace_back(nb[k], ws[k]);
  }
  return rows;
}

}  // namespace

ContiguityWeights build_queen(std::vector<std::string> ids, std::span<const geo::PolygonGeom> polygons,
                              double tol) {
  if (ids.size() != polygons.size()) throw ConfigError("one id is needed per polygon");
  if (polygons.size() < 2) throw DataError("contiguity weights need at least two polygons");
  if (!(tol >= 0.0)) throw ConfigError("contiguity tolerance must be non-negative");

  std::vector<geo::SpatialIndex::Item> items;
  items.reserve(polygons.size());
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    const auto b = polygons[i].bounds();
    items.push_back({static_cast<geo::SpatialIndex::Id>(i),
                     geo::PolygonGeom::rectangle(b.min_x, b.min_y, b.max_x, b.max_y)});
  }
  const geo::SpatialIndex index(std::move(items));

  Rows rows(polygons.size());
  for (std::size_t i = 0; i < polygons.size(); ++i) {
    for (auto other : index.query_box(polygons[i].bounds().inflated(tol))) {
      const auto j = static_cast<std::size_t>(other);
      if (j <= i) continue;
      if (geo::polygons_touch(polygons[i], polygons[j], tol)) {
        rows[i].emplace_back(j, 1.0);
        rows[j].emplace_back(i, 1.0);
      }
    }
  }
  return ContiguityWeights(std::move(ids), std::move(rows), Standardization::Binary, false);
}

ContiguityWeights build_queen(std::span<const ingest::BlockGroup> blockgroups, double tol) {
  std::vector<std::string> ids;
  std::vector<geo::PolygonGeom> polygons;
  ids.reserve(blockgroups.size());
  polygons.reserve(blockgroups.size());
  for (const auto& bg : blockgroups) {
    ids.push_back(bg.id);
    polygons.push_back(bg.geometry);
  }
  return build_queen(std::move(ids), polygons, tol);
}

ContiguityWeights row_standardize(const ContiguityWeights& w) {
  Rows rows = rows_of(w);
  for (auto& row : rows) {
    double s = 0.0;
    for (const auto& e : row) s += e.second;
    if (s > 0.0)
      for (auto& e : row) e.second /= s;
  }
  return ContiguityWeights(w.ids(), std::move(rows), Standardization::RowStandardized, w.include_self());
}

ContiguityWeights with_self(const ContiguityWeights& w) {
  Rows rows = rows_of(w);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    for (auto& e : row) e.second = 1.0;
    if (std::none_of(row.begin(), row.end(), [i](const auto& e) { return e.first == i; }))
      row.emplace_back(i, 1.0);
  }
  return ContiguityWeights(w.ids(), std::move(rows), Standardization::Binary, true);
}

ContiguityWeights subset(const ContiguityWeights& w, std::span<const std::size_t> keep) {
  std::vector<std::ptrdiff_t> position(w.n(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] >= w.n()) throw ConfigError("subset index out of range");
    if (position[keep[k]] >= 0) throw ConfigError("subset index repeated");
    position[keep[k]] = static_cast<std::ptrdiff_t>(k);
  }
  std::vector<std::string> ids;
  Rows rows(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    ids.push_back(w.ids()[keep[k]]);
    const auto nb = w.neighbors(keep[k]);
    const auto ws = w.row_weights(keep[k]);
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (position[nb[e]] >= 0) rows[k].emplace_back(static_cast<std::size_t>(position[nb[e]]), ws[e]);
  }
  return ContiguityWeights(std::move(ids), std::move(rows), w.standardization(), w.include_self());
}

IslandDrop drop_islands(const ContiguityWeights& w) {
  IslandDrop out;
  out.weights = w;
  out.kept.resize(w.n());
  for (std::size_t i = 0; i < w.n(); ++i) out.kept[i] = i;
  for (;;) {
    const auto isl = out.weights.islands();
    if (isl.empty()) break;
    std::vector<std::size_t> keep;
    std::vector<std::size_t> kept;
    std::size_t next = 0;
    for (std::size_t i = 0; i < out.weights.n(); ++i) {
      if (next < isl.size() && isl[next] == i) {
        out.dropped.push_back(out.weights.ids()[i]);
        ++next;
        continue;
      }
      keep.push_back(i);
      kept.push_back(out.kept[i]);
    }
    out.weights = subset(out.weights, keep);
    out.kept = std::move(kept);
  }
  // Row standardization depends on the surviving neighbors.
  if (w.standardization() == Standardization::RowStandardized) out.weights = row_standardize(out.weights);
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

std::vector<double> eigenvalues(const ContiguityWeights& w) {
  const std::size_t n = w.n();
  if (w.include_self()) throw ConfigError("eigenvalues need weights without self loops");
  if (const auto isl = w.islands(); !isl.empty())
    throw DataError("weights have " + std::to_string(isl.size()) + " island(s), first " +
                    w.ids()[isl.front()] + "; drop islands before estimation");
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : w.neighbors(i))
      if (w.weight(j, i) == 0.0) throw DataError("eigenvalues need a symmetric contiguity structure");
    inv_sqrt_degree[i] = 1.0 / std::sqrt(static_cast<double>(w.degree(i)));
  }
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : w.neighbors(i))
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inv_sqrt_degree[i] * inv_sqrt_degree[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("weights eigendecomposition failed");
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

EigenRange eigen_range(const ContiguityWeights& w) {
  const auto ev = eigenvalues(w);
  return {ev.front(), ev.back()};
}

void write_sparse(std::ostream& out, const ContiguityWeights& w) {
  out << w.n() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < w.n(); ++i) {
    const auto nb = w.neighbors(i);
    const auto ws = w.row_weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) out << w.ids()[i] << ' ' << w.ids()[nb[k]] << ' ' << ws[k] << '\n';
  }
}

ContiguityWeights read_sparse(std::istream& in, const std::vector<std::string>& ids,
                              Standardization standardization, bool include_self) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ids.size(); ++i) position.emplace(ids[i], i);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return DataError("weights file line " + std::to_string(line_no) + ": " + what);
  };
  std::optional<long long> n;
  while (!n && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    n = ingest::parse_int(line);
    if (!n) throw fail("expected the unit count");
  }
  if (!n) throw DataError("weights file is empty");
  if (*n != static_cast<long long>(ids.size()))
    throw DataError("weights file has " + std::to_string(*n) + " units, expected " + std::to_string(ids.size()));

  Rows rows(ids.size());
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b, v, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b >> v) || (fields >> extra)) throw fail("expected \"i j w\"");
    const auto ia = position.find(a), ib = position.find(b);
    if (ia == position.end()) throw fail("unknown id " + a);
    if (ib == position.end()) throw fail("unknown id " + b);
    const auto value = ingest::parse_double(v);
    if (!value) throw fail("bad weight " + v);
    rows[ia->second].emplace_back(ib->second, *value);
  }
  return ContiguityWeights(ids, std::move(rows), standardization, include_self);
}

}  // namespace acq::weights
