#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "acq/geo/geometry.hpp"
#include "acq/ingest/blockgroup.hpp"

namespace acq::weights {

enum class Standardization { Binary, RowStandardized };

const char* to_string(Standardization s);

/// Sparse spatial weights in compressed-row form. Row i lists the neighbors
/// of unit i in ascending index order.
class ContiguityWeights {
 public:
  ContiguityWeights() = default;
  /// `rows[i]` holds (neighbor index, weight) pairs; they are sorted here.
  ContiguityWeights(std::vector<std::string> ids,
                    std::vector<std::vector<std::pair<std::size_t, double>>> rows,
                    Standardization standardization, bool include_self);

  std::size_t n() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  Standardization standardization() const { return standardization_; }
  bool include_self() const { return include_self_; }

  std::span<const std::size_t> neighbors(std::size_t i) const;
  std::span<const double> row_weights(std::size_t i) const;
  /// Number of off-diagonal neighbors.
  std::size_t degree(std::size_t i) const;
  double weight(std::size_t i, std::size_t j) const;
  double row_sum(std::size_t i) const;
  /// Sum of all weights.
  double s0() const;
  std::size_t nnz() const { return cols_.size(); }

  /// Units without any off-diagonal neighbor, ascending.
  std::vector<std::size_t> islands() const;
  bool symmetric(double tol = 0.0) const;

  /// W x
  std::vector<double> lag(std::span<const double> x) const;
  Eigen::SparseMatrix<double> to_sparse() const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
  Standardization standardization_ = Standardization::Binary;
  bool include_self_ = false;
};

/// Queen contiguity: i and j are neighbors when their polygons touch within
/// `tol`, i != j. Binary weights without self loops.
ContiguityWeights build_queen(std::vector<std::string> ids, std::span<const geo::PolygonGeom> polygons,
                              double tol = 1e-6);
ContiguityWeights build_queen(std::span<const ingest::BlockGroup> blockgroups, double tol = 1e-6);

/// Island rows stay all zero.
ContiguityWeights row_standardize(const ContiguityWeights& w);
/// Binary weights with w_ii = 1 on every row.
ContiguityWeights with_self(const ContiguityWeights& w);
/// Restriction to the given unit indices (ascending), in that order.
ContiguityWeights subset(const ContiguityWeights& w, std::span<const std::size_t> keep);

struct IslandDrop {
  ContiguityWeights weights;
  std::vector<std::size_t> kept;     // original indices
  std::vector<std::string> dropped;  // ids
};

/// Removes islands repeatedly until none remain.
IslandDrop drop_islands(const ContiguityWeights& w);

/// Eigenvalues of the row-standardized form of `w`, ascending, computed on
/// the symmetric matrix D^-1/2 B D^-1/2. Requires a symmetric structure
/// without self loops or islands; throws DataError otherwise.
std::vector<double> eigenvalues(const ContiguityWeights& w);

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};

EigenRange eigen_range(const ContiguityWeights& w);

/// Sparse text format: a line holding n, then one "i j w" line per nonzero
/// with block-group ids.
void write_sparse(std::ostream& out, const ContiguityWeights& w);
/// `ids` fixes the unit order; every id in the file must be among them.
ContiguityWeights read_sparse(std::istream& in, const std::vector<std::string>& ids,
                              Standardization standardization = Standardization::Binary,
                              bool include_self = false);

}  // namespace acq::weights
