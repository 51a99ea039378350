#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acq::pipeline {

/// Table of text cells under named columns, stored as CSV.
class Frame {
 public:
  Frame() = default;
  explicit Frame(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Throws ConfigError when the width does not match.
  void add(std::vector<std::string> row);
  /// Throws DataError for an unknown column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  const std::string& at(std::size_t row, std::string_view col) const;
  /// Empty cell -> nullopt; unparsable text throws DataError.
  std::optional<double> number(std::size_t row, std::string_view col) const;
  std::vector<std::optional<double>> numbers(std::string_view col) const;
  std::vector<std::string> strings(std::string_view col) const;

  void write_csv(std::ostream& out) const;
  static Frame read_csv(std::istream& in);
  void save(const std::filesystem::path& p) const;
  static Frame load(const std::filesystem::path& p);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Full-precision cell text; empty for a missing value.
std::string cell(double v);
std::string cell(std::optional<double> v);
std::string cell(int v);
std::string cell(std::size_t v);

}  // namespace acq::pipeline
